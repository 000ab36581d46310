// SPDX-License-Identifier: Apache-2.0

#include "focusagent/core_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>

#include "focusagent/error.hpp"
#include "text_util.hpp"

namespace focusagent {

namespace {

constexpr std::array<std::pair<UtteranceKind, std::string_view>, 7> kKindNames{{
    {UtteranceKind::stage_intro, "stage_intro"},
    {UtteranceKind::insight_question, "insight_question"},
    {UtteranceKind::inactive_prompt, "inactive_prompt"},
    {UtteranceKind::participant_response, "participant_response"},
    {UtteranceKind::human_response, "human_response"},
    {UtteranceKind::closing_question, "closing_question"},
    {UtteranceKind::reflection_summary, "reflection_summary"},
}};

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorKind::invalid_config, message);
}

void check_appendable(const Transcript& t, const Utterance& u) {
  const auto expected = static_cast<std::int64_t>(t.utterances.size());
  if (u.sequence != expected) {
    throw Error(ErrorKind::sequence_gap, "expected sequence " + std::to_string(expected) +
                                             ", got " + std::to_string(u.sequence));
  }
  const auto stage_count = static_cast<int>(t.plan.stages.size());
  if (u.stage_index < 0 || u.stage_index >= stage_count) {
    throw Error(ErrorKind::stage_out_of_range,
                "stage_index " + std::to_string(u.stage_index) + " outside plan of " +
                    std::to_string(stage_count) + " stages");
  }
  if (u.stage_index != current_stage_index(t)) {
    throw Error(ErrorKind::stage_out_of_range,
                "stage_index " + std::to_string(u.stage_index) + " but current stage is " +
                    std::to_string(current_stage_index(t)));
  }
  if (u.speaker.empty()) {
    throw Error(ErrorKind::transcript_invariant, "utterance without speaker");
  }
}

}  // namespace

std::string_view to_string(UtteranceKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<UtteranceKind> parse_utterance_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

bool is_moderator_question(UtteranceKind kind) {
  return kind == UtteranceKind::stage_intro || kind == UtteranceKind::insight_question ||
         kind == UtteranceKind::inactive_prompt || kind == UtteranceKind::closing_question;
}

bool is_participant_turn(UtteranceKind kind) {
  return kind == UtteranceKind::participant_response || kind == UtteranceKind::human_response;
}

int SpeakingStats::count(std::string_view persona) const {
  for (const auto& [id, n] : counts) {
    if (id == persona) return n;
  }
  return 0;
}

void validate(const Persona& p) {
  if (p.id.empty()) invalid("persona id must not be empty");
  if (p.id == kModeratorId) invalid("persona id '" + p.id + "' is reserved");
  if (p.name.empty()) invalid("persona " + p.id + " has an empty name");
  if (p.name.find_first_of("\r\n") != std::string::npos) {
    invalid("persona " + p.id + " name contains a line break");
  }
  // Redaction replaces names with "a participant"; a name equal to one of
  // those words would survive its own redaction.
  const std::string lowered = detail::ascii_lower(detail::trim(p.name));
  if (lowered == "a" || lowered == "participant" || lowered == "a participant") {
    invalid("persona " + p.id + " name collides with the anonymization placeholder");
  }
  if (p.age <= 0) invalid("persona " + p.id + " must have a positive age");
}

void validate(const SessionConfig& c) {
  if (detail::trim(c.topic).empty()) invalid("topic must not be empty");
  if (c.goals.empty()) invalid("at least one goal is required");
  if (!(c.total_minutes >= 5.0) || !std::isfinite(c.total_minutes)) {
    invalid("total_minutes must be at least 5");
  }
  if (c.personas.empty()) invalid("at least one persona is required");
  if (!(c.engagement_threshold >= 0.0 && c.engagement_threshold <= 10.0)) {
    invalid("engagement_threshold must lie in [0, 10]");
  }
  if (!(c.words_per_minute > 0.0) || !std::isfinite(c.words_per_minute)) {
    invalid("words_per_minute must be positive");
  }
  if (c.moderator_word_limit < 10) invalid("moderator_word_limit must be at least 10");
  if (c.stage_count_hint && *c.stage_count_hint <= 0) {
    invalid("stage_count_hint must be positive");
  }
  if (c.context_window <= 0) invalid("context_window must be positive");
  if (!(c.silence_seconds > 0.0)) invalid("silence_seconds must be positive");

  std::set<std::string> ids;
  for (const auto& p : c.personas) {
    validate(p);
    if (!ids.insert(p.id).second) invalid("duplicate persona id " + p.id);
  }
}

void validate(const DiscussionPlan& plan, double total_minutes) {
  if (plan.stages.empty()) throw Error(ErrorKind::plan_invalid, "plan has no stages");
  double sum = 0.0;
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const auto& s = plan.stages[i];
    if (s.index != static_cast<int>(i)) {
      throw Error(ErrorKind::plan_invalid, "stage indices must be consecutive from 0");
    }
    if (detail::trim(s.title).empty()) {
      throw Error(ErrorKind::plan_invalid, "stage " + std::to_string(i) + " has no title");
    }
    if (!(s.allocated_minutes > 0.0)) {
      throw Error(ErrorKind::plan_invalid,
                  "stage " + std::to_string(i) + " has a non-positive allocation");
    }
    sum += s.allocated_minutes;
  }
  if (std::abs(sum - total_minutes) > 1e-9) {
    throw Error(ErrorKind::plan_invalid, "stage allocations do not sum to total_minutes");
  }
}

void validate(const Transcript& transcript) {
  // Replaying through the append functions checks every invariant.
  Transcript replay{transcript.config_digest, transcript.plan, {}, {}};
  std::size_t next_summary = 0;
  for (const auto& u : transcript.utterances) {
    if (u.kind == UtteranceKind::reflection_summary) {
      if (next_summary >= transcript.summaries.size()) {
        throw Error(ErrorKind::transcript_invariant, "reflection without stage summary");
      }
      const auto& s = transcript.summaries[next_summary++];
      replay = append_reflection(std::move(replay), u, s.anonymized);
      if (replay.summaries.back() != s) {
        throw Error(ErrorKind::transcript_invariant, "stage summary does not mirror reflection");
      }
    } else {
      replay = append_utterance(std::move(replay), u);
    }
  }
  if (next_summary != transcript.summaries.size()) {
    throw Error(ErrorKind::transcript_invariant, "stage summary without reflection");
  }
}

std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (const char ch : text) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

double estimate_minutes(std::string_view text, double words_per_minute) {
  return static_cast<double>(word_count(text)) / words_per_minute;
}

std::vector<std::string> inactive_participants(const SpeakingStats& stats) {
  int most = 0;
  for (const auto& [id, n] : stats.counts) most = std::max(most, n);

  std::vector<std::string> inactive;
  for (const auto& [id, n] : stats.counts) {
    if (n == 0 || 3 * n <= most) inactive.push_back(id);
  }
  return inactive;
}

int current_stage_index(const Transcript& t) {
  const int stages = static_cast<int>(t.plan.stages.size());
  const int done = static_cast<int>(t.summaries.size());
  return std::min(done, std::max(stages - 1, 0));
}

bool all_stages_completed(const Transcript& t) {
  return !t.plan.stages.empty() && t.summaries.size() >= t.plan.stages.size();
}

Transcript append_utterance(Transcript transcript, Utterance utterance) {
  check_appendable(transcript, utterance);
  if (utterance.kind == UtteranceKind::reflection_summary) {
    throw Error(ErrorKind::transcript_invariant,
                "reflection utterances must be recorded with their stage summary");
  }
  if (all_stages_completed(transcript) && utterance.kind != UtteranceKind::closing_question &&
      !is_participant_turn(utterance.kind)) {
    throw Error(ErrorKind::transcript_invariant,
                std::string("only the closing round may follow the final reflection, got ") +
                    std::string(to_string(utterance.kind)));
  }
  if (!all_stages_completed(transcript) && utterance.kind == UtteranceKind::closing_question) {
    throw Error(ErrorKind::transcript_invariant, "closing question before the final reflection");
  }
  transcript.utterances.push_back(std::move(utterance));
  return transcript;
}

Transcript append_reflection(Transcript transcript, Utterance utterance, bool anonymized) {
  check_appendable(transcript, utterance);
  if (utterance.kind != UtteranceKind::reflection_summary) {
    throw Error(ErrorKind::transcript_invariant, "append_reflection needs a reflection_summary");
  }
  if (all_stages_completed(transcript)) {
    throw Error(ErrorKind::transcript_invariant, "every stage has already been reflected");
  }
  transcript.summaries.push_back(
      StageSummary{utterance.stage_index, utterance.text, anonymized});
  transcript.utterances.push_back(std::move(utterance));
  return transcript;
}

std::span<const Utterance> current_stage_utterances(const Transcript& t) {
  const std::span<const Utterance> all(t.utterances);
  for (std::size_t i = all.size(); i > 0; --i) {
    if (all[i - 1].kind == UtteranceKind::reflection_summary) return all.subspan(i);
  }
  return all;
}

ContextView recent_context(const Transcript& t, int budget) {
  const auto current = current_stage_utterances(t);
  const std::size_t keep = std::min(current.size(), static_cast<std::size_t>(std::max(budget, 0)));
  ContextView view;
  view.summaries = t.summaries;
  view.tail.assign(current.end() - static_cast<std::ptrdiff_t>(keep), current.end());
  return view;
}

SpeakingStats speaking_stats(const Transcript& t, std::span<const Persona> personas) {
  SpeakingStats stats;
  stats.stage_index = current_stage_index(t);
  stats.counts.reserve(personas.size());
  for (const auto& p : personas) stats.counts.emplace_back(p.id, 0);
  for (const auto& u : current_stage_utterances(t)) {
    if (!is_participant_turn(u.kind)) continue;
    for (auto& [id, n] : stats.counts) {
      if (id == u.speaker) ++n;
    }
  }
  return stats;
}

}  // namespace focusagent
