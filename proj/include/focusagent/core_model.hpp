// SPDX-License-Identifier: Apache-2.0

// Shared domain types for focus-group sessions and the pure functions
// (time estimation, inactivity detection, context windowing) built on them.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace focusagent {

// Speaker id reserved for the moderator; no persona may use it.
inline constexpr std::string_view kModeratorId = "moderator";
inline constexpr std::string_view kModeratorName = "Moderator";

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

struct Persona {
  std::string id;
  std::string name;
  int age = 0;
  std::string occupation;
  std::string nationality;
  std::string personality;

  bool operator==(const Persona&) const = default;
};

struct SessionConfig {
  std::string topic;
  std::vector<std::string> goals;
  double total_minutes = 0.0;
  std::vector<Persona> personas;
  double engagement_threshold = 5.0;
  double words_per_minute = 100.0;
  int moderator_word_limit = 60;
  std::optional<int> stage_count_hint;
  int context_window = 12;
  double silence_seconds = 5.0;

  bool operator==(const SessionConfig&) const = default;
};

struct Stage {
  int index = 0;
  std::string title;
  std::string objective;
  double allocated_minutes = 0.0;

  bool operator==(const Stage&) const = default;
};

struct DiscussionPlan {
  std::vector<Stage> stages;

  bool operator==(const DiscussionPlan&) const = default;
};

enum class UtteranceKind {
  stage_intro,
  insight_question,
  inactive_prompt,
  participant_response,
  human_response,
  closing_question,
  reflection_summary,
};

std::string_view to_string(UtteranceKind kind);
std::optional<UtteranceKind> parse_utterance_kind(std::string_view text);

// True for the kinds a moderator emits as a question.
bool is_moderator_question(UtteranceKind kind);
// True for participant_response and human_response.
bool is_participant_turn(UtteranceKind kind);

struct Utterance {
  std::string speaker;
  UtteranceKind kind = UtteranceKind::participant_response;
  std::string text;
  int stage_index = 0;
  double estimated_minutes = 0.0;
  std::optional<Timestamp> wall_clock;
  std::int64_t sequence = 0;

  bool operator==(const Utterance&) const = default;
};

struct StageSummary {
  int stage_index = 0;
  std::string text;
  bool anonymized = false;

  bool operator==(const StageSummary&) const = default;
};

// Summaries mirror the reflection_summary utterances one-for-one: summary i
// has stage_index i and the text of the i-th reflection utterance.
struct Transcript {
  std::string config_digest;
  DiscussionPlan plan;
  std::vector<Utterance> utterances;
  std::vector<StageSummary> summaries;

  bool operator==(const Transcript&) const = default;
};

// Per-stage utterance counts, kept in persona order.
struct SpeakingStats {
  int stage_index = 0;
  std::vector<std::pair<std::string, int>> counts;

  [[nodiscard]] int count(std::string_view persona) const;
  bool operator==(const SpeakingStats&) const = default;
};

struct ContextView {
  std::vector<StageSummary> summaries;
  std::vector<Utterance> tail;
};

void validate(const Persona& persona);
void validate(const SessionConfig& config);
void validate(const DiscussionPlan& plan, double total_minutes);
void validate(const Transcript& transcript);

// Number of maximal runs of non-whitespace characters.
std::size_t word_count(std::string_view text);

// Word count divided by words_per_minute.
double estimate_minutes(std::string_view text, double words_per_minute = 100.0);

// A persona is inactive when it has not spoken, or when three times its
// count is at most the highest count. Result follows stats order.
std::vector<std::string> inactive_participants(const SpeakingStats& stats);

// Precondition failures raise SequenceGap, StageOutOfRange or TranscriptInvariant.
// Reflection utterances must go through append_reflection.
Transcript append_utterance(Transcript transcript, Utterance utterance);
Transcript append_reflection(Transcript transcript, Utterance utterance, bool anonymized);

// Index of the stage currently accepting utterances; after the last
// reflection this stays on the final stage (closing round).
int current_stage_index(const Transcript& transcript);
bool all_stages_completed(const Transcript& transcript);

// Utterances after the most recent reflection.
std::span<const Utterance> current_stage_utterances(const Transcript& transcript);

ContextView recent_context(const Transcript& transcript, int budget);

// Counts participant turns of the current stage for each persona.
SpeakingStats speaking_stats(const Transcript& transcript, std::span<const Persona> personas);

}  // namespace focusagent
