// SPDX-License-Identifier: Apache-2.0

#include "focusagent/moderator.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "focusagent/error.hpp"
#include "text_util.hpp"

namespace focusagent {

namespace {

std::optional<double> parse_minutes(std::string_view field) {
  field = detail::trim(field);
  // Accept a trailing unit word such as "15 min" or "15 minutes".
  const auto unit = field.find_first_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ");
  if (unit != std::string_view::npos) {
    const std::string suffix = detail::ascii_lower(detail::trim(field.substr(unit)));
    if (suffix != "min" && suffix != "mins" && suffix != "minutes" && suffix != "minute") {
      return std::nullopt;
    }
    field = detail::trim(field.substr(0, unit));
  }
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

// Half-open byte ranges where `name` occurs as a whole word, ignoring ASCII case.
std::vector<std::pair<std::size_t, std::size_t>> find_name(std::string_view text,
                                                           std::string_view name) {
  std::vector<std::pair<std::size_t, std::size_t>> hits;
  if (name.empty() || name.size() > text.size()) return hits;
  for (std::size_t i = 0; i + name.size() <= text.size(); ++i) {
    if (i > 0 && detail::is_word_char(text[i - 1]) && detail::is_word_char(name.front())) continue;
    bool same = true;
    for (std::size_t k = 0; k < name.size() && same; ++k) {
      same = detail::ascii_lower(text[i + k]) == detail::ascii_lower(name[k]);
    }
    if (!same) continue;
    const std::size_t end = i + name.size();
    if (end < text.size() && detail::is_word_char(text[end]) && detail::is_word_char(name.back())) {
      continue;
    }
    hits.emplace_back(i, end);
    i = end - 1;
  }
  return hits;
}

bool at_sentence_start(std::string_view text, std::size_t pos) {
  while (pos > 0) {
    const char prev = text[pos - 1];
    if (prev == ' ' || prev == '\t' || prev == '"' || prev == '\'' || prev == '(') {
      --pos;
      continue;
    }
    return prev == '.' || prev == '!' || prev == '?' || prev == '\n' || prev == '\r';
  }
  return true;
}

std::vector<std::string> names_longest_first(std::span<const Persona> personas) {
  std::vector<std::string> names;
  for (const auto& p : personas) names.emplace_back(detail::trim(p.name));
  std::stable_sort(names.begin(), names.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  return names;
}

}  // namespace

DiscussionPlan parse_plan(std::string_view reply, double total_minutes,
                          std::optional<int> stage_count_hint) {
  DiscussionPlan plan;
  std::vector<double> raw;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    auto eol = reply.find('\n', pos);
    if (eol == std::string_view::npos) eol = reply.size();
    const auto line = detail::trim(reply.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.find('|') == std::string_view::npos) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto bar = line.find('|', start);
      fields.push_back(detail::trim(line.substr(start, bar - start)));
      if (bar == std::string_view::npos) break;
      start = bar + 1;
    }
    const std::string where = "plan line " + std::to_string(line_no);
    if (fields.size() != 3) {
      throw Error(ErrorKind::plan_invalid, where + ": expected 'title | objective | minutes'");
    }
    if (fields[0].empty()) throw Error(ErrorKind::plan_invalid, where + ": empty stage title");
    const auto minutes = parse_minutes(fields[2]);
    if (!minutes) throw Error(ErrorKind::plan_invalid, where + ": unreadable minutes");
    if (!(*minutes > 0.0)) {
      throw Error(ErrorKind::plan_invalid, where + ": allocation must be positive");
    }
    plan.stages.push_back(Stage{static_cast<int>(plan.stages.size()), std::string(fields[0]),
                                std::string(fields[1]), 0.0});
    raw.push_back(*minutes);
  }

  if (plan.stages.empty()) throw Error(ErrorKind::plan_invalid, "reply contains no stages");
  if (stage_count_hint) {
    const auto wanted = static_cast<std::size_t>(*stage_count_hint);
    if (plan.stages.size() < wanted) {
      throw Error(ErrorKind::plan_invalid, "reply has " + std::to_string(plan.stages.size()) +
                                               " stages, expected " + std::to_string(wanted));
    }
    plan.stages.resize(wanted);
    raw.resize(wanted);
  }

  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  double assigned = 0.0;
  for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
    plan.stages[i].allocated_minutes = raw[i] * total_minutes / sum;
    assigned += plan.stages[i].allocated_minutes;
  }
  plan.stages.back().allocated_minutes = total_minutes - assigned;
  validate(plan, total_minutes);
  return plan;
}

DiscussionPlan plan_stages(const SessionConfig& config, ChatBackend& backend,
                           const PromptLibrary& prompts) {
  std::string goals;
  for (const auto& g : config.goals) goals += (goals.empty() ? "" : "; ") + g;
  const std::string count = config.stage_count_hint
                                ? "exactly " + std::to_string(*config.stage_count_hint)
                                : std::string("three to six");
  const std::string mission =
      prompts.render(prompt::plan, {{"topic", config.topic},
                                    {"goals", goals},
                                    {"total_minutes", detail::format_number(config.total_minutes)},
                                    {"stage_count", count}});
  ChatRequest request;
  request.messages = build_agent_messages(config, {}, std::nullopt, mission, prompts);
  request.purpose = std::string(prompt::plan);
  return parse_plan(backend.complete(request), config.total_minutes, config.stage_count_hint);
}

std::string normalize_question(std::string_view question) {
  return detail::normalize_words(question);
}

bool is_repeat_question(std::string_view candidate, std::span<const std::string> asked) {
  const std::string normalized = normalize_question(candidate);
  return std::find(asked.begin(), asked.end(), normalized) != asked.end();
}

bool mentions_persona(std::string_view text, std::span<const Persona> personas) {
  for (const auto& name : names_longest_first(personas)) {
    if (!find_name(text, name).empty()) return true;
  }
  return false;
}

std::string anonymize_summary(std::string_view text, std::span<const Persona> personas) {
  std::string out(text);
  for (const auto& name : names_longest_first(personas)) {
    const auto hits = find_name(out, name);
    if (hits.empty()) continue;
    std::string next;
    next.reserve(out.size());
    std::size_t pos = 0;
    for (const auto& [begin, end] : hits) {
      next.append(out, pos, begin - pos);
      next.append(at_sentence_start(out, begin) ? "A participant" : "a participant");
      pos = end;
    }
    next.append(out, pos, std::string::npos);
    out = std::move(next);
  }
  return out;
}

StageSummary reflect_stage(const SessionConfig& config, const Stage& stage,
                           std::span<const StageSummary> earlier_summaries,
                           std::span<const Utterance> stage_utterances, ChatBackend& backend,
                           const PromptLibrary& prompts) {
  if (stage_utterances.empty()) {
    throw Error(ErrorKind::precondition, "cannot reflect on a stage without utterances");
  }
  ContextView view;
  view.summaries.assign(earlier_summaries.begin(), earlier_summaries.end());
  view.tail.assign(stage_utterances.begin(), stage_utterances.end());

  ChatRequest request;
  request.messages = build_agent_messages(
      config, view, std::nullopt, prompts.render(prompt::reflection, {{"stage_title", stage.title}}),
      prompts);
  request.purpose = std::string(prompt::reflection);
  std::string summary(detail::trim(backend.complete(request)));
  if (summary.empty()) throw Error(ErrorKind::empty_response, "empty stage reflection");

  if (mentions_persona(summary, config.personas)) {
    std::string names;
    for (const auto& p : config.personas) names += (names.empty() ? "" : ", ") + p.name;
    request.messages.push_back({Role::assistant, summary});
    request.messages.push_back({Role::user, prompts.render(prompt::anonymize, {{"names", names}})});
    request.purpose = std::string(prompt::anonymize);
    std::string retry(detail::trim(backend.complete(request)));
    if (!retry.empty()) summary = std::move(retry);
  }
  return StageSummary{stage.index, anonymize_summary(summary, config.personas), true};
}

std::string_view to_string(ModeratorPhase phase) {
  switch (phase) {
    case ModeratorPhase::planning: return "planning";
    case ModeratorPhase::stage_intro: return "stage_intro";
    case ModeratorPhase::awaiting: return "awaiting";
    case ModeratorPhase::reflecting: return "reflecting";
    case ModeratorPhase::closing: return "closing";
    case ModeratorPhase::done: return "done";
  }
  return "unknown";
}

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::emit_stage_intro: return "emit_stage_intro";
    case ActionKind::accept_response: return "accept_response";
    case ActionKind::prompt_inactive: return "prompt_inactive";
    case ActionKind::emit_insight_question: return "emit_insight_question";
    case ActionKind::emit_reflection: return "emit_reflection";
    case ActionKind::emit_closing_question: return "emit_closing_question";
    case ActionKind::advance_stage: return "advance_stage";
    case ActionKind::finish: return "finish";
  }
  return "unknown";
}

ModeratorEngine::ModeratorEngine(SessionConfig config, DiscussionPlan plan, TimeMode mode,
                                 const PromptLibrary& prompts)
    : config_(std::move(config)), plan_(std::move(plan)), mode_(mode), prompts_(&prompts) {
  validate(config_);
  validate(plan_, config_.total_minutes);
}

std::optional<std::string> ModeratorEngine::choose_inactive_target(
    const SpeakingStats& stats) const {
  std::optional<std::string> best;
  int best_count = 0;
  for (const auto& id : inactive_participants(stats)) {
    const int n = stats.count(id);
    if (!best || n < best_count) {
      best = id;
      best_count = n;
    }
  }
  return best;
}

TemplateVars ModeratorEngine::stage_vars(int stage) const {
  const auto& s = plan_.stages.at(static_cast<std::size_t>(stage));
  return {{"stage_number", std::to_string(stage + 1)},
          {"stage_count", std::to_string(plan_.stages.size())},
          {"stage_title", s.title},
          {"stage_objective", s.objective},
          {"stage_minutes", detail::format_number(s.allocated_minutes)},
          {"word_limit", std::to_string(config_.moderator_word_limit)},
          {"topic", config_.topic}};
}

void ModeratorEngine::count_time(ModeratorState& state, std::string_view text) const {
  if (mode_ != TimeMode::estimated) return;
  const double minutes = estimate_minutes(text, config_.words_per_minute);
  state.time_accumulated_minutes += minutes;
  state.last_counted_minutes = minutes;
  const auto& stage = plan_.stages.at(static_cast<std::size_t>(state.current_stage));
  if (state.time_accumulated_minutes >= stage.allocated_minutes) {
    state.phase = ModeratorPhase::reflecting;
    state.reflection_emitted = false;
  }
}

std::optional<std::string> ModeratorEngine::ask(std::string_view template_name,
                                                const TemplateVars& vars,
                                                const ModeratorState& state,
                                                const Transcript& transcript,
                                                ChatBackend& backend) const {
  const auto view = recent_context(transcript, config_.context_window);
  ChatRequest request;
  request.messages = build_agent_messages(config_, view, std::nullopt,
                                          prompts_->render(template_name, vars), *prompts_);
  request.purpose = std::string(template_name);

  const int limit = config_.moderator_word_limit;
  std::string question(detail::trim(enforce_word_limit(backend, request, limit, *prompts_)));
  if (question.empty()) throw Error(ErrorKind::empty_response, "moderator produced no question");
  if (!is_repeat_question(question, state.asked_questions)) return question;

  request.messages.push_back({Role::assistant, question});
  request.messages.push_back(
      {Role::user, prompts_->render(prompt::rephrase, {{"word_limit", std::to_string(limit)}})});
  request.purpose = std::string(prompt::rephrase);
  std::string retry(detail::trim(enforce_word_limit(backend, request, limit, *prompts_)));
  if (retry.empty() || is_repeat_question(retry, state.asked_questions)) return std::nullopt;
  return retry;
}

StepResult ModeratorEngine::reflect(ModeratorState next, bool forced, const Transcript& transcript,
                                    ChatBackend& backend) const {
  const auto& stage = plan_.stages.at(static_cast<std::size_t>(next.current_stage));
  const auto summary = reflect_stage(config_, stage, transcript.summaries,
                                     current_stage_utterances(transcript), backend, *prompts_);
  next.phase = ModeratorPhase::reflecting;
  next.reflection_emitted = true;
  next.forced_exit = forced;
  next.pending_inactive.reset();
  return {std::move(next), {ActionKind::emit_reflection, summary.text, std::nullopt}};
}

StepResult ModeratorEngine::step(const ModeratorState& state, const ModeratorEvent& event,
                                 const Transcript& transcript, ChatBackend& backend,
                                 const SpeakingStats& stats) const {
  const auto illegal = [&]() -> Error {
    return Error(ErrorKind::illegal_event,
                 "event not valid in phase " + std::string(to_string(state.phase)));
  };
  ModeratorState next = state;

  switch (state.phase) {
    case ModeratorPhase::done:
      throw illegal();

    case ModeratorPhase::planning:
    case ModeratorPhase::stage_intro: {
      if (event.kind == EventKind::participant_uttered) throw illegal();
      next = ModeratorState{};
      next.current_stage = state.phase == ModeratorPhase::planning ? 0 : state.current_stage;
      next.phase = ModeratorPhase::awaiting;
      // The question list is empty on stage entry, so no repeat is possible.
      auto intro = ask(prompt::new_stage, stage_vars(next.current_stage), next, transcript, backend);
      next.asked_questions.push_back(normalize_question(*intro));
      count_time(next, *intro);
      return {std::move(next), {ActionKind::emit_stage_intro, std::move(intro), std::nullopt}};
    }

    case ModeratorPhase::awaiting: {
      if (event.kind == EventKind::participant_uttered) {
        if (!event.utterance) throw illegal();
        next.consecutive_idle = 0;
        if (next.pending_inactive == event.utterance->speaker) next.pending_inactive.reset();
        count_time(next, event.utterance->text);
        return {std::move(next), {ActionKind::accept_response, std::nullopt, std::nullopt}};
      }
      if (event.kind == EventKind::stage_time_checked) {
        if (!event.stage_elapsed) throw illegal();
        return reflect(std::move(next), true, transcript, backend);
      }

      next.consecutive_idle += 1;
      // Live sessions escalate silence themselves and force the exit via stage_elapsed.
      if (mode_ == TimeMode::estimated && next.consecutive_idle >= 2) {
        return reflect(std::move(next), true, transcript, backend);
      }

      ModeratorAction action;
      std::optional<std::string> question;
      if (const auto target = choose_inactive_target(stats)) {
        auto vars = stage_vars(next.current_stage);
        vars["participant_name"] = speaker_name(config_, *target);
        question = ask(prompt::inactive_participant, vars, next, transcript, backend);
        action = {ActionKind::prompt_inactive, question, target};
        next.pending_inactive = target;
      } else {
        question = ask(prompt::insights, stage_vars(next.current_stage), next, transcript, backend);
        action = {ActionKind::emit_insight_question, question, std::nullopt};
      }
      if (!question) return reflect(std::move(next), true, transcript, backend);
      next.asked_questions.push_back(normalize_question(*question));
      count_time(next, *question);
      return {std::move(next), std::move(action)};
    }

    case ModeratorPhase::reflecting: {
      if (event.kind == EventKind::participant_uttered) throw illegal();
      if (!state.reflection_emitted) return reflect(std::move(next), false, transcript, backend);

      const bool last = state.current_stage + 1 >= static_cast<int>(plan_.stages.size());
      if (last) {
        next.phase = ModeratorPhase::closing;
        std::string closing = truncate_to_words(
            prompts_->render(prompt::closing, {{"topic", config_.topic}}),
            config_.moderator_word_limit);
        next.asked_questions.push_back(normalize_question(closing));
        return {std::move(next),
                {ActionKind::emit_closing_question, std::move(closing), std::nullopt}};
      }
      next = ModeratorState{};
      next.phase = ModeratorPhase::stage_intro;
      next.current_stage = state.current_stage + 1;
      return {std::move(next), {ActionKind::advance_stage, std::nullopt, std::nullopt}};
    }

    case ModeratorPhase::closing: {
      if (event.kind == EventKind::participant_uttered) {
        return {std::move(next), {ActionKind::accept_response, std::nullopt, std::nullopt}};
      }
      next.phase = ModeratorPhase::done;
      return {std::move(next), {ActionKind::finish, std::nullopt, std::nullopt}};
    }
  }
  throw illegal();
}

}  // namespace focusagent
