// SPDX-License-Identifier: Apache-2.0

// The moderator: stage planning, the per-stage state machine that decides
// between accepting responses, activating quiet participants and asking new
// questions, end-of-stage reflection and the closing question.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "focusagent/core_model.hpp"
#include "focusagent/llm_gateway.hpp"
#include "focusagent/prompts.hpp"

namespace focusagent {

// Parses "title | objective | minutes" lines, then rescales the allocations
// so they sum to total_minutes. Lines without '|' are ignored; a reply with
// more stages than `stage_count_hint` keeps the first ones. PlanInvalid on
// malformed lines, no stages, non-positive minutes or too few stages.
DiscussionPlan parse_plan(std::string_view reply, double total_minutes,
                          std::optional<int> stage_count_hint = std::nullopt);

// One backend call with the plan prompt, parsed by parse_plan.
DiscussionPlan plan_stages(const SessionConfig& config, ChatBackend& backend,
                           const PromptLibrary& prompts = PromptLibrary::builtin());

std::string normalize_question(std::string_view question);
bool is_repeat_question(std::string_view candidate, std::span<const std::string> asked);

// True when any persona name occurs as a whole word, ignoring ASCII case.
bool mentions_persona(std::string_view text, std::span<const Persona> personas);

// Replaces each whole-word, case-insensitive persona name with
// "a participant" ("A participant" at a sentence start). Idempotent.
std::string anonymize_summary(std::string_view text, std::span<const Persona> personas);

// Summarizes one stage. A summary that still names someone is re-prompted
// once, then redacted mechanically; the result is always anonymized.
StageSummary reflect_stage(const SessionConfig& config, const Stage& stage,
                           std::span<const StageSummary> earlier_summaries,
                           std::span<const Utterance> stage_utterances, ChatBackend& backend,
                           const PromptLibrary& prompts = PromptLibrary::builtin());

enum class ModeratorPhase { planning, stage_intro, awaiting, reflecting, closing, done };

std::string_view to_string(ModeratorPhase phase);

struct ModeratorState {
  ModeratorPhase phase = ModeratorPhase::planning;
  int current_stage = 0;
  double time_accumulated_minutes = 0.0;
  std::vector<std::string> asked_questions;
  std::optional<std::string> pending_inactive;
  // Idle turns since the last participant utterance.
  int consecutive_idle = 0;
  bool reflection_emitted = false;
  // The stage was cut short (repeat guard, silence escalation or deadline).
  bool forced_exit = false;
  // Estimate of the last utterance added to time_accumulated_minutes.
  double last_counted_minutes = 0.0;

  bool operator==(const ModeratorState&) const = default;
};

enum class ActionKind {
  emit_stage_intro,
  accept_response,
  prompt_inactive,
  emit_insight_question,
  emit_reflection,
  emit_closing_question,
  advance_stage,
  finish,
};

std::string_view to_string(ActionKind kind);

struct ModeratorAction {
  ActionKind kind = ActionKind::accept_response;
  std::optional<std::string> text;
  // Target of prompt_inactive.
  std::optional<std::string> persona;

  bool operator==(const ModeratorAction&) const = default;
};

enum class EventKind { participant_uttered, turn_idle, stage_time_checked };

struct ModeratorEvent {
  EventKind kind = EventKind::stage_time_checked;
  std::optional<Utterance> utterance;
  // With stage_time_checked: an external clock says the stage is over.
  bool stage_elapsed = false;

  static ModeratorEvent uttered(Utterance u) {
    return {EventKind::participant_uttered, std::move(u), false};
  }
  static ModeratorEvent idle() { return {EventKind::turn_idle, std::nullopt, false}; }
  static ModeratorEvent time_checked(bool elapsed = false) {
    return {EventKind::stage_time_checked, std::nullopt, elapsed};
  }
};

// Simulation sessions measure stage time by word-count estimates; live
// sessions leave timing to the wall clock and signal it via stage_elapsed.
enum class TimeMode { estimated, wall_clock };

struct StepResult {
  ModeratorState state;
  ModeratorAction action;
};

class ModeratorEngine {
 public:
  ModeratorEngine(SessionConfig config, DiscussionPlan plan, TimeMode mode = TimeMode::estimated,
                  const PromptLibrary& prompts = PromptLibrary::builtin());

  [[nodiscard]] const SessionConfig& config() const noexcept { return config_; }
  [[nodiscard]] const DiscussionPlan& plan() const noexcept { return plan_; }
  [[nodiscard]] TimeMode time_mode() const noexcept { return mode_; }

  [[nodiscard]] ModeratorState initial_state() const { return {}; }

  // One transition. Events and phases pair up as follows:
  //   planning / stage_intro   any non-utterance event -> emit_stage_intro
  //   awaiting                 participant_uttered -> accept_response
  //                            turn_idle -> prompt_inactive | emit_insight_question
  //                                         (estimated mode: second idle in a row -> emit_reflection)
  //                            stage_time_checked once time is up -> emit_reflection
  //   reflecting               tick -> emit_reflection, then advance_stage or
  //                            emit_closing_question after the final stage
  //   closing                  participant_uttered -> accept_response; tick -> finish
  // Anything else raises IllegalEvent. `stats` must list personas in session order.
  [[nodiscard]] StepResult step(const ModeratorState& state, const ModeratorEvent& event,
                                const Transcript& transcript, ChatBackend& backend,
                                const SpeakingStats& stats) const;

  // Inactive persona with the fewest utterances, earliest in stats order.
  [[nodiscard]] std::optional<std::string> choose_inactive_target(const SpeakingStats& stats) const;

 private:
  std::optional<std::string> ask(std::string_view template_name, const TemplateVars& vars,
                                 const ModeratorState& state, const Transcript& transcript,
                                 ChatBackend& backend) const;
  StepResult reflect(ModeratorState next, bool forced, const Transcript& transcript,
                     ChatBackend& backend) const;
  void count_time(ModeratorState& state, std::string_view text) const;
  TemplateVars stage_vars(int stage) const;

  SessionConfig config_;
  DiscussionPlan plan_;
  TimeMode mode_;
  const PromptLibrary* prompts_;
};

}  // namespace focusagent
