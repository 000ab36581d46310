// SPDX-License-Identifier: Apache-2.0

#include "focusagent/simulation.hpp"

#include "focusagent/error.hpp"
#include "focusagent/moderator.hpp"
#include "focusagent/participant.hpp"
#include "focusagent/session_config.hpp"
#include "text_util.hpp"

namespace focusagent {

namespace {

std::optional<UtteranceKind> moderator_kind(ActionKind action) {
  switch (action) {
    case ActionKind::emit_stage_intro: return UtteranceKind::stage_intro;
    case ActionKind::prompt_inactive: return UtteranceKind::inactive_prompt;
    case ActionKind::emit_insight_question: return UtteranceKind::insight_question;
    case ActionKind::emit_closing_question: return UtteranceKind::closing_question;
    case ActionKind::emit_reflection: return UtteranceKind::reflection_summary;
    default: return std::nullopt;
  }
}

class Run {
 public:
  Run(const SessionConfig& config, ChatBackend& backend, const PromptLibrary& prompts,
      SimulationObserver* observer)
      : config_(config), backend_(backend), prompts_(prompts), observer_(observer) {
    for (const auto& p : config_.personas) order_.push_back(p.id);
  }

  SimulationOutcome execute() {
    const auto calls_before = backend_.call_count();
    auto plan = plan_stages(config_, backend_, prompts_);
    if (observer_) observer_->on_plan(plan);
    const ModeratorEngine engine(config_, plan, TimeMode::estimated, prompts_);
    transcript_ = Transcript{config_digest(config_), plan, {}, {}};

    SimulationOutcome outcome;
    outcome.stage_timings.assign(plan.stages.size(), 0.0);
    outcome.stage_cut_short.assign(plan.stages.size(), false);

    ModeratorState state = engine.initial_state();
    try {
      while (state.phase != ModeratorPhase::done) {
        const auto stats = speaking_stats(transcript_, config_.personas);
        auto event = ModeratorEvent::time_checked();
        if (state.phase == ModeratorPhase::awaiting) event = participant_turn(state, stats);

        auto result = engine.step(state, event, transcript_, backend_, stats);
        if (result.action.kind == ActionKind::emit_reflection) {
          const auto stage = static_cast<std::size_t>(result.state.current_stage);
          outcome.stage_timings[stage] = result.state.time_accumulated_minutes;
          outcome.stage_cut_short[stage] = result.state.forced_exit;
        }
        apply(result.action, result.state, event);
        state = std::move(result.state);

        if (state.phase == ModeratorPhase::closing) state = closing_round(engine, state);
      }
    } catch (const Error& e) {
      throw e.with_position(state.current_stage,
                            static_cast<std::int64_t>(transcript_.utterances.size()));
    }

    outcome.transcript = std::move(transcript_);
    outcome.backend_call_count = backend_.call_count() - calls_before;
    return outcome;
  }

 private:
  ModeratorEvent participant_turn(const ModeratorState& state, const SpeakingStats& stats) {
    const auto view = recent_context(transcript_, config_.context_window);
    const auto scores = score_all_engagement(config_.personas, config_, view, backend_, prompts_);
    const auto selection = select_speaker(scores, config_.engagement_threshold, stats, order_);
    if (!selection.chosen) return ModeratorEvent::idle();
    const auto& persona = persona_of(*selection.chosen);
    auto text = participant_response(persona, config_, view, backend_, prompts_);
    return ModeratorEvent::uttered(
        make_utterance(persona.id, UtteranceKind::participant_response, std::move(text),
                       state.current_stage));
  }

  // Every persona, in order, gets one reply to the closing question.
  ModeratorState closing_round(const ModeratorEngine& engine, ModeratorState state) {
    for (const auto& persona : config_.personas) {
      const auto view = recent_context(transcript_, config_.context_window);
      auto reply = participant_response(persona, config_, view, backend_, prompts_);
      if (is_pass_reply(reply)) continue;
      auto event = ModeratorEvent::uttered(make_utterance(
          persona.id, UtteranceKind::participant_response, std::move(reply), state.current_stage));
      const auto stats = speaking_stats(transcript_, config_.personas);
      auto result = engine.step(state, event, transcript_, backend_, stats);
      apply(result.action, result.state, event);
      state = std::move(result.state);
    }
    return state;
  }

  void apply(const ModeratorAction& action, const ModeratorState& after,
             const ModeratorEvent& event) {
    if (action.kind == ActionKind::accept_response) {
      record(*event.utterance);
      return;
    }
    const auto kind = moderator_kind(action.kind);
    if (!kind) return;
    if (action.kind == ActionKind::emit_stage_intro && observer_) {
      observer_->on_stage_started(
          transcript_.plan.stages.at(static_cast<std::size_t>(after.current_stage)));
    }
    record(make_utterance(std::string(kModeratorId), *kind, *action.text, after.current_stage));
  }

  void record(Utterance u) {
    if (u.kind == UtteranceKind::reflection_summary) {
      transcript_ = append_reflection(std::move(transcript_), u, true);
    } else {
      transcript_ = append_utterance(std::move(transcript_), u);
    }
    if (observer_) {
      const auto& stored = transcript_.utterances.back();
      observer_->on_utterance(stored, speaker_name(config_, stored.speaker));
    }
  }

  Utterance make_utterance(std::string speaker, UtteranceKind kind, std::string text,
                           int stage) const {
    Utterance u;
    u.speaker = std::move(speaker);
    u.kind = kind;
    u.estimated_minutes = estimate_minutes(text, config_.words_per_minute);
    u.text = std::move(text);
    u.stage_index = stage;
    u.sequence = static_cast<std::int64_t>(transcript_.utterances.size());
    return u;
  }

  const Persona& persona_of(const std::string& id) const {
    for (const auto& p : config_.personas) {
      if (p.id == id) return p;
    }
    throw Error(ErrorKind::precondition, "unknown persona " + id);
  }

  const SessionConfig& config_;
  ChatBackend& backend_;
  const PromptLibrary& prompts_;
  SimulationObserver* observer_;
  std::vector<std::string> order_;
  Transcript transcript_;
};

}  // namespace

bool is_pass_reply(std::string_view reply) {
  return detail::normalize_words(reply) == detail::ascii_lower(kPassSentinel);
}

SimulationOutcome run_simulation(const SessionConfig& config, ChatBackend& backend,
                                 std::uint64_t seed, const PromptLibrary& prompts,
                                 SimulationObserver* observer) {
  validate(config);
  if (config.personas.size() < 2) {
    throw Error(ErrorKind::precondition, "a simulation needs at least two personas");
  }
  backend.set_seed(seed);
  Run run(config, backend, prompts, observer);
  return run.execute();
}

SimulationOutcome run_simulation(const SessionConfig& config, const BackendConfig& backend,
                                 std::uint64_t seed, const PromptLibrary& prompts,
                                 SimulationObserver* observer) {
  auto instance = make_backend(backend);
  return run_simulation(config, *instance, seed, prompts, observer);
}

}  // namespace focusagent
