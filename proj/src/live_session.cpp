// SPDX-License-Identifier: Apache-2.0

#include "focusagent/live_session.hpp"

#include <algorithm>
#include <cmath>

#include "focusagent/error.hpp"
#include "focusagent/session_config.hpp"
#include "text_util.hpp"

namespace focusagent {

namespace {

std::chrono::milliseconds to_millis(double value, double scale) {
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(value * scale)));
}

class OutstandingCall {
 public:
  explicit OutstandingCall(bool& flag) : flag_(flag) { flag_ = true; }
  ~OutstandingCall() { flag_ = false; }
  OutstandingCall(const OutstandingCall&) = delete;
  OutstandingCall& operator=(const OutstandingCall&) = delete;

 private:
  bool& flag_;
};

}  // namespace

Timestamp SystemClock::now() const {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

Timestamp VirtualClock::now() const { return Timestamp(std::chrono::milliseconds(ms_.load())); }

bool silence_monitor(const LiveSessionState& state, Timestamp now, double silence_seconds) {
  if (!state.started || state.closed || state.backend_outstanding) return false;
  if (state.moderator.phase != ModeratorPhase::awaiting) return false;
  return now - state.last_activity >= to_millis(silence_seconds, 1000.0);
}

LiveSession::LiveSession(SessionConfig config, DiscussionPlan plan, ChatBackend& backend,
                         const Clock& clock, LiveOptions options, const PromptLibrary& prompts)
    : config_(std::move(config)),
      plan_(std::move(plan)),
      backend_(backend),
      clock_(clock),
      options_(options),
      prompts_(prompts) {
  validate(plan_, config_.total_minutes);
  if (options_.min_participants < 1) {
    throw Error(ErrorKind::invalid_config, "min_participants must be at least 1");
  }
  transcript_ = Transcript{config_digest(config_), plan_, {}, {}};
  state_.last_activity = clock_.now();
}

std::vector<std::string> LiveSession::roster_names() const {
  std::vector<std::string> names;
  for (const auto& [client, name] : state_.roster) {
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  }
  return names;
}

std::vector<Persona> LiveSession::present_participants() const {
  std::vector<Persona> people;
  for (const auto& name : roster_names()) people.push_back(Persona{name, name, 1, {}, {}, {}});
  return people;
}

ModeratorEngine LiveSession::engine() const {
  SessionConfig c = config_;
  c.personas.clear();
  for (const auto& name : participants_) c.personas.push_back(Persona{name, name, 1, {}, {}, {}});
  return ModeratorEngine(std::move(c), plan_, TimeMode::wall_clock, prompts_);
}

std::vector<Outbound> LiveSession::handle(const ClientEvent& event) {
  if (state_.closed) throw Error(ErrorKind::session_closed, "session has ended");
  const Timestamp now = clock_.now();
  std::vector<Outbound> out;
  const auto member = std::find_if(state_.roster.begin(), state_.roster.end(),
                                   [&](const auto& entry) { return entry.first == event.client; });

  switch (event.kind) {
    case ClientEventKind::join: {
      const std::string name(detail::trim(event.display_name));
      if (detail::ascii_lower(name) == detail::ascii_lower(kModeratorName)) {
        throw Error(ErrorKind::precondition, "display name is reserved");
      }
      validate(Persona{name, name, 1, {}, {}, {}});
      if (member != state_.roster.end()) {
        member->second = name;
      } else {
        state_.roster.emplace_back(event.client, name);
      }
      if (std::find(participants_.begin(), participants_.end(), name) == participants_.end()) {
        participants_.push_back(name);
      }
      out.push_back({std::nullopt, ServerEvent::roster(roster_names(), now)});
      if (!state_.started) {
        if (static_cast<int>(roster_names().size()) >= options_.min_participants) start(now, out);
      } else {
        const int stage = state_.moderator.current_stage;
        out.push_back({event.client,
                       ServerEvent::stage_changed(stage, plan_.stages.at(static_cast<std::size_t>(stage)).title, now)});
        if (last_moderator_text_) {
          out.push_back({event.client, ServerEvent::moderator_message(*last_moderator_text_, now)});
        }
      }
      return out;
    }

    case ClientEventKind::utterance: {
      if (member == state_.roster.end()) {
        throw Error(ErrorKind::unknown_client, "utterance from client that has not joined: " +
                                                   event.client);
      }
      const std::string text(detail::trim(event.text));
      if (text.empty()) return out;
      const std::string name = member->second;
      const auto phase = state_.moderator.phase;
      if (state_.started &&
          (phase == ModeratorPhase::awaiting || phase == ModeratorPhase::closing)) {
        Utterance u;
        u.speaker = name;
        u.kind = UtteranceKind::human_response;
        u.text = text;
        u.stage_index = state_.moderator.current_stage;
        u.estimated_minutes = 0.0;
        u.wall_clock = now;
        u.sequence = static_cast<std::int64_t>(transcript_.utterances.size());
        step(ModeratorEvent::uttered(std::move(u)), now, out);
      }
      state_.last_activity = now;
      state_.responses_since_last_question += 1;
      state_.silent_interventions = 0;
      out.push_back({std::nullopt, ServerEvent::participant_echo(name, text, now)});
      return out;
    }

    case ClientEventKind::leave: {
      if (member == state_.roster.end()) {
        throw Error(ErrorKind::unknown_client, "leave from client that has not joined: " +
                                                   event.client);
      }
      state_.roster.erase(member);
      out.push_back({std::nullopt, ServerEvent::roster(roster_names(), now)});
      return out;
    }

    case ClientEventKind::ping:
      return out;
  }
  return out;
}

std::vector<Outbound> LiveSession::tick() {
  std::vector<Outbound> out;
  if (!state_.started || state_.closed) return out;
  const Timestamp now = clock_.now();
  const auto silence = to_millis(config_.silence_seconds, 1000.0);

  switch (state_.moderator.phase) {
    case ModeratorPhase::closing:
      if (now - state_.last_activity >= silence) step(ModeratorEvent::time_checked(), now, out);
      break;
    case ModeratorPhase::awaiting:
      if (now >= state_.stage_deadline) {
        force_stage_exit(now, out);
      } else if (silence_monitor(state_, now, config_.silence_seconds)) {
        intervene(now, out);
      }
      break;
    default:
      settle(now, out);
      break;
  }
  return out;
}

void LiveSession::start(Timestamp now, std::vector<Outbound>& out) {
  state_.started = true;
  settle(now, out);
}

void LiveSession::intervene(Timestamp now, std::vector<Outbound>& out) {
  ++interventions_;
  if (state_.responses_since_last_question == 0) {
    state_.silent_interventions += 1;
    if (state_.silent_interventions >= 2) {
      force_stage_exit(now, out);
      return;
    }
  } else {
    state_.silent_interventions = 0;
  }
  step(ModeratorEvent::idle(), now, out);
  settle(now, out);
}

void LiveSession::force_stage_exit(Timestamp now, std::vector<Outbound>& out) {
  step(ModeratorEvent::time_checked(true), now, out);
  settle(now, out);
}

// Runs the engine through phases that need no participant input.
void LiveSession::settle(Timestamp now, std::vector<Outbound>& out) {
  while (!state_.closed) {
    const auto phase = state_.moderator.phase;
    if (phase != ModeratorPhase::planning && phase != ModeratorPhase::stage_intro &&
        phase != ModeratorPhase::reflecting) {
      return;
    }
    step(ModeratorEvent::time_checked(), now, out);
  }
}

void LiveSession::step(const ModeratorEvent& event, Timestamp now, std::vector<Outbound>& out) {
  const auto stats = speaking_stats(transcript_, present_participants());
  StepResult result;
  {
    const OutstandingCall guard(state_.backend_outstanding);
    result = engine().step(state_.moderator, event, transcript_, backend_, stats);
  }
  state_.moderator = result.state;
  const auto& action = result.action;

  const auto ask = [&](UtteranceKind kind) {
    record(moderator_utterance(kind, *action.text, now));
    last_moderator_text_ = *action.text;
    state_.last_activity = now;
    state_.responses_since_last_question = 0;
    out.push_back({std::nullopt, ServerEvent::moderator_message(*action.text, now)});
  };

  switch (action.kind) {
    case ActionKind::accept_response:
      record(*event.utterance);
      break;
    case ActionKind::emit_stage_intro: {
      const int stage = state_.moderator.current_stage;
      const auto& s = plan_.stages.at(static_cast<std::size_t>(stage));
      state_.stage_deadline = now + to_millis(s.allocated_minutes, 60000.0);
      state_.silent_interventions = 0;
      out.push_back({std::nullopt, ServerEvent::stage_changed(stage, s.title, now)});
      ask(UtteranceKind::stage_intro);
      break;
    }
    case ActionKind::prompt_inactive:
      ask(UtteranceKind::inactive_prompt);
      break;
    case ActionKind::emit_insight_question:
      ask(UtteranceKind::insight_question);
      break;
    case ActionKind::emit_closing_question:
      ask(UtteranceKind::closing_question);
      break;
    case ActionKind::emit_reflection:
      record(moderator_utterance(UtteranceKind::reflection_summary, *action.text, now));
      break;
    case ActionKind::advance_stage:
      break;
    case ActionKind::finish:
      state_.closed = true;
      out.push_back({std::nullopt, ServerEvent::session_closed(now)});
      break;
  }
}

void LiveSession::record(Utterance u) {
  if (u.kind == UtteranceKind::reflection_summary) {
    transcript_ = append_reflection(std::move(transcript_), std::move(u), true);
  } else {
    transcript_ = append_utterance(std::move(transcript_), std::move(u));
  }
}

Utterance LiveSession::moderator_utterance(UtteranceKind kind, std::string text,
                                           Timestamp now) const {
  Utterance u;
  u.speaker = std::string(kModeratorId);
  u.kind = kind;
  u.estimated_minutes = estimate_minutes(text, config_.words_per_minute);
  u.text = std::move(text);
  u.stage_index = state_.moderator.current_stage;
  u.wall_clock = now;
  u.sequence = static_cast<std::int64_t>(transcript_.utterances.size());
  return u;
}

}  // namespace focusagent
