// SPDX-License-Identifier: Apache-2.0

// A moderated session with human participants. Stage time follows the wall
// clock; silence triggers moderator interventions. The session is a plain
// state machine driven by handle() and tick(); transports feed it events from
// a single ordered queue.

#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "focusagent/core_model.hpp"
#include "focusagent/llm_gateway.hpp"
#include "focusagent/moderator.hpp"
#include "focusagent/prompts.hpp"
#include "focusagent/wire.hpp"

namespace focusagent {

class Clock {
 public:
  virtual ~Clock() = default;
  [[nodiscard]] virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  [[nodiscard]] Timestamp now() const override;
};

class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(Timestamp start = Timestamp{}) : ms_(start.time_since_epoch().count()) {}

  [[nodiscard]] Timestamp now() const override;
  void set(Timestamp t) { ms_.store(t.time_since_epoch().count()); }
  void advance(std::chrono::milliseconds d) { ms_.fetch_add(d.count()); }

 private:
  std::atomic<std::int64_t> ms_;
};

struct LiveSessionState {
  ModeratorState moderator;
  // Connection id -> display name, in join order.
  std::vector<std::pair<std::string, std::string>> roster;
  Timestamp last_activity{};
  // Participant messages since the last moderator question.
  int responses_since_last_question = 0;
  Timestamp stage_deadline{};
  // Consecutive silence interventions that followed a question nobody answered.
  int silent_interventions = 0;
  bool backend_outstanding = false;
  bool started = false;
  bool closed = false;
};

// True iff the gap since the last activity reaches silence_seconds, no backend
// call is outstanding and a stage is accepting responses.
bool silence_monitor(const LiveSessionState& state, Timestamp now, double silence_seconds = 5.0);

// A server event for one connection, or for every joined one when `to` is empty.
struct Outbound {
  std::optional<std::string> to;
  ServerEvent event;

  bool operator==(const Outbound&) const = default;
};

struct LiveOptions {
  // Distinct display names needed before the first stage opens.
  int min_participants = 1;
};

class LiveSession {
 public:
  // Participants are the humans who join; `config.personas` is not used.
  LiveSession(SessionConfig config, DiscussionPlan plan, ChatBackend& backend, const Clock& clock,
              LiveOptions options = {}, const PromptLibrary& prompts = PromptLibrary::builtin());

  // UnknownClient for utterances or leaves from connections that never
  // joined; SessionClosed once the session has ended.
  std::vector<Outbound> handle(const ClientEvent& event);

  // Applies the deadline, silence and closing rules at clock.now().
  std::vector<Outbound> tick();

  [[nodiscard]] const LiveSessionState& state() const noexcept { return state_; }
  [[nodiscard]] const Transcript& transcript() const noexcept { return transcript_; }
  [[nodiscard]] const DiscussionPlan& plan() const noexcept { return plan_; }
  [[nodiscard]] bool closed() const noexcept { return state_.closed; }
  // Silence interventions so far.
  [[nodiscard]] int interventions() const noexcept { return interventions_; }
  [[nodiscard]] std::vector<std::string> roster_names() const;

 private:
  ModeratorEngine engine() const;
  std::vector<Persona> present_participants() const;
  void start(Timestamp now, std::vector<Outbound>& out);
  void step(const ModeratorEvent& event, Timestamp now, std::vector<Outbound>& out);
  void settle(Timestamp now, std::vector<Outbound>& out);
  void force_stage_exit(Timestamp now, std::vector<Outbound>& out);
  void intervene(Timestamp now, std::vector<Outbound>& out);
  void record(Utterance u);
  Utterance moderator_utterance(UtteranceKind kind, std::string text, Timestamp now) const;

  SessionConfig config_;
  DiscussionPlan plan_;
  ChatBackend& backend_;
  const Clock& clock_;
  LiveOptions options_;
  const PromptLibrary& prompts_;
  LiveSessionState state_;
  Transcript transcript_;
  // Everyone who has joined, so summaries stay anonymized after people leave.
  std::vector<std::string> participants_;
  std::optional<std::string> last_moderator_text_;
  int interventions_ = 0;
};

}  // namespace focusagent
