// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "focusagent/core_model.hpp"
#include "focusagent/llm_gateway.hpp"
#include "focusagent/prompts.hpp"

namespace focusagent {

// Progress callbacks, invoked synchronously from the simulation loop.
class SimulationObserver {
 public:
  virtual ~SimulationObserver() = default;
  virtual void on_plan(const DiscussionPlan& /*plan*/) {}
  virtual void on_stage_started(const Stage& /*stage*/) {}
  virtual void on_utterance(const Utterance& /*utterance*/, std::string_view /*speaker_name*/) {}
};

struct SimulationOutcome {
  Transcript transcript;
  // Estimated minutes accumulated in each stage when it was reflected.
  std::vector<double> stage_timings;
  // Stages that ended before their allocation (repeat guard or idle escalation).
  std::vector<bool> stage_cut_short;
  std::uint64_t backend_call_count = 0;
};

// Closing-round replies equal to this sentinel (any case) are skipped.
inline constexpr std::string_view kPassSentinel = "PASS";
bool is_pass_reply(std::string_view reply);

// Runs a whole simulated focus group: plans the stages, then alternates
// participant engagement rounds with moderator decisions until the closing
// round is over. Requires at least two personas. Failures are rethrown with
// the stage and sequence at which they occurred.
SimulationOutcome run_simulation(const SessionConfig& config, ChatBackend& backend,
                                 std::uint64_t seed,
                                 const PromptLibrary& prompts = PromptLibrary::builtin(),
                                 SimulationObserver* observer = nullptr);

SimulationOutcome run_simulation(const SessionConfig& config, const BackendConfig& backend,
                                 std::uint64_t seed,
                                 const PromptLibrary& prompts = PromptLibrary::builtin(),
                                 SimulationObserver* observer = nullptr);

}  // namespace focusagent
