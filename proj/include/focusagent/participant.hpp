// SPDX-License-Identifier: Apache-2.0

// AI participants: engagement scoring, threshold-gated speaker selection and
// in-character responses.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "focusagent/core_model.hpp"
#include "focusagent/llm_gateway.hpp"
#include "focusagent/prompts.hpp"

namespace focusagent {

struct SpeakerSelection {
  std::optional<std::string> chosen;
  std::vector<EngagementScore> scores;

  bool operator==(const SpeakerSelection&) const = default;
};

// One engagement call per persona, in persona order. A malformed reply is
// asked again once and scores 0 if it is still unreadable.
std::vector<EngagementScore> score_all_engagement(std::span<const Persona> personas,
                                                  const SessionConfig& config,
                                                  const ContextView& view, ChatBackend& backend,
                                                  const PromptLibrary& prompts = PromptLibrary::builtin());

// No speaker when every score is below `threshold`. Otherwise the highest
// score wins; ties go to whoever spoke least this stage, then to the persona
// earliest in `persona_order`.
SpeakerSelection select_speaker(std::span<const EngagementScore> scores, double threshold,
                                const SpeakingStats& stats,
                                std::span<const std::string> persona_order);

// The persona's reply from its own perspective. EmptyResponse on a blank reply.
std::string participant_response(const Persona& persona, const SessionConfig& config,
                                 const ContextView& view, ChatBackend& backend,
                                 const PromptLibrary& prompts = PromptLibrary::builtin());

}  // namespace focusagent
