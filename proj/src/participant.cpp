// SPDX-License-Identifier: Apache-2.0

#include "focusagent/participant.hpp"

#include <algorithm>

#include "focusagent/error.hpp"
#include "text_util.hpp"

namespace focusagent {

std::vector<EngagementScore> score_all_engagement(std::span<const Persona> personas,
                                                  const SessionConfig& config,
                                                  const ContextView& view, ChatBackend& backend,
                                                  const PromptLibrary& prompts) {
  if (personas.empty()) throw Error(ErrorKind::precondition, "no personas to score");
  std::vector<EngagementScore> scores;
  scores.reserve(personas.size());
  for (const auto& persona : personas) {
    ChatRequest request;
    request.messages = build_agent_messages(
        config, view, persona, prompts.render(prompt::engagement, {{"name", persona.name}}),
        prompts);
    request.purpose = std::string(prompt::engagement);
    request.agent = persona.id;

    std::optional<EngagementScore> score;
    for (int attempt = 0; attempt < 2 && !score; ++attempt) {
      try {
        score = parse_engagement(backend.complete(request), persona.id);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::malformed_score) throw;
      }
    }
    scores.push_back(score.value_or(EngagementScore{persona.id, 0}));
  }
  return scores;
}

SpeakerSelection select_speaker(std::span<const EngagementScore> scores, double threshold,
                                const SpeakingStats& stats,
                                std::span<const std::string> persona_order) {
  if (scores.empty()) throw Error(ErrorKind::precondition, "select_speaker needs scores");
  SpeakerSelection selection;
  selection.scores.assign(scores.begin(), scores.end());

  const auto top = std::max_element(scores.begin(), scores.end(),
                                    [](const auto& a, const auto& b) { return a.value < b.value; });
  if (static_cast<double>(top->value) < threshold) return selection;

  const auto rank = [&](const std::string& id) {
    const auto it = std::find(persona_order.begin(), persona_order.end(), id);
    return static_cast<std::size_t>(it - persona_order.begin());
  };
  const EngagementScore* best = nullptr;
  for (const auto& s : scores) {
    if (s.value != top->value) continue;
    if (!best) {
      best = &s;
      continue;
    }
    const int spoke = stats.count(s.persona);
    const int best_spoke = stats.count(best->persona);
    if (spoke < best_spoke || (spoke == best_spoke && rank(s.persona) < rank(best->persona))) {
      best = &s;
    }
  }
  selection.chosen = best->persona;
  return selection;
}

std::string participant_response(const Persona& persona, const SessionConfig& config,
                                 const ContextView& view, ChatBackend& backend,
                                 const PromptLibrary& prompts) {
  ChatRequest request;
  request.messages = build_agent_messages(
      config, view, persona, prompts.render(prompt::participant_response, {{"name", persona.name}}),
      prompts);
  request.purpose = std::string(prompt::participant_response);
  request.agent = persona.id;
  std::string reply(detail::trim(backend.complete(request)));
  if (reply.empty()) {
    throw Error(ErrorKind::empty_response, "empty response from " + persona.name);
  }
  return reply;
}

}  // namespace focusagent
