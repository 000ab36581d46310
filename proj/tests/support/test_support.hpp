// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "focusagent/core_model.hpp"
#include "focusagent/llm_gateway.hpp"

namespace focusagent::testing {

inline std::filesystem::path source_dir() { return FOCUSAGENT_SOURCE_DIR; }
inline std::filesystem::path fixtures_dir() { return source_dir() / "fixtures"; }
inline std::filesystem::path configs_dir() { return source_dir() / "configs"; }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("focusagent-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Persona persona(std::string id, std::string name) {
  return Persona{std::move(id), std::move(name), 30, "designer", "Irish", "curious"};
}

inline SessionConfig sample_config(std::size_t persona_count = 2, double total_minutes = 30.0) {
  static const std::vector<std::string> names = {"Alice", "Bob", "Carol", "Dave",
                                                 "Erin",  "Frank", "Grace", "Heidi"};
  SessionConfig c;
  c.topic = "screen time";
  c.goals = {"understand habits"};
  c.total_minutes = total_minutes;
  for (std::size_t k = 0; k < persona_count; ++k) {
    c.personas.push_back(persona("p" + std::to_string(k + 1), names.at(k)));
  }
  return c;
}

inline std::unique_ptr<ScriptedBackend> scripted(
    std::vector<std::string> script,
    std::map<std::string, std::vector<std::string>, std::less<>> channels = {}) {
  BackendConfig c;
  c.kind = BackendKind::scripted;
  if (!script.empty() || channels.empty()) c.script = std::move(script);
  c.channels = std::move(channels);
  return std::make_unique<ScriptedBackend>(c);
}

inline Utterance utterance(std::string speaker, UtteranceKind kind, std::string text, int stage,
                           std::int64_t sequence) {
  Utterance u;
  u.speaker = std::move(speaker);
  u.kind = kind;
  u.estimated_minutes = estimate_minutes(text);
  u.text = std::move(text);
  u.stage_index = stage;
  u.sequence = sequence;
  return u;
}

inline std::string words(std::size_t n, const std::string& word = "word") {
  std::string s;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) s += ' ';
    s += word;
  }
  return s;
}

inline DiscussionPlan even_plan(int stages, double total) {
  DiscussionPlan plan;
  for (int k = 0; k < stages; ++k) {
    plan.stages.push_back(Stage{k, "Stage " + std::to_string(k + 1), "objective " + std::to_string(k),
                                total / stages});
  }
  return plan;
}

// Random valid transcript: every stage opens with an intro, carries a few
// turns, and is reflected; the final stage may be followed by a closing round.
inline Transcript random_transcript(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> stage_count(1, 4);
  std::uniform_int_distribution<int> turn_count(0, 6);
  std::uniform_int_distribution<int> word_count(1, 30);
  std::bernoulli_distribution coin(0.5);
  static const std::vector<std::string> vocabulary = {
      "screen", "time", "\"quoted\"", "caf\xc3\xa9", "tab\there", "line\nbreak", "\\slash",
      "emoji\xf0\x9f\x98\x80", "{brace}", "100%", "ok."};
  const auto text = [&] {
    std::string s;
    const int n = word_count(rng);
    for (int k = 0; k < n; ++k) {
      if (k) s += ' ';
      s += vocabulary[rng() % vocabulary.size()];
    }
    return s;
  };

  const int stages = stage_count(rng);
  Transcript t;
  t.config_digest = std::to_string(rng());
  std::uniform_real_distribution<double> minutes(0.1, 30.0);
  for (int k = 0; k < stages; ++k) {
    t.plan.stages.push_back(Stage{k, "Stage " + text(), text(), minutes(rng)});
  }
  const bool live = coin(rng);
  std::int64_t seq = 0;
  std::int64_t clock_ms = 1'700'000'000'000;
  const auto add = [&](std::string speaker, UtteranceKind kind, int stage) {
    auto u = utterance(std::move(speaker), kind, text(), stage, seq++);
    if (live) {
      clock_ms += static_cast<std::int64_t>(rng() % 10000);
      u.wall_clock = Timestamp(std::chrono::milliseconds(clock_ms));
      if (kind == UtteranceKind::human_response) u.estimated_minutes = 0.0;
    } else {
      u.estimated_minutes = std::ldexp(static_cast<double>(rng() % 100000), -7) + u.estimated_minutes;
    }
    return u;
  };
  const auto participant_kind = live ? UtteranceKind::human_response : UtteranceKind::participant_response;
  const bool complete = coin(rng);
  const int reflected = complete ? stages : static_cast<int>(rng() % static_cast<unsigned>(stages));
  for (int k = 0; k < stages && k <= reflected; ++k) {
    if (k == stages) break;
    t = append_utterance(std::move(t), add(std::string(kModeratorId), UtteranceKind::stage_intro, k));
    const int turns = turn_count(rng);
    for (int j = 0; j < turns; ++j) {
      if (coin(rng)) {
        t = append_utterance(std::move(t), add("p" + std::to_string(rng() % 4), participant_kind, k));
      } else {
        const auto kind = coin(rng) ? UtteranceKind::insight_question : UtteranceKind::inactive_prompt;
        t = append_utterance(std::move(t), add(std::string(kModeratorId), kind, k));
      }
    }
    if (k < reflected) {
      t = append_reflection(std::move(t),
                            add(std::string(kModeratorId), UtteranceKind::reflection_summary, k),
                            coin(rng));
    }
  }
  if (complete) {
    const int last = stages - 1;
    t = append_utterance(std::move(t),
                         add(std::string(kModeratorId), UtteranceKind::closing_question, last));
    const int replies = turn_count(rng);
    for (int j = 0; j < replies; ++j) {
      t = append_utterance(std::move(t), add("p" + std::to_string(j), participant_kind, last));
    }
  }
  return t;
}

}  // namespace focusagent::testing
