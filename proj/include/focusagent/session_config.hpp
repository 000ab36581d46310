// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "focusagent/core_model.hpp"

namespace focusagent {

// Reads a TOML session file whose keys mirror SessionConfig field names:
//
//   topic = "Digital well-being"
//   goals = ["...", "..."]
//   total_minutes = 60
//   # optional: engagement_threshold, words_per_minute, moderator_word_limit,
//   #           stage_count_hint, context_window, silence_seconds
//   [[personas]]
//   id = "p1"
//   name = "Alice"
//   age = 34
//   occupation = "..."
//   nationality = "..."
//   personality = "..."
//
// Unknown keys are rejected. Missing file raises ConfigNotFound; anything
// malformed raises InvalidConfig.
SessionConfig load_session_config(const std::filesystem::path& path);
SessionConfig parse_session_config(std::string_view toml_text, std::string_view source = "config");

// Canonical single-line JSON form of the config (sorted keys).
std::string canonical_json(const SessionConfig& config);

// Lowercase hex SHA-256 of canonical_json(config).
std::string config_digest(const SessionConfig& config);

}  // namespace focusagent
