// SPDX-License-Identifier: Apache-2.0

// Line-delimited transcript files (.fgt.jsonl): one header record holding the
// config digest and plan, then one record per utterance.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "focusagent/core_model.hpp"

namespace focusagent {

inline constexpr std::string_view kTranscriptFormat = "fgt/1";

// EncodeError when a text field is not valid UTF-8 or a number is not finite.
std::string encode_transcript(const Transcript& transcript);

// DecodeError carries the 1-based line number of the offending record;
// HeaderMissing when the first record is not a header.
Transcript decode_transcript(std::string_view content);

void persist_transcript(const Transcript& transcript, const std::filesystem::path& path);
Transcript load_transcript(const std::filesystem::path& path);

// Plain-text minutes. Speaker ids are resolved through `config` when given.
std::string format_minutes(const Transcript& transcript,
                           const std::optional<SessionConfig>& config = std::nullopt);

}  // namespace focusagent
