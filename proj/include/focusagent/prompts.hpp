// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>

namespace focusagent {

// Template names. Each is also the request purpose that scripted fixture
// channels are keyed by.
namespace prompt {
inline constexpr std::string_view plan = "plan";
inline constexpr std::string_view new_stage = "new_stage";
inline constexpr std::string_view insights = "insights";
inline constexpr std::string_view inactive_participant = "inactive_participant";
inline constexpr std::string_view engagement = "engagement";
inline constexpr std::string_view participant_response = "participant_response";
inline constexpr std::string_view reflection = "reflection";
inline constexpr std::string_view anonymize = "anonymize";
inline constexpr std::string_view rephrase = "rephrase";
inline constexpr std::string_view shorten = "shorten";
inline constexpr std::string_view closing = "closing";
inline constexpr std::string_view moderator_identity = "moderator_identity";
inline constexpr std::string_view persona_identity = "persona_identity";
}  // namespace prompt

using TemplateVars = std::map<std::string, std::string, std::less<>>;

// Substitutes {{name}} placeholders. An unknown placeholder raises TemplateError.
std::string render_template(std::string_view text, const TemplateVars& vars);

class PromptLibrary {
 public:
  // The templates shipped in prompts/, compiled into the library.
  static const PromptLibrary& builtin();

  // Builtin templates overridden by every <name>.txt file found in `dir`.
  static PromptLibrary from_directory(const std::filesystem::path& dir);

  [[nodiscard]] const std::string& text(std::string_view name) const;
  [[nodiscard]] std::string render(std::string_view name, const TemplateVars& vars) const;

  void set(std::string name, std::string text);

 private:
  std::map<std::string, std::string, std::less<>> texts_;
};

}  // namespace focusagent
