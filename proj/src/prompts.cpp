// SPDX-License-Identifier: Apache-2.0

#include "focusagent/prompts.hpp"

#include <fstream>
#include <sstream>

#include "focusagent/error.hpp"
#include "text_util.hpp"

namespace focusagent {

namespace detail {
const std::map<std::string, std::string, std::less<>>& builtin_prompt_texts();
}

std::string render_template(std::string_view text, const TemplateVars& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw Error(ErrorKind::template_error, "unterminated placeholder in template");
    }
    out.append(text.substr(pos, open - pos));
    const auto key = detail::trim(text.substr(open + 2, close - open - 2));
    const auto it = vars.find(key);
    if (it == vars.end()) {
      throw Error(ErrorKind::template_error, "no value for placeholder {{" + std::string(key) + "}}");
    }
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

const PromptLibrary& PromptLibrary::builtin() {
  static const PromptLibrary library = [] {
    PromptLibrary lib;
    for (const auto& [name, text] : detail::builtin_prompt_texts()) lib.set(name, text);
    return lib;
  }();
  return library;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::config_not_found, "prompt directory not found: " + dir.string());
  }
  PromptLibrary lib = builtin();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    lib.set(entry.path().stem().string(), buffer.str());
  }
  return lib;
}

const std::string& PromptLibrary::text(std::string_view name) const {
  const auto it = texts_.find(name);
  if (it == texts_.end()) {
    throw Error(ErrorKind::template_error, "unknown prompt template '" + std::string(name) + "'");
  }
  return it->second;
}

std::string PromptLibrary::render(std::string_view name, const TemplateVars& vars) const {
  return std::string(detail::trim(render_template(text(name), vars)));
}

void PromptLibrary::set(std::string name, std::string text) {
  texts_.insert_or_assign(std::move(name), std::move(text));
}

}  // namespace focusagent
