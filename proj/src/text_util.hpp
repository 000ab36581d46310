// SPDX-License-Identifier: Apache-2.0

// Small ASCII text helpers shared by the library sources.

#pragma once

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace focusagent::detail {

inline bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }

// Letters, digits, underscore and any non-ASCII byte count as word characters,
// so UTF-8 names are matched as whole words.
inline bool is_word_char(char ch) {
  const auto u = static_cast<unsigned char>(ch);
  return u >= 0x80 || std::isalnum(u) != 0 || ch == '_';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline char ascii_lower(char ch) {
  return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
}

inline char ascii_upper(char ch) {
  return (ch >= 'a' && ch <= 'z') ? static_cast<char>(ch - 'a' + 'A') : ch;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](char c) { return ascii_lower(c); });
  return out;
}

inline std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) tokens.push_back(s.substr(start, i - start));
  }
  return tokens;
}

// Lowercases, drops ASCII punctuation and collapses whitespace runs.
inline std::string normalize_words(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (const char ch : s) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 0x80 && std::ispunct(u) != 0) continue;
    if (is_space(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ascii_lower(ch));
  }
  return out;
}

// Shortest readable form: 60 -> "60", 7.5 -> "7.5".
inline std::string format_number(double value) {
  std::ostringstream os;
  os << std::setprecision(6) << value;
  return os.str();
}

}  // namespace focusagent::detail
