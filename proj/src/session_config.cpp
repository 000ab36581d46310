// SPDX-License-Identifier: Apache-2.0

#include "focusagent/session_config.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "focusagent/error.hpp"

namespace focusagent {

namespace {

[[noreturn]] void bad(std::string_view source, const std::string& message) {
  throw Error(ErrorKind::invalid_config, std::string(source) + ": " + message);
}

void reject_unknown_keys(const toml::table& table, const std::set<std::string_view>& known,
                         std::string_view where, std::string_view source) {
  for (const auto& [key, value] : table) {
    if (!known.contains(key.str())) {
      bad(source, "unknown key '" + std::string(key.str()) + "' in " + std::string(where));
    }
  }
}

std::string required_string(const toml::table& t, std::string_view key, std::string_view where,
                            std::string_view source) {
  const auto* node = t.get(key);
  if (!node) bad(source, std::string(where) + " is missing '" + std::string(key) + "'");
  const auto value = node->value<std::string>();
  if (!value) bad(source, std::string(where) + "." + std::string(key) + " must be a string");
  return *value;
}

double number(const toml::table& t, std::string_view key, double fallback,
              std::string_view source) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (const auto v = node->value_exact<double>()) return *v;
  if (const auto v = node->value_exact<std::int64_t>()) return static_cast<double>(*v);
  bad(source, std::string(key) + " must be a number");
}

std::optional<std::int64_t> integer(const toml::table& t, std::string_view key,
                                    std::string_view source) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (const auto v = node->value_exact<std::int64_t>()) return *v;
  bad(source, std::string(key) + " must be an integer");
}

}  // namespace

SessionConfig parse_session_config(std::string_view toml_text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << e.source().begin.line << ": " << e.description();
    bad(source, msg.str());
  }

  reject_unknown_keys(root,
                      {"topic", "goals", "total_minutes", "personas", "engagement_threshold",
                       "words_per_minute", "moderator_word_limit", "stage_count_hint",
                       "context_window", "silence_seconds"},
                      "session", source);

  SessionConfig config;
  config.topic = required_string(root, "topic", "session", source);

  const auto* goals = root.get_as<toml::array>("goals");
  if (!goals) bad(source, "goals must be an array of strings");
  for (const auto& g : *goals) {
    const auto text = g.value<std::string>();
    if (!text) bad(source, "goals must be an array of strings");
    config.goals.push_back(*text);
  }

  if (!root.get("total_minutes")) bad(source, "session is missing 'total_minutes'");
  config.total_minutes = number(root, "total_minutes", 0.0, source);
  config.engagement_threshold =
      number(root, "engagement_threshold", config.engagement_threshold, source);
  config.words_per_minute = number(root, "words_per_minute", config.words_per_minute, source);
  config.silence_seconds = number(root, "silence_seconds", config.silence_seconds, source);
  if (const auto v = integer(root, "moderator_word_limit", source)) {
    config.moderator_word_limit = static_cast<int>(*v);
  }
  if (const auto v = integer(root, "context_window", source)) {
    config.context_window = static_cast<int>(*v);
  }
  if (const auto v = integer(root, "stage_count_hint", source)) {
    config.stage_count_hint = static_cast<int>(*v);
  }

  const auto* personas = root.get_as<toml::array>("personas");
  if (!personas) bad(source, "at least one [[personas]] table is required");
  for (const auto& node : *personas) {
    const auto* table = node.as_table();
    if (!table) bad(source, "personas must be tables");
    reject_unknown_keys(*table,
                        {"id", "name", "age", "occupation", "nationality", "personality"},
                        "persona", source);
    Persona p;
    p.id = required_string(*table, "id", "persona", source);
    p.name = required_string(*table, "name", "persona " + p.id, source);
    const auto age = integer(*table, "age", source);
    if (!age) bad(source, "persona " + p.id + " is missing 'age'");
    p.age = static_cast<int>(*age);
    p.occupation = required_string(*table, "occupation", "persona " + p.id, source);
    p.nationality = required_string(*table, "nationality", "persona " + p.id, source);
    p.personality = required_string(*table, "personality", "persona " + p.id, source);
    config.personas.push_back(std::move(p));
  }

  try {
    validate(config);
  } catch (const Error& e) {
    bad(source, e.what());
  }
  return config;
}

SessionConfig load_session_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config_not_found, "config not found: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_session_config(buffer.str(), path.string());
}

std::string canonical_json(const SessionConfig& c) {
  nlohmann::json personas = nlohmann::json::array();
  for (const auto& p : c.personas) {
    personas.push_back({{"id", p.id},
                        {"name", p.name},
                        {"age", p.age},
                        {"occupation", p.occupation},
                        {"nationality", p.nationality},
                        {"personality", p.personality}});
  }
  nlohmann::json j = {
      {"topic", c.topic},
      {"goals", c.goals},
      {"total_minutes", c.total_minutes},
      {"personas", personas},
      {"engagement_threshold", c.engagement_threshold},
      {"words_per_minute", c.words_per_minute},
      {"moderator_word_limit", c.moderator_word_limit},
      {"stage_count_hint", c.stage_count_hint ? nlohmann::json(*c.stage_count_hint) : nullptr},
      {"context_window", c.context_window},
      {"silence_seconds", c.silence_seconds},
  };
  return j.dump();
}

std::string config_digest(const SessionConfig& config) {
  const std::string text = canonical_json(config);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), text.data(), text.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &length) != 1) {
    throw Error(ErrorKind::encode_error, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0x0f]);
  }
  return hex;
}

}  // namespace focusagent
