// SPDX-License-Identifier: Apache-2.0

#include "focusagent/llm_gateway.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "focusagent/error.hpp"
#include "text_util.hpp"

namespace focusagent {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

void validate(const ChatRequest& request) {
  if (request.messages.empty() || request.messages.front().role != Role::system) {
    throw Error(ErrorKind::precondition, "chat request must start with a system message");
  }
  for (const auto& m : request.messages) {
    if (m.role != Role::system && m.content.empty()) {
      throw Error(ErrorKind::precondition, "user and assistant messages need content");
    }
  }
}

void validate(const BackendConfig& c) {
  if (!(c.request_timeout_seconds > 0.0)) {
    throw Error(ErrorKind::invalid_config, "request_timeout_seconds must be positive");
  }
  if (c.max_retries < 0) throw Error(ErrorKind::invalid_config, "max_retries must be >= 0");
  if (c.retry_backoff_seconds < 0.0) {
    throw Error(ErrorKind::invalid_config, "retry_backoff_seconds must be >= 0");
  }
  switch (c.kind) {
    case BackendKind::http:
      if (!c.endpoint || c.endpoint->empty() || !c.model_name || c.model_name->empty()) {
        throw Error(ErrorKind::invalid_config, "http backend requires endpoint and model_name");
      }
      break;
    case BackendKind::scripted:
      if (!c.script && c.channels.empty()) {
        throw Error(ErrorKind::invalid_config, "scripted backend requires a fixture script");
      }
      break;
  }
}

namespace {

std::vector<std::string> read_fixture_lines(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::config_not_found, "fixture file not found: " + file.string());
  std::vector<std::string> items;
  std::string line;
  std::int64_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (detail::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_string()) {
        throw Error::at_line(ErrorKind::decode_error, number,
                             file.filename().string() + ": fixture must be a JSON string");
      }
      items.push_back(j.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error::at_line(ErrorKind::decode_error, number,
                           file.filename().string() + ": " + e.what());
    }
  }
  return items;
}

}  // namespace

BackendConfig load_scripted_fixtures(const std::filesystem::path& path) {
  BackendConfig config;
  config.kind = BackendKind::scripted;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
      const std::string stem = entry.path().stem().string();
      auto items = read_fixture_lines(entry.path());
      if (stem == "script") {
        config.script = std::move(items);
      } else {
        config.channels.emplace(stem, std::move(items));
      }
    }
    if (!config.script && config.channels.empty()) {
      throw Error(ErrorKind::invalid_config, "no *.jsonl fixtures in " + path.string());
    }
  } else {
    config.script = read_fixture_lines(path);
  }
  return config;
}

std::string ChatBackend::complete(const ChatRequest& request) {
  validate(request);
  calls_.fetch_add(1);
  if (seed_ && !request.seed) {
    ChatRequest seeded = request;
    seeded.seed = seed_;
    return do_complete(seeded);
  }
  return do_complete(request);
}

ScriptedBackend::ScriptedBackend(const BackendConfig& config) {
  validate(config);
  if (config.kind != BackendKind::scripted) {
    throw Error(ErrorKind::invalid_config, "ScriptedBackend needs a scripted config");
  }
  if (config.script) script_.items = *config.script;
  for (const auto& [key, items] : config.channels) channels_.emplace(key, Queue{items, 0});
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mutex_);
  std::size_t n = script_.items.size() - script_.cursor;
  for (const auto& [key, q] : channels_) n += q.items.size() - q.cursor;
  return n;
}

std::string ScriptedBackend::do_complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  Queue* queue = &script_;
  std::string name = "script";
  if (!request.purpose.empty()) {
    const std::string specific = request.purpose + "." + request.agent;
    if (auto it = channels_.find(specific); !request.agent.empty() && it != channels_.end()) {
      queue = &it->second;
      name = specific;
    } else if (auto general = channels_.find(request.purpose); general != channels_.end()) {
      queue = &general->second;
      name = request.purpose;
    }
  }
  if (queue->cursor >= queue->items.size()) {
    throw Error(ErrorKind::script_exhausted, "scripted fixtures exhausted for '" + name + "'");
  }
  return queue->items[queue->cursor++];
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config) {
  validate(config);
  if (config.kind == BackendKind::http) return std::make_unique<HttpBackend>(config);
  return std::make_unique<ScriptedBackend>(config);
}

std::string complete(ChatBackend& backend, const ChatRequest& request) {
  return backend.complete(request);
}

std::string speaker_name(const SessionConfig& config, std::string_view speaker) {
  if (speaker == kModeratorId) return std::string(kModeratorName);
  for (const auto& p : config.personas) {
    if (p.id == speaker) return p.name;
  }
  return std::string(speaker);
}

std::vector<ChatMessage> build_agent_messages(const SessionConfig& config, const ContextView& view,
                                              const std::optional<Persona>& agent,
                                              std::string_view mission,
                                              const PromptLibrary& prompts) {
  std::ostringstream system;
  if (agent) {
    system << prompts.render(prompt::persona_identity,
                             {{"name", agent->name},
                              {"age", std::to_string(agent->age)},
                              {"occupation", agent->occupation},
                              {"nationality", agent->nationality},
                              {"personality", agent->personality}});
  } else {
    system << prompts.render(prompt::moderator_identity, {});
  }
  system << "\n\nTopic: " << config.topic << "\nGoals:";
  for (const auto& goal : config.goals) system << "\n- " << goal;
  if (!view.summaries.empty()) {
    system << "\n\nSummaries of earlier stages:";
    for (const auto& s : view.summaries) {
      system << "\nStage " << s.stage_index + 1 << ": " << s.text;
    }
  }
  if (!mission.empty()) system << "\n\n" << mission;

  const std::string self = agent ? agent->id : std::string(kModeratorId);
  std::vector<ChatMessage> messages;
  messages.reserve(view.tail.size() + 1);
  messages.push_back({Role::system, system.str()});
  for (const auto& u : view.tail) {
    if (u.speaker == self) {
      messages.push_back({Role::assistant, u.text});
    } else {
      messages.push_back({Role::user, speaker_name(config, u.speaker) + ": " + u.text});
    }
  }
  return messages;
}

EngagementScore parse_engagement(std::string_view text, std::string persona) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    const bool negative = start > 0 && text[start - 1] == '-';
    // Digits after "<digit>." are a fractional part, not a new integer.
    const bool fractional = start >= 2 && text[start - 1] == '.' &&
                            std::isdigit(static_cast<unsigned char>(text[start - 2]));
    const auto digits = text.substr(start, i - start);
    if (negative || fractional || digits.size() > 2) continue;
    const int value = std::stoi(std::string(digits));
    if (value >= 0 && value <= 10) return EngagementScore{std::move(persona), value};
  }
  throw Error(ErrorKind::malformed_score,
              "no engagement score in [0, 10] found in reply for " + persona);
}

std::string truncate_to_words(std::string_view text, int limit) {
  const auto tokens = detail::split_whitespace(text);
  if (limit <= 0) return {};
  if (tokens.size() <= static_cast<std::size_t>(limit)) return std::string(text);

  const auto ends_sentence = [](std::string_view token) {
    while (!token.empty() && std::string_view("\"')]}").find(token.back()) != std::string_view::npos) {
      token.remove_suffix(1);
    }
    return !token.empty() && std::string_view(".!?").find(token.back()) != std::string_view::npos;
  };
  const auto end_of = [&](std::size_t k) {
    const auto& tok = tokens[k];
    return static_cast<std::size_t>(tok.data() - text.data()) + tok.size();
  };
  const auto begin = static_cast<std::size_t>(tokens.front().data() - text.data());

  for (std::size_t k = static_cast<std::size_t>(limit); k > 0; --k) {
    if (ends_sentence(tokens[k - 1])) return std::string(text.substr(begin, end_of(k - 1) - begin));
  }
  return std::string(text.substr(begin, end_of(static_cast<std::size_t>(limit) - 1) - begin));
}

std::string enforce_word_limit(ChatBackend& backend, ChatRequest request, int limit,
                               const PromptLibrary& prompts) {
  if (limit < 10) throw Error(ErrorKind::precondition, "word limit must be at least 10");
  request.max_words_hint = limit;
  std::string reply = backend.complete(request);
  const std::size_t words = word_count(reply);
  if (words <= static_cast<std::size_t>(limit)) return reply;

  request.messages.push_back({Role::assistant, reply});
  request.messages.push_back(
      {Role::user, prompts.render(prompt::shorten, {{"word_count", std::to_string(words)},
                                                    {"word_limit", std::to_string(limit)}})});
  request.purpose = std::string(prompt::shorten);
  reply = backend.complete(request);
  if (word_count(reply) <= static_cast<std::size_t>(limit)) return reply;
  return truncate_to_words(reply, limit);
}

}  // namespace focusagent
