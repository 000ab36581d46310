// SPDX-License-Identifier: Apache-2.0

// Chat-completion backends and the role-mapped message construction used by
// every agent call.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "focusagent/core_model.hpp"
#include "focusagent/prompts.hpp"

namespace focusagent {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  std::optional<int> max_words_hint;
  std::optional<double> temperature_hint;
  std::optional<std::uint64_t> seed;
  // Template name that produced the request and the agent it speaks for.
  // Scripted backends route fixtures by these; HTTP backends ignore them.
  std::string purpose;
  std::string agent;
};

// First message must be the system message; user/assistant content non-empty.
void validate(const ChatRequest& request);

enum class BackendKind { scripted, http };

struct BackendConfig {
  BackendKind kind = BackendKind::scripted;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_name;
  double request_timeout_seconds = 60.0;
  int max_retries = 2;
  // First retry delay; doubles after every failed attempt.
  double retry_backoff_seconds = 1.0;
  std::optional<std::string> api_key;
  // Ordered fixtures consumed by requests that match no channel.
  std::optional<std::vector<std::string>> script;
  // Fixture queues keyed "purpose.agent" or "purpose"; the most specific
  // existing key wins.
  std::map<std::string, std::vector<std::string>, std::less<>> channels;
};

void validate(const BackendConfig& config);

// Loads a fixture directory: every <channel>.jsonl file holds one JSON string
// per line; script.jsonl is the unkeyed ordered script. A plain .jsonl file
// path loads just the ordered script.
BackendConfig load_scripted_fixtures(const std::filesystem::path& path);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  std::string complete(const ChatRequest& request);

  // Number of complete() calls issued so far, failed ones included.
  [[nodiscard]] std::uint64_t call_count() const noexcept { return calls_.load(); }

  // Seed stamped on requests that carry none.
  void set_seed(std::optional<std::uint64_t> seed) { seed_ = seed; }

 protected:
  virtual std::string do_complete(const ChatRequest& request) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
  std::optional<std::uint64_t> seed_;
};

class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(const BackendConfig& config);

  // Fixtures not yet consumed, summed over every queue.
  [[nodiscard]] std::size_t remaining() const;

 protected:
  std::string do_complete(const ChatRequest& request) override;

 private:
  struct Queue {
    std::vector<std::string> items;
    std::size_t cursor = 0;
  };

  mutable std::mutex mutex_;
  Queue script_;
  std::map<std::string, Queue, std::less<>> channels_;
};

// Speaks the chat-completions wire format: POST {model, messages, ...} and
// reads choices[0].message.content.
class HttpBackend final : public ChatBackend {
 public:
  explicit HttpBackend(const BackendConfig& config);

  // Attempts made by the most recent complete() call.
  [[nodiscard]] int last_attempts() const noexcept { return last_attempts_.load(); }

  // Process-wide count of constructed HTTP backends.
  static std::uint64_t instances() noexcept;

 protected:
  std::string do_complete(const ChatRequest& request) override;

 private:
  BackendConfig config_;
  std::string base_url_;
  std::string path_;
  std::atomic<int> last_attempts_{0};
};

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config);

// Free-function form of ChatBackend::complete.
std::string complete(ChatBackend& backend, const ChatRequest& request);

// Speaker ids resolve to persona names; the moderator id maps to "Moderator".
std::string speaker_name(const SessionConfig& config, std::string_view speaker);

// Message 0 is a system message holding the agent identity (persona fields,
// or the moderator brief when `agent` is empty), the topic and goals, every
// stage summary, and the mission. Each tail utterance by the agent becomes an
// assistant message; everyone else's becomes a user message prefixed
// "<speaker name>: ".
std::vector<ChatMessage> build_agent_messages(const SessionConfig& config, const ContextView& view,
                                              const std::optional<Persona>& agent,
                                              std::string_view mission,
                                              const PromptLibrary& prompts = PromptLibrary::builtin());

struct EngagementScore {
  std::string persona;
  int value = 0;

  bool operator==(const EngagementScore&) const = default;
};

// First integer in [0, 10] appearing in `text`; MalformedScore otherwise.
EngagementScore parse_engagement(std::string_view text, std::string persona);

// Keeps at most `limit` words, cutting at the last sentence end within the
// limit when there is one.
std::string truncate_to_words(std::string_view text, int limit);

// Completes `request`; an over-long reply is re-asked once with a shortening
// instruction and truncated if still too long.
std::string enforce_word_limit(ChatBackend& backend, ChatRequest request, int limit,
                               const PromptLibrary& prompts = PromptLibrary::builtin());

}  // namespace focusagent
