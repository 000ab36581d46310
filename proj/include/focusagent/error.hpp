// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace focusagent {

enum class ErrorKind {
  // transcript
  sequence_gap,
  stage_out_of_range,
  transcript_invariant,
  // configuration
  invalid_config,
  config_not_found,
  template_error,
  precondition,
  // backends
  backend_timeout,
  script_exhausted,
  transport_error,
  malformed_score,
  empty_response,
  // engines
  plan_invalid,
  illegal_event,
  // live session
  unknown_client,
  session_closed,
  // persistence
  encode_error,
  decode_error,
  header_missing,
  io_error,
  // evaluation
  empty_reference,
  dimension_mismatch,
  zero_vector,
  length_mismatch,
  unsupported_rate,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library. `line()` is set for decode errors;
// `stage()`/`sequence()` are set when a simulation fails mid-run.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  static Error at_line(ErrorKind kind, std::int64_t line, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::optional<std::int64_t> line() const noexcept { return line_; }
  [[nodiscard]] std::optional<int> stage() const noexcept { return stage_; }
  [[nodiscard]] std::optional<std::int64_t> sequence() const noexcept { return sequence_; }

  // Returns a copy tagged with the simulation position at which it surfaced.
  [[nodiscard]] Error with_position(int stage, std::int64_t sequence) const;

 private:
  ErrorKind kind_;
  std::optional<std::int64_t> line_;
  std::optional<int> stage_;
  std::optional<std::int64_t> sequence_;
};

}  // namespace focusagent
