// SPDX-License-Identifier: Apache-2.0

#include "focusagent/error.hpp"

namespace focusagent {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::sequence_gap: return "SequenceGap";
    case ErrorKind::stage_out_of_range: return "StageOutOfRange";
    case ErrorKind::transcript_invariant: return "TranscriptInvariant";
    case ErrorKind::invalid_config: return "InvalidConfig";
    case ErrorKind::config_not_found: return "ConfigNotFound";
    case ErrorKind::template_error: return "TemplateError";
    case ErrorKind::precondition: return "PreconditionViolated";
    case ErrorKind::backend_timeout: return "BackendTimeout";
    case ErrorKind::script_exhausted: return "ScriptExhausted";
    case ErrorKind::transport_error: return "TransportError";
    case ErrorKind::malformed_score: return "MalformedScore";
    case ErrorKind::empty_response: return "EmptyResponse";
    case ErrorKind::plan_invalid: return "PlanInvalid";
    case ErrorKind::illegal_event: return "IllegalEvent";
    case ErrorKind::unknown_client: return "UnknownClient";
    case ErrorKind::session_closed: return "SessionClosed";
    case ErrorKind::encode_error: return "EncodeError";
    case ErrorKind::decode_error: return "DecodeError";
    case ErrorKind::header_missing: return "HeaderMissing";
    case ErrorKind::io_error: return "IoError";
    case ErrorKind::empty_reference: return "EmptyReference";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::zero_vector: return "ZeroVector";
    case ErrorKind::length_mismatch: return "LengthMismatch";
    case ErrorKind::unsupported_rate: return "UnsupportedRate";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

Error Error::at_line(ErrorKind kind, std::int64_t line, const std::string& message) {
  Error e(kind, "line " + std::to_string(line) + ": " + message);
  e.line_ = line;
  return e;
}

Error Error::with_position(int stage, std::int64_t sequence) const {
  Error e(kind_, std::string(what()) + " (stage " + std::to_string(stage + 1) + ", sequence " +
                     std::to_string(sequence) + ")");
  e.line_ = line_;
  e.stage_ = stage;
  e.sequence_ = sequence;
  return e;
}

}  // namespace focusagent
