// SPDX-License-Identifier: Apache-2.0

#include "focusagent/transcript_store.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "focusagent/error.hpp"
#include "text_util.hpp"

namespace focusagent {

namespace {

using ordered_json = nlohmann::ordered_json;

double finite(double value, std::string_view field) {
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::encode_error, std::string(field) + " is not a finite number");
  }
  return value;
}

ordered_json header_record(const Transcript& t) {
  ordered_json stages = ordered_json::array();
  for (const auto& s : t.plan.stages) {
    stages.push_back({{"index", s.index},
                      {"title", s.title},
                      {"objective", s.objective},
                      {"allocated_minutes", finite(s.allocated_minutes, "allocated_minutes")}});
  }
  return {{"record", "header"},
          {"format", kTranscriptFormat},
          {"config_digest", t.config_digest},
          {"plan", {{"stages", std::move(stages)}}}};
}

ordered_json utterance_record(const Utterance& u, const Transcript& t, std::size_t& next_summary) {
  ordered_json j = {{"record", "utterance"},
                    {"sequence", u.sequence},
                    {"speaker", u.speaker},
                    {"kind", to_string(u.kind)},
                    {"stage_index", u.stage_index},
                    {"text", u.text},
                    {"estimated_minutes", finite(u.estimated_minutes, "estimated_minutes")}};
  if (u.wall_clock) {
    j["wall_clock"] = u.wall_clock->time_since_epoch().count();
  } else {
    j["wall_clock"] = nullptr;
  }
  if (u.kind == UtteranceKind::reflection_summary) {
    if (next_summary >= t.summaries.size()) {
      throw Error(ErrorKind::encode_error, "reflection without stage summary");
    }
    j["anonymized"] = t.summaries[next_summary++].anonymized;
  }
  return j;
}

template <typename T>
T field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw std::invalid_argument(std::string("missing field ") + name);
  return j.at(name).get<T>();
}

Stage decode_stage(const nlohmann::json& j) {
  Stage s;
  s.index = field<int>(j, "index");
  s.title = field<std::string>(j, "title");
  s.objective = field<std::string>(j, "objective");
  s.allocated_minutes = field<double>(j, "allocated_minutes");
  return s;
}

Transcript decode_header(const nlohmann::json& j) {
  if (field<std::string>(j, "format") != kTranscriptFormat) {
    throw std::invalid_argument("unsupported format " + j.at("format").get<std::string>());
  }
  Transcript t;
  t.config_digest = field<std::string>(j, "config_digest");
  const auto& plan = j.at("plan");
  for (const auto& s : plan.at("stages")) t.plan.stages.push_back(decode_stage(s));
  return t;
}

std::pair<Utterance, bool> decode_utterance(const nlohmann::json& j) {
  if (field<std::string>(j, "record") != "utterance") {
    throw std::invalid_argument("expected an utterance record");
  }
  Utterance u;
  u.sequence = field<std::int64_t>(j, "sequence");
  u.speaker = field<std::string>(j, "speaker");
  const auto kind_text = field<std::string>(j, "kind");
  const auto kind = parse_utterance_kind(kind_text);
  if (!kind) throw std::invalid_argument("unknown utterance kind " + kind_text);
  u.kind = *kind;
  u.stage_index = field<int>(j, "stage_index");
  u.text = field<std::string>(j, "text");
  u.estimated_minutes = field<double>(j, "estimated_minutes");
  if (!j.contains("wall_clock")) throw std::invalid_argument("missing field wall_clock");
  if (const auto& wc = j.at("wall_clock"); !wc.is_null()) {
    u.wall_clock = Timestamp(std::chrono::milliseconds(wc.get<std::int64_t>()));
  }
  bool anonymized = false;
  if (u.kind == UtteranceKind::reflection_summary) anonymized = field<bool>(j, "anonymized");
  return {std::move(u), anonymized};
}

}  // namespace

std::string encode_transcript(const Transcript& transcript) {
  std::string out;
  try {
    out += header_record(transcript).dump();
    out += '\n';
    std::size_t next_summary = 0;
    for (const auto& u : transcript.utterances) {
      out += utterance_record(u, transcript, next_summary).dump();
      out += '\n';
    }
  } catch (const nlohmann::json::type_error& e) {
    throw Error(ErrorKind::encode_error, e.what());
  }
  return out;
}

Transcript decode_transcript(std::string_view content) {
  std::optional<Transcript> transcript;
  std::int64_t line_number = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const auto end = std::min(content.find('\n', pos), content.size());
    const auto line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (detail::trim(line).empty()) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error::at_line(ErrorKind::decode_error, line_number, e.what());
    }

    if (!transcript) {
      if (!j.is_object() || !j.contains("record") || j["record"] != "header") {
        throw Error::at_line(ErrorKind::header_missing, line_number,
                             "first record is not a transcript header");
      }
      try {
        transcript = decode_header(j);
      } catch (const std::exception& e) {
        throw Error::at_line(ErrorKind::decode_error, line_number, e.what());
      }
      continue;
    }

    try {
      if (!j.is_object()) throw std::invalid_argument("record is not an object");
      auto [u, anonymized] = decode_utterance(j);
      if (u.kind == UtteranceKind::reflection_summary) {
        transcript = append_reflection(std::move(*transcript), std::move(u), anonymized);
      } else {
        transcript = append_utterance(std::move(*transcript), std::move(u));
      }
    } catch (const std::exception& e) {
      throw Error::at_line(ErrorKind::decode_error, line_number, e.what());
    }
  }
  if (!transcript) throw Error(ErrorKind::header_missing, "transcript has no header record");
  return std::move(*transcript);
}

void persist_transcript(const Transcript& transcript, const std::filesystem::path& path) {
  const auto content = encode_transcript(transcript);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw Error(ErrorKind::io_error, "write failed: " + path.string());
}

Transcript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return decode_transcript(buffer.str());
}

std::string format_minutes(const Transcript& transcript,
                           const std::optional<SessionConfig>& config) {
  const auto name_of = [&](const std::string& id) {
    if (id == kModeratorId) return std::string(kModeratorName);
    if (config) {
      for (const auto& p : config->personas) {
        if (p.id == id) return p.name;
      }
    }
    return id;
  };

  std::ostringstream out;
  out << "Focus group minutes\n";
  out << "Config digest: " << transcript.config_digest << "\n";
  int stage = -1;
  bool closing = false;
  for (const auto& u : transcript.utterances) {
    if (u.kind == UtteranceKind::closing_question && !closing) {
      closing = true;
      out << "\nClosing round\n";
    } else if (!closing && u.stage_index != stage) {
      stage = u.stage_index;
      const auto& s = transcript.plan.stages.at(static_cast<std::size_t>(stage));
      out << "\nStage " << stage + 1 << ": " << s.title << " ("
          << detail::format_number(s.allocated_minutes) << " min)\n";
      out << "Objective: " << s.objective << "\n";
    }
    if (u.kind == UtteranceKind::reflection_summary) {
      out << "Summary: " << u.text << "\n";
    } else {
      out << name_of(u.speaker) << ": " << u.text << "\n";
    }
  }
  return out.str();
}

}  // namespace focusagent
