// SPDX-License-Identifier: Apache-2.0

#include "focusagent/speech_eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "focusagent/error.hpp"
#include "text_util.hpp"

namespace focusagent {

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  for (const auto word : detail::split_whitespace(text)) {
    std::string token;
    for (const char ch : word) {
      if (std::ispunct(static_cast<unsigned char>(ch))) continue;
      token += detail::ascii_lower(ch);
    }
    if (!token.empty()) tokens.push_back(std::move(token));
  }
  return tokens;
}

WerResult wer(std::span<const std::string> ref, std::span<const std::string> hyp) {
  if (ref.empty()) throw Error(ErrorKind::empty_reference, "reference has no tokens");
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<int> d((n + 1) * (m + 1));
  const auto at = [&](std::size_t i, std::size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  WerResult r;
  r.reference_length = static_cast<int>(n);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const int here = at(i, j);
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && here == at(i - 1, j - 1)) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && here == at(i - 1, j - 1) + 1) {
      ++r.substitutions;
      --i;
      --j;
    } else if (i > 0 && here == at(i - 1, j) + 1) {
      ++r.deletions;
      --i;
    } else {
      ++r.insertions;
      --j;
    }
  }
  r.rate = static_cast<double>(r.substitutions + r.deletions + r.insertions) /
           static_cast<double>(r.reference_length);
  return r;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::dimension_mismatch, "vectors have dimensions " +
                                                   std::to_string(a.size()) + " and " +
                                                   std::to_string(b.size()));
  }
  const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  const double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
  const double nb = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::zero_vector, "cosine of a zero vector");
  return dot / (na * nb);
}

SpeakerMatch match_speaker(std::span<const double> query, std::span<const Voiceprint> voiceprints,
                           double tau) {
  if (voiceprints.empty()) throw Error(ErrorKind::precondition, "no voiceprints enrolled");
  const Voiceprint* best = nullptr;
  double best_sim = 0.0;
  for (const auto& v : voiceprints) {
    const double sim = cosine_similarity(query, v.embedding);
    if (!best || sim > best_sim) {
      best = &v;
      best_sim = sim;
    }
  }
  SpeakerMatch match;
  match.similarity = best_sim;
  if (best_sim >= tau) match.persona = best->persona;
  return match;
}

double micro_f1(std::span<const std::string> predicted, std::span<const std::string> truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw Error(ErrorKind::length_mismatch, "predicted and truth need equal non-zero lengths");
  }
  struct Counts {
    long tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts, std::less<>> classes;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    if (predicted[k] == truth[k]) {
      ++classes[predicted[k]].tp;
    } else {
      ++classes[predicted[k]].fp;
      ++classes[truth[k]].fn;
    }
  }
  long tp = 0, fp = 0, fn = 0;
  for (const auto& [label, c] : classes) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

std::vector<double> frame_rms(std::span<const double> samples, std::size_t frame_length) {
  std::vector<double> rms;
  for (std::size_t start = 0; start < samples.size(); start += frame_length) {
    const std::size_t end = std::min(samples.size(), start + frame_length);
    double sum = 0.0;
    for (std::size_t k = start; k < end; ++k) sum += samples[k] * samples[k];
    rms.push_back(std::sqrt(sum / static_cast<double>(end - start)));
  }
  return rms;
}

namespace {

struct FrameRun {
  std::size_t begin;  // first frame
  std::size_t end;    // one past the last frame
};

void split_long(const FrameRun& run, std::span<const double> rms, std::size_t max_frames,
                std::vector<FrameRun>& out) {
  if (run.end - run.begin <= max_frames || run.end - run.begin < 3) {
    out.push_back(run);
    return;
  }
  std::size_t quietest = run.begin + 1;
  for (std::size_t f = run.begin + 1; f + 1 < run.end; ++f) {
    if (rms[f] < rms[quietest]) quietest = f;
  }
  split_long({run.begin, quietest}, rms, max_frames, out);
  split_long({quietest + 1, run.end}, rms, max_frames, out);
}

}  // namespace

std::vector<AudioSegment> energy_vad(std::span<const double> samples, int sample_rate,
                                     const VadParams& p, const std::string& source) {
  if (sample_rate < 8000) {
    throw Error(ErrorKind::unsupported_rate,
                "sample rate " + std::to_string(sample_rate) + " Hz is below 8000 Hz");
  }
  if (!(p.frame_seconds > 0.0) || !(p.ratio > 0.0) || p.noise_percentile < 0.0 ||
      p.noise_percentile > 1.0 || p.min_silence_seconds < 0.0 || p.hangover_seconds < 0.0 ||
      !(p.max_segment_seconds > p.frame_seconds)) {
    throw Error(ErrorKind::precondition, "invalid VAD parameters");
  }
  const auto frame_length =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(p.frame_seconds * sample_rate)));
  const auto rms = frame_rms(samples, frame_length);
  if (rms.empty()) return {};

  auto sorted = rms;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(
      std::floor(p.noise_percentile * static_cast<double>(sorted.size() - 1)));
  const double threshold = sorted[rank] * p.ratio;

  const double frame_dur = static_cast<double>(frame_length) / sample_rate;
  std::vector<FrameRun> runs;
  for (std::size_t f = 0; f < rms.size(); ++f) {
    if (rms[f] <= threshold) continue;
    if (!runs.empty() && runs.back().end == f) {
      runs.back().end = f + 1;
    } else {
      runs.push_back({f, f + 1});
    }
  }

  std::vector<FrameRun> merged;
  for (const auto& run : runs) {
    const bool short_gap =
        !merged.empty() &&
        static_cast<double>(run.begin - merged.back().end) * frame_dur < p.min_silence_seconds;
    if (short_gap) {
      merged.back().end = run.end;
    } else {
      merged.push_back(run);
    }
  }

  const auto max_frames = static_cast<std::size_t>(std::floor(p.max_segment_seconds / frame_dur));
  std::vector<FrameRun> pieces;
  for (const auto& run : merged) split_long(run, rms, max_frames, pieces);

  const double duration = static_cast<double>(samples.size()) / sample_rate;
  const auto raw_start = [&](const FrameRun& r) { return static_cast<double>(r.begin) * frame_dur; };
  const auto raw_end = [&](const FrameRun& r) {
    return std::min(duration, static_cast<double>(r.end) * frame_dur);
  };

  std::vector<AudioSegment> segments;
  double previous_end = 0.0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const double start = raw_start(pieces[k]);
    const double end = raw_end(pieces[k]);
    const double next_start = k + 1 < pieces.size() ? raw_start(pieces[k + 1]) : duration;
    double padded_start = std::max({start - p.hangover_seconds, 0.0, previous_end});
    double padded_end = std::min(end + p.hangover_seconds, next_start);
    // Padding gives way first at the end, then at the start.
    if (padded_end - padded_start > p.max_segment_seconds) {
      padded_end = std::max(end, padded_start + p.max_segment_seconds);
      if (padded_end - padded_start > p.max_segment_seconds) {
        padded_start = padded_end - p.max_segment_seconds;
      }
    }
    segments.push_back({padded_start, padded_end, source});
    previous_end = padded_end;
  }
  return segments;
}

namespace {

std::uint32_t read_u32(const std::string& b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t read_u16(const std::string& b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

void put_u32(std::string& b, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) b += static_cast<char>((v >> (8 * k)) & 0xFF);
}

void put_u16(std::string& b, std::uint16_t v) {
  b += static_cast<char>(v & 0xFF);
  b += static_cast<char>((v >> 8) & 0xFF);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<double> parse_vector(std::string_view text, std::int64_t line,
                                 const std::filesystem::path& path) {
  std::vector<double> values;
  for (const auto token : detail::split_whitespace(text)) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw Error::at_line(ErrorKind::decode_error, line,
                           path.filename().string() + ": not a number: " + std::string(token));
    }
    values.push_back(v);
  }
  return values;
}

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot read " + path.string());
  std::string line;
  std::int64_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    f(std::string_view(line), number);
  }
}

}  // namespace

PcmAudio read_wav(const std::filesystem::path& path) {
  const std::string b = read_file(path);
  const auto bad = [&](const std::string& why) {
    return Error(ErrorKind::decode_error, path.string() + ": " + why);
  };
  if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
    throw bad("not a RIFF/WAVE file");
  }
  std::optional<int> rate;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::string id = b.substr(pos, 4);
    const std::uint32_t size = read_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > b.size()) throw bad("truncated chunk " + id);
    if (id == "fmt ") {
      if (size < 16) throw bad("short fmt chunk");
      const auto format = read_u16(b, body);
      const auto channels = read_u16(b, body + 2);
      const auto bits = read_u16(b, body + 14);
      if (format != 1 || channels != 1 || bits != 16) throw bad("expected 16-bit mono PCM");
      rate = static_cast<int>(read_u32(b, body + 4));
    } else if (id == "data") {
      if (!rate) throw bad("data chunk before fmt chunk");
      PcmAudio audio;
      audio.sample_rate = *rate;
      audio.samples.reserve(size / 2);
      for (std::size_t k = 0; k + 1 < size; k += 2) {
        const auto raw = static_cast<std::int16_t>(read_u16(b, body + k));
        audio.samples.push_back(static_cast<double>(raw) / 32768.0);
      }
      return audio;
    }
    pos = body + size + (size & 1U);
  }
  throw bad("no data chunk");
}

void write_wav(const std::filesystem::path& path, const PcmAudio& audio) {
  std::string data;
  for (const double s : audio.samples) {
    const double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    put_u16(data, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(clamped * 32768.0))));
  }
  std::string b = "RIFF";
  put_u32(b, static_cast<std::uint32_t>(36 + data.size()));
  b += "WAVEfmt ";
  put_u32(b, 16);
  put_u16(b, 1);
  put_u16(b, 1);
  put_u32(b, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(b, static_cast<std::uint32_t>(audio.sample_rate * 2));
  put_u16(b, 2);
  put_u16(b, 16);
  b += "data";
  put_u32(b, static_cast<std::uint32_t>(data.size()));
  b += data;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(b.data(), static_cast<std::streamsize>(b.size()))) {
    throw Error(ErrorKind::io_error, "cannot write " + path.string());
  }
}

std::vector<Voiceprint> load_voiceprints(const std::filesystem::path& path) {
  std::vector<Voiceprint> prints;
  for_each_line(path, [&](std::string_view line, std::int64_t number) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error::at_line(ErrorKind::decode_error, number, "expected persona<TAB>vector");
    }
    Voiceprint v;
    v.persona = std::string(detail::trim(line.substr(0, tab)));
    v.embedding = parse_vector(line.substr(tab + 1), number, path);
    if (v.persona.empty() || v.embedding.empty()) {
      throw Error::at_line(ErrorKind::decode_error, number, "empty persona or vector");
    }
    if (!prints.empty() && prints.front().embedding.size() != v.embedding.size()) {
      throw Error::at_line(ErrorKind::dimension_mismatch, number,
                           "voiceprint dimension differs from the first one");
    }
    prints.push_back(std::move(v));
  });
  return prints;
}

std::vector<std::vector<double>> load_embeddings(const std::filesystem::path& path) {
  std::vector<std::vector<double>> vectors;
  for_each_line(path, [&](std::string_view line, std::int64_t number) {
    vectors.push_back(parse_vector(line, number, path));
  });
  return vectors;
}

std::vector<std::string> load_labels(const std::filesystem::path& path) {
  std::vector<std::string> labels;
  for_each_line(path, [&](std::string_view line, std::int64_t) {
    labels.emplace_back(detail::trim(line));
  });
  return labels;
}

DiarizationReport evaluate_diarization(std::span<const std::vector<double>> embeddings,
                                       std::span<const Voiceprint> voiceprints,
                                       std::span<const std::string> truth, double tau) {
  if (embeddings.size() != truth.size()) {
    throw Error(ErrorKind::length_mismatch, std::to_string(embeddings.size()) +
                                                " embeddings but " + std::to_string(truth.size()) +
                                                " truth labels");
  }
  DiarizationReport report;
  std::vector<std::string> predicted;
  for (std::size_t k = 0; k < embeddings.size(); ++k) {
    const auto match = match_speaker(embeddings[k], voiceprints, tau);
    DiarizationRecord r;
    r.segment = static_cast<int>(k);
    r.predicted = match.persona.value_or(std::string(kUnknownSpeaker));
    r.truth = truth[k];
    r.similarity = match.similarity;
    predicted.push_back(r.predicted);
    report.records.push_back(std::move(r));
  }
  report.micro_f1 = micro_f1(predicted, truth);
  return report;
}

std::string encode_report(const DiarizationReport& report) {
  std::string out;
  for (const auto& r : report.records) {
    nlohmann::ordered_json j = {{"segment", r.segment},
                                {"predicted", r.predicted},
                                {"truth", r.truth},
                                {"similarity", r.similarity}};
    out += j.dump() + "\n";
  }
  nlohmann::ordered_json summary = {{"summary", true},
                                    {"segments", report.records.size()},
                                    {"micro_f1", report.micro_f1}};
  if (report.wer) {
    summary["substitutions"] = report.wer->substitutions;
    summary["deletions"] = report.wer->deletions;
    summary["insertions"] = report.wer->insertions;
    summary["reference_length"] = report.wer->reference_length;
    summary["wer"] = report.wer->rate;
  }
  out += summary.dump() + "\n";
  return out;
}

}  // namespace focusagent
