// SPDX-License-Identifier: Apache-2.0

// Evaluation around a speech-to-text pipeline: WER, voiceprint speaker
// matching, micro-F1 and an energy-based voice activity detector. ASR and
// embedding models stay outside; their outputs arrive as files.

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace focusagent {

// Lowercases, strips ASCII punctuation and splits on whitespace.
std::vector<std::string> normalize_tokens(std::string_view text);

struct WerResult {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int reference_length = 0;
  double rate = 0.0;

  bool operator==(const WerResult&) const = default;
};

// Minimum edit alignment with unit costs. Among equal-cost alignments the
// backtrace prefers match, then substitution, deletion, insertion.
// EmptyReference when `reference` is empty.
WerResult wer(std::span<const std::string> reference, std::span<const std::string> hypothesis);

struct Voiceprint {
  std::string persona;
  std::vector<double> embedding;
};

inline constexpr double kDefaultSpeakerTau = 0.25;

// DimensionMismatch or ZeroVector on bad input.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct SpeakerMatch {
  // Empty when the best similarity is below tau.
  std::optional<std::string> persona;
  double similarity = 0.0;
};

// Argmax cosine similarity over `voiceprints`, earliest on ties.
SpeakerMatch match_speaker(std::span<const double> query, std::span<const Voiceprint> voiceprints,
                           double tau = kDefaultSpeakerTau);

// Micro-averaged F1 from per-class TP/FP/FN. LengthMismatch unless both
// sequences have the same non-zero length.
double micro_f1(std::span<const std::string> predicted, std::span<const std::string> truth);

struct AudioSegment {
  double start_seconds = 0.0;
  double end_seconds = 0.0;
  std::string source;

  bool operator==(const AudioSegment&) const = default;
};

struct VadParams {
  double frame_seconds = 0.03;
  // A frame is voiced when its RMS exceeds noise_floor * ratio.
  double ratio = 3.0;
  double noise_percentile = 0.10;
  double min_silence_seconds = 0.3;
  double max_segment_seconds = 30.0;
  double hangover_seconds = 0.1;
};

// UnsupportedRate below 8000 Hz.
std::vector<AudioSegment> energy_vad(std::span<const double> samples, int sample_rate,
                                     const VadParams& params = {}, const std::string& source = {});

// Frame RMS values as used by energy_vad; the last frame may be partial.
std::vector<double> frame_rms(std::span<const double> samples, std::size_t frame_length);

struct PcmAudio {
  int sample_rate = 16000;
  // Normalized to [-1, 1).
  std::vector<double> samples;
};

// 16-bit mono PCM WAV. DecodeError for any other layout.
PcmAudio read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const PcmAudio& audio);

// "persona<TAB>v1 v2 ..." per line.
std::vector<Voiceprint> load_voiceprints(const std::filesystem::path& path);
// One space-separated vector per line.
std::vector<std::vector<double>> load_embeddings(const std::filesystem::path& path);
// One label per non-empty line.
std::vector<std::string> load_labels(const std::filesystem::path& path);

inline constexpr std::string_view kUnknownSpeaker = "unknown";

struct DiarizationRecord {
  int segment = 0;
  std::string predicted;
  std::string truth;
  double similarity = 0.0;
};

struct DiarizationReport {
  std::vector<DiarizationRecord> records;
  double micro_f1 = 0.0;
  std::optional<WerResult> wer;
};

// Labels each embedding with match_speaker (kUnknownSpeaker below tau) and
// scores the labels against `truth`.
DiarizationReport evaluate_diarization(std::span<const std::vector<double>> embeddings,
                                       std::span<const Voiceprint> voiceprints,
                                       std::span<const std::string> truth,
                                       double tau = kDefaultSpeakerTau);

// One {segment, predicted, truth, similarity} record per line, then a
// summary record.
std::string encode_report(const DiarizationReport& report);

}  // namespace focusagent
