// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "focusagent/error.hpp"
#include "focusagent/speech_eval.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace focusagent {
namespace {

using Tokens = std::vector<std::string>;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::io_error;
}

TEST(NormalizeTokens, Examples) {
  EXPECT_EQ(normalize_tokens("The cat, sat."), (Tokens{"the", "cat", "sat"}));
  EXPECT_EQ(normalize_tokens(""), Tokens{});
  EXPECT_EQ(normalize_tokens("don't  stop"), (Tokens{"dont", "stop"}));
  EXPECT_EQ(normalize_tokens(" -- Hello\tWORLD! "), (Tokens{"hello", "world"}));
}

TEST(Wer, Identity) {
  const Tokens t = {"the", "cat", "sat"};
  EXPECT_EQ(wer(t, t), (WerResult{0, 0, 0, 3, 0.0}));
}

TEST(Wer, SingleSubstitution) {
  const auto r = wer(Tokens{"a", "b", "c"}, Tokens{"a", "x", "c"});
  EXPECT_EQ(r.substitutions, 1);
  EXPECT_EQ(r.deletions + r.insertions, 0);
  EXPECT_DOUBLE_EQ(r.rate, 1.0 / 3.0);
}

TEST(Wer, TwoInsertions) {
  const Tokens ref = {"a", "b"};
  const Tokens hyp = {"a", "x", "y", "b"};
  const auto r = wer(ref, hyp);
  EXPECT_EQ(r.insertions, 2);
  EXPECT_EQ(r.substitutions + r.deletions, 0);
  EXPECT_DOUBLE_EQ(r.rate, 1.0);
  EXPECT_EQ(oracle::edit_cost(ref, hyp), 2);
}

TEST(Wer, DeletionsAndEmptyHypothesis) {
  EXPECT_EQ(wer(Tokens{"a", "b", "c"}, Tokens{}), (WerResult{0, 3, 0, 3, 1.0}));
  EXPECT_EQ(kind_of([] { (void)wer(Tokens{}, Tokens{"a"}); }), ErrorKind::empty_reference);
}

TEST(Wer, RateCanExceedOne) {
  EXPECT_DOUBLE_EQ(wer(Tokens{"a"}, Tokens{"b", "c", "d"}).rate, 3.0);
}

TEST(Wer, CountsFormAnAchievableMinimalAlignment) {
  std::mt19937 rng(17);
  const Tokens vocab = {"a", "b", "c"};
  for (int trial = 0; trial < 300; ++trial) {
    Tokens ref(1 + rng() % 5), hyp(rng() % 6);
    for (auto& t : ref) t = vocab[rng() % 3];
    for (auto& t : hyp) t = vocab[rng() % 3];
    const auto r = wer(ref, hyp);
    const auto all = oracle::all_alignments(ref, hyp);
    int best = 1'000;
    for (const auto& [s, d, i] : all) best = std::min(best, s + d + i);
    EXPECT_EQ(r.substitutions + r.deletions + r.insertions, best);
    EXPECT_TRUE(all.count({r.substitutions, r.deletions, r.insertions}));
    EXPECT_EQ(r.deletions - r.insertions, static_cast<int>(ref.size()) - static_cast<int>(hyp.size()));
  }
}

TEST(Cosine, Basics) {
  const std::vector<double> a = {1, 0}, b = {0, 1};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
  const std::vector<double> c = {1, 0, 0}, z = {0, 0};
  EXPECT_EQ(kind_of([&] { (void)cosine_similarity(a, c); }), ErrorKind::dimension_mismatch);
  EXPECT_EQ(kind_of([&] { (void)cosine_similarity(a, z); }), ErrorKind::zero_vector);
}

class MatchTest : public ::testing::Test {
 protected:
  std::vector<Voiceprint> prints = {{"A", {1, 0}}, {"B", {0, 1}}};
};

TEST_F(MatchTest, NearestByCosine) {
  const std::vector<double> q = {0.9, 0.1};
  const auto m = match_speaker(q, prints, 0.5);
  EXPECT_EQ(m.persona, "A");
  EXPECT_NEAR(m.similarity, 0.9 / std::hypot(0.9, 0.1), 1e-12);
}

TEST_F(MatchTest, BelowTauIsUnknown) {
  const std::vector<double> q = {0.7, 0.7};
  const auto m = match_speaker(q, prints, 0.99);
  EXPECT_FALSE(m.persona.has_value());
  EXPECT_NEAR(m.similarity, std::sqrt(0.5), 1e-12);
}

TEST_F(MatchTest, ScaleInvariant) {
  const std::vector<double> q = {4.5, 0.5};
  EXPECT_EQ(match_speaker(q, prints, 0.5).persona, "A");
}

TEST_F(MatchTest, TiesGoToFirstAndEmptySetIsPrecondition) {
  const std::vector<double> q = {1, 1};
  EXPECT_EQ(match_speaker(q, prints, 0.5).persona, "A");
  EXPECT_EQ(kind_of([&] { (void)match_speaker(q, std::vector<Voiceprint>{}); }), ErrorKind::precondition);
}

TEST(MicroF1, Examples) {
  const Tokens truth = {"A", "B", "A", "C"};
  EXPECT_DOUBLE_EQ(micro_f1(truth, truth), 1.0);
  EXPECT_DOUBLE_EQ(micro_f1(Tokens{"B", "A", "C", "A"}, truth), 0.0);
  const Tokens three = {"A", "B", "A", "A"};
  EXPECT_DOUBLE_EQ(micro_f1(three, truth), 0.75);
  EXPECT_DOUBLE_EQ(oracle::micro_f1(three, truth), 0.75);
  EXPECT_EQ(kind_of([&] { (void)micro_f1(three, Tokens{"A"}); }), ErrorKind::length_mismatch);
  EXPECT_EQ(kind_of([&] { (void)micro_f1(Tokens{}, Tokens{}); }), ErrorKind::length_mismatch);
}

TEST(MicroF1, EqualsAccuracyForSingleLabels) {
  std::mt19937 rng(23);
  const Tokens labels = {"p1", "p2", "p3", "unknown"};
  for (int trial = 0; trial < 500; ++trial) {
    Tokens p(1 + rng() % 30), t(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] = labels[rng() % labels.size()];
      t[k] = labels[rng() % 3];
    }
    EXPECT_NEAR(micro_f1(p, t), oracle::accuracy(p, t), 1e-12);
    EXPECT_NEAR(micro_f1(p, t), oracle::micro_f1(p, t), 1e-12);
  }
}

std::vector<double> with_bursts(double seconds, int rate, const std::vector<std::pair<double, double>>& bursts,
                                std::vector<std::pair<long, long>>* sample_bounds = nullptr) {
  std::vector<double> s(static_cast<std::size_t>(std::lround(seconds * rate)), 0.0);
  for (const auto& [b, e] : bursts) {
    const long first = std::lround(b * rate), last = std::lround(e * rate);
    for (long k = first; k < last; ++k) s[static_cast<std::size_t>(k)] = (k % 2) ? 1.0 : -1.0;
    if (sample_bounds) sample_bounds->emplace_back(first, last);
  }
  return s;
}

void expect_segments(const std::vector<AudioSegment>& got, const std::vector<oracle::Span>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t k = 0; k < got.size(); ++k) {
    EXPECT_NEAR(got[k].start_seconds, want[k].start, 1e-9) << k;
    EXPECT_NEAR(got[k].end_seconds, want[k].end, 1e-9) << k;
  }
}

TEST(EnergyVad, SilenceHasNoSegments) {
  const std::vector<double> zeros(16000 * 3, 0.0);
  EXPECT_TRUE(energy_vad(zeros, 16000).empty());
  EXPECT_TRUE(energy_vad(std::vector<double>{}, 16000).empty());
}

TEST(EnergyVad, FrameRmsHandEnergies) {
  const std::vector<double> s = {1, -1, 1, -1, 0, 0, 3};
  const auto rms = frame_rms(s, 2);
  ASSERT_EQ(rms.size(), 4u);
  EXPECT_DOUBLE_EQ(rms[0], 1.0);
  EXPECT_DOUBLE_EQ(rms[1], 1.0);
  EXPECT_DOUBLE_EQ(rms[2], 0.0);
  EXPECT_DOUBLE_EQ(rms[3], 3.0);
}

TEST(EnergyVad, SingleBurstPaddedByHangover) {
  // Burst 2.0 s .. 3.0 s at 16 kHz; frames are 480 samples (30 ms).
  // Voiced frames are 66 (1.98 s) through 99 (ends 3.00 s).
  const auto s = with_bursts(5.0, 16000, {{2.0, 3.0}});
  const auto got = energy_vad(s, 16000, {}, "mic");
  ASSERT_EQ(got.size(), 1u);
  EXPECT_NEAR(got[0].start_seconds, 1.98 - 0.1, 1e-9);
  EXPECT_NEAR(got[0].end_seconds, 3.0 + 0.1, 1e-9);
  EXPECT_EQ(got[0].source, "mic");
}

TEST(EnergyVad, TwoBurstsStaySeparate) {
  std::vector<std::pair<long, long>> bounds;
  const auto s = with_bursts(5.0, 16000, {{1.0, 2.0}, {3.0, 4.0}}, &bounds);
  const auto got = energy_vad(s, 16000);
  expect_segments(got, oracle::burst_segments(bounds, static_cast<long>(s.size()), 16000, 0.03, 0.3, 0.1));
  ASSERT_EQ(got.size(), 2u);
}

TEST(EnergyVad, ShortGapsAreBridged) {
  const auto s = with_bursts(5.0, 16000, {{1.0, 2.0}, {2.15, 3.0}});
  EXPECT_EQ(energy_vad(s, 16000).size(), 1u);
}

TEST(EnergyVad, MatchesBurstOracleOnRandomSignals) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int rate = (trial % 2) ? 16000 : 8000;
    std::vector<std::pair<double, double>> bursts;
    double t = 0.5;
    while (bursts.size() < 4) {
      t += 0.05 * static_cast<double>(rng() % 30);
      const double len = 0.05 + 0.05 * static_cast<double>(rng() % 20);
      if (t + len > 9.0) break;
      bursts.emplace_back(t, t + len);
      t += len;
    }
    std::vector<std::pair<long, long>> bounds;
    const auto s = with_bursts(10.0, rate, bursts, &bounds);
    expect_segments(energy_vad(s, rate),
                    oracle::burst_segments(bounds, static_cast<long>(s.size()), rate, 0.03, 0.3, 0.1));
  }
}

TEST(EnergyVad, LongSpeechIsSplit) {
  const int rate = 8000;
  std::vector<double> s(static_cast<std::size_t>(rate * 40), 0.0);
  // 24 s of speech inside 16 s of silence keeps the noise floor at zero.
  for (std::size_t k = static_cast<std::size_t>(rate * 8); k < static_cast<std::size_t>(rate * 32); ++k) {
    s[k] = (k % 2 ? 0.5 : -0.5) * (1.0 + 0.3 * std::sin(static_cast<double>(k) / 700.0));
  }
  VadParams p;
  p.max_segment_seconds = 10.0;
  const auto got = energy_vad(s, rate, p);
  ASSERT_GE(got.size(), 3u);
  for (std::size_t k = 0; k < got.size(); ++k) {
    EXPECT_LE(got[k].end_seconds - got[k].start_seconds, 10.0 + 1e-9);
    if (k) {
      EXPECT_LE(got[k - 1].end_seconds, got[k].start_seconds + 1e-12);
    }
  }
}

TEST(EnergyVad, LowRateRejected) {
  const std::vector<double> s(100, 0.0);
  EXPECT_EQ(kind_of([&] { (void)energy_vad(s, 4000); }), ErrorKind::unsupported_rate);
}

TEST(Wav, RoundTrip) {
  const auto dir = testing::scratch_dir("wav");
  PcmAudio audio;
  audio.sample_rate = 16000;
  audio.samples = {0.0, 0.5, -0.5, -1.0, 0.25};
  write_wav(dir / "a.wav", audio);
  const auto back = read_wav(dir / "a.wav");
  EXPECT_EQ(back.sample_rate, 16000);
  ASSERT_EQ(back.samples.size(), audio.samples.size());
  for (std::size_t k = 0; k < audio.samples.size(); ++k) EXPECT_NEAR(back.samples[k], audio.samples[k], 1.0 / 32768);
  std::ofstream(dir / "bad.wav") << "RIFFnope";
  EXPECT_EQ(kind_of([&] { (void)read_wav(dir / "bad.wav"); }), ErrorKind::decode_error);
}

TEST(Diarization, FilesAndReport) {
  const auto dir = testing::scratch_dir("diar");
  std::ofstream(dir / "vp.tsv") << "A\t1 0\nB\t0 1\n";
  std::ofstream(dir / "emb.txt") << "0.9 0.1\n0.2 0.8\n0.7 0.7\n";
  std::ofstream(dir / "truth.txt") << "A\nB\nB\n";
  const auto report = evaluate_diarization(load_embeddings(dir / "emb.txt"), load_voiceprints(dir / "vp.tsv"),
                                           load_labels(dir / "truth.txt"), 0.8);
  ASSERT_EQ(report.records.size(), 3u);
  EXPECT_EQ(report.records[0].predicted, "A");
  EXPECT_EQ(report.records[1].predicted, "B");
  EXPECT_EQ(report.records[2].predicted, std::string(kUnknownSpeaker));
  EXPECT_NEAR(report.micro_f1, 2.0 / 3.0, 1e-12);
  const auto encoded = encode_report(report);
  EXPECT_NE(encoded.find("\"summary\":true"), std::string::npos);
  std::ofstream(dir / "bad.txt") << "1 x\n";
  EXPECT_EQ(kind_of([&] { (void)load_embeddings(dir / "bad.txt"); }), ErrorKind::decode_error);
  const std::vector<std::string> short_truth = {"A"};
  EXPECT_EQ(kind_of([&] {
              (void)evaluate_diarization(load_embeddings(dir / "emb.txt"), load_voiceprints(dir / "vp.tsv"),
                                         short_truth);
            }),
            ErrorKind::length_mismatch);
}

}  // namespace
}  // namespace focusagent
