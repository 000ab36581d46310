// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "focusagent/error.hpp"
#include "focusagent/transcript_store.hpp"
#include "test_support.hpp"

namespace focusagent {
namespace {

using testing::utterance;

Transcript three_utterances() {
  Transcript t;
  t.config_digest = "abc";
  t.plan = testing::even_plan(2, 30);
  t = append_utterance(std::move(t), utterance("moderator", UtteranceKind::stage_intro, "Welcome!", 0, 0));
  auto u = utterance("p1", UtteranceKind::human_response, "I use \"timers\".", 0, 1);
  u.estimated_minutes = 0;
  u.wall_clock = Timestamp(std::chrono::milliseconds(1'717'000'000'123));
  t = append_utterance(std::move(t), u);
  t = append_reflection(std::move(t), utterance("moderator", UtteranceKind::reflection_summary, "Timers.", 0, 2),
                        true);
  return t;
}

Error decode_error_of(const std::string& content) {
  try {
    (void)decode_transcript(content);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "decoded";
  return Error(ErrorKind::io_error, "none");
}

TEST(TranscriptStore, RoundTripThroughFile) {
  const auto dir = testing::scratch_dir("store");
  const auto t = three_utterances();
  persist_transcript(t, dir / "run.fgt.jsonl");
  EXPECT_EQ(load_transcript(dir / "run.fgt.jsonl"), t);
}

TEST(TranscriptStore, OneRecordPerLine) {
  const auto encoded = encode_transcript(three_utterances());
  std::istringstream in(encoded);
  std::string line;
  std::vector<nlohmann::json> records;
  while (std::getline(in, line)) records.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0]["record"], "header");
  EXPECT_EQ(records[0]["format"], std::string(kTranscriptFormat));
  EXPECT_EQ(records[0]["config_digest"], "abc");
  EXPECT_EQ(records[0]["plan"]["stages"].size(), 2u);
  EXPECT_EQ(records[1]["record"], "utterance");
  EXPECT_EQ(records[1]["kind"], "stage_intro");
  EXPECT_TRUE(records[1]["wall_clock"].is_null());
  EXPECT_EQ(records[2]["wall_clock"], 1'717'000'000'123LL);
  EXPECT_EQ(records[3]["anonymized"], true);
}

TEST(TranscriptStore, TruncatedFinalLineReportsLine) {
  auto encoded = encode_transcript(three_utterances());
  encoded.resize(encoded.size() - 10);
  const auto e = decode_error_of(encoded);
  EXPECT_EQ(e.kind(), ErrorKind::decode_error);
  EXPECT_EQ(e.line(), 4);
  EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
}

TEST(TranscriptStore, MissingHeader) {
  auto encoded = encode_transcript(three_utterances());
  encoded.erase(0, encoded.find('\n') + 1);
  EXPECT_EQ(decode_error_of(encoded).kind(), ErrorKind::header_missing);
  EXPECT_EQ(decode_error_of("").kind(), ErrorKind::header_missing);
}

TEST(TranscriptStore, InvariantViolationIsDecodeError) {
  auto encoded = encode_transcript(three_utterances());
  const auto pos = encoded.find("\"sequence\":1");
  encoded.replace(pos, 12, "\"sequence\":7");
  const auto e = decode_error_of(encoded);
  EXPECT_EQ(e.kind(), ErrorKind::decode_error);
  EXPECT_EQ(e.line(), 3);
}

TEST(TranscriptStore, UnknownKindIsDecodeError) {
  auto encoded = encode_transcript(three_utterances());
  encoded.replace(encoded.find("stage_intro"), 11, "stage_outro");
  EXPECT_EQ(decode_error_of(encoded).line(), 2);
}

TEST(TranscriptStore, BlankLinesIgnored) {
  auto encoded = encode_transcript(three_utterances());
  encoded.insert(encoded.find('\n') + 1, "\n   \n");
  EXPECT_EQ(decode_transcript(encoded), three_utterances());
}

TEST(TranscriptStore, InvalidUtf8CannotBeEncoded) {
  auto t = three_utterances();
  t.utterances[1].text = "bad \xff byte";
  try {
    (void)encode_transcript(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::encode_error);
  }
  t = three_utterances();
  t.utterances[1].estimated_minutes = std::nan("");
  EXPECT_THROW((void)encode_transcript(t), Error);
}

TEST(TranscriptStore, LoadMissingFileIsIoError) {
  try {
    (void)load_transcript("/nonexistent/x.fgt.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io_error);
  }
}

TEST(TranscriptStore, RoundTripGenerated) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 50; ++k) {
    const auto t = testing::random_transcript(rng);
    EXPECT_EQ(decode_transcript(encode_transcript(t)), t);
  }
}

TEST(Minutes, ResolvesNamesAndListsStages) {
  auto config = testing::sample_config();
  const auto text = format_minutes(three_utterances(), config);
  EXPECT_NE(text.find("Stage 1: Stage 1 (15 min)"), std::string::npos);
  EXPECT_NE(text.find("Alice: I use \"timers\"."), std::string::npos);
  EXPECT_NE(text.find("Moderator: Welcome!"), std::string::npos);
  EXPECT_NE(text.find("Summary: Timers."), std::string::npos);
  const auto raw = format_minutes(three_utterances());
  EXPECT_NE(raw.find("p1: I use"), std::string::npos);
}

}  // namespace
}  // namespace focusagent
