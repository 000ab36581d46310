// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "focusagent/core_model.hpp"
#include "focusagent/error.hpp"
#include "test_support.hpp"

namespace focusagent {
namespace {

using testing::utterance;
using testing::words;

SpeakingStats stats_of(std::vector<std::pair<std::string, int>> counts) {
  return SpeakingStats{0, std::move(counts)};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::io_error;
}

TEST(EstimateMinutes, HundredWordsIsOneMinute) {
  EXPECT_DOUBLE_EQ(estimate_minutes(words(100)), 1.0);
}

TEST(EstimateMinutes, EmptyTextIsZero) { EXPECT_EQ(estimate_minutes(""), 0.0); }

TEST(EstimateMinutes, TwoHundredFiftyWords) { EXPECT_DOUBLE_EQ(estimate_minutes(words(250)), 2.5); }

TEST(EstimateMinutes, CountsWhitespaceRuns) {
  EXPECT_EQ(word_count("  one\ttwo\n\nthree  "), 3u);
  EXPECT_DOUBLE_EQ(estimate_minutes("a b c d", 200.0), 0.02);
}

TEST(InactiveParticipants, MaxSix) {
  EXPECT_EQ(inactive_participants(stats_of({{"A", 6}, {"B", 2}, {"C", 0}})),
            (std::vector<std::string>{"B", "C"}));
}

TEST(InactiveParticipants, AllZero) {
  EXPECT_EQ(inactive_participants(stats_of({{"A", 0}, {"B", 0}})),
            (std::vector<std::string>{"A", "B"}));
}

TEST(InactiveParticipants, InclusiveBoundary) {
  EXPECT_EQ(inactive_participants(stats_of({{"A", 3}, {"B", 1}})), (std::vector<std::string>{"B"}));
}

TEST(InactiveParticipants, BalancedGroupHasNone) {
  EXPECT_TRUE(inactive_participants(stats_of({{"A", 3}, {"B", 2}, {"C", 4}})).empty());
}

class AppendTest : public ::testing::Test {
 protected:
  Transcript empty() {
    Transcript t;
    t.plan = testing::even_plan(2, 30);
    return t;
  }
};

TEST_F(AppendTest, FirstUtterance) {
  auto t = append_utterance(empty(), utterance("moderator", UtteranceKind::stage_intro, "hi", 0, 0));
  EXPECT_EQ(t.utterances.size(), 1u);
}

TEST_F(AppendTest, SequenceGap) {
  auto t = empty();
  for (int k = 0; k < 5; ++k) {
    t = append_utterance(std::move(t), utterance("p1", UtteranceKind::participant_response, "x", 0, k));
  }
  EXPECT_EQ(kind_of([&] {
              (void)append_utterance(t, utterance("p1", UtteranceKind::participant_response, "x", 0, 6));
            }),
            ErrorKind::sequence_gap);
}

TEST_F(AppendTest, StageOutOfRange) {
  EXPECT_EQ(kind_of([&] {
              (void)append_utterance(empty(),
                                     utterance("p1", UtteranceKind::participant_response, "x", 2, 0));
            }),
            ErrorKind::stage_out_of_range);
  EXPECT_EQ(kind_of([&] {
              (void)append_utterance(empty(),
                                     utterance("p1", UtteranceKind::participant_response, "x", 1, 0));
            }),
            ErrorKind::stage_out_of_range);
}

TEST_F(AppendTest, ReflectionNeedsItsOwnEntryPoint) {
  EXPECT_EQ(kind_of([&] {
              (void)append_utterance(empty(),
                                     utterance("moderator", UtteranceKind::reflection_summary, "s", 0, 0));
            }),
            ErrorKind::transcript_invariant);
}

TEST_F(AppendTest, ReflectionAdvancesStageAndMirrorsSummary) {
  auto t = append_reflection(empty(), utterance("moderator", UtteranceKind::reflection_summary, "s", 0, 0),
                             true);
  EXPECT_EQ(current_stage_index(t), 1);
  ASSERT_EQ(t.summaries.size(), 1u);
  EXPECT_EQ(t.summaries[0], (StageSummary{0, "s", true}));
  EXPECT_FALSE(all_stages_completed(t));
}

TEST_F(AppendTest, ClosingOnlyAfterFinalReflection) {
  auto t = empty();
  EXPECT_EQ(kind_of([&] {
              (void)append_utterance(t, utterance("moderator", UtteranceKind::closing_question, "q", 0, 0));
            }),
            ErrorKind::transcript_invariant);
  t = append_reflection(std::move(t), utterance("moderator", UtteranceKind::reflection_summary, "a", 0, 0), true);
  t = append_reflection(std::move(t), utterance("moderator", UtteranceKind::reflection_summary, "b", 1, 1), true);
  EXPECT_TRUE(all_stages_completed(t));
  EXPECT_EQ(current_stage_index(t), 1);
  EXPECT_EQ(kind_of([&] {
              (void)append_utterance(t, utterance("moderator", UtteranceKind::insight_question, "q", 1, 2));
            }),
            ErrorKind::transcript_invariant);
  t = append_utterance(std::move(t), utterance("moderator", UtteranceKind::closing_question, "q", 1, 2));
  t = append_utterance(std::move(t), utterance("p1", UtteranceKind::participant_response, "r", 1, 3));
  EXPECT_EQ(t.utterances.size(), 4u);
  EXPECT_NO_THROW(validate(t));
}

TEST_F(AppendTest, EmptySpeakerRejected) {
  EXPECT_EQ(kind_of([&] {
              (void)append_utterance(empty(), utterance("", UtteranceKind::participant_response, "x", 0, 0));
            }),
            ErrorKind::transcript_invariant);
}

TEST(RecentContext, EmptyTranscript) {
  const auto view = recent_context(Transcript{}, 12);
  EXPECT_TRUE(view.summaries.empty());
  EXPECT_TRUE(view.tail.empty());
}

TEST(RecentContext, WindowKeepsLastTwelve) {
  Transcript t;
  t.plan = testing::even_plan(1, 30);
  for (int k = 0; k < 20; ++k) {
    t = append_utterance(std::move(t), utterance("p1", UtteranceKind::participant_response,
                                                 "u" + std::to_string(k), 0, k));
  }
  const auto view = recent_context(t, 12);
  ASSERT_EQ(view.tail.size(), 12u);
  EXPECT_EQ(view.tail.front().text, "u8");
  EXPECT_EQ(view.tail.back().text, "u19");
}

TEST(RecentContext, SummariesPlusCurrentStage) {
  Transcript t;
  t.plan = testing::even_plan(3, 30);
  std::int64_t seq = 0;
  for (int s = 0; s < 2; ++s) {
    t = append_utterance(std::move(t), utterance("p1", UtteranceKind::participant_response, "x", s, seq++));
    t = append_reflection(std::move(t), utterance("moderator", UtteranceKind::reflection_summary,
                                                  "sum" + std::to_string(s), s, seq++),
                          true);
  }
  for (int k = 0; k < 3; ++k) {
    t = append_utterance(std::move(t), utterance("p2", UtteranceKind::participant_response, "y", 2, seq++));
  }
  const auto view = recent_context(t, 12);
  EXPECT_EQ(view.summaries.size(), 2u);
  EXPECT_EQ(view.tail.size(), 3u);
}

TEST(SpeakingStatsTest, CountsCurrentStageParticipantTurnsOnly) {
  Transcript t;
  t.plan = testing::even_plan(2, 30);
  std::int64_t seq = 0;
  t = append_utterance(std::move(t), utterance("p1", UtteranceKind::participant_response, "x", 0, seq++));
  t = append_reflection(std::move(t), utterance("moderator", UtteranceKind::reflection_summary, "s", 0, seq++),
                        true);
  t = append_utterance(std::move(t), utterance("moderator", UtteranceKind::stage_intro, "i", 1, seq++));
  t = append_utterance(std::move(t), utterance("p2", UtteranceKind::participant_response, "x", 1, seq++));
  t = append_utterance(std::move(t), utterance("p2", UtteranceKind::human_response, "x", 1, seq++));
  const std::vector<Persona> personas = {testing::persona("p1", "A"), testing::persona("p2", "B")};
  const auto stats = speaking_stats(t, personas);
  EXPECT_EQ(stats.stage_index, 1);
  EXPECT_EQ(stats.count("p1"), 0);
  EXPECT_EQ(stats.count("p2"), 2);
}

TEST(ValidateConfig, RejectsBadFields) {
  auto ok = testing::sample_config();
  EXPECT_NO_THROW(validate(ok));
  auto bad = ok;
  bad.total_minutes = 1;
  EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::invalid_config);
  bad = ok;
  bad.personas[1].id = ok.personas[0].id;
  EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::invalid_config);
  bad = ok;
  bad.personas[0].id = "moderator";
  EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::invalid_config);
  bad = ok;
  bad.personas[0].name = "Participant";
  EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::invalid_config);
  bad = ok;
  bad.engagement_threshold = 11;
  EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::invalid_config);
}

TEST(ValidatePlan, AllocationsMustSumToTotal) {
  EXPECT_NO_THROW(validate(testing::even_plan(3, 30), 30));
  EXPECT_EQ(kind_of([&] { validate(testing::even_plan(3, 30), 31); }), ErrorKind::plan_invalid);
  EXPECT_EQ(kind_of([&] { validate(DiscussionPlan{}, 30); }), ErrorKind::plan_invalid);
}

TEST(ValidateTranscript, AcceptsGeneratedTranscripts) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) EXPECT_NO_THROW(validate(testing::random_transcript(rng)));
}

TEST(ValidateTranscript, DetectsSummaryMismatch) {
  std::mt19937_64 rng(3);
  Transcript t;
  do {
    t = testing::random_transcript(rng);
  } while (t.summaries.empty());
  t.summaries[0].text += "!";
  EXPECT_EQ(kind_of([&] { validate(t); }), ErrorKind::transcript_invariant);
}

TEST(UtteranceKindNames, RoundTrip) {
  for (auto k : {UtteranceKind::stage_intro, UtteranceKind::insight_question,
                 UtteranceKind::inactive_prompt, UtteranceKind::participant_response,
                 UtteranceKind::human_response, UtteranceKind::closing_question,
                 UtteranceKind::reflection_summary}) {
    EXPECT_EQ(parse_utterance_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_utterance_kind("shout").has_value());
}

}  // namespace
}  // namespace focusagent
