// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "focusagent/error.hpp"
#include "focusagent/moderator.hpp"
#include "focusagent/session_config.hpp"
#include "focusagent/simulation.hpp"
#include "focusagent/transcript_store.hpp"
#include "test_support.hpp"

namespace focusagent {
namespace {

using testing::words;

std::vector<std::string> repeat(const std::string& s, int n) { return std::vector<std::string>(n, s); }

// Two stages of 5 minutes; p1 is always keen, p2 never is.
BackendConfig two_stage_fixtures(std::string p2_closing = "Nothing more from me, thanks.") {
  BackendConfig c;
  c.channels = {
      {"plan", {"Habits | daily use | 5\nLimits | coping | 5"}},
      {"new_stage", {"Welcome, what apps do you use?", "How do you limit screen time?"}},
      {"engagement.p1", repeat("8", 40)},
      {"engagement.p2", repeat("2", 40)},
      {"participant_response.p1", repeat(words(50, "yes"), 40)},
      {"participant_response.p2", {p2_closing}},
      {"reflection", {"People use many apps.", "People set timers."}},
  };
  c.channels["participant_response.p1"].back() = "One last thought from me.";
  return c;
}

TEST(Simulation, TwoStagePlanStructure) {
  const auto config = testing::sample_config(2, 10);
  const auto outcome = run_simulation(config, two_stage_fixtures(), 42);
  const auto& t = outcome.transcript;
  int reflections = 0, closings = 0;
  for (const auto& u : t.utterances) {
    reflections += u.kind == UtteranceKind::reflection_summary;
    closings += u.kind == UtteranceKind::closing_question;
  }
  EXPECT_EQ(reflections, 2);
  EXPECT_EQ(closings, 1);
  EXPECT_NO_THROW(validate(t));
  EXPECT_EQ(t.config_digest, config_digest(config));
  EXPECT_EQ(t.utterances.front().kind, UtteranceKind::stage_intro);
  EXPECT_EQ(t.utterances.back().speaker, "p2");
  ASSERT_EQ(outcome.stage_timings.size(), 2u);
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_GE(outcome.stage_timings[s], t.plan.stages[s].allocated_minutes);
    EXPECT_FALSE(outcome.stage_cut_short[s]);
  }
}

TEST(Simulation, ActiveSpeakerOnlyUntilTimeIsUp) {
  const auto config = testing::sample_config(2, 10);
  const auto t = run_simulation(config, two_stage_fixtures(), 42).transcript;
  // Intro (6 words) plus 10 answers of 50 words reach 5 minutes.
  int stage0_answers = 0;
  for (const auto& u : t.utterances) {
    if (u.stage_index == 0 && u.speaker == "p1") ++stage0_answers;
  }
  EXPECT_EQ(stage0_answers, 10);
}

TEST(Simulation, ClosingPassIsSkipped) {
  const auto config = testing::sample_config(2, 10);
  const auto t = run_simulation(config, two_stage_fixtures("pass."), 42).transcript;
  EXPECT_EQ(t.utterances.back().speaker, "p1");
  EXPECT_EQ(t.utterances[t.utterances.size() - 2].kind, UtteranceKind::closing_question);
  for (const auto& u : t.utterances) EXPECT_NE(u.text, "pass.");
}

TEST(Simulation, DeterministicForSameSeed) {
  const auto config = testing::sample_config(2, 10);
  const auto a = encode_transcript(run_simulation(config, two_stage_fixtures(), 42).transcript);
  const auto b = encode_transcript(run_simulation(config, two_stage_fixtures(), 42).transcript);
  EXPECT_EQ(a, b);
}

TEST(Simulation, OnePersonaIsPrecondition) {
  try {
    (void)run_simulation(testing::sample_config(1, 10), two_stage_fixtures(), 42);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(Simulation, ExhaustedScriptReportsPosition) {
  auto fixtures = two_stage_fixtures();
  fixtures.channels["engagement.p1"].resize(3);
  try {
    (void)run_simulation(testing::sample_config(2, 10), fixtures, 42);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::script_exhausted);
    EXPECT_EQ(e.stage(), 0);
    EXPECT_EQ(e.sequence(), 4);
  }
}

TEST(Simulation, IdleRoundsPromptQuietPersona) {
  auto fixtures = two_stage_fixtures();
  // First round: nobody keen, so the moderator turns to the quiet persona.
  fixtures.channels["engagement.p1"].front() = "1";
  fixtures.channels["inactive_participant"] = {"Alice, anything to add?"};
  const auto t = run_simulation(testing::sample_config(2, 10), fixtures, 42).transcript;
  ASSERT_GE(t.utterances.size(), 2u);
  EXPECT_EQ(t.utterances[1].kind, UtteranceKind::inactive_prompt);
}

class CountingObserver final : public SimulationObserver {
 public:
  void on_plan(const DiscussionPlan& plan) override { stages_planned = plan.stages.size(); }
  void on_stage_started(const Stage&) override { ++stages_started; }
  void on_utterance(const Utterance& u, std::string_view name) override {
    ++utterances;
    if (u.speaker == "p1") {
      EXPECT_EQ(name, "Alice");
    }
  }
  std::size_t stages_planned = 0;
  int stages_started = 0;
  std::size_t utterances = 0;
};

TEST(Simulation, ObserverSeesEveryUtterance) {
  CountingObserver obs;
  const auto outcome =
      run_simulation(testing::sample_config(2, 10), two_stage_fixtures(), 42, PromptLibrary::builtin(), &obs);
  EXPECT_EQ(obs.stages_planned, 2u);
  EXPECT_EQ(obs.stages_started, 2);
  EXPECT_EQ(obs.utterances, outcome.transcript.utterances.size());
}

TEST(Simulation, BundledFixturesRun) {
  const auto config = load_session_config(testing::configs_dir() / "fg15.toml");
  const auto outcome = run_simulation(config, load_scripted_fixtures(testing::fixtures_dir()), 42);
  EXPECT_TRUE(all_stages_completed(outcome.transcript));
  EXPECT_GT(outcome.backend_call_count, 0u);
}

TEST(PassReply, Matching) {
  EXPECT_TRUE(is_pass_reply("PASS"));
  EXPECT_TRUE(is_pass_reply(" pass. "));
  EXPECT_FALSE(is_pass_reply("I pass on that"));
}

}  // namespace
}  // namespace focusagent
