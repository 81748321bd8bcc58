#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "caps/judge.hpp"
#include "support.hpp"

using namespace caps;

namespace {

PairResponse ask(SimulatedJudge& judge, const Candidate& a, const Candidate& b, EvidenceLevel level) {
  const auto va = view_at(a, Domain::Code, level);
  const auto vb = view_at(b, Domain::Code, level);
  return judge.compare(PairRequest{"p", Domain::Code, a, b, va, vb, level});
}

}  // namespace

TEST(SimulatedJudge, PerfectJudgePicksTheCorrectCandidate) {
  auto pool = test::code_pool({true, false});
  SimulatedJudge sim(SimJudgeConfig::perfect());
  PairJudge judge(sim, pool.problem, pool.candidates);
  for (auto level : {EvidenceLevel::E1, EvidenceLevel::E2}) {
    const auto o = judge.judge(0, 1, level);
    EXPECT_EQ(o.value, 1.0);
    EXPECT_DOUBLE_EQ(o.weight, 0.67);
    EXPECT_EQ(judge.judge(1, 0, level).value, 1.0);  // still from the lower id's side
  }
}

TEST(SimulatedJudge, ForcedTieSitsAtTheFloor) {
  auto pool = test::code_pool({true, true, false, false});
  SimJudgeConfig cfg;
  cfg.p_tie_when_equal = 1.0;
  SimulatedJudge sim(cfg);
  PairJudge judge(sim, pool.problem, pool.candidates);
  for (auto [a, b] : {std::pair{0, 1}, std::pair{2, 3}}) {
    const auto o = judge.judge(a, b, EvidenceLevel::E2);
    EXPECT_EQ(o.value, 0.5);
    EXPECT_DOUBLE_EQ(o.weight, 0.05);
    EXPECT_EQ(o.raw.winner, Winner::Tie);
  }
}

TEST(SimulatedJudge, AccuracyMatchesConfiguredRate) {
  auto pool = test::code_pool({false, true});
  int right = 0;
  const int trials = 100000;
  SimJudgeConfig cfg;
  cfg.accuracy_e2 = 0.8;
  for (int t = 0; t < trials; ++t) {
    cfg.seed = static_cast<std::uint64_t>(t);
    SimulatedJudge sim(cfg);
    const auto r = ask(sim, pool.candidates[0], pool.candidates[1], EvidenceLevel::E2);
    right += r.verdict.winner == Winner::B;
  }
  EXPECT_NEAR(right / static_cast<double>(trials), 0.80, 0.01);
}

TEST(SimulatedJudge, LevelsUseTheirOwnAccuracy) {
  auto pool = test::code_pool({true, false});
  SimJudgeConfig cfg;
  cfg.accuracy_e1 = 0.0;
  cfg.accuracy_e2 = 1.0;
  SimulatedJudge sim(cfg);
  EXPECT_EQ(ask(sim, pool.candidates[0], pool.candidates[1], EvidenceLevel::E1).verdict.winner, Winner::B);
  EXPECT_EQ(ask(sim, pool.candidates[0], pool.candidates[1], EvidenceLevel::E2).verdict.winner, Winner::A);
}

TEST(SimulatedJudge, SwappingSlotsMirrorsTheVerdict) {
  auto pool = test::code_pool({true, false, true, true});
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    SimJudgeConfig cfg;
    cfg.seed = seed;
    cfg.accuracy_e2 = 0.7;
    SimulatedJudge sim(cfg);
    for (auto [x, y] : {std::pair{0, 1}, std::pair{2, 3}, std::pair{1, 3}}) {
      const auto ab = ask(sim, pool.candidates[x], pool.candidates[y], EvidenceLevel::E2).verdict;
      const auto ba = ask(sim, pool.candidates[y], pool.candidates[x], EvidenceLevel::E2).verdict;
      EXPECT_EQ(ab.confidence, ba.confidence);
      const Winner mirrored = ab.winner == Winner::A ? Winner::B : ab.winner == Winner::B ? Winner::A : Winner::Tie;
      EXPECT_EQ(ba.winner, mirrored);
    }
  }
}

TEST(SimulatedJudge, CorrectSideDoesNotMatter) {
  // Correct candidate in slot A in one pool and slot B in the other.
  auto first = test::code_pool({true, false});
  auto second = test::code_pool({false, true});
  int wins_first = 0;
  int wins_second = 0;
  const int trials = 40000;
  for (int t = 0; t < trials; ++t) {
    SimJudgeConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(t);
    cfg.accuracy_e2 = 0.7;
    SimulatedJudge sim(cfg);
    wins_first += ask(sim, first.candidates[0], first.candidates[1], EvidenceLevel::E2).verdict.winner == Winner::A;
    wins_second += ask(sim, second.candidates[0], second.candidates[1], EvidenceLevel::E2).verdict.winner == Winner::B;
  }
  EXPECT_NEAR(wins_first / double(trials), 0.7, 0.01);
  EXPECT_NEAR(wins_second / double(trials), 0.7, 0.01);
}

TEST(SimulatedJudge, RepeatsItsVerdictForARepeatedPair) {
  auto pool = test::code_pool({true, false, false});
  SimJudgeConfig cfg;
  cfg.accuracy_e2 = 0.5;
  cfg.seed = 77;
  SimulatedJudge sim(cfg);
  const auto first = ask(sim, pool.candidates[0], pool.candidates[2], EvidenceLevel::E2).verdict;
  ask(sim, pool.candidates[1], pool.candidates[2], EvidenceLevel::E2);
  EXPECT_EQ(ask(sim, pool.candidates[0], pool.candidates[2], EvidenceLevel::E2).verdict, first);
}

TEST(SimulatedJudge, ConfidenceProbabilities) {
  auto pool = test::code_pool({true, false});
  SimJudgeConfig cfg;
  cfg.accuracy_e2 = 0.5;
  cfg.p_high_when_correct = 1.0;
  cfg.p_high_when_wrong = 0.0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    cfg.seed = seed;
    SimulatedJudge sim(cfg);
    const auto v = ask(sim, pool.candidates[0], pool.candidates[1], EvidenceLevel::E2).verdict;
    EXPECT_EQ(v.confidence == Confidence::High, v.winner == Winner::A);
  }
}

TEST(SimulatedJudge, EqualPairConfidence) {
  auto pool = test::code_pool({false, false});
  SimJudgeConfig cfg;
  cfg.p_tie_when_equal = 0.0;
  for (double p : {0.0, 1.0}) {
    cfg.p_high_when_equal = p;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      cfg.seed = seed;
      SimulatedJudge sim(cfg);
      const auto v = ask(sim, pool.candidates[0], pool.candidates[1], EvidenceLevel::E2).verdict;
      EXPECT_NE(v.winner, Winner::Tie);
      EXPECT_EQ(v.confidence, p == 1.0 ? Confidence::High : Confidence::Low);
    }
  }
}

TEST(SimulatedJudge, PerfectPointwiseRatings) {
  auto pool = test::code_pool({true, false});
  SimulatedJudge sim(SimJudgeConfig::perfect());
  PairJudge judge(sim, pool.problem, pool.candidates);
  EXPECT_EQ(judge.rate(0).rating, 9);
  EXPECT_EQ(judge.rate(1).rating, 3);
}

TEST(SimulatedJudge, DefaultRatingsAreNoisy) {
  auto pool = test::code_pool(std::vector<bool>(200, true));
  SimulatedJudge sim({});
  PairJudge judge(sim, pool.problem, pool.candidates);
  std::set<int> seen;
  double sum = 0.0;
  for (int c = 0; c < 200; ++c) {
    const int r = judge.rate(c).rating;
    EXPECT_GE(r, 1);
    EXPECT_LE(r, 10);
    EXPECT_EQ(judge.rate(c).rating, r);
    seen.insert(r);
    sum += r;
  }
  EXPECT_GE(seen.size(), 4u);
  EXPECT_LT(sum / 200.0, 9.0);  // clamping at 10 pulls the mean down
}

TEST(SimulatedJudge, RejectsOutOfRangeProbabilities) {
  SimJudgeConfig cfg;
  cfg.accuracy_e1 = 1.2;
  EXPECT_THROW(SimulatedJudge{cfg}, InvalidConfig);
  cfg = {};
  cfg.p_high_when_wrong = -0.1;
  EXPECT_THROW(SimulatedJudge{cfg}, InvalidConfig);
  cfg = {};
  cfg.p_tie_when_equal = 2;
  EXPECT_THROW(SimulatedJudge{cfg}, InvalidConfig);
}

TEST(PairJudge, TokenCostIsBothViewsPlusOverhead) {
  auto pool = test::code_pool({true, false, true});
  SimJudgeConfig cfg;
  cfg.overhead.e1 = 111;
  cfg.overhead.e2 = 222;
  SimulatedJudge sim(cfg);
  PairJudge judge(sim, pool.problem, pool.candidates);
  for (auto level : {EvidenceLevel::E1, EvidenceLevel::E2}) {
    const auto o = judge.judge(2, 0, level);
    EXPECT_EQ(o.token_cost, judge.view(0, level).size_tokens + judge.view(2, level).size_tokens +
                                (level == EvidenceLevel::E1 ? 111 : 222));
  }
}

TEST(PairJudge, LowerIdTakesSlotA) {
  auto pool = test::code_pool({false, false, false, false});
  std::vector<std::pair<int, int>> seen;
  test::ScriptedJudge backend([&](CandidateId a, CandidateId b, EvidenceLevel) {
    seen.emplace_back(a, b);
    return RawVerdict{Winner::B, Confidence::Low};
  });
  PairJudge judge(backend, pool.problem, pool.candidates);
  const auto o = judge.judge(3, 1, EvidenceLevel::E2);
  EXPECT_EQ(o.i, 1);
  EXPECT_EQ(o.j, 3);
  EXPECT_EQ(o.value, 0.0);
  EXPECT_EQ(seen.back(), std::make_pair(1, 3));
}

TEST(PairJudge, RoundOutcomesAreCanonicalAndMatchSequential) {
  auto pool = test::code_pool(std::vector<bool>(12, false));
  SimJudgeConfig cfg;
  cfg.seed = 5;
  SimulatedJudge sim(cfg);
  const std::vector<PairIds> pairs = {{9, 2}, {0, 11}, {7, 5}, {3, 1}, {4, 10}, {8, 6}};
  JudgeOptions seq_opts;
  JudgeOptions par_opts;
  par_opts.max_in_flight = 4;
  PairJudge seq(sim, pool.problem, pool.candidates, seq_opts);
  PairJudge par(sim, pool.problem, pool.candidates, par_opts);
  const auto a = seq.judge_round(pairs, EvidenceLevel::E2);
  const auto b = par.judge_round(pairs, EvidenceLevel::E2);
  ASSERT_EQ(a.size(), pairs.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_LT(a[k].i, a[k].j);
    if (k) { EXPECT_LT(a[k - 1].i, a[k].i); }
    EXPECT_EQ(canonical_encoding(a[k]), canonical_encoding(b[k]));
  }
}

TEST(PairJudge, RejectsSelfPairsAndSignatureLevel) {
  auto pool = test::code_pool({true, false});
  SimulatedJudge sim({});
  PairJudge judge(sim, pool.problem, pool.candidates);
  EXPECT_THROW(judge.judge(1, 1, EvidenceLevel::E2), InvalidConfig);
  EXPECT_THROW(judge.judge(0, 1, EvidenceLevel::E0), InvalidConfig);
}

TEST(PairJudge, FloorAndUnweightedAblation) {
  auto pool = test::code_pool({true, false});
  test::ScriptedJudge low(test::lower_id_wins(Confidence::Low));
  JudgeOptions opts;
  opts.confidence_floor = 0.5;
  PairJudge floored(low, pool.problem, pool.candidates, opts);
  EXPECT_DOUBLE_EQ(floored.judge(0, 1, EvidenceLevel::E2).weight, 0.5);
  opts = {};
  opts.confidence_weighting = false;
  PairJudge flat(low, pool.problem, pool.candidates, opts);
  EXPECT_DOUBLE_EQ(flat.judge(0, 1, EvidenceLevel::E2).weight, 1.0);
  test::ScriptedJudge tie([](CandidateId, CandidateId, EvidenceLevel) { return RawVerdict{}; });
  PairJudge flat_tie(tie, pool.problem, pool.candidates, opts);
  EXPECT_DOUBLE_EQ(flat_tie.judge(0, 1, EvidenceLevel::E2).weight, 0.05);
}

TEST(PairJudge, RatingResponsesUseRatingMargins) {
  struct Rater final : JudgeBackend {
    PairResponse compare(const PairRequest&) override {
      PairResponse r;
      r.ratings = std::make_pair(4, 8);
      return r;
    }
    RateResponse rate(const RateRequest&) override { return {}; }
  } rater;
  auto pool = test::code_pool({true, false});
  PairJudge judge(rater, pool.problem, pool.candidates);
  const auto o = judge.judge(0, 1, EvidenceLevel::E2);
  EXPECT_EQ(o.value, 0.0);
  EXPECT_DOUBLE_EQ(o.weight, 4.0 / 9.0);
  EXPECT_EQ(o.raw.winner, Winner::B);
}

TEST(PairJudge, RejectsIdsThatAreNotIndices) {
  auto pool = test::code_pool({true, false});
  pool.candidates[1].id = 5;
  SimulatedJudge sim({});
  EXPECT_THROW(PairJudge(sim, pool.problem, pool.candidates), InvalidPool);
}

TEST(ReplayJudge, AnswersFromTheRecordedTranscript) {
  const auto pool = read_pool(std::filesystem::path(CAPS_FIXTURE_DIR) / "pool_code.jsonl");
  ReplayJudge replay(std::filesystem::path(CAPS_FIXTURE_DIR) / "transcript_code.jsonl");
  EXPECT_EQ(replay.size(), 36u);
  PairJudge judge(replay, pool.problem, pool.candidates);
  const auto o = judge.judge(0, 1, EvidenceLevel::E2);  // 1 is stronger
  EXPECT_EQ(o.value, 0.0);
  EXPECT_EQ(o.raw.confidence, Confidence::High);
  EXPECT_EQ(judge.judge(1, 3, EvidenceLevel::E1).raw.winner, Winner::Tie);
  EXPECT_EQ(judge.rate(1).rating, 9);
  EXPECT_EQ(judge.rate(0).rating, 2);
}

TEST(ReplayJudge, ReversedRecordsMirrorAndMissingOnesThrow) {
  std::istringstream in(
      R"({"pair": [4, 2], "level": "E2", "raw_text": "<winner>A</winner><confidence>LOW</confidence>"})");
  ReplayJudge replay(in);
  auto pool = test::code_pool({false, false, false, false, false});
  PairJudge judge(replay, pool.problem, pool.candidates);
  const auto o = judge.judge(2, 4, EvidenceLevel::E2);
  EXPECT_EQ(o.i, 2);
  EXPECT_EQ(o.raw.winner, Winner::B);
  EXPECT_THROW(judge.judge(2, 4, EvidenceLevel::E1), JudgeUnavailable);
  EXPECT_THROW(judge.rate(0), JudgeUnavailable);
}

TEST(ReplayJudge, RejectsMalformedTranscripts) {
  std::istringstream in("{\"pair\": [0], \"level\": \"E2\"}\n");
  EXPECT_THROW(ReplayJudge{in}, InvalidPool);
}
