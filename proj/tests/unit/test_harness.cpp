#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "caps/harness.hpp"
#include "caps/tournament.hpp"

using namespace caps;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

namespace {

std::size_t representatives(const CandidatePool& pool) {
  return dedup(pool.candidates, [&](const Candidate& c) { return try_signature(c, pool.problem.domain); })
      .representatives.size();
}

ExperimentConfig small_config(int trials) {
  ExperimentConfig cfg;
  cfg.trials = trials;
  cfg.master_seed = 20261016;
  return cfg;
}

}  // namespace

TEST(DupProfile, Forms) {
  EXPECT_EQ(parse_dup_profile("distinct", 4).cluster_sizes, (std::vector<int>{1, 1, 1, 1}));
  EXPECT_EQ(parse_dup_profile("identical", 4).cluster_sizes, (std::vector<int>{4}));
  EXPECT_EQ(parse_dup_profile("11+5", 16).cluster_sizes, (std::vector<int>{11, 1, 1, 1, 1, 1}));
  EXPECT_EQ(parse_dup_profile("4+3+2", 9).cluster_sizes, (std::vector<int>{4, 3, 1, 1}));
  EXPECT_DOUBLE_EQ(*parse_dup_profile("dup:0.25", 16).copy_probability, 0.25);
}

TEST(DupProfile, RejectsMalformedProfiles) {
  for (const char* bad : {"11+4", "1+15", "abc", "16", "+16", "8++8", "dup:1.5", "dup:x", "dup:"}) {
    EXPECT_THROW(parse_dup_profile(bad, 16), InvalidConfig) << bad;
  }
}

TEST(GenPool, ElevenPlusFiveDedupsToSix) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PoolSpec spec;
    spec.seed = seed;
    spec.dup_profile = "11+5";
    EXPECT_EQ(representatives(gen_pool(spec)), 6u);
  }
}

TEST(GenPool, ProfilesGiveTheRequestedClasses) {
  PoolSpec spec;
  EXPECT_EQ(representatives(gen_pool(spec)), 16u);
  spec.dup_profile = "identical";
  EXPECT_EQ(representatives(gen_pool(spec)), 1u);
  spec.dup_profile = "4+4+8";
  EXPECT_EQ(representatives(gen_pool(spec)), 10u);
}

TEST(GenPool, DuplicatesShareCorrectnessAndLengthIsConstant) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    PoolSpec spec;
    spec.seed = seed;
    spec.p_correct = 0.5;
    spec.dup_profile = "dup:0.5";
    const auto pool = gen_pool(spec);
    std::map<std::string, bool> truth_by_sig;
    for (const auto& c : pool.candidates) {
      EXPECT_EQ(c.raw_text.size(), pool.candidates[0].raw_text.size());
      const auto sig = signature(c, Domain::Code);
      const auto [it, fresh] = truth_by_sig.emplace(sig, *c.ground_truth);
      if (!fresh) { EXPECT_EQ(it->second, *c.ground_truth); }
    }
  }
}

TEST(GenPool, CorrectnessFrequencyFollowsPCorrect) {
  std::int64_t correct = 0;
  std::int64_t total = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    PoolSpec spec;
    spec.seed = seed;
    for (const auto& c : gen_pool(spec).candidates) {
      correct += *c.ground_truth;
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(correct) / static_cast<double>(total), 0.3, 0.02);
}

TEST(GenPool, MathPoolsShareTheTrueAnswerOnly) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    PoolSpec spec;
    spec.seed = seed;
    spec.domain = Domain::Math;
    spec.p_correct = 0.4;
    const auto pool = gen_pool(spec);
    std::set<std::string> right;
    std::set<std::string> wrong;
    int n_wrong = 0;
    for (const auto& c : pool.candidates) {
      const auto sig = signature(c, Domain::Math);
      if (*c.ground_truth) {
        right.insert(sig);
      } else {
        wrong.insert(sig);
        ++n_wrong;
      }
    }
    EXPECT_LE(right.size(), 1u);
    EXPECT_EQ(wrong.size(), static_cast<std::size_t>(n_wrong));
    for (const auto& w : wrong) EXPECT_FALSE(right.contains(w));
  }
}

TEST(GenPool, RejectsInvalidSpecs) {
  PoolSpec spec;
  spec.n = 0;
  EXPECT_THROW(gen_pool(spec), InvalidConfig);
  spec = {};
  spec.p_correct = 1.1;
  EXPECT_THROW(gen_pool(spec), InvalidConfig);
  spec = {};
  spec.domain = Domain::Math;
  spec.dup_profile = "identical";
  EXPECT_THROW(gen_pool(spec), InvalidConfig);
  spec.dup_profile = "distinct";
  spec.n = 9000;
  EXPECT_THROW(gen_pool(spec), InvalidConfig);
}

TEST(GenPool, DeterministicPerSeed) {
  PoolSpec spec;
  spec.seed = 5;
  spec.dup_profile = "dup:0.3";
  const auto a = gen_pool(spec);
  const auto b = gen_pool(spec);
  for (std::size_t k = 0; k < a.candidates.size(); ++k) EXPECT_EQ(a.candidates[k].raw_text, b.candidates[k].raw_text);
  spec.seed = 6;
  EXPECT_NE(gen_pool(spec).candidates[0].raw_text, a.candidates[0].raw_text);
}

TEST(Difficulty, Bins) {
  EXPECT_DOUBLE_EQ(difficulty_p_correct("easy"), 0.6);
  EXPECT_DOUBLE_EQ(difficulty_p_correct("medium"), 0.3);
  EXPECT_DOUBLE_EQ(difficulty_p_correct("hard"), 0.1);
  EXPECT_THROW(difficulty_p_correct("brutal"), InvalidConfig);
}

TEST(Presets, KnownNames) {
  for (const char* name : {"default", "perfect", "null", "rescue", "diagnostic"}) EXPECT_NO_THROW(judge_preset(name));
  for (const char* name : {"rescue", "diagnostic", "oracle", "null"}) EXPECT_NO_THROW(experiment_preset(name));
  EXPECT_THROW(judge_preset("nope"), InvalidConfig);
  EXPECT_THROW(experiment_preset("nope"), InvalidConfig);
  EXPECT_DOUBLE_EQ(experiment_preset("diagnostic").judge.accuracy_e2, 0.85);
}

TEST(Experiment, NoCorrectCandidatesMeansNobodyPasses) {
  auto cfg = small_config(200);
  cfg.pool.p_correct = 0.0;
  const auto rep = run_experiment(cfg);
  EXPECT_EQ(rep.pass_at_n, 0.0);
  for (const auto& m : rep.methods) EXPECT_EQ(m.pass1, 0.0) << m.method;
}

TEST(Experiment, AllCorrectCandidatesMeansEveryonePasses) {
  auto cfg = small_config(200);
  cfg.pool.p_correct = 1.0;
  const auto rep = run_experiment(cfg);
  EXPECT_EQ(rep.pass_at_n, 1.0);
  for (const auto& m : rep.methods) EXPECT_EQ(m.pass1, 1.0) << m.method;
}

TEST(Experiment, PassAtOneNeverExceedsPassAtN) {
  auto cfg = small_config(500);
  cfg.pool.dup_profile = "dup:0.3";
  std::vector<TrialRecord> records;
  const auto rep = run_experiment(cfg, &records);
  for (const auto& r : records) {
    if (r.correct) { EXPECT_TRUE(r.any_correct); }
  }
  for (const auto& m : rep.methods) EXPECT_LE(m.pass1, rep.pass_at_n) << m.method;
  EXPECT_EQ(rep.methods.size(), 6u);
}

TEST(Experiment, OracleJudgeMatchesPassAtN) {
  auto cfg = experiment_preset("oracle");
  cfg.trials = 300;
  std::vector<TrialRecord> records;
  const auto rep = run_experiment(cfg, &records);
  for (const auto& r : records) EXPECT_EQ(r.correct, r.any_correct) << r.trial;
  EXPECT_EQ(rep.find("caps")->pass1, rep.pass_at_n);
}

TEST(Experiment, MethodsShareTheTrialPool) {
  auto cfg = small_config(50);
  cfg.pool.dup_profile = "dup:0.4";
  for (int t = 0; t < cfg.trials; ++t) {
    const auto records = run_trial(cfg, t);
    PoolSpec spec = cfg.pool;
    spec.seed = trial_seeds(cfg.master_seed, t).pool;
    const auto pool = gen_pool(spec);
    for (const auto& r : records) {
      EXPECT_EQ(r.correct, *pool.candidates[static_cast<std::size_t>(r.winner)].ground_truth);
      EXPECT_EQ(r.any_correct, records[0].any_correct);
      EXPECT_EQ(r.seed, records[0].seed);
      if (r.method == "caps") {
        EXPECT_EQ(static_cast<std::size_t>(r.representatives), representatives(pool));
      }
    }
  }
}

TEST(Experiment, DeterministicAcrossRunsAndThreadCounts) {
  auto cfg = small_config(120);
  std::vector<TrialRecord> a;
  std::vector<TrialRecord> b;
  run_experiment(cfg, &a);
  cfg.threads = 4;
  run_experiment(cfg, &b);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].digest, b[k].digest);
    EXPECT_EQ(a[k].winner, b[k].winner);
  }
}

TEST(Experiment, TrialsReplayInIsolation) {
  auto cfg = small_config(30);
  std::vector<TrialRecord> all;
  run_experiment(cfg, &all);
  const auto again = run_trial(cfg, 17);
  std::vector<TrialRecord> from_run;
  for (const auto& r : all) {
    if (r.trial == 17) from_run.push_back(r);
  }
  ASSERT_EQ(again.size(), from_run.size());
  for (std::size_t k = 0; k < again.size(); ++k) EXPECT_EQ(again[k].digest, from_run[k].digest);
}

TEST(Experiment, IdenticalPoolsAreTrivial) {
  auto cfg = small_config(40);
  cfg.pool.dup_profile = "identical";
  EXPECT_EQ(run_experiment(cfg).trivial_fraction, 1.0);
}

TEST(Experiment, NullJudgeMakesSelectionMethodsAlike) {
  auto cfg = small_config(3000);
  cfg.judge = judge_preset("null");
  const auto rep = run_experiment(cfg);
  const auto* v = rep.find("vanilla");
  for (const auto& m : rep.methods) EXPECT_TRUE(m.ci.overlaps(v->ci)) << m.method << " " << m.pass1;
}

// Ties on equal-correctness pairs carry signal even at accuracy 0.5:
// correct candidates meet mostly wrong ones and play decisive games.
TEST(Experiment, TiesOnEqualPairsLeakCorrectness) {
  auto cfg = small_config(3000);
  cfg.methods = {Method::Vanilla, Method::Random};
  cfg.judge.accuracy_e1 = 0.5;
  cfg.judge.accuracy_e2 = 0.5;
  const auto rep = run_experiment(cfg);
  EXPECT_GT(rep.find("random")->ci.lo, rep.find("vanilla")->ci.hi);
}

TEST(Experiment, RescueRateEqualsTriggerFrequency) {
  auto cfg = small_config(400);
  cfg.methods = {Method::CapsR};
  std::vector<TrialRecord> records;
  const auto rep = run_experiment(cfg, &records);
  int fired = 0;
  for (const auto& r : records) fired += r.rescue_triggered;
  ASSERT_TRUE(rep.p_rescue.has_value());
  EXPECT_DOUBLE_EQ(*rep.p_rescue, fired / 400.0);
}

TEST(Diagnostic, EqualAccuraciesGiveDeltaNearZero) {
  auto cfg = small_config(3000);
  cfg.methods = {Method::Swiss, Method::Caps};
  const auto rep = run_experiment(cfg);
  ASSERT_TRUE(diagnostic_delta(rep).has_value());
  const auto caps_ci = wilson_interval(rep.caps_pairs.correct, rep.caps_pairs.total);
  const auto swiss_ci = wilson_interval(rep.swiss_pairs.correct, rep.swiss_pairs.total);
  EXPECT_TRUE(caps_ci.overlaps(swiss_ci));
  EXPECT_NEAR(*diagnostic_delta(rep), 0.0, 1.5);
}

TEST(Diagnostic, BetterPartialEvidenceGivesPositiveDelta) {
  auto cfg = small_config(3000);
  cfg.methods = {Method::Swiss, Method::Caps};
  cfg.judge.accuracy_e1 = 0.9;
  cfg.judge.accuracy_e2 = 0.8;
  EXPECT_GT(*diagnostic_delta(run_experiment(cfg)), 0.0);
}

TEST(Diagnostic, WorsePartialEvidenceLosesToSwiss) {
  auto cfg = small_config(10000);
  cfg.methods = {Method::Swiss, Method::Caps};
  cfg.judge.accuracy_e1 = 0.6;
  cfg.judge.accuracy_e2 = 0.9;
  const auto rep = run_experiment(cfg);
  EXPECT_LT(*diagnostic_delta(rep), 0.0);
  EXPECT_LT(rep.find("caps")->pass1, rep.find("swiss")->pass1);
}

TEST(Diagnostic, CapsImprovesWithPartialEvidenceAccuracy) {
  double previous = 0.0;
  for (double a1 : {0.5, 0.7, 0.9, 1.0}) {
    auto cfg = small_config(3000);
    cfg.methods = {Method::Caps};
    cfg.judge.accuracy_e1 = a1;
    const double pass1 = run_experiment(cfg).find("caps")->pass1;
    EXPECT_GE(pass1, previous - 0.02) << a1;
    previous = pass1;
  }
}

TEST(Json, TrialRecordRoundTrip) {
  auto cfg = small_config(3);
  for (const auto& r : run_trial(cfg, 2)) {
    const auto back = trial_record_from_json(to_json(r));
    EXPECT_EQ(back.digest, r.digest);
    EXPECT_EQ(back.seed, r.seed);
    EXPECT_EQ(back.method, r.method);
    EXPECT_EQ(back.tokens_e2, r.tokens_e2);
    EXPECT_EQ(back.pairs_e1.total, r.pairs_e1.total);
  }
  EXPECT_THROW(trial_record_from_json(nlohmann::json{{"trial", 1}}), InvalidConfig);
}

TEST(Json, AggregateOfParsedRecordsEqualsTheRun) {
  auto cfg = small_config(60);
  std::vector<TrialRecord> records;
  const auto rep = run_experiment(cfg, &records);
  std::vector<TrialRecord> parsed;
  for (const auto& r : records) parsed.push_back(trial_record_from_json(nlohmann::json::parse(to_json(r).dump())));
  EXPECT_EQ(to_json(aggregate(parsed, cfg.master_seed)).dump(), to_json(rep).dump());
}

TEST(Json, ExperimentConfigOverrides) {
  const auto j = nlohmann::json::parse(R"({
    "methods": ["swiss", "caps_r"], "trials": 7, "seed": 9, "threads": 2,
    "pool": {"n": 12, "difficulty": "easy", "dup_profile": "identical"},
    "judge": {"preset": "null", "accuracy_e2": 0.7},
    "caps": {"preset": "table", "finalist_count": 3},
    "swiss": {"k": 2.0, "min_degree": 1, "window": 2},
    "random": {"count": 10, "with_replacement": false},
    "counter": "words"})");
  const auto cfg = experiment_config_from_json(j);
  EXPECT_EQ(cfg.methods, (std::vector<Method>{Method::Swiss, Method::CapsR}));
  EXPECT_EQ(cfg.trials, 7);
  EXPECT_EQ(cfg.master_seed, 9u);
  EXPECT_EQ(cfg.pool.n, 12);
  EXPECT_DOUBLE_EQ(cfg.pool.p_correct, 0.6);
  EXPECT_DOUBLE_EQ(cfg.judge.accuracy_e1, 0.5);
  EXPECT_DOUBLE_EQ(cfg.judge.accuracy_e2, 0.7);
  EXPECT_DOUBLE_EQ(cfg.method.caps.rescue_margin, 0.20);
  EXPECT_EQ(cfg.method.caps.finalist_count, 3);
  EXPECT_DOUBLE_EQ(cfg.method.swiss.budget_multiplier, 2.0);
  EXPECT_EQ(cfg.method.random_count, 10);
  EXPECT_FALSE(cfg.method.random_with_replacement);
  EXPECT_EQ(cfg.judge_options.evidence.counter.kind(), TokenCounter::Kind::Words);
}

TEST(Json, ExperimentPresetCanBeExtended) {
  const auto cfg = experiment_config_from_json(nlohmann::json::parse(R"({"preset": "rescue", "trials": 5})"));
  EXPECT_EQ(cfg.trials, 5);
  EXPECT_EQ(cfg.methods, (std::vector<Method>{Method::CapsR}));
  EXPECT_DOUBLE_EQ(cfg.judge.p_high_when_equal, 1.0);
}

TEST(Json, RejectsUnknownKeysAndBadValues) {
  for (const char* text : {R"({"trails": 5})", R"({"pool": {"size": 3}})", R"({"judge": {"accuracy": 1}})",
                           R"({"caps": {"f": 3}})", R"({"judge": {"accuracy_e1": 2.0}})", R"({"trials": "many"})",
                           R"({"counter": "bytes"})", R"({"swiss": {"k": 0.5}})", R"({"methods": ["best"]})"}) {
    EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(text)), InvalidConfig) << text;
  }
}

TEST(Report, TablesAndColumns) {
  auto cfg = small_config(50);
  const auto rep = run_experiment(cfg);
  std::ostringstream table;
  write_summary_table(table, rep);
  EXPECT_THAT(table.str(), HasSubstr("pass@N"));
  EXPECT_THAT(table.str(), HasSubstr("caps_r"));
  std::ostringstream cols;
  write_columns(cols, rep);
  std::istringstream in(cols.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "method,pass1,ci_lo,ci_hi,mean_calls,mean_tokens,t_percent");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 6);
  const auto j = to_json(rep);
  EXPECT_EQ(j["trials"], 50);
  EXPECT_EQ(j["methods"].size(), 6u);
  EXPECT_DOUBLE_EQ(j["methods"][3]["t_percent"].get<double>(), 100.0);  // swiss against itself
}
