#pragma once

// Monte Carlo experiments over synthetic pools and simulated judges.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "caps/baselines.hpp"
#include "caps/core.hpp"
#include "caps/judge.hpp"
#include "caps/pool_io.hpp"
#include "caps/stats.hpp"

namespace caps {

/// Duplicate structure of a synthetic code pool.
///
///   "distinct"      every candidate is unique
///   "identical"     one cluster holding the whole pool
///   "11+5"          clusters of the listed sizes; the last term counts
///                   singletons, so "11+5" has 6 signature classes
///   "dup:0.4"       each candidate after the first copies a uniformly
///                   chosen earlier one with probability 0.4
struct DupProfile {
  std::vector<int> cluster_sizes;  // fixed layouts
  std::optional<double> copy_probability;
};

DupProfile parse_dup_profile(std::string_view text, int pool_size);

struct PoolSpec {
  int n = 16;
  double p_correct = 0.3;
  std::string dup_profile = "distinct";
  std::uint64_t seed = 0;
  Domain domain = Domain::Code;
  int reasoning_words = 120;
  int code_lines = 12;
};

void validate(const PoolSpec& spec);

/// Synthetic pool realizing `spec`. Duplicates share correctness and differ
/// only in comments; every candidate has the same length, so view sizes are
/// constant across the pool. Math pools give all correct candidates the same
/// boxed answer and every wrong candidate its own (dup_profile must be
/// "distinct").
CandidatePool gen_pool(const PoolSpec& spec);

/// Difficulty bins: easy 0.6, medium 0.3, hard 0.1.
double difficulty_p_correct(std::string_view name);

/// Named judge configurations: default, perfect, null, rescue, diagnostic.
SimJudgeConfig judge_preset(std::string_view name);

struct ExperimentConfig {
  std::vector<Method> methods = {Method::Vanilla, Method::Pointwise, Method::Random,
                                 Method::Swiss,   Method::Caps,      Method::CapsR};
  PoolSpec pool;           // seed replaced per trial
  SimJudgeConfig judge;    // seed replaced per trial
  MethodConfig method;     // seed replaced per trial
  JudgeOptions judge_options;
  int trials = 1000;
  std::uint64_t master_seed = 1234;
  int threads = 1;
};

/// Seeds of one trial, all derived from (master seed, trial index).
struct TrialSeeds {
  std::uint64_t trial = 0;
  std::uint64_t pool = 0;
  std::uint64_t judge = 0;
  std::uint64_t method = 0;
};

TrialSeeds trial_seeds(std::uint64_t master_seed, int trial);

/// Shipped experiment setups:
///   rescue      CAPS-R on medium pools; rescue fires on about 12% of trials
///   diagnostic  Swiss vs CAPS at a2 = 0.85 on pools with p_correct 0.45;
///               set judge.accuracy_e1 to sweep a1
///   oracle      perfect judge, p_correct 0.3
///   null        coin-flip judge, all LOW
ExperimentConfig experiment_preset(std::string_view name);

struct PairTally {
  std::int64_t correct = 0;
  std::int64_t total = 0;
  double rate() const { return total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
  PairTally& operator+=(const PairTally& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
};

/// Judge calls on pairs whose members differ in correctness; a tie counts
/// as a miss.
PairTally pair_accuracy(std::span<const JudgeOutcome> transcript, std::span<const Candidate> pool,
                        std::optional<EvidenceLevel> level = std::nullopt);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string method;
  CandidateId winner = 0;
  bool correct = false;
  bool any_correct = false;
  bool trivial = false;
  int representatives = 0;
  int calls_e1 = 0;
  int calls_e2 = 0;
  std::int64_t tokens_e1 = 0;
  std::int64_t tokens_e2 = 0;
  bool rescue_triggered = false;
  std::int64_t rescue_tokens = 0;
  PairTally pairs_e1;
  PairTally pairs_e2;
  std::uint64_t digest = 0;
};

/// Runs every configured method on one freshly drawn pool.
std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, int trial);

struct MethodSummary {
  std::string method;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double pass1 = 0.0;
  Interval ci;
  double mean_calls = 0.0;
  double mean_calls_e1 = 0.0;
  double mean_calls_e2 = 0.0;
  double mean_tokens = 0.0;
  std::optional<double> t_percent;  // against the Swiss baseline
};

struct ExperimentReport {
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;
  double pass_at_n = 0.0;
  Interval pass_at_n_ci;
  double trivial_fraction = 0.0;
  std::vector<MethodSummary> methods;

  PairTally caps_pairs;     // all CAPS judge calls
  PairTally caps_pairs_e1;
  PairTally caps_pairs_e2;
  PairTally swiss_pairs;
  std::optional<double> delta_pp;  // CAPS minus Swiss pair accuracy

  std::optional<double> p_rescue;
  double rescue_overhead_mean = 0.0;
  double rescue_overhead_std = 0.0;
  double e2_tokens_per_call = 0.0;  // measured on the rescue runs

  const MethodSummary* find(std::string_view method) const;
};

/// Deterministic fold over records in trial order.
ExperimentReport aggregate(std::span<const TrialRecord> records, std::uint64_t master_seed = 0);

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::vector<TrialRecord>* records = nullptr);

/// CAPS mixed-evidence pair accuracy minus all-E2 Swiss accuracy, in pp.
std::optional<double> diagnostic_delta(const ExperimentReport& report);

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const TrialRecord& rec);
TrialRecord trial_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentReport& report);
nlohmann::json to_json(const SelectionResult& result);

/// Fills an ExperimentConfig from a JSON object; absent keys keep defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
CapsConfig caps_config_from_json(const nlohmann::json& j, CapsConfig base = {});
SimJudgeConfig judge_config_from_json(const nlohmann::json& j, SimJudgeConfig base = {});

void write_summary_table(std::ostream& out, const ExperimentReport& report);
/// One CSV row per method, ready for external plotting.
void write_columns(std::ostream& out, const ExperimentReport& report);

}  // namespace caps
