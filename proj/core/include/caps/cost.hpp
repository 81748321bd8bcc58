#pragma once

// Verifier-token cost model. Counts judge input tokens only.

#include <cstdint>
#include <string>
#include <vector>

#include "caps/core.hpp"
#include "caps/judge.hpp"

namespace caps {

struct CostModel {
  double t1 = 1000.0;    // tokens per partial-evidence call
  double t2 = 8500.0;    // tokens per full-evidence call
  double t_ovhd = 500.0; // prompt overhead included in both

  double rho() const { return t1 / t2; }
  double at(EvidenceLevel level) const { return level == EvidenceLevel::E1 ? t1 : t2; }

  /// Builds T1, T2 from average view sizes via per_call_cost.
  static CostModel from_views(double avg_e1_view, double avg_e2_view, double t_ovhd);
};

/// Throws InvalidConfig unless 0 < t1 <= t2 and t_ovhd >= 0.
const CostModel& validate(const CostModel& cm);

/// Two candidate views plus the prompt overhead.
double per_call_cost(EvidenceLevel level, double avg_view_tokens, double t_ovhd);

/// Call counts of a tournament on `n_unique` representatives with finalist
/// target `f` (no rescue). Mirrors the executed schedule, byes included.
struct CapsSchedule {
  int calls_e1 = 0;
  std::vector<int> stage_b_calls;  // one entry per Stage-B round
  int finalists = 0;               // realized; below f when halving overshoots
  int calls_c = 0;

  int stage_b_rounds() const { return static_cast<int>(stage_b_calls.size()); }
  int calls_e2() const;
  int total_calls() const { return calls_e1 + calls_e2(); }
};

CapsSchedule caps_schedule(int n_unique, int f);

/// Number of Stage-B halvings; 0 when one Stage-A halving already reaches f.
int stage_b_rounds(int n_unique, int f);

/// floor(N'/2) T1 + sum_r floor(N_r/2) T2 + C(f', 2) T2 with f' the realized
/// finalist count.
double caps_cost_closed_form(int n_unique, int f, const CostModel& cm);

/// (N'/2)(T1 + T2) - f T2 + C(f, 2) T2.
double caps_cost_asymptotic(int n_unique, int f, const CostModel& cm);

struct RescueOverhead {
  double mean = 0.0;
  double variance = 0.0;
  double stddev = 0.0;
};

/// A rescue adds f full-evidence calls with probability p_r; f is the realized
/// finalist count in expected_cost_with_rescue.
RescueOverhead rescue_overhead(int f, const CostModel& cm, double p_r);
double expected_cost_with_rescue(int n_unique, int f, const CostModel& cm, double p_r);

/// 100 * caps / baseline. Throws InvalidConfig when baseline <= 0.
double t_percent(double caps_tokens, double baseline_tokens);

/// Large-N' limit of CAPS / Swiss cost: (1 + rho) / (2k).
double asymptotic_cost_ratio(double rho, double budget_multiplier);

struct CostRecord {
  std::string method;
  std::int64_t calls_e1 = 0;
  std::int64_t calls_e2 = 0;
  double tokens_e1 = 0.0;
  double tokens_e2 = 0.0;
  double total = 0.0;
  double t_percent = 0.0;
};

std::string to_json_line(const CostRecord& rec);

/// Judge that charges a fixed cost per call (T1 at E1, T2 at E2, the
/// one full view plus overhead for a rating) and delegates verdicts.
class CountingJudge final : public JudgeBackend {
 public:
  CountingJudge(JudgeBackend& inner, CostModel cm);
  PairResponse compare(const PairRequest& req) override;
  RateResponse rate(const RateRequest& req) override;
  bool thread_safe() const override { return inner_.thread_safe(); }

 private:
  JudgeBackend& inner_;
  CostModel cm_;
};

}  // namespace caps
