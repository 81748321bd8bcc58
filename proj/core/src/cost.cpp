#include "caps/cost.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace caps {

CostModel CostModel::from_views(double avg_e1_view, double avg_e2_view, double t_ovhd) {
  CostModel cm;
  cm.t1 = per_call_cost(EvidenceLevel::E1, avg_e1_view, t_ovhd);
  cm.t2 = per_call_cost(EvidenceLevel::E2, avg_e2_view, t_ovhd);
  cm.t_ovhd = t_ovhd;
  return cm;
}

const CostModel& validate(const CostModel& cm) {
  if (!(cm.t1 > 0.0 && cm.t1 <= cm.t2 && std::isfinite(cm.t2)))
    throw InvalidConfig("cost model needs 0 < T1 <= T2");
  if (!(cm.t_ovhd >= 0.0)) throw InvalidConfig("prompt overhead must be >= 0");
  return cm;
}

double per_call_cost(EvidenceLevel, double avg_view_tokens, double t_ovhd) {
  if (avg_view_tokens < 0.0 || t_ovhd < 0.0) throw InvalidConfig("token counts must be >= 0");
  return 2.0 * avg_view_tokens + t_ovhd;
}

int CapsSchedule::calls_e2() const {
  int total = calls_c;
  for (int c : stage_b_calls) total += c;
  return total;
}

CapsSchedule caps_schedule(int n_unique, int f) {
  if (n_unique < 1 || f < 1) throw InvalidConfig("caps_schedule needs N' >= 1 and f >= 1");
  CapsSchedule s;
  int n = n_unique;
  if (n >= 2) {
    s.calls_e1 = n / 2;
    n = (n + 1) / 2;
  }
  while (n > f && n >= 2) {
    s.stage_b_calls.push_back(n / 2);
    n = (n + 1) / 2;
  }
  s.finalists = n;
  s.calls_c = n * (n - 1) / 2;
  return s;
}

int stage_b_rounds(int n_unique, int f) { return caps_schedule(n_unique, f).stage_b_rounds(); }

double caps_cost_closed_form(int n_unique, int f, const CostModel& cm) {
  const auto s = caps_schedule(n_unique, f);
  return s.calls_e1 * cm.t1 + s.calls_e2() * cm.t2;
}

double caps_cost_asymptotic(int n_unique, int f, const CostModel& cm) {
  const double n = n_unique;
  return (n / 2.0) * (cm.t1 + cm.t2) - f * cm.t2 + (f * (f - 1) / 2.0) * cm.t2;
}

RescueOverhead rescue_overhead(int f, const CostModel& cm, double p_r) {
  if (!(p_r >= 0.0 && p_r <= 1.0)) throw InvalidConfig("p_R must lie in [0, 1]");
  RescueOverhead r;
  const double step = f * cm.t2;
  r.mean = p_r * step;
  r.variance = p_r * (1.0 - p_r) * step * step;
  r.stddev = std::sqrt(r.variance);
  return r;
}

double expected_cost_with_rescue(int n_unique, int f, const CostModel& cm, double p_r) {
  // A rescue meets every realized finalist once.
  return caps_cost_closed_form(n_unique, f, cm) + rescue_overhead(caps_schedule(n_unique, f).finalists, cm, p_r).mean;
}

double t_percent(double caps_tokens, double baseline_tokens) {
  if (!(baseline_tokens > 0.0)) throw InvalidConfig("baseline token count must be positive");
  return 100.0 * caps_tokens / baseline_tokens;
}

double asymptotic_cost_ratio(double rho, double budget_multiplier) {
  if (!(budget_multiplier > 0.0)) throw InvalidConfig("budget multiplier must be positive");
  return (1.0 + rho) / (2.0 * budget_multiplier);
}

std::string to_json_line(const CostRecord& rec) {
  nlohmann::json j = {{"method", rec.method},       {"calls_e1", rec.calls_e1},
                      {"calls_e2", rec.calls_e2},   {"tokens_e1", rec.tokens_e1},
                      {"tokens_e2", rec.tokens_e2}, {"total", rec.total},
                      {"t_percent", rec.t_percent}};
  return j.dump();
}

CountingJudge::CountingJudge(JudgeBackend& inner, CostModel cm) : inner_(inner), cm_(validate(cm)) {}

PairResponse CountingJudge::compare(const PairRequest& req) {
  auto resp = inner_.compare(req);
  resp.token_cost = std::llround(cm_.at(req.level));
  return resp;
}

RateResponse CountingJudge::rate(const RateRequest& req) {
  auto resp = inner_.rate(req);
  resp.token_cost = std::llround((cm_.t2 + cm_.t_ovhd) / 2.0);
  return resp;
}

}  // namespace caps
