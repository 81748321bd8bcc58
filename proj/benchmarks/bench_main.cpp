#include <benchmark/benchmark.h>

#include "caps/baselines.hpp"
#include "caps/cost.hpp"
#include "caps/harness.hpp"
#include "caps/judge.hpp"
#include "caps/tournament.hpp"

using namespace caps;

namespace {

CandidatePool pool_of(int n) {
  PoolSpec spec;
  spec.n = n;
  spec.seed = 42;
  return gen_pool(spec);
}

void BM_GenPool(benchmark::State& state) {
  PoolSpec spec;
  spec.n = static_cast<int>(state.range(0));
  spec.dup_profile = "dup:0.3";
  for (auto _ : state) {
    ++spec.seed;
    benchmark::DoNotOptimize(gen_pool(spec));
  }
}
BENCHMARK(BM_GenPool)->Arg(16)->Arg(64);

void BM_SelectCaps(benchmark::State& state) {
  const auto pool = pool_of(static_cast<int>(state.range(0)));
  SimulatedJudge sim(SimJudgeConfig{});
  CapsConfig cfg;
  cfg.rescue_enabled = true;
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(select_caps(pool.problem, pool.candidates, sim, cfg));
  }
}
BENCHMARK(BM_SelectCaps)->Arg(16)->Arg(64)->Arg(256);

void BM_Swiss(benchmark::State& state) {
  const auto pool = pool_of(static_cast<int>(state.range(0)));
  SimulatedJudge sim(SimJudgeConfig{});
  SwissConfig cfg;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    PairJudge judge(sim, pool.problem, pool.candidates);
    benchmark::DoNotOptimize(select_swiss_v1(judge, cfg, ++seed));
  }
}
BENCHMARK(BM_Swiss)->Arg(16)->Arg(64);

void BM_ParseVerdict(benchmark::State& state) {
  const std::string tagged =
      "Tracing both solutions on the empty list, A returns 0 and B raises.\n<winner>A</winner>\n<confidence>HIGH</confidence>";
  const std::string loose = "After careful review, the better one is Solution B. Confidence: low";
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_verdict(tagged));
    benchmark::DoNotOptimize(parse_verdict(loose));
  }
}
BENCHMARK(BM_ParseVerdict);

void BM_ClosedFormCost(benchmark::State& state) {
  const CostModel cm;
  for (auto _ : state) {
    double total = 0.0;
    for (int n = 2; n <= 1024; ++n) total += caps_cost_closed_form(n, 4, cm);
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_ClosedFormCost);

}  // namespace

BENCHMARK_MAIN();
