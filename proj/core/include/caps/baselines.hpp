#pragma once

// Comparison methods sharing the PairJudge front end with CAPS.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "caps/core.hpp"
#include "caps/judge.hpp"
#include "caps/tournament.hpp"

namespace caps {

enum class Method { Vanilla, Pointwise, Random, Swiss, Caps, CapsR };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

/// First-sampled candidate, no judge calls.
SelectionResult select_vanilla(std::span<const Candidate> pool);

/// One rating per candidate; highest rating wins, ties uniformly at random.
SelectionResult select_pointwise(PairJudge& judge, std::uint64_t seed);

/// `count` uniformly random unordered pairs at full evidence, aggregated by
/// cumulative score. count == 0 falls back to the vanilla choice.
SelectionResult select_random_pairs(PairJudge& judge, int count, std::uint64_t seed,
                                    bool with_replacement = true);

/// Budget round(k N) at full evidence. Round 1 is a random perfect matching;
/// later rounds first bring every candidate to min_degree, then pair
/// neighbours within `window` ranks of cumulative score, avoiding repeats
/// where possible. Highest score wins.
SelectionResult select_swiss_v1(PairJudge& judge, const SwissConfig& cfg, std::uint64_t seed);

int swiss_budget(const SwissConfig& cfg, int pool_size);

struct MethodConfig {
  CapsConfig caps;
  SwissConfig swiss;
  /// Random-pair count; defaults to the Swiss budget (matched comparisons).
  std::optional<int> random_count;
  bool random_with_replacement = true;
  /// Seeds every method's tie-breaks and schedules (overrides caps.seed).
  std::uint64_t seed = 1234;
};

SelectionResult run_method(Method m, PairJudge& judge, const MethodConfig& cfg);

}  // namespace caps
