#include "caps/baselines.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <set>
#include <string>

#include "rng.hpp"

namespace caps {
namespace {

CandidateId argmax_score(const TournamentState& state, std::mt19937_64& rng) {
  std::vector<CandidateId> best = {0};
  for (CandidateId c = 1; c < state.pool_size(); ++c) {
    const double d = state.score(c) - state.score(best.front());
    if (d > kScoreEpsilon) {
      best = {c};
    } else if (d >= -kScoreEpsilon) {
      best.push_back(c);
    }
  }
  return best[detail::uniform_below(rng, best.size())];
}

SelectionResult finish(std::string method, const TournamentState& state, CandidateId winner) {
  SelectionResult r;
  r.method = std::move(method);
  r.winner = winner;
  r.finalists = {winner};
  r.representatives = state.pool_size();
  r.transcript = state.transcript();
  r.scores.assign(state.scores().begin(), state.scores().end());
  r.finalize_ledger();
  return r;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Vanilla: return "vanilla";
    case Method::Pointwise: return "pointwise";
    case Method::Random: return "random";
    case Method::Swiss: return "swiss";
    case Method::Caps: return "caps";
    case Method::CapsR: return "caps_r";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  for (auto m : {Method::Vanilla, Method::Pointwise, Method::Random, Method::Swiss, Method::Caps,
                 Method::CapsR}) {
    if (text == to_string(m)) return m;
  }
  throw InvalidConfig("unknown method '" + std::string(text) + "'");
}

SelectionResult select_vanilla(std::span<const Candidate> pool) {
  if (pool.empty()) throw InvalidPool("empty candidate pool");
  SelectionResult r;
  r.method = "vanilla";
  r.winner = pool.front().id;
  r.finalists = {r.winner};
  r.representatives = static_cast<int>(pool.size());
  r.finalize_ledger();
  return r;
}

SelectionResult select_pointwise(PairJudge& judge, std::uint64_t seed) {
  const int n = judge.pool_size();
  if (n < 1) throw InvalidPool("empty candidate pool");
  SelectionResult r;
  r.method = "pointwise";
  r.representatives = n;
  r.ratings.resize(static_cast<std::size_t>(n));
  for (CandidateId c = 0; c < n; ++c) {
    const auto resp = judge.rate(c);
    r.ratings[static_cast<std::size_t>(c)] = resp.rating;
    r.pointwise_tokens += resp.token_cost;
  }
  const int top = *std::max_element(r.ratings.begin(), r.ratings.end());
  std::vector<CandidateId> best;
  for (CandidateId c = 0; c < n; ++c) {
    if (r.ratings[static_cast<std::size_t>(c)] == top) best.push_back(c);
  }
  std::mt19937_64 rng(seed);
  r.winner = best[detail::uniform_below(rng, best.size())];
  r.finalists = {r.winner};
  r.scores.assign(r.ratings.begin(), r.ratings.end());
  r.finalize_ledger();
  return r;
}

SelectionResult select_random_pairs(PairJudge& judge, int count, std::uint64_t seed,
                                    bool with_replacement) {
  const int n = judge.pool_size();
  if (n < 1) throw InvalidPool("empty candidate pool");
  if (count < 0) throw InvalidConfig("random pair count must be >= 0");
  TournamentState state(n, seed);
  if (count == 0 || n == 1) return finish("random", state, 0);

  const auto distinct = static_cast<std::int64_t>(n) * (n - 1) / 2;
  if (!with_replacement && count > distinct)
    throw InvalidConfig("more pairs requested than distinct pairs exist");

  std::vector<PairIds> pairs;
  std::set<PairIds> seen;
  while (static_cast<int>(pairs.size()) < count) {
    const auto a = static_cast<CandidateId>(detail::uniform_below(state.rng(), static_cast<std::uint64_t>(n)));
    auto b = static_cast<CandidateId>(detail::uniform_below(state.rng(), static_cast<std::uint64_t>(n - 1)));
    if (b >= a) ++b;
    const PairIds p{std::min(a, b), std::max(a, b)};
    if (!with_replacement && !seen.insert(p).second) continue;
    pairs.push_back(p);
  }
  for (const auto& o : judge.judge_round(pairs, EvidenceLevel::E2)) state.apply(o);
  const auto winner = argmax_score(state, state.rng());
  return finish("random", state, winner);
}

int swiss_budget(const SwissConfig& cfg, int pool_size) {
  validate_config(cfg);
  return static_cast<int>(std::lround(cfg.budget_multiplier * pool_size));
}

SelectionResult select_swiss_v1(PairJudge& judge, const SwissConfig& cfg, std::uint64_t seed) {
  const int n = judge.pool_size();
  if (n < 2) throw InvalidPool("swiss tournament needs at least two candidates");
  const int budget = swiss_budget(cfg, n);
  TournamentState state(n, seed);
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  std::set<PairIds> played;
  int used = 0;

  auto commit = [&](std::vector<PairIds> pairs) {
    if (static_cast<int>(pairs.size()) > budget - used) pairs.resize(static_cast<std::size_t>(budget - used));
    for (const auto& o : judge.judge_round(pairs, EvidenceLevel::E2)) {
      state.apply(o);
      ++degree[static_cast<std::size_t>(o.i)];
      ++degree[static_cast<std::size_t>(o.j)];
      played.insert({o.i, o.j});
    }
    used += static_cast<int>(pairs.size());
  };

  {
    std::vector<CandidateId> order(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) order[static_cast<std::size_t>(c)] = c;
    detail::shuffle(order.begin(), order.end(), state.rng());
    std::vector<PairIds> pairs;
    for (std::size_t k = 0; k + 1 < order.size(); k += 2) pairs.emplace_back(order[k], order[k + 1]);
    commit(std::move(pairs));
  }

  while (used < budget) {
    // Rank by cumulative score, random order among equals.
    std::vector<CandidateId> ranked(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) ranked[static_cast<std::size_t>(c)] = c;
    detail::shuffle(ranked.begin(), ranked.end(), state.rng());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](CandidateId x, CandidateId y) { return state.score(x) > state.score(y) + kScoreEpsilon; });
    std::vector<int> rank(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) rank[static_cast<std::size_t>(ranked[static_cast<std::size_t>(k)])] = k;

    const bool coverage = std::any_of(degree.begin(), degree.end(), [&](int d) { return d < cfg.min_degree; });
    std::vector<CandidateId> queue;
    for (auto c : ranked) {
      if (degree[static_cast<std::size_t>(c)] < cfg.min_degree) queue.push_back(c);
    }
    if (!coverage) queue = ranked;

    auto is_repeat = [&](CandidateId u, CandidateId v) { return played.contains({std::min(u, v), std::max(u, v)}); };
    // Untaken partners of u by rank distance, lower rank first on ties.
    auto partners = [&](CandidateId u, const std::vector<bool>& taken, int max_dist) {
      std::vector<CandidateId> out;
      const int ru = rank[static_cast<std::size_t>(u)];
      for (int dist = 1; dist <= max_dist; ++dist) {
        for (int r : {ru - dist, ru + dist}) {
          if (r < 0 || r >= n) continue;
          const auto v = ranked[static_cast<std::size_t>(r)];
          if (!taken[static_cast<std::size_t>(v)]) out.push_back(v);
        }
      }
      return out;
    };

    // Depth-first search for a repeat-free matching of the queue with
    // partners at most max_dist ranks apart; the first branch is the greedy
    // nearest-partner choice. A member left without any untaken candidate
    // at all sits the round out.
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    std::vector<PairIds> pairs;
    long budget_nodes = 0;
    int max_dist = 0;
    std::function<bool(std::size_t)> search = [&](std::size_t k) -> bool {
      while (k < queue.size() && taken[static_cast<std::size_t>(queue[k])]) ++k;
      if (k == queue.size()) return true;
      const auto u = queue[k];
      if (partners(u, taken, n).empty()) return search(k + 1);
      const auto cands = partners(u, taken, max_dist);
      taken[static_cast<std::size_t>(u)] = true;
      for (auto v : cands) {
        if (is_repeat(u, v)) continue;
        if (--budget_nodes < 0) break;
        taken[static_cast<std::size_t>(v)] = true;
        pairs.emplace_back(u, v);
        if (search(k + 1)) return true;
        pairs.pop_back();
        taken[static_cast<std::size_t>(v)] = false;
      }
      taken[static_cast<std::size_t>(u)] = false;
      return false;
    };

    bool found = false;
    for (int reach : {cfg.window, n}) {
      max_dist = reach;
      budget_nodes = 20000;
      std::fill(taken.begin(), taken.end(), false);
      pairs.clear();
      if ((found = search(0))) break;
    }
    if (!found) {
      // No repeat-free matching found: nearest fresh partner, else nearest.
      std::fill(taken.begin(), taken.end(), false);
      pairs.clear();
      for (auto u : queue) {
        if (taken[static_cast<std::size_t>(u)]) continue;
        const auto cands = partners(u, taken, n);
        if (cands.empty()) continue;
        auto it = std::find_if(cands.begin(), cands.end(), [&](CandidateId v) { return !is_repeat(u, v); });
        const auto v = it != cands.end() ? *it : cands.front();
        taken[static_cast<std::size_t>(u)] = taken[static_cast<std::size_t>(v)] = true;
        pairs.emplace_back(u, v);
      }
    }
    commit(std::move(pairs));
  }

  const auto winner = argmax_score(state, state.rng());
  return finish("swiss", state, winner);
}

SelectionResult run_method(Method m, PairJudge& judge, const MethodConfig& cfg) {
  switch (m) {
    case Method::Vanilla: return select_vanilla(judge.pool());
    case Method::Pointwise: return select_pointwise(judge, cfg.seed);
    case Method::Random:
      return select_random_pairs(judge, cfg.random_count.value_or(swiss_budget(cfg.swiss, judge.pool_size())),
                                 cfg.seed, cfg.random_with_replacement);
    case Method::Swiss:
      if (judge.pool_size() == 1) return select_vanilla(judge.pool());
      return select_swiss_v1(judge, cfg.swiss, cfg.seed);
    case Method::Caps:
    case Method::CapsR: {
      CapsConfig caps = cfg.caps;
      caps.rescue_enabled = m == Method::CapsR;
      caps.seed = cfg.seed;
      return select_caps(judge, caps);
    }
  }
  throw InvalidConfig("unknown method");
}

}  // namespace caps
