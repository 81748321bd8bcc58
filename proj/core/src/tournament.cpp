#include "caps/tournament.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <unordered_map>

#include "rng.hpp"

namespace caps {
namespace {

bool score_equal(double a, double b) { return std::abs(a - b) <= kScoreEpsilon; }

/// Winner of a judged pair under the post-update scores.
CandidateId pair_winner(CandidateId a, CandidateId b, TournamentState& state) {
  const double sa = state.score(a);
  const double sb = state.score(b);
  if (!score_equal(sa, sb)) return sa > sb ? a : b;
  const int na = state.cluster_size(a);
  const int nb = state.cluster_size(b);
  if (na != nb) return na > nb ? a : b;
  return detail::uniform_below(state.rng(), 2) == 0 ? a : b;
}

}  // namespace

DedupResult dedup(std::span<const Candidate> pool, const SignatureFn& signature_fn,
                  const TokenCounter& counter) {
  DedupResult out;
  out.cluster_size.assign(pool.size(), 0);
  out.representative_of.assign(pool.size(), -1);

  struct Cluster {
    std::vector<std::size_t> members;
  };
  std::vector<Cluster> clusters;
  std::unordered_map<std::string, std::size_t> by_signature;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    auto sig = signature_fn(pool[k]);
    if (!sig) {
      clusters.push_back({{k}});
      continue;
    }
    auto [it, inserted] = by_signature.try_emplace(*sig, clusters.size());
    if (inserted) clusters.emplace_back();
    clusters[it->second].members.push_back(k);
  }

  for (const auto& cl : clusters) {
    std::size_t rep = cl.members.front();
    std::int64_t best = counter(pool[rep].raw_text);
    for (std::size_t m = 1; m < cl.members.size(); ++m) {
      const std::int64_t len = counter(pool[cl.members[m]].raw_text);
      if (len > best) {
        best = len;
        rep = cl.members[m];
      }
    }
    const CandidateId rep_id = pool[rep].id;
    out.representatives.push_back(rep_id);
    out.cluster_size[static_cast<std::size_t>(rep_id)] = static_cast<int>(cl.members.size());
    for (auto m : cl.members) out.representative_of[static_cast<std::size_t>(pool[m].id)] = rep_id;
  }
  return out;
}

Pairing slaughter_pair(std::span<const CandidateId> pool, const SeedKey& key, std::mt19937_64& rng) {
  std::vector<CandidateId> order(pool.begin(), pool.end());
  detail::shuffle(order.begin(), order.end(), rng);
  std::vector<double> keys(order.size());
  std::vector<std::size_t> idx(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    keys[k] = key(order[k]);
    idx[k] = k;
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return keys[x] > keys[y]; });

  Pairing out;
  const std::size_t n = idx.size();
  for (std::size_t k = 0; k < n / 2; ++k) out.pairs.emplace_back(order[idx[k]], order[idx[n - 1 - k]]);
  if (n % 2 == 1) out.bye = order[idx[n / 2]];
  return out;
}

Pairing random_pair(std::span<const CandidateId> pool, std::mt19937_64& rng) {
  std::vector<CandidateId> order(pool.begin(), pool.end());
  detail::shuffle(order.begin(), order.end(), rng);
  Pairing out;
  for (std::size_t k = 0; k + 1 < order.size(); k += 2) out.pairs.emplace_back(order[k], order[k + 1]);
  if (order.size() % 2 == 1) out.bye = order.back();
  return out;
}

std::vector<CandidateId> eliminate(std::span<const CandidateId> pool, PairJudge& judge,
                                   EvidenceLevel level, const SeedKey& key, TournamentState& state,
                                   std::optional<int> stop_at, PairingRule rule, EliminationLog* log) {
  if (pool.empty()) throw InvalidConfig("eliminate needs a non-empty pool");
  if (stop_at && (*stop_at < 1 || *stop_at > static_cast<int>(pool.size())))
    throw InvalidConfig("stop_at must lie in [1, |pool|]");

  std::vector<CandidateId> current(pool.begin(), pool.end());
  auto run_round = [&] {
    Pairing pairing = rule == PairingRule::Slaughter ? slaughter_pair(current, key, state.rng())
                                                     : random_pair(current, state.rng());
    const auto outcomes = judge.judge_round(pairing.pairs, level);
    std::vector<CandidateId> winners;
    winners.reserve(outcomes.size() + 1);
    for (const auto& o : outcomes) {
      state.apply(o);
      if (log) log->tokens += o.token_cost;
    }
    // Canonical order: outcomes are sorted by lower id.
    for (const auto& o : outcomes) winners.push_back(pair_winner(o.i, o.j, state));
    if (pairing.bye) winners.push_back(*pairing.bye);
    if (log) {
      ++log->rounds;
      log->calls += static_cast<int>(outcomes.size());
    }
    current = std::move(winners);
  };

  if (!stop_at) {
    if (current.size() >= 2) run_round();
  } else {
    while (static_cast<int>(current.size()) > *stop_at && current.size() >= 2) run_round();
  }
  return current;
}

RescueDecision rescue_check(std::span<const CandidateId> finalists,
                            std::span<const CandidateId> eliminated, double margin,
                            const TournamentState& state) {
  RescueDecision d;
  if (eliminated.empty() || finalists.empty()) return d;

  CandidateId best = eliminated.front();
  for (auto c : eliminated.subspan(1)) {
    const double sc = state.score(c);
    const double sb = state.score(best);
    if (sc > sb + kScoreEpsilon ||
        (score_equal(sc, sb) && (state.cluster_size(c) > state.cluster_size(best) ||
                                 (state.cluster_size(c) == state.cluster_size(best) && c < best))))
      best = c;
  }
  CandidateId weakest = finalists.front();
  for (auto c : finalists.subspan(1)) {
    if (state.score(c) < state.score(weakest) - kScoreEpsilon ||
        (score_equal(state.score(c), state.score(weakest)) && c < weakest))
      weakest = c;
  }
  d.best_eliminated = best;
  d.weakest_finalist = weakest;
  d.gap = std::abs(state.score(best) - state.score(weakest));
  if (d.gap <= margin + kScoreEpsilon) {
    d.admitted = true;
    d.reason = RescueDecision::Reason::Margin;
  } else if (state.cluster_size(best) == 1 && d.gap <= 2.0 * margin + kScoreEpsilon) {
    d.admitted = true;
    d.reason = RescueDecision::Reason::Rarity;
  }
  return d;
}

std::vector<CandidateId> rescue(std::span<const CandidateId> finalists,
                                std::span<const CandidateId> eliminated, double margin,
                                const TournamentState& state, RescueDecision* decision) {
  const auto d = rescue_check(finalists, eliminated, margin, state);
  if (decision) *decision = d;
  std::vector<CandidateId> out(finalists.begin(), finalists.end());
  if (d.admitted) out.push_back(*d.best_eliminated);
  return out;
}

double stage_score(CandidateId c, std::span<const JudgeOutcome> outcomes) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& o : outcomes) {
    if (o.i == c) {
      num += o.weight * o.value;
      den += o.weight;
    } else if (o.j == c) {
      num += o.weight * (1.0 - o.value);
      den += o.weight;
    }
  }
  if (den <= 0.0) throw Error("stage score undefined: candidate " + std::to_string(c) + " has zero total weight");
  return num / den;
}

RoundRobinResult round_robin(std::span<const CandidateId> finalists, PairJudge& judge,
                             TournamentState& state) {
  if (finalists.empty()) throw InvalidConfig("round robin needs at least one finalist");
  RoundRobinResult out;
  out.finalists.assign(finalists.begin(), finalists.end());
  std::sort(out.finalists.begin(), out.finalists.end());
  if (out.finalists.size() == 1) {
    out.winner = out.finalists.front();
    out.stage_score = {1.0};
    return out;
  }

  std::vector<PairIds> pairs;
  for (std::size_t x = 0; x < out.finalists.size(); ++x) {
    for (std::size_t y = x + 1; y < out.finalists.size(); ++y)
      pairs.emplace_back(out.finalists[x], out.finalists[y]);
  }
  std::vector<double> pre_scores;
  for (auto c : out.finalists) pre_scores.push_back(state.score(c));

  const auto outcomes = judge.judge_round(pairs, EvidenceLevel::E2);
  for (const auto& o : outcomes) {
    assert(o.weight > 0.0);
    state.apply(o);
    out.tokens += o.token_cost;
  }
  out.calls = static_cast<int>(outcomes.size());

  for (auto c : out.finalists) out.stage_score.push_back(stage_score(c, outcomes));

  std::vector<std::size_t> tied = {0};
  for (std::size_t k = 1; k < out.finalists.size(); ++k) {
    const auto best = tied.front();
    auto cmp = [&]() -> int {
      if (!score_equal(out.stage_score[k], out.stage_score[best]))
        return out.stage_score[k] > out.stage_score[best] ? 1 : -1;
      if (!score_equal(pre_scores[k], pre_scores[best])) return pre_scores[k] > pre_scores[best] ? 1 : -1;
      const int nk = state.cluster_size(out.finalists[k]);
      const int nb = state.cluster_size(out.finalists[best]);
      if (nk != nb) return nk > nb ? 1 : -1;
      return 0;
    }();
    if (cmp > 0) {
      tied = {k};
    } else if (cmp == 0) {
      tied.push_back(k);
    }
  }
  const auto pick = tied.size() == 1 ? 0 : detail::uniform_below(state.rng(), tied.size());
  out.winner = out.finalists[tied[pick]];
  return out;
}

void SelectionResult::finalize_ledger() {
  calls_e1 = calls_e2 = 0;
  tokens_e1 = tokens_e2 = 0;
  for (const auto& o : transcript) {
    if (o.level == EvidenceLevel::E1) {
      ++calls_e1;
      tokens_e1 += o.token_cost;
    } else {
      ++calls_e2;
      tokens_e2 += o.token_cost;
    }
  }
  calls_e2 += static_cast<int>(ratings.size());
  tokens_e2 += pointwise_tokens;
  digest = transcript_digest(transcript, ratings);
}

JudgeOptions judge_options_for(const CapsConfig& cfg, JudgeOptions base) {
  base.confidence_floor = cfg.confidence_floor;
  base.confidence_weighting = cfg.confidence_weighting;
  base.evidence.thinking_aware = cfg.thinking_aware_e1;
  return base;
}

SelectionResult select_caps(PairJudge& judge, const CapsConfig& cfg) {
  const int n = judge.pool_size();
  SelectionResult result;
  result.method = cfg.rescue_enabled ? "caps_r" : "caps";
  if (n < 1) throw InvalidPool("empty candidate pool");
  if (n == 1) {
    result.winner = 0;
    result.finalists = {0};
    result.representatives = 1;
    result.scores = {0.0};
    result.finalize_ledger();
    return result;
  }
  validate_config(cfg, n);

  TournamentState state(n, cfg.seed);
  const Problem& problem = judge.problem();

  // Stage 0
  std::vector<CandidateId> reps;
  if (cfg.dedup_enabled) {
    std::vector<Candidate> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) pool.push_back(judge.candidate(c));
    const auto d = dedup(pool, [&](const Candidate& c) { return try_signature(c, problem.domain); },
                         judge.options().evidence.counter);
    reps = d.representatives;
    for (int c = 0; c < n; ++c) state.set_cluster_size(c, d.cluster_size[static_cast<std::size_t>(c)]);
  } else {
    for (int c = 0; c < n; ++c) reps.push_back(c);
  }
  result.representatives = static_cast<int>(reps.size());

  // Stage A
  const EvidenceLevel stage_a_level = cfg.e1_enabled ? EvidenceLevel::E1 : EvidenceLevel::E2;
  const SeedKey by_cluster = [&](CandidateId c) { return static_cast<double>(state.cluster_size(c)); };
  const SeedKey by_score = [&](CandidateId c) { return state.score(c); };
  EliminationLog log_a;
  const auto after_a = eliminate(reps, judge, stage_a_level, by_cluster, state, std::nullopt,
                                 cfg.slaughter_enabled ? PairingRule::Slaughter : PairingRule::Random,
                                 &log_a);
  result.stage_a = {log_a.calls, log_a.tokens};

  // Stage B
  EliminationLog log_b;
  const int stop_at = std::min<int>(cfg.finalist_count, static_cast<int>(after_a.size()));
  auto finalists = eliminate(after_a, judge, EvidenceLevel::E2, by_score, state, stop_at,
                             PairingRule::Slaughter, &log_b);
  result.stage_b = {log_b.calls, log_b.tokens};
  result.stage_b_rounds = log_b.rounds;

  // Rescue
  if (cfg.rescue_enabled) {
    const std::set<CandidateId> kept(finalists.begin(), finalists.end());
    std::vector<CandidateId> eliminated;
    for (auto c : reps) {
      if (!kept.contains(c)) eliminated.push_back(c);
    }
    RescueDecision decision;
    finalists = rescue(finalists, eliminated, cfg.rescue_margin, state, &decision);
    result.rescue_triggered = decision.admitted;
    if (decision.admitted) result.rescued = decision.best_eliminated;
  }

  // Stage C
  const std::size_t before_c = state.transcript().size();
  const auto rr = round_robin(finalists, judge, state);
  result.stage_c = {rr.calls, rr.tokens};
  if (result.rescued) {
    for (std::size_t k = before_c; k < state.transcript().size(); ++k) {
      const auto& o = state.transcript()[k];
      if (o.i == *result.rescued || o.j == *result.rescued) result.rescue_tokens += o.token_cost;
    }
  }

  result.winner = rr.winner;
  result.finalists = rr.finalists;
  result.transcript = state.transcript();
  result.scores.assign(state.scores().begin(), state.scores().end());
  result.finalize_ledger();
  return result;
}

SelectionResult select_caps(const Problem& problem, std::span<const Candidate> pool,
                            JudgeBackend& backend, const CapsConfig& cfg, JudgeOptions base) {
  PairJudge judge(backend, problem, pool, judge_options_for(cfg, std::move(base)));
  return select_caps(judge, cfg);
}

}  // namespace caps
