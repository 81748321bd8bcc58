#pragma once

// The cascaded selection pipeline: dedup -> halving at partial evidence ->
// halving at full evidence down to f finalists -> optional rescue ->
// full-evidence round-robin.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "caps/core.hpp"
#include "caps/evidence.hpp"
#include "caps/judge.hpp"

namespace caps {

/// Scores closer than this compare equal in winner and tie-break decisions.
inline constexpr double kScoreEpsilon = 1e-9;

struct DedupResult {
  std::vector<CandidateId> representatives;  // in order of first appearance
  std::vector<int> cluster_size;             // by id; 0 for absorbed candidates
  std::vector<CandidateId> representative_of;  // by id
};

using SignatureFn = std::function<std::optional<std::string>(const Candidate&)>;

/// One representative per signature class: the longest by token count,
/// first-sampled on ties. A nullopt signature forms its own cluster.
DedupResult dedup(std::span<const Candidate> pool, const SignatureFn& signature_fn,
                  const TokenCounter& counter = TokenCounter::chars_per_four());

struct Pairing {
  std::vector<PairIds> pairs;
  std::optional<CandidateId> bye;
};

using SeedKey = std::function<double(CandidateId)>;

/// Sorts by key descending (ties uniformly random) and pairs the i-th seed
/// with the (n+1-i)-th; the middle seed of an odd pool gets the bye.
Pairing slaughter_pair(std::span<const CandidateId> pool, const SeedKey& key, std::mt19937_64& rng);

/// Uniformly random pairing of adjacent shuffled entries (ablation).
Pairing random_pair(std::span<const CandidateId> pool, std::mt19937_64& rng);

enum class PairingRule { Slaughter, Random };

struct EliminationLog {
  int rounds = 0;
  int calls = 0;
  std::int64_t tokens = 0;
};

/// Halving rounds: pair, judge, update scores, keep the higher-S member of
/// each pair (then larger cluster, then a coin flip). Without `stop_at`
/// exactly one round runs; otherwise rounds repeat while |pool| > stop_at.
std::vector<CandidateId> eliminate(std::span<const CandidateId> pool, PairJudge& judge,
                                   EvidenceLevel level, const SeedKey& key,
                                   TournamentState& state, std::optional<int> stop_at = std::nullopt,
                                   PairingRule rule = PairingRule::Slaughter,
                                   EliminationLog* log = nullptr);

struct RescueDecision {
  enum class Reason { None, Margin, Rarity };
  bool admitted = false;
  Reason reason = Reason::None;
  std::optional<CandidateId> best_eliminated;
  std::optional<CandidateId> weakest_finalist;
  double gap = 0.0;
};

RescueDecision rescue_check(std::span<const CandidateId> finalists,
                            std::span<const CandidateId> eliminated, double margin,
                            const TournamentState& state);

/// Admits the strongest eliminated candidate when it lost narrowly
/// (gap <= margin) or is a singleton within 2 * margin.
std::vector<CandidateId> rescue(std::span<const CandidateId> finalists,
                                std::span<const CandidateId> eliminated, double margin,
                                const TournamentState& state, RescueDecision* decision = nullptr);

struct RoundRobinResult {
  std::vector<CandidateId> finalists;  // ascending id
  std::vector<double> stage_score;     // parallel to finalists
  CandidateId winner = 0;
  int calls = 0;
  std::int64_t tokens = 0;
};

/// Confidence-normalized win rate over the Stage-C calls only; ties fall
/// back to the pre-round score, then cluster size, then a coin flip.
RoundRobinResult round_robin(std::span<const CandidateId> finalists, PairJudge& judge,
                             TournamentState& state);

/// Confidence-normalized win rate of `c` over `outcomes`.
double stage_score(CandidateId c, std::span<const JudgeOutcome> outcomes);

struct StageLedger {
  int calls = 0;
  std::int64_t tokens = 0;
};

struct SelectionResult {
  std::string method;
  CandidateId winner = 0;
  std::vector<CandidateId> finalists;

  StageLedger stage_a;
  StageLedger stage_b;
  StageLedger stage_c;
  int stage_b_rounds = 0;
  int representatives = 0;

  int calls_e1 = 0;
  int calls_e2 = 0;
  std::int64_t tokens_e1 = 0;
  std::int64_t tokens_e2 = 0;

  bool rescue_triggered = false;
  std::optional<CandidateId> rescued;
  std::int64_t rescue_tokens = 0;

  std::vector<JudgeOutcome> transcript;
  std::vector<int> ratings;  // pointwise baseline only, indexed by id
  std::int64_t pointwise_tokens = 0;
  std::vector<double> scores;
  std::uint64_t digest = 0;

  int total_calls() const { return calls_e1 + calls_e2; }
  std::int64_t total_tokens() const { return tokens_e1 + tokens_e2; }

  /// Recomputes per-level ledgers and the digest from transcript/ratings.
  /// Pointwise ratings read full solutions and count as E2 calls.
  void finalize_ledger();
};

/// JudgeOptions derived from the pipeline config (floor, weighting, E1 view).
JudgeOptions judge_options_for(const CapsConfig& cfg, JudgeOptions base = {});

SelectionResult select_caps(PairJudge& judge, const CapsConfig& cfg);

SelectionResult select_caps(const Problem& problem, std::span<const Candidate> pool,
                            JudgeBackend& backend, const CapsConfig& cfg,
                            JudgeOptions base = {});

}  // namespace caps
