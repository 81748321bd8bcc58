#pragma once

// Pairwise judge abstraction. Backends produce raw verdicts and token costs;
// PairJudge turns them into floored, confidence-weighted outcomes.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "caps/core.hpp"
#include "caps/evidence.hpp"

namespace caps {

// ---------------------------------------------------------------------------
// Parsing

struct VerdictParse {
  RawVerdict verdict;
  bool winner_found = false;
  bool confidence_found = false;
};

/// Tagged patterns first, unstructured fallback second. Never fails: a
/// missing winner reads as (TIE, LOW) and a missing confidence as LOW.
VerdictParse parse_verdict_detailed(std::string_view text);
RawVerdict parse_verdict(std::string_view text);

/// Rating used when pointwise output stays unparseable after retries.
inline constexpr int kNeutralRating = 5;

/// 1..10 rating from pointwise output. Throws ParseFailure when no rating
/// can be found; out-of-range values are clamped.
int parse_rating(std::string_view text);

/// (rating_A, rating_B) from the V1 pairwise format. Throws ParseFailure.
std::pair<int, int> parse_rating_pair(std::string_view text);

// ---------------------------------------------------------------------------
// Verdict conversion

struct WeightedValue {
  double value = 0.5;
  double weight = 0.0;
};

inline constexpr double kHighMargin = 0.67;  // |9 - 3| / 9, as tabulated
inline constexpr double kLowMargin = 0.22;   // |7 - 5| / 9, as tabulated

/// A/B x HIGH/LOW -> (1|0, 0.67|0.22); TIE -> (1/2, floor). All weights
/// floored at `floor`.
WeightedValue verdict_to_outcome(RawVerdict verdict, double floor);

/// Equal ratings tie; weight |r_A - r_B| / 9 floored at `floor`.
WeightedValue ratings_to_outcome(int rating_a, int rating_b, double floor);

// ---------------------------------------------------------------------------
// Backends

struct PairRequest {
  std::string_view problem;
  Domain domain = Domain::Code;
  const Candidate& a;
  const Candidate& b;
  const EvidenceView& view_a;
  const EvidenceView& view_b;
  EvidenceLevel level = EvidenceLevel::E2;
};

struct PairResponse {
  RawVerdict verdict;
  /// Set by backends that answer in the 1-10 rating format.
  std::optional<std::pair<int, int>> ratings;
  std::int64_t token_cost = 0;
};

struct RateRequest {
  std::string_view problem;
  Domain domain = Domain::Code;
  const Candidate& candidate;
  const EvidenceView& view;
};

struct RateResponse {
  int rating = 5;
  std::int64_t token_cost = 0;
};

/// Prompt tokens added on top of the candidate views for each call type.
struct PromptOverhead {
  std::int64_t e1 = 500;
  std::int64_t e2 = 500;
  std::int64_t pointwise = 500;

  std::int64_t at(EvidenceLevel level) const { return level == EvidenceLevel::E1 ? e1 : e2; }
};

class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual PairResponse compare(const PairRequest& req) = 0;
  virtual RateResponse rate(const RateRequest& req) = 0;
  /// Whether compare() may be called from several threads at once.
  virtual bool thread_safe() const { return true; }
};

struct SimJudgeConfig {
  double accuracy_e1 = 0.85;
  double accuracy_e2 = 0.85;
  double p_high_when_correct = 0.8;
  /// Confidence of a wrong pick on a distinguishable pair; defaults to
  /// p_high_when_correct when unset.
  std::optional<double> p_high_when_wrong;
  double p_tie_when_equal = 0.5;
  /// Confidence of a non-tie verdict on an equal-correctness pair.
  double p_high_when_equal = 0.0;
  std::uint64_t seed = 0;

  double rating_mean_correct = 9.0;
  double rating_mean_incorrect = 3.0;
  /// Normal noise on pointwise ratings; 0 makes ratings a correctness oracle.
  double rating_spread = 3.0;

  PromptOverhead overhead;

  /// Always picks the correct member of a distinguishable pair, ties every
  /// equal-correctness pair.
  static SimJudgeConfig perfect();
  /// Coin-flip winner at LOW confidence on every pair.
  static SimJudgeConfig null_judge();
};

void validate(const SimJudgeConfig& cfg);

/// Stochastic judge parameterized by per-level accuracy. Each call draws
/// from a stream keyed by (seed, unordered pair, level), so results do not
/// depend on call order and a repeated pair repeats its verdict.
class SimulatedJudge final : public JudgeBackend {
 public:
  explicit SimulatedJudge(SimJudgeConfig cfg);
  PairResponse compare(const PairRequest& req) override;
  RateResponse rate(const RateRequest& req) override;
  const SimJudgeConfig& config() const { return cfg_; }

 private:
  SimJudgeConfig cfg_;
};

/// Replays recorded judge output keyed by (pair, level).
///
///   {"pair": [3, 7], "level": "E1", "raw_text": "...<winner>A</winner>..."}
///   {"pair": [5, 5], "level": "pointwise", "raw_text": "<rating>8</rating>"}
class ReplayJudge final : public JudgeBackend {
 public:
  explicit ReplayJudge(std::istream& records, PromptOverhead overhead = {});
  explicit ReplayJudge(const std::filesystem::path& path, PromptOverhead overhead = {});

  PairResponse compare(const PairRequest& req) override;
  RateResponse rate(const RateRequest& req) override;
  std::size_t size() const { return records_.size(); }

 private:
  void load(std::istream& in);
  using Key = std::tuple<CandidateId, CandidateId, std::string>;
  std::map<Key, std::string> records_;
  PromptOverhead overhead_;
};

// ---------------------------------------------------------------------------

struct JudgeOptions {
  double confidence_floor = 0.05;
  bool confidence_weighting = true;
  EvidenceOptions evidence;
  /// Concurrent calls per round; 1 runs the round sequentially.
  int max_in_flight = 1;
};

using PairIds = std::pair<CandidateId, CandidateId>;

/// Front end shared by CAPS and the baselines: caches evidence views, puts
/// the lower id in the A slot, applies the confidence floor.
class PairJudge {
 public:
  PairJudge(JudgeBackend& backend, const Problem& problem, std::span<const Candidate> pool,
            JudgeOptions opts = {});

  JudgeOutcome judge(CandidateId a, CandidateId b, EvidenceLevel level);

  /// Judges mutually independent pairs (possibly concurrently) and returns
  /// the outcomes ordered by ascending lower id.
  std::vector<JudgeOutcome> judge_round(std::span<const PairIds> pairs, EvidenceLevel level);

  RateResponse rate(CandidateId c);

  const EvidenceView& view(CandidateId c, EvidenceLevel level);
  const Candidate& candidate(CandidateId c) const { return pool_[static_cast<std::size_t>(c)]; }
  const Problem& problem() const { return problem_; }
  const JudgeOptions& options() const { return opts_; }
  int pool_size() const { return static_cast<int>(pool_.size()); }
  std::span<const Candidate> pool() const { return pool_; }

 private:
  JudgeOutcome to_outcome(const PairResponse& resp, CandidateId lo, CandidateId hi,
                          EvidenceLevel level) const;

  JudgeBackend& backend_;
  const Problem& problem_;
  std::span<const Candidate> pool_;
  JudgeOptions opts_;
  std::vector<std::optional<EvidenceView>> e1_cache_;
  std::vector<std::optional<EvidenceView>> e2_cache_;
};

}  // namespace caps
