#pragma once

// Domain types shared by every stage of the selection pipeline.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace caps {

using CandidateId = int;

enum class Domain { Code, Math };
enum class EvidenceLevel { E0, E1, E2 };

std::string_view to_string(Domain d);
std::string_view to_string(EvidenceLevel level);
Domain parse_domain(std::string_view text);

// ---------------------------------------------------------------------------
// Errors. Everything the library throws derives from caps::Error.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class InvalidPool : public Error {
 public:
  using Error::Error;
};

class MissingAnswer : public Error {
 public:
  using Error::Error;
};

class JudgeUnavailable : public Error {
 public:
  using Error::Error;
};

class ParseFailure : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------

/// One sampled solution. `solution_span` always points into `raw_text`
/// (see evidence.hpp for how the spans are located).
struct Candidate {
  CandidateId id = 0;
  std::string raw_text;
  std::optional<std::string> reasoning_span;
  std::string solution_span;
  std::optional<bool> ground_truth;
};

struct Problem {
  std::string problem_id;
  std::string problem_text;
  Domain domain = Domain::Code;
};

struct CapsConfig {
  int finalist_count = 4;
  double rescue_margin = 0.15;
  double confidence_floor = 0.05;
  bool rescue_enabled = false;
  bool dedup_enabled = true;
  /// false runs Stage A at full evidence (same schedule).
  bool e1_enabled = true;
  /// false pairs Stage A in random order instead of strongest-vs-weakest.
  bool slaughter_enabled = true;
  /// false replaces every decisive weight by 1 (ties keep the floor).
  bool confidence_weighting = true;
  bool thinking_aware_e1 = false;
  std::uint64_t seed = 1234;

  /// Defaults with rescue margin 0.20.
  static CapsConfig table_preset();
};

struct SwissConfig {
  double budget_multiplier = 3.0;
  int min_degree = 2;
  int window = 3;
};

/// Throws InvalidConfig unless `cfg` admits a legal tournament on a pool of
/// `pool_size` candidates (f must not exceed the survivors of one halving).
const CapsConfig& validate_config(const CapsConfig& cfg, int pool_size);
const SwissConfig& validate_config(const SwissConfig& cfg);

// ---------------------------------------------------------------------------

enum class Winner { A, B, Tie };
enum class Confidence { High, Low };

struct RawVerdict {
  Winner winner = Winner::Tie;
  Confidence confidence = Confidence::Low;
  friend bool operator==(const RawVerdict&, const RawVerdict&) = default;
};

std::string_view to_string(Winner w);
std::string_view to_string(Confidence c);

/// One pairwise judgment, `value` from `i`'s perspective.
struct JudgeOutcome {
  CandidateId i = 0;
  CandidateId j = 0;
  double value = 0.5;
  double weight = 0.0;
  EvidenceLevel level = EvidenceLevel::E2;
  RawVerdict raw;
  std::int64_t token_cost = 0;
};

/// Cumulative scores, cluster sizes, transcript and the tie-break generator.
/// Single writer; callers apply outcomes in canonical order.
class TournamentState {
 public:
  TournamentState(int pool_size, std::uint64_t seed);

  void apply(const JudgeOutcome& outcome);

  double score(CandidateId c) const { return scores_.at(static_cast<std::size_t>(c)); }
  int cluster_size(CandidateId c) const {
    return cluster_sizes_.at(static_cast<std::size_t>(c));
  }
  void set_cluster_size(CandidateId c, int nu);

  int pool_size() const { return static_cast<int>(scores_.size()); }
  std::span<const double> scores() const { return scores_; }
  std::span<const int> cluster_sizes() const { return cluster_sizes_; }
  const std::vector<JudgeOutcome>& transcript() const { return transcript_; }

  std::mt19937_64& rng() { return rng_; }

  /// Scores obtained by re-applying `transcript` to a fresh state.
  static std::vector<double> replay(std::span<const JudgeOutcome> transcript, int pool_size);

 private:
  std::vector<double> scores_;
  std::vector<int> cluster_sizes_;
  std::vector<JudgeOutcome> transcript_;
  std::mt19937_64 rng_;
};

/// 64-bit FNV-1a over the canonical text encoding of a transcript.
std::uint64_t transcript_digest(std::span<const JudgeOutcome> transcript,
                                std::span<const int> ratings = {});
std::string canonical_encoding(const JudgeOutcome& o);
std::string hex64(std::uint64_t v);

/// Derives an independent 64-bit stream seed (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace caps
