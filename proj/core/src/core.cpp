#include "caps/core.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>

namespace caps {

std::string_view to_string(Domain d) { return d == Domain::Code ? "code" : "math"; }

std::string_view to_string(EvidenceLevel level) {
  switch (level) {
    case EvidenceLevel::E0: return "E0";
    case EvidenceLevel::E1: return "E1";
    case EvidenceLevel::E2: return "E2";
  }
  return "?";
}

Domain parse_domain(std::string_view text) {
  if (text == "code") return Domain::Code;
  if (text == "math") return Domain::Math;
  throw InvalidPool("unknown domain '" + std::string(text) + "' (expected code|math)");
}

std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::A: return "A";
    case Winner::B: return "B";
    case Winner::Tie: return "TIE";
  }
  return "?";
}

std::string_view to_string(Confidence c) { return c == Confidence::High ? "HIGH" : "LOW"; }

CapsConfig CapsConfig::table_preset() {
  CapsConfig cfg;
  cfg.rescue_margin = 0.20;
  cfg.rescue_enabled = true;
  return cfg;
}

const CapsConfig& validate_config(const CapsConfig& cfg, int pool_size) {
  if (pool_size < 1) throw InvalidConfig("pool must hold at least one candidate");
  if (cfg.finalist_count < 1) throw InvalidConfig("finalist_count must be >= 1");
  if (!(cfg.confidence_floor > 0.0 && cfg.confidence_floor <= 1.0))
    throw InvalidConfig("confidence_floor must lie in (0, 1]");
  if (!(cfg.rescue_margin >= 0.0) || !std::isfinite(cfg.rescue_margin))
    throw InvalidConfig("rescue_margin must be finite and >= 0");
  const int after_one_halving = (pool_size + 1) / 2;
  if (cfg.finalist_count > after_one_halving) {
    throw InvalidConfig("finalist_count " + std::to_string(cfg.finalist_count) +
                        " exceeds the " + std::to_string(after_one_halving) +
                        " survivors of one halving of " + std::to_string(pool_size));
  }
  return cfg;
}

const SwissConfig& validate_config(const SwissConfig& cfg) {
  if (!(cfg.budget_multiplier >= 1.0)) throw InvalidConfig("budget_multiplier must be >= 1");
  if (cfg.min_degree < 1) throw InvalidConfig("min_degree must be >= 1");
  if (cfg.window < 1) throw InvalidConfig("window must be >= 1");
  return cfg;
}

TournamentState::TournamentState(int pool_size, std::uint64_t seed)
    : scores_(static_cast<std::size_t>(pool_size), 0.0),
      cluster_sizes_(static_cast<std::size_t>(pool_size), 1),
      rng_(seed) {}

void TournamentState::apply(const JudgeOutcome& o) {
  scores_.at(static_cast<std::size_t>(o.i)) += o.weight * o.value;
  scores_.at(static_cast<std::size_t>(o.j)) += o.weight * (1.0 - o.value);
  transcript_.push_back(o);
}

void TournamentState::set_cluster_size(CandidateId c, int nu) {
  if (nu < 0) throw InvalidConfig("cluster size must be non-negative");
  cluster_sizes_.at(static_cast<std::size_t>(c)) = nu;
}

std::vector<double> TournamentState::replay(std::span<const JudgeOutcome> transcript,
                                            int pool_size) {
  TournamentState fresh(pool_size, 0);
  for (const auto& o : transcript) fresh.apply(o);
  return {fresh.scores_.begin(), fresh.scores_.end()};
}

std::string canonical_encoding(const JudgeOutcome& o) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%s,%s,%s,%" PRId64 ";", o.i, o.j, o.value,
                o.weight, std::string(to_string(o.level)).c_str(),
                std::string(to_string(o.raw.winner)).c_str(),
                std::string(to_string(o.raw.confidence)).c_str(), o.token_cost);
  return buf;
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_update(std::uint64_t& h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
}

}  // namespace

std::uint64_t transcript_digest(std::span<const JudgeOutcome> transcript,
                                std::span<const int> ratings) {
  std::uint64_t h = kFnvOffset;
  for (const auto& o : transcript) fnv_update(h, canonical_encoding(o));
  for (std::size_t k = 0; k < ratings.size(); ++k) {
    fnv_update(h, "r" + std::to_string(k) + "=" + std::to_string(ratings[k]) + ";");
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace caps
