#include "caps/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <thread>

#include <nlohmann/json.hpp>

#include "rng.hpp"

namespace caps {

// ---------------------------------------------------------------------------
// SimulatedJudge

SimJudgeConfig SimJudgeConfig::perfect() {
  SimJudgeConfig cfg;
  cfg.accuracy_e1 = 1.0;
  cfg.accuracy_e2 = 1.0;
  cfg.p_high_when_correct = 1.0;
  cfg.p_tie_when_equal = 1.0;
  cfg.rating_spread = 0.0;
  return cfg;
}

SimJudgeConfig SimJudgeConfig::null_judge() {
  SimJudgeConfig cfg;
  cfg.accuracy_e1 = 0.5;
  cfg.accuracy_e2 = 0.5;
  cfg.p_high_when_correct = 0.0;
  cfg.p_high_when_wrong = 0.0;
  cfg.p_tie_when_equal = 0.0;
  cfg.rating_mean_correct = 5.5;
  cfg.rating_mean_incorrect = 5.5;
  return cfg;
}

void validate(const SimJudgeConfig& cfg) {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidConfig(std::string(name) + " must lie in [0, 1]");
  };
  prob(cfg.accuracy_e1, "accuracy_e1");
  prob(cfg.accuracy_e2, "accuracy_e2");
  prob(cfg.p_high_when_correct, "p_high_when_correct");
  if (cfg.p_high_when_wrong) prob(*cfg.p_high_when_wrong, "p_high_when_wrong");
  prob(cfg.p_tie_when_equal, "p_tie_when_equal");
  prob(cfg.p_high_when_equal, "p_high_when_equal");
  if (cfg.rating_spread < 0.0) throw InvalidConfig("rating_spread must be >= 0");
}

SimulatedJudge::SimulatedJudge(SimJudgeConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }

PairResponse SimulatedJudge::compare(const PairRequest& req) {
  const bool swapped = req.a.id > req.b.id;
  const Candidate& lo = swapped ? req.b : req.a;
  const Candidate& hi = swapped ? req.a : req.b;
  const auto level_salt = static_cast<std::uint64_t>(req.level);
  detail::SplitMix64 rng(mix_seed(
      mix_seed(mix_seed(cfg_.seed, static_cast<std::uint64_t>(lo.id)), static_cast<std::uint64_t>(hi.id)),
      level_salt + 17));

  // Verdict from the perspective of (lo, hi).
  RawVerdict v;
  const bool known = lo.ground_truth.has_value() && hi.ground_truth.has_value();
  if (known && *lo.ground_truth != *hi.ground_truth) {
    const double accuracy = req.level == EvidenceLevel::E1 ? cfg_.accuracy_e1 : cfg_.accuracy_e2;
    const bool right = rng.unit() < accuracy;
    const bool lo_wins = right == *lo.ground_truth;
    const double p_high = right ? cfg_.p_high_when_correct
                                : cfg_.p_high_when_wrong.value_or(cfg_.p_high_when_correct);
    v.winner = lo_wins ? Winner::A : Winner::B;
    v.confidence = rng.unit() < p_high ? Confidence::High : Confidence::Low;
  } else if (rng.unit() < cfg_.p_tie_when_equal) {
    v = {Winner::Tie, Confidence::Low};
  } else {
    v.winner = rng.unit() < 0.5 ? Winner::A : Winner::B;
    v.confidence = rng.unit() < cfg_.p_high_when_equal ? Confidence::High : Confidence::Low;
  }
  if (swapped && v.winner != Winner::Tie) v.winner = v.winner == Winner::A ? Winner::B : Winner::A;

  PairResponse resp;
  resp.verdict = v;
  resp.token_cost = req.view_a.size_tokens + req.view_b.size_tokens + cfg_.overhead.at(req.level);
  return resp;
}

RateResponse SimulatedJudge::rate(const RateRequest& req) {
  detail::SplitMix64 rng(mix_seed(mix_seed(cfg_.seed, static_cast<std::uint64_t>(req.candidate.id)), 0x7261'7465));
  const bool correct = req.candidate.ground_truth.value_or(false);
  const double mean = correct ? cfg_.rating_mean_correct : cfg_.rating_mean_incorrect;
  double draw = mean;
  if (cfg_.rating_spread > 0.0) draw += cfg_.rating_spread * rng.normal();
  RateResponse resp;
  resp.rating = std::clamp(static_cast<int>(std::lround(draw)), 1, 10);
  resp.token_cost = req.view.size_tokens + cfg_.overhead.pointwise;
  return resp;
}

// ---------------------------------------------------------------------------
// ReplayJudge

ReplayJudge::ReplayJudge(std::istream& records, PromptOverhead overhead) : overhead_(overhead) {
  load(records);
}

ReplayJudge::ReplayJudge(const std::filesystem::path& path, PromptOverhead overhead)
    : overhead_(overhead) {
  std::ifstream in(path);
  if (!in) throw JudgeUnavailable("cannot open judge transcript " + path.string());
  load(in);
}

void ReplayJudge::load(std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      const auto& pair = rec.at("pair");
      records_[{pair.at(0).get<int>(), pair.at(1).get<int>(), rec.at("level").get<std::string>()}] =
          rec.at("raw_text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidPool("judge transcript line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

PairResponse ReplayJudge::compare(const PairRequest& req) {
  const std::string level(to_string(req.level));
  PairResponse resp;
  if (auto it = records_.find({req.a.id, req.b.id, level}); it != records_.end()) {
    resp.verdict = parse_verdict(it->second);
  } else if (auto rev = records_.find({req.b.id, req.a.id, level}); rev != records_.end()) {
    resp.verdict = parse_verdict(rev->second);
    if (resp.verdict.winner == Winner::A) {
      resp.verdict.winner = Winner::B;
    } else if (resp.verdict.winner == Winner::B) {
      resp.verdict.winner = Winner::A;
    }
  } else {
    throw JudgeUnavailable("no recorded judgment for pair (" + std::to_string(req.a.id) + ", " +
                           std::to_string(req.b.id) + ") at " + level);
  }
  resp.token_cost = req.view_a.size_tokens + req.view_b.size_tokens + overhead_.at(req.level);
  return resp;
}

RateResponse ReplayJudge::rate(const RateRequest& req) {
  auto it = records_.find({req.candidate.id, req.candidate.id, "pointwise"});
  if (it == records_.end())
    throw JudgeUnavailable("no recorded rating for candidate " + std::to_string(req.candidate.id));
  RateResponse resp;
  try {
    resp.rating = parse_rating(it->second);
  } catch (const ParseFailure&) {
    resp.rating = kNeutralRating;  // a recording reads the same on every retry
  }
  resp.token_cost = req.view.size_tokens + overhead_.pointwise;
  return resp;
}

// ---------------------------------------------------------------------------
// PairJudge

PairJudge::PairJudge(JudgeBackend& backend, const Problem& problem, std::span<const Candidate> pool,
                     JudgeOptions opts)
    : backend_(backend),
      problem_(problem),
      pool_(pool),
      opts_(std::move(opts)),
      e1_cache_(pool.size()),
      e2_cache_(pool.size()) {
  if (!(opts_.confidence_floor > 0.0 && opts_.confidence_floor <= 1.0))
    throw InvalidConfig("confidence_floor must lie in (0, 1]");
  for (std::size_t k = 0; k < pool.size(); ++k) {
    if (pool[k].id != static_cast<int>(k)) throw InvalidPool("candidate ids must equal their index");
  }
}

const EvidenceView& PairJudge::view(CandidateId c, EvidenceLevel level) {
  auto& cache = level == EvidenceLevel::E1 ? e1_cache_ : e2_cache_;
  auto& slot = cache.at(static_cast<std::size_t>(c));
  if (!slot) slot = view_at(candidate(c), problem_.domain, level, opts_.evidence);
  return *slot;
}

JudgeOutcome PairJudge::to_outcome(const PairResponse& resp, CandidateId lo, CandidateId hi,
                                   EvidenceLevel level) const {
  JudgeOutcome o;
  o.i = lo;
  o.j = hi;
  o.level = level;
  o.token_cost = resp.token_cost;
  o.raw = resp.verdict;
  WeightedValue wv;
  if (resp.ratings) {
    wv = ratings_to_outcome(resp.ratings->first, resp.ratings->second, opts_.confidence_floor);
    o.raw.winner = wv.value == 1.0 ? Winner::A : wv.value == 0.0 ? Winner::B : Winner::Tie;
  } else {
    wv = verdict_to_outcome(resp.verdict, opts_.confidence_floor);
  }
  if (!opts_.confidence_weighting && wv.value != 0.5) wv.weight = 1.0;
  o.value = wv.value;
  o.weight = std::max(wv.weight, opts_.confidence_floor);
  return o;
}

JudgeOutcome PairJudge::judge(CandidateId a, CandidateId b, EvidenceLevel level) {
  if (a == b) throw InvalidConfig("a candidate cannot be judged against itself");
  if (level == EvidenceLevel::E0) throw InvalidConfig("E0 signatures are never shown to a judge");
  const CandidateId lo = std::min(a, b);
  const CandidateId hi = std::max(a, b);
  const auto& va = view(lo, level);
  const auto& vb = view(hi, level);
  const PairRequest req{problem_.problem_text, problem_.domain, candidate(lo), candidate(hi), va, vb, level};
  return to_outcome(backend_.compare(req), lo, hi, level);
}

std::vector<JudgeOutcome> PairJudge::judge_round(std::span<const PairIds> pairs, EvidenceLevel level) {
  std::vector<PairIds> canonical(pairs.begin(), pairs.end());
  for (auto& p : canonical) p = {std::min(p.first, p.second), std::max(p.first, p.second)};
  std::sort(canonical.begin(), canonical.end());

  std::vector<JudgeOutcome> out(canonical.size());
  const int workers = std::min<int>(opts_.max_in_flight, static_cast<int>(canonical.size()));
  if (workers <= 1 || !backend_.thread_safe()) {
    for (std::size_t k = 0; k < canonical.size(); ++k)
      out[k] = judge(canonical[k].first, canonical[k].second, level);
    return out;
  }

  // Views are materialized up front so workers only read the caches.
  for (const auto& [x, y] : canonical) {
    view(x, level);
    view(y, level);
  }
  std::vector<std::exception_ptr> errors(canonical.size());
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < canonical.size(); k = next++) {
          try {
            out[k] = judge(canonical[k].first, canonical[k].second, level);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

RateResponse PairJudge::rate(CandidateId c) {
  const auto& v = view(c, EvidenceLevel::E2);
  const RateRequest req{problem_.problem_text, problem_.domain, candidate(c), v};
  return backend_.rate(req);
}

}  // namespace caps
