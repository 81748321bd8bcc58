#pragma once

// Small builders shared by the unit and acceptance tests.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "caps/core.hpp"
#include "caps/evidence.hpp"
#include "caps/judge.hpp"
#include "caps/pool_io.hpp"

namespace caps::test {

inline Candidate code_candidate(CandidateId id, std::string body, std::optional<bool> truth = std::nullopt,
                                std::string reasoning = "Plan the loop carefully.") {
  Candidate c;
  c.id = id;
  c.raw_text = reasoning + "\n```python\n" + body + "\n```\n";
  c.ground_truth = truth;
  locate_spans(c, Domain::Code);
  return c;
}

/// Pool of distinct code candidates with the given correctness flags.
inline CandidatePool code_pool(const std::vector<bool>& truth) {
  CandidatePool pool;
  pool.problem = {"p", "Return the sum of a list.", Domain::Code};
  for (std::size_t k = 0; k < truth.size(); ++k) {
    pool.candidates.push_back(
        code_candidate(static_cast<int>(k), "def f(xs):\n    return " + std::to_string(k) + " + sum(xs)", truth[k]));
  }
  return pool;
}

/// Backend answering from a function of (lower id, higher id, level).
class ScriptedJudge final : public JudgeBackend {
 public:
  using Script = std::function<RawVerdict(CandidateId, CandidateId, EvidenceLevel)>;
  explicit ScriptedJudge(Script script, std::int64_t cost = 1) : script_(std::move(script)), cost_(cost) {}
  PairResponse compare(const PairRequest& req) override {
    ++calls;
    PairResponse r;
    r.verdict = script_(req.a.id, req.b.id, req.level);
    r.token_cost = cost_;
    return r;
  }
  RateResponse rate(const RateRequest&) override { return {kNeutralRating, cost_}; }
  bool thread_safe() const override { return false; }
  int calls = 0;

 private:
  Script script_;
  std::int64_t cost_;
};

/// Lower id always wins at the given confidence.
inline ScriptedJudge::Script lower_id_wins(Confidence c = Confidence::High) {
  return [c](CandidateId, CandidateId, EvidenceLevel) { return RawVerdict{Winner::A, c}; };
}

}  // namespace caps::test
