#include "caps/gateway.hpp"

namespace caps {

std::string pair_template_id(Domain domain, EvidenceLevel level, bool v1_ratings) {
  if (level == EvidenceLevel::E0) throw InvalidConfig("E0 signatures are never shown to a judge");
  const std::string suffix(to_string(domain));
  if (level == EvidenceLevel::E1) return "caps_e1_" + suffix;
  return (v1_ratings ? "v1_pairwise_" : "caps_e2_") + suffix;
}

LlmJudge::LlmJudge(LlmClient& client, LlmJudgeOptions opts) : client_(client), opts_(std::move(opts)) {
  if (opts_.parse_retries < 0) throw InvalidConfig("parse_retries must be >= 0");
}

PairResponse LlmJudge::compare(const PairRequest& req) {
  const bool ratings = opts_.v1_ratings && req.level == EvidenceLevel::E2;
  const auto id = pair_template_id(req.domain, req.level, ratings);
  const Slots slots = {{"problem", std::string(req.problem)},
                       {"evidence_A", req.view_a.payload},
                       {"evidence_B", req.view_b.payload},
                       {"code_A", req.view_a.payload},
                       {"code_B", req.view_b.payload},
                       {"sol_A", req.view_a.payload},
                       {"sol_B", req.view_b.payload}};
  const auto prompt = render_prompt(id, slots);
  const auto prompt_tokens = opts_.counter(prompt);

  PairResponse resp;
  for (int attempt = 0; attempt <= opts_.parse_retries; ++attempt) {
    resp.token_cost += prompt_tokens;
    const auto out = client_.complete(prompt, opts_.sampling);
    if (ratings) {
      try {
        resp.ratings = parse_rating_pair(out.text);
        return resp;
      } catch (const ParseFailure&) {
        continue;
      }
    }
    const auto parsed = parse_verdict_detailed(out.text);
    if (parsed.winner_found) {
      resp.verdict = parsed.verdict;
      return resp;
    }
  }
  resp.verdict = {Winner::Tie, Confidence::Low};
  return resp;
}

RateResponse LlmJudge::rate(const RateRequest& req) {
  const Slots slots = {{"problem", std::string(req.problem)},
                       {"code", req.view.payload},
                       {"solution", req.view.payload}};
  const auto prompt = render_prompt("pointwise_" + std::string(to_string(req.domain)), slots);
  const auto prompt_tokens = opts_.counter(prompt);
  RateResponse resp;
  resp.token_cost = 0;
  for (int attempt = 0; attempt <= opts_.parse_retries; ++attempt) {
    resp.token_cost += prompt_tokens;
    try {
      resp.rating = parse_rating(client_.complete(prompt, opts_.sampling).text);
      return resp;
    } catch (const ParseFailure&) {
    }
  }
  resp.rating = kNeutralRating;
  return resp;
}

}  // namespace caps
