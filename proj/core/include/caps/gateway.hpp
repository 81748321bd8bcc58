#pragma once

// Chat-completions client, prompt templates, and the live judge backend.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "caps/core.hpp"
#include "caps/evidence.hpp"
#include "caps/judge.hpp"

namespace caps {

class TransportError : public Error {
 public:
  using Error::Error;
};

class AuthFailure : public Error {
 public:
  using Error::Error;
};

class ContextOverflow : public Error {
 public:
  using Error::Error;
};

class MissingSlot : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Templates

using Slots = std::map<std::string, std::string, std::less<>>;

/// Ids of the shipped templates, e.g. "caps_e1_code", "pointwise_math".
std::vector<std::string_view> template_ids();

/// Throws InvalidConfig for an unknown id.
std::string_view prompt_template(std::string_view template_id);

/// Replaces every `{name}` placeholder in one pass; substituted text is not
/// rescanned. Braces not enclosing an identifier (e.g. `\boxed{}`) are kept.
/// Throws MissingSlot when a placeholder has no slot.
std::string render_template(std::string_view text, const Slots& slots);
std::string render_prompt(std::string_view template_id, const Slots& slots);

// ---------------------------------------------------------------------------
// Client

struct Sampling {
  double temperature = 0.0;
  int max_tokens = 4096;
};

struct EndpointConfig {
  /// Base URL, e.g. "http://localhost:8000/v1"; "/chat/completions" is
  /// appended unless already present.
  std::string url = "http://localhost:8000/v1";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  int max_retries = 4;
  std::chrono::milliseconds backoff{500};
  double backoff_factor = 2.0;
  std::chrono::seconds timeout{300};
  int max_in_flight = 16;
  /// Prompt plus max_tokens must fit; 0 disables the local check.
  std::int64_t context_limit = 0;
  TokenCounter counter = TokenCounter::chars_per_four();
};

struct Completion {
  std::string text;
  int attempts = 0;
};

class LlmClient {
 public:
  using Logger = std::function<void(std::string_view)>;

  explicit LlmClient(EndpointConfig cfg, Logger log = {});
  ~LlmClient();
  LlmClient(const LlmClient&) = delete;
  LlmClient& operator=(const LlmClient&) = delete;

  /// One user message in, one completion out. Retries transport errors,
  /// 429 and 5xx with exponential backoff; throws AuthFailure on 401/403,
  /// ContextOverflow when the request cannot fit, TransportError otherwise.
  Completion complete(std::string_view prompt, const Sampling& sampling = {});

  const EndpointConfig& config() const { return cfg_; }

 private:
  EndpointConfig cfg_;
  Logger log_;
  std::string host_;
  std::string path_;
  std::string api_key_;
  std::counting_semaphore<1024> slots_;
};

// ---------------------------------------------------------------------------
// Live judge

struct LlmJudgeOptions {
  /// Full-evidence comparisons use the two-rating pairwise prompt.
  bool v1_ratings = false;
  int parse_retries = 2;
  Sampling sampling;
  TokenCounter counter = TokenCounter::chars_per_four();
};

/// Renders the shipped templates, calls the model, parses its verdict.
/// Output that stays unparseable after the retries reads as (TIE, LOW),
/// or as the neutral rating for pointwise calls. Token cost is the rendered
/// prompt size times the number of requests sent.
class LlmJudge final : public JudgeBackend {
 public:
  LlmJudge(LlmClient& client, LlmJudgeOptions opts = {});
  PairResponse compare(const PairRequest& req) override;
  RateResponse rate(const RateRequest& req) override;

 private:
  LlmClient& client_;
  LlmJudgeOptions opts_;
};

/// Template id used for a comparison at `level` in `domain`.
std::string pair_template_id(Domain domain, EvidenceLevel level, bool v1_ratings);

}  // namespace caps
