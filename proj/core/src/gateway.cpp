#include "caps/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace caps {
namespace detail {
extern const std::pair<std::string_view, std::string_view> kPromptAssets[];
extern const std::size_t kPromptAssetCount;
}  // namespace detail

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Templates

std::vector<std::string_view> template_ids() {
  std::vector<std::string_view> ids;
  for (std::size_t k = 0; k < detail::kPromptAssetCount; ++k) ids.push_back(detail::kPromptAssets[k].first);
  return ids;
}

std::string_view prompt_template(std::string_view template_id) {
  for (std::size_t k = 0; k < detail::kPromptAssetCount; ++k) {
    if (detail::kPromptAssets[k].first == template_id) return detail::kPromptAssets[k].second;
  }
  throw InvalidConfig("unknown prompt template '" + std::string(template_id) + "'");
}

std::string render_template(std::string_view text, const Slots& slots) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) break;
    out.append(text.substr(pos, open - pos));
    std::size_t end = open + 1;
    if (end < text.size() && ident_start(text[end])) {
      while (end < text.size() && ident_char(text[end])) ++end;
      if (end < text.size() && text[end] == '}') {
        const auto name = text.substr(open + 1, end - open - 1);
        const auto it = slots.find(name);
        if (it == slots.end()) throw MissingSlot("no value for placeholder {" + std::string(name) + "}");
        out += it->second;
        pos = end + 1;
        continue;
      }
    }
    out += '{';
    pos = open + 1;
  }
  if (pos < text.size()) out.append(text.substr(pos));
  return out;
}

std::string render_prompt(std::string_view template_id, const Slots& slots) {
  return render_template(prompt_template(template_id), slots);
}

// ---------------------------------------------------------------------------
// Client

LlmClient::LlmClient(EndpointConfig cfg, Logger log)
    : cfg_(std::move(cfg)), log_(std::move(log)), slots_(std::clamp(cfg_.max_in_flight, 1, 1024)) {
  if (cfg_.max_in_flight < 1 || cfg_.max_in_flight > 1024) throw InvalidConfig("max_in_flight must lie in [1, 1024]");
  if (cfg_.max_retries < 0) throw InvalidConfig("max_retries must be >= 0");
  const auto scheme = cfg_.url.find("://");
  if (scheme == std::string::npos) throw InvalidConfig("endpoint url needs a scheme: " + cfg_.url);
  const auto slash = cfg_.url.find('/', scheme + 3);
  host_ = cfg_.url.substr(0, slash);
  path_ = slash == std::string::npos ? "" : cfg_.url.substr(slash);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  if (!path_.ends_with("/chat/completions")) path_ += "/chat/completions";
  if (!cfg_.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
  }
}

LlmClient::~LlmClient() = default;

Completion LlmClient::complete(std::string_view prompt, const Sampling& sampling) {
  if (cfg_.context_limit > 0) {
    const auto need = cfg_.counter(prompt) + sampling.max_tokens;
    if (need > cfg_.context_limit)
      throw ContextOverflow("request needs " + std::to_string(need) + " tokens, context limit is " +
                            std::to_string(cfg_.context_limit));
  }
  const nlohmann::json body = {{"model", cfg_.model},
                               {"messages", {{{"role", "user"}, {"content", std::string(prompt)}}}},
                               {"temperature", sampling.temperature},
                               {"max_tokens", sampling.max_tokens}};
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  SlotGuard guard(slots_);
  std::string last_error;
  auto delay = cfg_.backoff;
  for (int attempt = 1; attempt <= cfg_.max_retries + 1; ++attempt) {
    if (attempt > 1) {
      if (log_) log_("retrying after " + last_error);
      std::this_thread::sleep_for(delay);
      delay = std::chrono::milliseconds(static_cast<long long>(std::llround(delay.count() * cfg_.backoff_factor)));
    }
    httplib::Client cli(host_);
    cli.set_connection_timeout(cfg_.timeout);
    cli.set_read_timeout(cfg_.timeout);
    cli.set_write_timeout(cfg_.timeout);
    auto res = cli.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      if (log_) log_("attempt " + std::to_string(attempt) + ": " + last_error);
      continue;
    }
    const int status = res->status;
    if (log_) log_("attempt " + std::to_string(attempt) + ": HTTP " + std::to_string(status));
    if (status == 401 || status == 403) throw AuthFailure("endpoint rejected credentials (HTTP " + std::to_string(status) + ")");
    if (status == 413 || (status == 400 && lower(res->body).find("context") != std::string::npos))
      throw ContextOverflow("endpoint reports the request exceeds the model context: " + res->body);
    if (status == 429 || status >= 500) {
      last_error = "HTTP " + std::to_string(status);
      continue;
    }
    if (status != 200) throw TransportError("HTTP " + std::to_string(status) + ": " + res->body);
    try {
      const auto reply = nlohmann::json::parse(res->body);
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      return {content.is_null() ? std::string() : content.get<std::string>(), attempt};
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
      if (log_) log_("attempt " + std::to_string(attempt) + ": " + last_error);
    }
  }
  throw TransportError("giving up after " + std::to_string(cfg_.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace caps
