#pragma once

// Evidence views of a candidate: E0 signatures for clustering, E1 partial
// views and E2 full views shown to the judge.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "caps/core.hpp"

namespace caps {

class TokenCounter {
 public:
  enum class Kind { CharsPerFour, Words };

  /// ceil(code points / 4); the default approximation.
  static TokenCounter chars_per_four() { return TokenCounter(Kind::CharsPerFour); }
  static TokenCounter whitespace_words() { return TokenCounter(Kind::Words); }

  std::int64_t operator()(std::string_view text) const;
  Kind kind() const { return kind_; }

 private:
  explicit TokenCounter(Kind k) : kind_(k) {}
  Kind kind_;
};

struct EvidenceView {
  EvidenceLevel level = EvidenceLevel::E2;
  std::string payload;  // the signature for E0
  std::int64_t size_tokens = 0;
};

struct EvidenceOptions {
  TokenCounter counter = TokenCounter::chars_per_four();
  bool thinking_aware = false;
  std::size_t head_words = 50;
  std::size_t tail_words = 50;
  std::size_t code_chars = 500;
  std::int64_t thinking_tail_tokens = 500;
};

inline constexpr std::string_view kTruncationMarker = "[...reasoning truncated...]";

/// Line prefixes treated as import statements by normalize_code (matched
/// after leading whitespace is removed). Python `from x import y` is matched
/// separately.
inline constexpr std::array<std::string_view, 9> kImportPrefixes = {
    "import ", "#include", "using namespace ", "use ", "extern crate ",
    "package ", "require ", "library(", "open import "};

enum class CommentStyle { Auto, Hash, Slash, Both };

/// Drops imports, comments, blank lines, fence lines and leading/trailing
/// whitespace, keeping line order. Auto picks the comment syntax from the
/// fence info string, falling back to a line-shape heuristic.
std::string normalize_code(std::string_view text, CommentStyle style = CommentStyle::Auto);

/// Fills reasoning_span and solution_span from raw_text.
///
/// Reasoning is the text between <thinking>/<think> delimiters when present.
/// Otherwise it is everything before the final fenced block (code) or the
/// full text minus the sentence holding the last \boxed{} (math). For code
/// the solution span is the final fenced block including its fences; for
/// math it is the whole text.
void locate_spans(Candidate& c, Domain domain);

/// Content of the last \boxed{...} in `text`, brace-matched.
std::optional<std::string_view> last_boxed(std::string_view text);

/// Lowercase, whitespace-free answer with thin/negative spaces and sizing
/// commands removed.
std::string normalize_math_answer(std::string_view answer);

/// Code: first 16 hex digits of SHA-256 over normalize_code(solution_span).
/// Math: normalized last boxed answer; throws MissingAnswer when absent.
std::string signature(const Candidate& c, Domain domain);

/// Non-throwing variant; nullopt means "treat as a singleton cluster".
std::optional<std::string> try_signature(const Candidate& c, Domain domain);

std::string sha256_hex(std::string_view bytes);

EvidenceView partial_view(const Candidate& c, Domain domain, const EvidenceOptions& opts = {});
EvidenceView full_view(const Candidate& c, const EvidenceOptions& opts = {});
EvidenceView view_at(const Candidate& c, Domain domain, EvidenceLevel level,
                     const EvidenceOptions& opts = {});

}  // namespace caps
