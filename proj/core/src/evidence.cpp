#include "caps/evidence.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

#include <openssl/evp.h>

namespace caps {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t k = 0;
  while (k < s.size()) {
    while (k < s.size() && is_space(s[k])) ++k;
    const std::size_t start = k;
    while (k < s.size() && !is_space(s[k])) ++k;
    if (k > start) words.push_back(s.substr(start, k - start));
  }
  return words;
}

std::string join(std::span<const std::string_view> words) {
  std::string out;
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (k) out += ' ';
    out += words[k];
  }
  return out;
}

bool is_utf8_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

/// First `n` code points of `s`.
std::string_view prefix_chars(std::string_view s, std::size_t n) {
  std::size_t k = 0;
  std::size_t seen = 0;
  while (k < s.size()) {
    if (!is_utf8_continuation(s[k])) {
      if (seen == n) break;
      ++seen;
    }
    ++k;
  }
  return s.substr(0, k);
}

struct Line {
  std::size_t begin;
  std::size_t end;  // exclusive, excludes '\n'
};

std::vector<Line> lines_of(std::string_view s) {
  std::vector<Line> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < s.size()) out.push_back({start, s.size()});
      break;
    }
    out.push_back({start, nl});
    start = nl + 1;
  }
  return out;
}

bool is_fence(std::string_view line) {
  auto t = ltrim(line);
  return starts_with(t, "```") || starts_with(t, "~~~");
}

struct Block {
  std::size_t begin;
  std::size_t end;
};

/// Fenced blocks of `text`, offsets relative to `text`. An unterminated fence
/// runs to the end.
std::vector<Block> fenced_blocks(std::string_view text) {
  std::vector<Block> blocks;
  constexpr auto kNone = std::string_view::npos;
  std::size_t open = kNone;
  for (const auto& ln : lines_of(text)) {
    if (!is_fence(text.substr(ln.begin, ln.end - ln.begin))) continue;
    if (open == kNone) {
      open = ln.begin;
    } else {
      blocks.push_back({open, ln.end});
      open = kNone;
    }
  }
  if (open != kNone) blocks.push_back({open, text.size()});
  return blocks;
}

struct ThinkingSpan {
  std::size_t content_begin;
  std::size_t content_end;
  std::size_t after_close;
};

std::optional<ThinkingSpan> find_thinking(std::string_view raw) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 2> kTags = {
      {{"<thinking>", "</thinking>"}, {"<think>", "</think>"}}};
  for (const auto& [open_tag, close_tag] : kTags) {
    const auto open = raw.find(open_tag);
    const auto search_from = open == std::string_view::npos ? 0 : open + open_tag.size();
    const auto close = raw.find(close_tag, search_from);
    if (close == std::string_view::npos) {
      if (open != std::string_view::npos) {
        // Unterminated: everything after the opening tag is reasoning.
        return ThinkingSpan{search_from, raw.size(), raw.size()};
      }
      continue;
    }
    return ThinkingSpan{search_from, close, close + close_tag.size()};
  }
  return std::nullopt;
}

std::optional<std::string> nonempty(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  return std::string(s);
}

struct BoxedSpan {
  std::size_t command_begin;
  std::size_t content_begin;
  std::size_t content_end;  // position of the closing brace
};

std::optional<BoxedSpan> find_last_boxed(std::string_view text) {
  static constexpr std::string_view kCmd = "\\boxed";
  std::size_t pos = text.rfind(kCmd);
  while (pos != std::string_view::npos) {
    std::size_t k = pos + kCmd.size();
    while (k < text.size() && text[k] == ' ') ++k;
    if (k < text.size() && text[k] == '{') {
      int depth = 0;
      for (std::size_t m = k; m < text.size(); ++m) {
        if (text[m] == '{') ++depth;
        if (text[m] == '}' && --depth == 0) return BoxedSpan{pos, k + 1, m};
      }
      // Unbalanced: fall through to an earlier occurrence.
    }
    if (pos == 0) break;
    pos = text.rfind(kCmd, pos - 1);
  }
  return std::nullopt;
}

/// raw minus the sentence that holds the last \boxed{}.
std::string strip_boxed_sentence(std::string_view raw) {
  auto boxed = find_last_boxed(raw);
  if (!boxed) return std::string(raw);
  std::size_t start = 0;
  for (std::size_t k = boxed->command_begin; k > 0; --k) {
    const char c = raw[k - 1];
    if (c == '\n' || ((c == '.' || c == '!' || c == '?') && k < raw.size() && is_space(raw[k]))) {
      start = k;
      break;
    }
  }
  std::size_t end = raw.find('\n', boxed->content_end);
  if (end == std::string_view::npos) end = raw.size();
  std::string out(raw.substr(0, start));
  out.append(raw.substr(end));
  return out;
}

enum class Lang { Unknown, Hash, Slash };

Lang lang_from_info(std::string_view info) {
  static constexpr std::array<std::string_view, 10> kHash = {
      "python", "py", "python3", "ruby", "rb", "bash", "sh", "r", "perl", "julia"};
  static constexpr std::array<std::string_view, 20> kSlash = {
      "c",    "cpp",   "c++",  "cc",   "cxx",   "java",  "javascript", "js",  "ts",    "typescript",
      "go",   "rust",  "rs",   "kotlin", "kt", "swift", "csharp",     "cs",  "scala", "dart"};
  const std::string tag = lower(trim(info));
  if (tag.empty()) return Lang::Unknown;
  if (std::find(kHash.begin(), kHash.end(), tag) != kHash.end()) return Lang::Hash;
  if (std::find(kSlash.begin(), kSlash.end(), tag) != kSlash.end()) return Lang::Slash;
  return Lang::Unknown;
}

CommentStyle detect_style(std::string_view text) {
  int hash_votes = 0;
  int slash_votes = 0;
  for (const auto& ln : lines_of(text)) {
    auto line = trim(text.substr(ln.begin, ln.end - ln.begin));
    if (is_fence(line)) {
      auto info = ltrim(line).substr(3);
      switch (lang_from_info(info)) {
        case Lang::Hash: return CommentStyle::Hash;
        case Lang::Slash: return CommentStyle::Slash;
        case Lang::Unknown: break;
      }
      continue;
    }
    if (starts_with(line, "def ") || starts_with(line, "elif ") ||
        (starts_with(line, "from ") && line.find(" import ") != std::string_view::npos) ||
        (!line.empty() && line.back() == ':' && starts_with(line, "for ")))
      ++hash_votes;
    if (starts_with(line, "#include") ||
        (!line.empty() && (line.back() == ';' || line.back() == '{')))
      ++slash_votes;
  }
  if (hash_votes > 0 && slash_votes == 0) return CommentStyle::Hash;
  if (slash_votes > 0 && hash_votes == 0) return CommentStyle::Slash;
  return CommentStyle::Both;
}

bool is_directive_at(std::string_view s, std::size_t hash_pos) {
  static constexpr std::array<std::string_view, 10> kDirectives = {
      "define", "undef", "ifdef", "ifndef", "if", "elif", "else", "endif", "pragma", "include"};
  auto rest = s.substr(hash_pos + 1);
  for (auto d : kDirectives) {
    if (starts_with(rest, d) && (rest.size() == d.size() || !is_alpha(rest[d.size()])))
      return true;
  }
  return false;
}

/// Removes comments while keeping every newline.
std::string strip_comments(std::string_view s, CommentStyle style) {
  const bool hash = style == CommentStyle::Hash || style == CommentStyle::Both;
  const bool slash = style == CommentStyle::Slash || style == CommentStyle::Both;
  std::string out;
  out.reserve(s.size());
  char quote = 0;
  bool block = false;
  bool line_start = true;  // only whitespace so far on this line
  for (std::size_t k = 0; k < s.size(); ++k) {
    const char c = s[k];
    if (c == '\n') {
      out += c;
      quote = 0;
      line_start = true;
      continue;
    }
    if (block) {
      if (c == '*' && k + 1 < s.size() && s[k + 1] == '/') {
        block = false;
        ++k;
      }
      continue;
    }
    if (quote) {
      out += c;
      if (c == '\\' && k + 1 < s.size() && s[k + 1] != '\n') {
        out += s[++k];
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
      out += c;
      line_start = false;
      continue;
    }
    const bool skip_line =
        (slash && c == '/' && k + 1 < s.size() && s[k + 1] == '/') ||
        (hash && c == '#' && !(style == CommentStyle::Both && line_start && is_directive_at(s, k)));
    if (skip_line) {
      while (k + 1 < s.size() && s[k + 1] != '\n') ++k;
      continue;
    }
    if (slash && c == '/' && k + 1 < s.size() && s[k + 1] == '*') {
      block = true;
      ++k;
      continue;
    }
    if (!is_space(c)) line_start = false;
    out += c;
  }
  return out;
}

bool is_import(std::string_view line) {
  for (auto prefix : kImportPrefixes) {
    if (starts_with(line, prefix)) return true;
  }
  return starts_with(line, "from ") && line.find(" import ") != std::string_view::npos;
}

/// Longest word-aligned suffix of `text` whose token count stays within
/// `budget`.
std::string_view tail_within(std::string_view text, std::int64_t budget, const TokenCounter& count) {
  text = trim(text);
  if (count(text) <= budget) return text;
  std::vector<std::size_t> starts;
  for (std::size_t k = 0; k < text.size(); ++k) {
    if (!is_space(text[k]) && (k == 0 || is_space(text[k - 1]))) starts.push_back(k);
  }
  // Token counts shrink as the start moves right.
  std::size_t lo = 0;
  std::size_t hi = starts.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (count(text.substr(starts[mid])) <= budget) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (lo == starts.size()) return {};
  return text.substr(starts[lo]);
}

std::string reasoning_summary(const std::optional<std::string>& reasoning, const EvidenceOptions& opts) {
  if (!reasoning) return {};
  auto words = split_words(*reasoning);
  if (words.size() <= opts.head_words + opts.tail_words) return std::string(trim(*reasoning));
  std::span<const std::string_view> all(words);
  std::string out = join(all.first(opts.head_words));
  out += '\n';
  out += kTruncationMarker;
  out += '\n';
  out += join(all.last(opts.tail_words));
  return out;
}

}  // namespace

std::int64_t TokenCounter::operator()(std::string_view text) const {
  if (kind_ == Kind::Words) return static_cast<std::int64_t>(split_words(text).size());
  std::int64_t points = 0;
  for (char c : text) {
    if (!is_utf8_continuation(c)) ++points;
  }
  return (points + 3) / 4;
}

std::string normalize_code(std::string_view text, CommentStyle style) {
  if (style == CommentStyle::Auto) style = detect_style(text);
  const std::string stripped = strip_comments(text, style);
  std::string_view view(stripped);
  std::string out;
  for (const auto& ln : lines_of(view)) {
    auto line = trim(view.substr(ln.begin, ln.end - ln.begin));
    if (line.empty() || is_fence(line) || is_import(line)) continue;
    if (!out.empty()) out += '\n';
    out += line;
  }
  return out;
}

void locate_spans(Candidate& c, Domain domain) {
  std::string_view raw(c.raw_text);
  const auto think = find_thinking(raw);
  c.reasoning_span.reset();
  if (think) c.reasoning_span = nonempty(raw.substr(think->content_begin, think->content_end - think->content_begin));

  if (domain == Domain::Math) {
    c.solution_span = c.raw_text;
    if (!think) c.reasoning_span = nonempty(strip_boxed_sentence(raw));
    return;
  }

  const std::size_t region = think ? think->after_close : 0;
  const auto blocks = fenced_blocks(raw.substr(region));
  if (!blocks.empty()) {
    const auto& last = blocks.back();
    c.solution_span = std::string(raw.substr(region + last.begin, last.end - last.begin));
    if (!think) c.reasoning_span = nonempty(raw.substr(0, region + last.begin));
    return;
  }
  auto rest = trim(raw.substr(region));
  c.solution_span = std::string(rest.empty() ? trim(raw) : rest);
}

std::optional<std::string_view> last_boxed(std::string_view text) {
  auto b = find_last_boxed(text);
  if (!b) return std::nullopt;
  return text.substr(b->content_begin, b->content_end - b->content_begin);
}

std::string normalize_math_answer(std::string_view answer) {
  static constexpr std::array<std::string_view, 5> kSpacing = {"\\,", "\\!", "\\;", "\\:", "\\ "};
  static constexpr std::array<std::string_view, 6> kSizing = {"\\left", "\\right", "\\bigg",
                                                              "\\Bigg", "\\big", "\\Big"};
  std::string out;
  out.reserve(answer.size());
  std::size_t k = 0;
  while (k < answer.size()) {
    bool removed = false;
    for (auto cmd : kSpacing) {
      if (starts_with(answer.substr(k), cmd)) {
        k += cmd.size();
        removed = true;
        break;
      }
    }
    if (removed) continue;
    for (auto cmd : kSizing) {
      if (!starts_with(answer.substr(k), cmd)) continue;
      std::size_t end = k + cmd.size();
      // \bigl, \Bigr, \biggm ...
      if (cmd.find("ig") != std::string_view::npos && end < answer.size() &&
          (answer[end] == 'l' || answer[end] == 'r' || answer[end] == 'm'))
        ++end;
      if (end < answer.size() && is_alpha(answer[end])) continue;  // e.g. \leftarrow
      k = end;
      removed = true;
      break;
    }
    if (removed) continue;
    if (!is_space(answer[k])) out += static_cast<char>(std::tolower(static_cast<unsigned char>(answer[k])));
    ++k;
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int k = 0; k < len; ++k) {
    out += kHex[md[k] >> 4];
    out += kHex[md[k] & 0x0F];
  }
  return out;
}

std::string signature(const Candidate& c, Domain domain) {
  if (domain == Domain::Code) return sha256_hex(normalize_code(c.solution_span)).substr(0, 16);
  auto boxed = last_boxed(c.raw_text);
  if (!boxed) throw MissingAnswer("candidate " + std::to_string(c.id) + " has no \\boxed{} answer");
  return normalize_math_answer(*boxed);
}

std::optional<std::string> try_signature(const Candidate& c, Domain domain) {
  try {
    return signature(c, domain);
  } catch (const MissingAnswer&) {
    return std::nullopt;
  }
}

EvidenceView partial_view(const Candidate& c, Domain domain, const EvidenceOptions& opts) {
  EvidenceView view;
  view.level = EvidenceLevel::E1;
  const auto boxed = last_boxed(c.raw_text);
  if (opts.thinking_aware) {
    if (boxed) {
      view.payload = "Final answer: \\boxed{" + std::string(*boxed) + "}\n\n";
    }
    view.payload += tail_within(c.raw_text, opts.thinking_tail_tokens, opts.counter);
  } else {
    view.payload = reasoning_summary(c.reasoning_span, opts);
    std::string tail;
    if (domain == Domain::Code) {
      tail = prefix_chars(c.solution_span, opts.code_chars);
    } else if (boxed) {
      tail = "Final answer: \\boxed{" + std::string(*boxed) + "}";
    }
    if (!view.payload.empty() && !tail.empty()) view.payload += "\n\n";
    view.payload += tail;
  }
  view.size_tokens = opts.counter(view.payload);
  // Labels can outgrow very short candidates; never show more than E2 would.
  if (const auto full = opts.counter(c.raw_text); view.size_tokens > full) {
    view.payload = c.raw_text;
    view.size_tokens = full;
  }
  return view;
}

EvidenceView full_view(const Candidate& c, const EvidenceOptions& opts) {
  return EvidenceView{EvidenceLevel::E2, c.raw_text, opts.counter(c.raw_text)};
}

EvidenceView view_at(const Candidate& c, Domain domain, EvidenceLevel level,
                     const EvidenceOptions& opts) {
  switch (level) {
    case EvidenceLevel::E0: {
      auto sig = try_signature(c, domain).value_or("");
      return EvidenceView{EvidenceLevel::E0, sig, 0};
    }
    case EvidenceLevel::E1: return partial_view(c, domain, opts);
    case EvidenceLevel::E2: return full_view(c, opts);
  }
  return full_view(c, opts);
}

}  // namespace caps
