#include <algorithm>
#include <regex>

#include "caps/judge.hpp"

namespace caps {
namespace {

constexpr auto kIcase = std::regex::ECMAScript | std::regex::icase;

/// Last match of `re` in `text` whose first group passes `accept`.
template <typename Accept>
std::optional<std::string> last_group(std::string_view text, const std::regex& re, Accept accept) {
  std::optional<std::string> found;
  using It = std::regex_iterator<std::string_view::const_iterator>;
  for (It it(text.begin(), text.end(), re), end; it != end; ++it) {
    std::string g = (*it)[1].str();
    if (accept(g)) found = std::move(g);
  }
  return found;
}

std::optional<std::string> last_group(std::string_view text, const std::regex& re) {
  return last_group(text, re, [](const std::string&) { return true; });
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

int clamp_rating(const std::string& digits) { return std::clamp(std::stoi(digits), 1, 10); }

}  // namespace

VerdictParse parse_verdict_detailed(std::string_view text) {
  static const std::regex kWinnerTag(R"(<winner>\s*(A|B|TIE)\s*</winner>)", kIcase);
  static const std::regex kWinnerLoose(
      R"((?:winner|verdict)\s*(?:is|:|=|-)?\s*\**\s*(?:solution|submission)?\s*\(?(A|B|TIE)\b)",
      kIcase);
  static const std::regex kConfidenceTag(R"(<confidence>\s*(HIGH|LOW)\s*</confidence>)", kIcase);
  static const std::regex kConfidenceLoose(
      R"(confidence(?:\s+level)?\s*(?:is|:|=|-)?\s*\**\s*(HIGH|LOW)\b)", kIcase);

  VerdictParse out;
  auto winner = last_group(text, kWinnerTag);
  if (!winner) {
    // A lone lowercase "a"/"b" in prose is an article, not a verdict.
    winner = last_group(text, kWinnerLoose,
                        [](const std::string& g) { return g != "a" && g != "b"; });
  }
  if (winner) {
    const auto w = upper(*winner);
    out.verdict.winner = w == "A" ? Winner::A : w == "B" ? Winner::B : Winner::Tie;
    out.winner_found = true;
  }
  auto confidence = last_group(text, kConfidenceTag);
  if (!confidence) confidence = last_group(text, kConfidenceLoose);
  if (confidence) {
    out.verdict.confidence = upper(*confidence) == "HIGH" ? Confidence::High : Confidence::Low;
    out.confidence_found = true;
  }
  // Without a winner the verdict is a parse failure whatever the confidence.
  if (!out.winner_found) out.verdict = {Winner::Tie, Confidence::Low};
  return out;
}

RawVerdict parse_verdict(std::string_view text) { return parse_verdict_detailed(text).verdict; }

int parse_rating(std::string_view text) {
  static const std::regex kTag(R"(<rating>\s*(\d{1,2})\s*</rating>)", kIcase);
  static const std::regex kLoose(R"(rating[^\d]*(\d{1,2}))", kIcase);
  auto digits = last_group(text, kTag);
  if (!digits) digits = last_group(text, kLoose);
  if (!digits) throw ParseFailure("no rating found in judge output");
  return clamp_rating(*digits);
}

std::pair<int, int> parse_rating_pair(std::string_view text) {
  static const std::regex kTagA(R"(<rating_A>\s*(\d{1,2})\s*</rating_A>)", kIcase);
  static const std::regex kTagB(R"(<rating_B>\s*(\d{1,2})\s*</rating_B>)", kIcase);
  static const std::regex kLooseA(R"(rating[_\s]*A[^\d]*(\d{1,2}))");
  static const std::regex kLooseB(R"(rating[_\s]*B[^\d]*(\d{1,2}))");
  auto a = last_group(text, kTagA);
  if (!a) a = last_group(text, kLooseA);
  auto b = last_group(text, kTagB);
  if (!b) b = last_group(text, kLooseB);
  if (!a || !b) throw ParseFailure("missing rating_A/rating_B in judge output");
  return {clamp_rating(*a), clamp_rating(*b)};
}

WeightedValue verdict_to_outcome(RawVerdict verdict, double floor) {
  const double margin = verdict.confidence == Confidence::High ? kHighMargin : kLowMargin;
  switch (verdict.winner) {
    case Winner::A: return {1.0, std::max(margin, floor)};
    case Winner::B: return {0.0, std::max(margin, floor)};
    case Winner::Tie: return {0.5, std::max(0.0, floor)};
  }
  return {0.5, floor};
}

WeightedValue ratings_to_outcome(int rating_a, int rating_b, double floor) {
  const double value = rating_a > rating_b ? 1.0 : rating_a < rating_b ? 0.0 : 0.5;
  const double margin = std::abs(rating_a - rating_b) / 9.0;
  return {value, std::max(margin, floor)};
}

}  // namespace caps
