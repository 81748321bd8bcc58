#include <gtest/gtest.h>

#include <sstream>

#include "caps/pool_io.hpp"

using namespace caps;

namespace {

constexpr const char* kPool =
    R"({"problem_id": "p1", "problem_text": "Add two numbers.", "domain": "code"}
{"id": 1, "raw_text": "Think.\n```python\nprint(1)\n```", "ground_truth": false}
{"id": 0, "raw_text": "<thinking>sum them</thinking>\n```python\nprint(a+b)\n```", "ground_truth": true}
)";

}  // namespace

TEST(PoolIo, ReadsHeaderAndCandidatesInAnyOrder) {
  std::istringstream in(kPool);
  const auto pool = read_pool(in);
  EXPECT_EQ(pool.problem.problem_id, "p1");
  EXPECT_EQ(pool.problem.domain, Domain::Code);
  ASSERT_EQ(pool.candidates.size(), 2u);
  EXPECT_EQ(pool.candidates[0].id, 0);
  EXPECT_EQ(pool.candidates[0].ground_truth, true);
  EXPECT_EQ(pool.candidates[0].reasoning_span, "sum them");
  EXPECT_EQ(pool.candidates[1].ground_truth, false);
}

TEST(PoolIo, SolutionSpanIsSubstringOfRawText) {
  std::istringstream in(kPool);
  for (const auto& c : read_pool(in).candidates) {
    EXPECT_NE(c.raw_text.find(c.solution_span), std::string::npos);
  }
}

TEST(PoolIo, RoundTrip) {
  std::istringstream in(kPool);
  const auto pool = read_pool(in);
  std::ostringstream out;
  write_pool(out, pool);
  std::istringstream again(out.str());
  const auto back = read_pool(again);
  ASSERT_EQ(back.candidates.size(), pool.candidates.size());
  for (std::size_t k = 0; k < pool.candidates.size(); ++k) {
    EXPECT_EQ(back.candidates[k].raw_text, pool.candidates[k].raw_text);
    EXPECT_EQ(back.candidates[k].ground_truth, pool.candidates[k].ground_truth);
  }
  EXPECT_EQ(back.problem.problem_text, pool.problem.problem_text);
}

TEST(PoolIo, RejectsMalformedPools) {
  const char* bad[] = {
      "",
      R"({"id": 0, "raw_text": "x"})",
      "{\"problem_id\": \"p\", \"problem_text\": \"t\", \"domain\": \"code\"}\n",
      "{\"problem_id\": \"p\", \"problem_text\": \"t\", \"domain\": \"code\"}\n{\"id\": 1, \"raw_text\": \"x\"}\n",
      "{\"problem_id\": \"p\", \"problem_text\": \"t\", \"domain\": \"code\"}\n{\"id\": 0, \"raw_text\": \"x\"}\n{\"id\": 0, \"raw_text\": \"y\"}\n",
      "{\"problem_id\": \"p\", \"problem_text\": \"t\", \"domain\": \"code\"}\n{\"id\": 0}\n",
      "{\"problem_id\": \"p\", \"problem_text\": \"t\", \"domain\": \"code\"}\nnot json\n",
      "{\"problem_id\": \"p\", \"problem_text\": \"t\", \"domain\": \"poetry\"}\n{\"id\": 0, \"raw_text\": \"x\"}\n",
  };
  for (const char* text : bad) {
    std::istringstream in(text);
    EXPECT_THROW(read_pool(in), InvalidPool) << text;
  }
}

TEST(PoolIo, ShippedFixtureLoads) {
  const auto pool = read_pool(std::filesystem::path(CAPS_FIXTURE_DIR) / "pool_code.jsonl");
  EXPECT_EQ(pool.candidates.size(), 6u);
  EXPECT_EQ(pool.problem.domain, Domain::Code);
}
