#pragma once

// Line-delimited pool files: a header record followed by one record per
// candidate.
//
//   {"problem_id": "p1", "problem_text": "...", "domain": "code"}
//   {"id": 0, "raw_text": "...", "ground_truth": true}
//   {"id": 1, "raw_text": "..."}
//
// Ids must cover [0, N) exactly once; records may appear in any order.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "caps/core.hpp"

namespace caps {

struct CandidatePool {
  Problem problem;
  std::vector<Candidate> candidates;  // indexed by id
};

/// Parses a pool and locates reasoning/solution spans for every candidate.
CandidatePool read_pool(std::istream& in);
CandidatePool read_pool(const std::filesystem::path& path);

void write_pool(std::ostream& out, const CandidatePool& pool);

}  // namespace caps
