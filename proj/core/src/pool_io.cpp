#include "caps/pool_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "caps/evidence.hpp"

namespace caps {

using nlohmann::json;

CandidatePool read_pool(std::istream& in) {
  CandidatePool pool;
  std::string line;
  bool have_header = false;
  std::vector<std::optional<Candidate>> slots;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InvalidPool("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      if (!rec.contains("problem_id") || !rec.contains("domain"))
        throw InvalidPool("first record must be the header {problem_id, problem_text, domain}");
      pool.problem.problem_id = rec.at("problem_id").get<std::string>();
      pool.problem.problem_text = rec.value("problem_text", std::string{});
      pool.problem.domain = parse_domain(rec.at("domain").get<std::string>());
      have_header = true;
      continue;
    }
    if (!rec.contains("id") || !rec.contains("raw_text"))
      throw InvalidPool("line " + std::to_string(line_no) + ": candidate needs id and raw_text");
    Candidate c;
    c.id = rec.at("id").get<int>();
    c.raw_text = rec.at("raw_text").get<std::string>();
    if (rec.contains("ground_truth") && !rec.at("ground_truth").is_null())
      c.ground_truth = rec.at("ground_truth").get<bool>();
    if (c.id < 0) throw InvalidPool("negative candidate id " + std::to_string(c.id));
    const auto slot = static_cast<std::size_t>(c.id);
    if (slot >= slots.size()) slots.resize(slot + 1);
    if (slots[slot]) throw InvalidPool("duplicate candidate id " + std::to_string(c.id));
    slots[slot] = std::move(c);
  }
  if (!have_header) throw InvalidPool("empty pool file");
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (!slots[k]) throw InvalidPool("candidate ids are not contiguous: missing " + std::to_string(k));
    Candidate c = std::move(*slots[k]);
    locate_spans(c, pool.problem.domain);
    pool.candidates.push_back(std::move(c));
  }
  if (pool.candidates.empty()) throw InvalidPool("pool holds no candidates");
  return pool;
}

CandidatePool read_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidPool("cannot open pool file " + path.string());
  return read_pool(in);
}

void write_pool(std::ostream& out, const CandidatePool& pool) {
  json header = {{"problem_id", pool.problem.problem_id},
                 {"problem_text", pool.problem.problem_text},
                 {"domain", std::string(to_string(pool.problem.domain))}};
  out << header.dump() << '\n';
  for (const auto& c : pool.candidates) {
    json rec = {{"id", c.id}, {"raw_text", c.raw_text}};
    if (c.ground_truth) rec["ground_truth"] = *c.ground_truth;
    out << rec.dump() << '\n';
  }
}

}  // namespace caps
