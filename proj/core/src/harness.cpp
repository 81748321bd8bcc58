#include "caps/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <initializer_list>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "caps/cost.hpp"
#include "caps/evidence.hpp"
#include "caps/tournament.hpp"
#include "rng.hpp"

namespace caps {
namespace {

using nlohmann::json;

std::string hex_digits(detail::SplitMix64& rng, int width) {
  char buf[20];
  const auto mask = width >= 16 ? ~0ULL : (1ULL << (4 * width)) - 1;
  std::snprintf(buf, sizeof buf, "%0*llx", width, static_cast<unsigned long long>(rng() & mask));
  return buf;
}

std::string reasoning_text(detail::SplitMix64& rng, int words) {
  std::string out;
  out.reserve(static_cast<std::size_t>(words) * 8);
  for (int w = 0; w < words; ++w) {
    if (w) out += ' ';
    out += 'w';
    out += hex_digits(rng, 6);
  }
  return out;
}

std::string code_text(detail::SplitMix64& rng, const std::string& variant, int lines) {
  std::string out = "```python\n";
  out += "def solve(xs):  # id " + hex_digits(rng, 8) + "\n";
  out += "    acc = 0x" + variant + "  # seed " + hex_digits(rng, 8) + "\n";
  char buf[96];
  for (int k = 2; k < lines - 1; ++k) {
    std::snprintf(buf, sizeof buf, "    acc = (acc * 31 + xs[%02d]) %% 1000003  # step ", k % 100);
    out += buf + hex_digits(rng, 8) + "\n";
  }
  out += "    return acc  # done " + hex_digits(rng, 8) + "\n```";
  return out;
}

/// Cluster label per candidate position.
std::vector<int> cluster_labels(const DupProfile& profile, int n, detail::SplitMix64& rng) {
  std::vector<int> labels;
  if (profile.copy_probability) {
    int next = 0;
    for (int k = 0; k < n; ++k) {
      if (k > 0 && rng.unit() < *profile.copy_probability) {
        labels.push_back(labels[detail::uniform_below(rng, static_cast<std::uint64_t>(k))]);
      } else {
        labels.push_back(next++);
      }
    }
    return labels;
  }
  for (std::size_t c = 0; c < profile.cluster_sizes.size(); ++c) {
    for (int k = 0; k < profile.cluster_sizes[c]; ++k) labels.push_back(static_cast<int>(c));
  }
  detail::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

const MethodSummary* find_summary(const std::vector<MethodSummary>& v, std::string_view name) {
  for (const auto& m : v) {
    if (m.method == name) return &m;
  }
  return nullptr;
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw InvalidConfig(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InvalidConfig("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Pools

DupProfile parse_dup_profile(std::string_view text, int pool_size) {
  DupProfile p;
  if (pool_size < 1) throw InvalidConfig("pool size must be >= 1");
  if (text == "distinct") {
    p.cluster_sizes.assign(static_cast<std::size_t>(pool_size), 1);
    return p;
  }
  if (text == "identical") {
    p.cluster_sizes = {pool_size};
    return p;
  }
  if (text.starts_with("dup:")) {
    const std::string num(text.substr(4));
    std::size_t used = 0;
    double prob = -1.0;
    try {
      prob = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != num.size() || !(prob >= 0.0 && prob <= 1.0))
      throw InvalidConfig("dup profile '" + std::string(text) + "': probability must lie in [0, 1]");
    p.copy_probability = prob;
    return p;
  }

  std::vector<int> terms;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto plus = text.find('+', start);
    const auto term = text.substr(start, plus == std::string_view::npos ? std::string_view::npos : plus - start);
    if (term.empty() || term.find_first_not_of("0123456789") != std::string_view::npos || term.size() > 6)
      throw InvalidConfig("bad dup profile '" + std::string(text) + "'");
    terms.push_back(std::stoi(std::string(term)));
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  if (terms.size() < 2) throw InvalidConfig("dup profile '" + std::string(text) + "' needs at least one '+'");
  int total = 0;
  for (std::size_t k = 0; k + 1 < terms.size(); ++k) {
    if (terms[k] < 2) throw InvalidConfig("duplicate clusters in a dup profile need size >= 2");
    p.cluster_sizes.push_back(terms[k]);
    total += terms[k];
  }
  for (int s = 0; s < terms.back(); ++s) p.cluster_sizes.push_back(1);
  total += terms.back();
  if (total != pool_size)
    throw InvalidConfig("dup profile '" + std::string(text) + "' covers " + std::to_string(total) +
                        " candidates, pool has " + std::to_string(pool_size));
  return p;
}

void validate(const PoolSpec& spec) {
  if (spec.n < 1) throw InvalidConfig("pool size must be >= 1");
  if (!(spec.p_correct >= 0.0 && spec.p_correct <= 1.0)) throw InvalidConfig("p_correct must lie in [0, 1]");
  if (spec.reasoning_words < 0) throw InvalidConfig("reasoning_words must be >= 0");
  if (spec.code_lines < 3 || spec.code_lines > 100) throw InvalidConfig("code_lines must lie in [3, 100]");
  if (spec.domain == Domain::Math && spec.dup_profile != "distinct")
    throw InvalidConfig("math pools cluster by answer; dup_profile must be 'distinct'");
  // Every wrong math candidate needs its own four-digit answer.
  if (spec.domain == Domain::Math && spec.n > 8999) throw InvalidConfig("math pools hold at most 8999 candidates");
  parse_dup_profile(spec.dup_profile, spec.n);
}

CandidatePool gen_pool(const PoolSpec& spec) {
  validate(spec);
  detail::SplitMix64 rng(spec.seed);
  CandidatePool pool;
  pool.problem.problem_id = "synthetic-" + hex64(spec.seed);
  pool.problem.domain = spec.domain;
  pool.problem.problem_text = "Synthetic problem " + hex64(spec.seed) + ".";

  if (spec.domain == Domain::Math) {
    const int truth = 1000 + static_cast<int>(detail::uniform_below(rng, 9000));
    std::set<int> used = {truth};
    for (int k = 0; k < spec.n; ++k) {
      Candidate c;
      c.id = k;
      const bool ok = rng.unit() < spec.p_correct;
      int answer = truth;
      if (!ok) {
        do {
          answer = 1000 + static_cast<int>(detail::uniform_below(rng, 9000));
        } while (!used.insert(answer).second);
      }
      c.ground_truth = ok;
      c.raw_text = "<thinking>\n" + reasoning_text(rng, spec.reasoning_words) +
                   "\n</thinking>\nThe final answer is \\boxed{" + std::to_string(answer) + "}.";
      locate_spans(c, spec.domain);
      pool.candidates.push_back(std::move(c));
    }
    return pool;
  }

  const auto labels = cluster_labels(parse_dup_profile(spec.dup_profile, spec.n), spec.n, rng);
  const int clusters = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::string> variant;
  std::vector<bool> correct;
  std::set<std::string> seen;
  for (int c = 0; c < clusters; ++c) {
    std::string v;
    do {
      v = hex_digits(rng, 8);
    } while (!seen.insert(v).second);
    variant.push_back(v);
    correct.push_back(rng.unit() < spec.p_correct);
  }
  for (int k = 0; k < spec.n; ++k) {
    const auto label = static_cast<std::size_t>(labels[static_cast<std::size_t>(k)]);
    Candidate c;
    c.id = k;
    c.ground_truth = static_cast<bool>(correct[label]);
    c.raw_text = "<thinking>\n" + reasoning_text(rng, spec.reasoning_words) + "\n</thinking>\n" +
                 code_text(rng, variant[label], spec.code_lines);
    locate_spans(c, spec.domain);
    pool.candidates.push_back(std::move(c));
  }
  return pool;
}

double difficulty_p_correct(std::string_view name) {
  if (name == "easy") return 0.6;
  if (name == "medium") return 0.3;
  if (name == "hard") return 0.1;
  throw InvalidConfig("unknown difficulty '" + std::string(name) + "'");
}

SimJudgeConfig judge_preset(std::string_view name) {
  if (name == "default") return {};
  if (name == "perfect") return SimJudgeConfig::perfect();
  if (name == "null") return SimJudgeConfig::null_judge();
  if (name == "rescue") {
    // Nearly always HIGH and never TIE, so score gaps between finalists and
    // eliminated candidates are rarely within the rescue margin.
    SimJudgeConfig cfg;
    cfg.p_high_when_correct = 0.97;
    cfg.p_high_when_equal = 1.0;
    cfg.p_tie_when_equal = 0.0;
    return cfg;
  }
  if (name == "diagnostic") return {};
  throw InvalidConfig("unknown judge preset '" + std::string(name) + "'");
}

ExperimentConfig experiment_preset(std::string_view name) {
  ExperimentConfig cfg;
  if (name == "rescue") {
    cfg.methods = {Method::CapsR};
    cfg.pool.p_correct = 0.3;
    cfg.judge = judge_preset("rescue");
    cfg.trials = 20000;
    return cfg;
  }
  if (name == "diagnostic") {
    cfg.methods = {Method::Swiss, Method::Caps};
    cfg.pool.p_correct = 0.45;
    cfg.judge = judge_preset("diagnostic");
    cfg.trials = 10000;
    return cfg;
  }
  if (name == "oracle") {
    cfg.methods = {Method::Caps};
    cfg.pool.p_correct = 0.3;
    cfg.judge = judge_preset("perfect");
    return cfg;
  }
  if (name == "null") {
    cfg.methods = {Method::Caps};
    cfg.judge = judge_preset("null");
    cfg.trials = 10000;
    return cfg;
  }
  throw InvalidConfig("unknown experiment preset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Trials

TrialSeeds trial_seeds(std::uint64_t master_seed, int trial) {
  TrialSeeds s;
  s.trial = mix_seed(master_seed, static_cast<std::uint64_t>(trial));
  s.pool = mix_seed(s.trial, 1);
  s.judge = mix_seed(s.trial, 2);
  s.method = mix_seed(s.trial, 3);
  return s;
}

PairTally pair_accuracy(std::span<const JudgeOutcome> transcript, std::span<const Candidate> pool,
                        std::optional<EvidenceLevel> level) {
  PairTally t;
  for (const auto& o : transcript) {
    if (level && o.level != *level) continue;
    const auto& gi = pool[static_cast<std::size_t>(o.i)].ground_truth;
    const auto& gj = pool[static_cast<std::size_t>(o.j)].ground_truth;
    if (!gi || !gj || *gi == *gj) continue;
    ++t.total;
    if ((o.value == 1.0 && *gi) || (o.value == 0.0 && *gj)) ++t.correct;
  }
  return t;
}

std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, int trial) {
  const auto seeds = trial_seeds(cfg.master_seed, trial);
  PoolSpec ps = cfg.pool;
  ps.seed = seeds.pool;
  const CandidatePool pool = gen_pool(ps);

  SimJudgeConfig jc = cfg.judge;
  jc.seed = seeds.judge;
  SimulatedJudge sim(jc);
  PairJudge judge(sim, pool.problem, pool.candidates, judge_options_for(cfg.method.caps, cfg.judge_options));

  const bool any_correct = std::any_of(pool.candidates.begin(), pool.candidates.end(),
                                       [](const Candidate& c) { return c.ground_truth.value_or(false); });
  const auto classes = dedup(pool.candidates,
                             [&](const Candidate& c) { return try_signature(c, pool.problem.domain); },
                             cfg.judge_options.evidence.counter);
  const bool trivial = classes.representatives.size() == 1;

  MethodConfig mc = cfg.method;
  mc.seed = seeds.method;
  std::vector<TrialRecord> out;
  for (auto m : cfg.methods) {
    const auto r = run_method(m, judge, mc);
    TrialRecord rec;
    rec.trial = trial;
    rec.seed = seeds.trial;
    rec.method = r.method;
    rec.winner = r.winner;
    rec.correct = pool.candidates[static_cast<std::size_t>(r.winner)].ground_truth.value_or(false);
    rec.any_correct = any_correct;
    rec.trivial = trivial;
    rec.representatives = r.representatives;
    rec.calls_e1 = r.calls_e1;
    rec.calls_e2 = r.calls_e2;
    rec.tokens_e1 = r.tokens_e1;
    rec.tokens_e2 = r.tokens_e2;
    rec.rescue_triggered = r.rescue_triggered;
    rec.rescue_tokens = r.rescue_tokens;
    rec.pairs_e1 = pair_accuracy(r.transcript, pool.candidates, EvidenceLevel::E1);
    rec.pairs_e2 = pair_accuracy(r.transcript, pool.candidates, EvidenceLevel::E2);
    rec.digest = r.digest;
    out.push_back(std::move(rec));
  }
  return out;
}

const MethodSummary* ExperimentReport::find(std::string_view method) const {
  return find_summary(methods, method);
}

ExperimentReport aggregate(std::span<const TrialRecord> records, std::uint64_t master_seed) {
  ExperimentReport rep;
  rep.master_seed = master_seed;

  struct Acc {
    std::int64_t n = 0, ok = 0, calls = 0, calls_e1 = 0, calls_e2 = 0;
    double tokens = 0.0;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  std::set<int> trials;
  std::int64_t any = 0, trivial = 0;
  RunningStats rescue;
  std::int64_t rescue_hits = 0, rescue_e2_calls = 0;
  double rescue_e2_tokens = 0.0;

  for (const auto& r : records) {
    if (trials.insert(r.trial).second) {
      any += r.any_correct;
      trivial += r.trivial;
    }
    if (!acc.contains(r.method)) order.push_back(r.method);
    auto& a = acc[r.method];
    ++a.n;
    a.ok += r.correct;
    a.calls += r.calls_e1 + r.calls_e2;
    a.calls_e1 += r.calls_e1;
    a.calls_e2 += r.calls_e2;
    a.tokens += static_cast<double>(r.tokens_e1 + r.tokens_e2);
    if (r.method == "swiss") rep.swiss_pairs += r.pairs_e2;
    if (r.method == "caps_r") {
      rescue.add(static_cast<double>(r.rescue_tokens));
      rescue_hits += r.rescue_triggered;
      rescue_e2_calls += r.calls_e2;
      rescue_e2_tokens += static_cast<double>(r.tokens_e2);
    }
  }
  const std::string caps_name = acc.contains("caps") ? "caps" : "caps_r";
  for (const auto& r : records) {
    if (r.method != caps_name) continue;
    rep.caps_pairs_e1 += r.pairs_e1;
    rep.caps_pairs_e2 += r.pairs_e2;
  }
  rep.caps_pairs = rep.caps_pairs_e1;
  rep.caps_pairs += rep.caps_pairs_e2;

  rep.trials = static_cast<std::int64_t>(trials.size());
  if (rep.trials > 0) {
    rep.pass_at_n = static_cast<double>(any) / static_cast<double>(rep.trials);
    rep.pass_at_n_ci = wilson_interval(any, rep.trials);
    rep.trivial_fraction = static_cast<double>(trivial) / static_cast<double>(rep.trials);
  }

  std::optional<double> swiss_tokens;
  if (acc.contains("swiss") && acc["swiss"].n > 0) swiss_tokens = acc["swiss"].tokens / static_cast<double>(acc["swiss"].n);
  for (const auto& name : order) {
    const auto& a = acc[name];
    MethodSummary m;
    m.method = name;
    m.trials = a.n;
    m.successes = a.ok;
    const auto n = static_cast<double>(a.n);
    m.pass1 = static_cast<double>(a.ok) / n;
    m.ci = wilson_interval(a.ok, a.n);
    m.mean_calls = static_cast<double>(a.calls) / n;
    m.mean_calls_e1 = static_cast<double>(a.calls_e1) / n;
    m.mean_calls_e2 = static_cast<double>(a.calls_e2) / n;
    m.mean_tokens = a.tokens / n;
    if (swiss_tokens && *swiss_tokens > 0.0) m.t_percent = t_percent(m.mean_tokens, *swiss_tokens);
    rep.methods.push_back(m);
  }

  if (rep.swiss_pairs.total > 0 && rep.caps_pairs.total > 0)
    rep.delta_pp = 100.0 * (rep.caps_pairs.rate() - rep.swiss_pairs.rate());
  if (rescue.count() > 0) {
    rep.p_rescue = static_cast<double>(rescue_hits) / static_cast<double>(rescue.count());
    rep.rescue_overhead_mean = rescue.mean();
    rep.rescue_overhead_std = rescue.stddev();
    if (rescue_e2_calls > 0) rep.e2_tokens_per_call = rescue_e2_tokens / static_cast<double>(rescue_e2_calls);
  }
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::vector<TrialRecord>* records) {
  if (cfg.trials < 1) throw InvalidConfig("trials must be >= 1");
  if (cfg.methods.empty()) throw InvalidConfig("no methods selected");
  validate(cfg.pool);
  validate(cfg.judge);

  std::vector<std::vector<TrialRecord>> per_trial(static_cast<std::size_t>(cfg.trials));
  const int workers = std::clamp(cfg.threads, 1, cfg.trials);
  if (workers == 1) {
    for (int t = 0; t < cfg.trials; ++t) per_trial[static_cast<std::size_t>(t)] = run_trial(cfg, t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (int t = next++; t < cfg.trials; t = next++) per_trial[static_cast<std::size_t>(t)] = run_trial(cfg, t);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
            next = cfg.trials;
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<TrialRecord> flat;
  for (auto& v : per_trial) {
    for (auto& r : v) flat.push_back(std::move(r));
  }
  auto rep = aggregate(flat, cfg.master_seed);
  if (records) *records = std::move(flat);
  return rep;
}

std::optional<double> diagnostic_delta(const ExperimentReport& report) { return report.delta_pp; }

// ---------------------------------------------------------------------------
// Serialization

json to_json(const TrialRecord& r) {
  return {{"trial", r.trial},
          {"seed", hex64(r.seed)},
          {"method", r.method},
          {"winner", r.winner},
          {"correct", r.correct},
          {"any_correct", r.any_correct},
          {"trivial", r.trivial},
          {"representatives", r.representatives},
          {"calls_e1", r.calls_e1},
          {"calls_e2", r.calls_e2},
          {"tokens_e1", r.tokens_e1},
          {"tokens_e2", r.tokens_e2},
          {"rescue_triggered", r.rescue_triggered},
          {"rescue_tokens", r.rescue_tokens},
          {"pairs_e1", {r.pairs_e1.correct, r.pairs_e1.total}},
          {"pairs_e2", {r.pairs_e2.correct, r.pairs_e2.total}},
          {"digest", hex64(r.digest)}};
}

TrialRecord trial_record_from_json(const json& j) {
  try {
    TrialRecord r;
    r.trial = j.at("trial").get<int>();
    r.seed = std::stoull(j.at("seed").get<std::string>(), nullptr, 16);
    r.method = j.at("method").get<std::string>();
    r.winner = j.at("winner").get<int>();
    r.correct = j.at("correct").get<bool>();
    r.any_correct = j.at("any_correct").get<bool>();
    r.trivial = j.value("trivial", false);
    r.representatives = j.value("representatives", 0);
    r.calls_e1 = j.at("calls_e1").get<int>();
    r.calls_e2 = j.at("calls_e2").get<int>();
    r.tokens_e1 = j.at("tokens_e1").get<std::int64_t>();
    r.tokens_e2 = j.at("tokens_e2").get<std::int64_t>();
    r.rescue_triggered = j.value("rescue_triggered", false);
    r.rescue_tokens = j.value("rescue_tokens", std::int64_t{0});
    if (j.contains("pairs_e1")) r.pairs_e1 = {j["pairs_e1"].at(0).get<std::int64_t>(), j["pairs_e1"].at(1).get<std::int64_t>()};
    if (j.contains("pairs_e2")) r.pairs_e2 = {j["pairs_e2"].at(0).get<std::int64_t>(), j["pairs_e2"].at(1).get<std::int64_t>()};
    r.digest = std::stoull(j.value("digest", std::string("0")), nullptr, 16);
    return r;
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("bad trial record: ") + e.what());
  } catch (const std::logic_error& e) {
    throw InvalidConfig(std::string("bad trial record: ") + e.what());
  }
}

json to_json(const ExperimentReport& rep) {
  json methods = json::array();
  for (const auto& m : rep.methods) {
    methods.push_back({{"method", m.method},
                       {"pass1", m.pass1},
                       {"ci", {m.ci.lo, m.ci.hi}},
                       {"successes", m.successes},
                       {"trials", m.trials},
                       {"mean_calls", m.mean_calls},
                       {"mean_calls_e1", m.mean_calls_e1},
                       {"mean_calls_e2", m.mean_calls_e2},
                       {"mean_tokens", m.mean_tokens},
                       {"t_percent", m.t_percent ? json(*m.t_percent) : json(nullptr)}});
  }
  auto tally = [](const PairTally& t) { return json{{"correct", t.correct}, {"total", t.total}, {"rate", t.rate()}}; };
  return {{"trials", rep.trials},
          {"master_seed", hex64(rep.master_seed)},
          {"pass_at_n", rep.pass_at_n},
          {"pass_at_n_ci", {rep.pass_at_n_ci.lo, rep.pass_at_n_ci.hi}},
          {"trivial_fraction", rep.trivial_fraction},
          {"methods", methods},
          {"verifier",
           {{"caps", tally(rep.caps_pairs)},
            {"caps_e1", tally(rep.caps_pairs_e1)},
            {"caps_e2", tally(rep.caps_pairs_e2)},
            {"swiss", tally(rep.swiss_pairs)},
            {"delta_pp", rep.delta_pp ? json(*rep.delta_pp) : json(nullptr)}}},
          {"rescue",
           {{"p_r", rep.p_rescue ? json(*rep.p_rescue) : json(nullptr)},
            {"overhead_mean", rep.rescue_overhead_mean},
            {"overhead_std", rep.rescue_overhead_std},
            {"e2_tokens_per_call", rep.e2_tokens_per_call}}}};
}

json to_json(const SelectionResult& r) {
  return {{"method", r.method},
          {"winner", r.winner},
          {"finalists", r.finalists},
          {"representatives", r.representatives},
          {"stage_calls", {r.stage_a.calls, r.stage_b.calls, r.stage_c.calls}},
          {"stage_b_rounds", r.stage_b_rounds},
          {"calls_e1", r.calls_e1},
          {"calls_e2", r.calls_e2},
          {"tokens_e1", r.tokens_e1},
          {"tokens_e2", r.tokens_e2},
          {"total_tokens", r.total_tokens()},
          {"rescue_triggered", r.rescue_triggered},
          {"rescued", r.rescued ? json(*r.rescued) : json(nullptr)},
          {"rescue_tokens", r.rescue_tokens},
          {"scores", r.scores},
          {"digest", hex64(r.digest)}};
}

CapsConfig caps_config_from_json(const json& j, CapsConfig base) {
  check_keys(j,
             {"preset", "finalist_count", "rescue_margin", "confidence_floor", "rescue_enabled", "dedup_enabled",
              "e1_enabled", "slaughter_enabled", "confidence_weighting", "thinking_aware_e1", "seed"},
             "caps");
  if (j.contains("preset")) {
    if (j["preset"].get<std::string>() != "table") throw InvalidConfig("unknown caps preset");
    base = CapsConfig::table_preset();
  }
  read_opt(j, "finalist_count", base.finalist_count);
  read_opt(j, "rescue_margin", base.rescue_margin);
  read_opt(j, "confidence_floor", base.confidence_floor);
  read_opt(j, "rescue_enabled", base.rescue_enabled);
  read_opt(j, "dedup_enabled", base.dedup_enabled);
  read_opt(j, "e1_enabled", base.e1_enabled);
  read_opt(j, "slaughter_enabled", base.slaughter_enabled);
  read_opt(j, "confidence_weighting", base.confidence_weighting);
  read_opt(j, "thinking_aware_e1", base.thinking_aware_e1);
  read_opt(j, "seed", base.seed);
  return base;
}

SimJudgeConfig judge_config_from_json(const json& j, SimJudgeConfig base) {
  check_keys(j,
             {"preset", "accuracy_e1", "accuracy_e2", "p_high_when_correct", "p_high_when_wrong",
              "p_tie_when_equal", "p_high_when_equal", "rating_mean_correct", "rating_mean_incorrect", "rating_spread", "overhead"},
             "judge");
  if (j.contains("preset")) base = judge_preset(j["preset"].get<std::string>());
  read_opt(j, "accuracy_e1", base.accuracy_e1);
  read_opt(j, "accuracy_e2", base.accuracy_e2);
  read_opt(j, "p_high_when_correct", base.p_high_when_correct);
  if (j.contains("p_high_when_wrong")) base.p_high_when_wrong = j["p_high_when_wrong"].get<double>();
  read_opt(j, "p_tie_when_equal", base.p_tie_when_equal);
  read_opt(j, "p_high_when_equal", base.p_high_when_equal);
  read_opt(j, "rating_mean_correct", base.rating_mean_correct);
  read_opt(j, "rating_mean_incorrect", base.rating_mean_incorrect);
  read_opt(j, "rating_spread", base.rating_spread);
  if (j.contains("overhead")) {
    const auto& o = j["overhead"];
    check_keys(o, {"e1", "e2", "pointwise"}, "judge.overhead");
    read_opt(o, "e1", base.overhead.e1);
    read_opt(o, "e2", base.overhead.e2);
    read_opt(o, "pointwise", base.overhead.pointwise);
  }
  validate(base);
  return base;
}

ExperimentConfig experiment_config_from_json(const json& j, ExperimentConfig cfg) {
  try {
    check_keys(j, {"preset", "methods", "trials", "seed", "threads", "pool", "judge", "caps", "swiss", "random", "counter"},
               "config");
    if (j.contains("preset")) cfg = experiment_preset(j["preset"].get<std::string>());
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j["methods"]) cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
    read_opt(j, "trials", cfg.trials);
    read_opt(j, "seed", cfg.master_seed);
    read_opt(j, "threads", cfg.threads);
    if (j.contains("pool")) {
      const auto& p = j["pool"];
      check_keys(p, {"n", "p_correct", "difficulty", "dup_profile", "domain", "reasoning_words", "code_lines"}, "pool");
      read_opt(p, "n", cfg.pool.n);
      if (p.contains("difficulty")) cfg.pool.p_correct = difficulty_p_correct(p["difficulty"].get<std::string>());
      read_opt(p, "p_correct", cfg.pool.p_correct);
      read_opt(p, "dup_profile", cfg.pool.dup_profile);
      if (p.contains("domain")) cfg.pool.domain = parse_domain(p["domain"].get<std::string>());
      read_opt(p, "reasoning_words", cfg.pool.reasoning_words);
      read_opt(p, "code_lines", cfg.pool.code_lines);
    }
    if (j.contains("judge")) cfg.judge = judge_config_from_json(j["judge"], cfg.judge);
    if (j.contains("caps")) cfg.method.caps = caps_config_from_json(j["caps"], cfg.method.caps);
    if (j.contains("swiss")) {
      const auto& s = j["swiss"];
      check_keys(s, {"k", "min_degree", "window"}, "swiss");
      read_opt(s, "k", cfg.method.swiss.budget_multiplier);
      read_opt(s, "min_degree", cfg.method.swiss.min_degree);
      read_opt(s, "window", cfg.method.swiss.window);
      validate_config(cfg.method.swiss);
    }
    if (j.contains("random")) {
      const auto& r = j["random"];
      check_keys(r, {"count", "with_replacement"}, "random");
      if (r.contains("count")) cfg.method.random_count = r["count"].get<int>();
      read_opt(r, "with_replacement", cfg.method.random_with_replacement);
    }
    if (j.contains("counter")) {
      const auto c = j["counter"].get<std::string>();
      if (c == "chars") {
        cfg.judge_options.evidence.counter = TokenCounter::chars_per_four();
      } else if (c == "words") {
        cfg.judge_options.evidence.counter = TokenCounter::whitespace_words();
      } else {
        throw InvalidConfig("counter must be 'chars' or 'words'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config: ") + e.what());
  }
  return cfg;
}

void write_summary_table(std::ostream& out, const ExperimentReport& rep) {
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %8s %17s %8s %12s %8s\n", "method", "pass@1", "95% CI", "calls",
                "tokens", "T%");
  out << line;
  for (const auto& m : rep.methods) {
    char tp[16] = "-";
    if (m.t_percent) std::snprintf(tp, sizeof tp, "%.1f", *m.t_percent);
    std::snprintf(line, sizeof line, "%-10s %8.4f  [%.4f, %.4f] %8.2f %12.1f %8s\n", m.method.c_str(), m.pass1,
                  m.ci.lo, m.ci.hi, m.mean_calls, m.mean_tokens, tp);
    out << line;
  }
  std::snprintf(line, sizeof line, "pass@N %.4f over %lld trials, trivial %.4f\n", rep.pass_at_n,
                static_cast<long long>(rep.trials), rep.trivial_fraction);
  out << line;
  if (rep.caps_pairs.total > 0) {
    std::snprintf(line, sizeof line, "verifier accuracy: caps %.4f (E1 %.4f, E2 %.4f)", rep.caps_pairs.rate(),
                  rep.caps_pairs_e1.rate(), rep.caps_pairs_e2.rate());
    out << line;
    if (rep.swiss_pairs.total > 0) {
      std::snprintf(line, sizeof line, ", swiss %.4f, delta %+.2f pp", rep.swiss_pairs.rate(), rep.delta_pp.value_or(0.0));
      out << line;
    }
    out << '\n';
  }
  if (rep.p_rescue) {
    std::snprintf(line, sizeof line, "rescue rate %.4f, overhead mean %.1f std %.1f tokens\n", *rep.p_rescue,
                  rep.rescue_overhead_mean, rep.rescue_overhead_std);
    out << line;
  }
}

void write_columns(std::ostream& out, const ExperimentReport& rep) {
  out << "method,pass1,ci_lo,ci_hi,mean_calls,mean_tokens,t_percent\n";
  char line[200];
  for (const auto& m : rep.methods) {
    std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%.4f,%.2f,", m.method.c_str(), m.pass1, m.ci.lo, m.ci.hi,
                  m.mean_calls, m.mean_tokens);
    out << line;
    if (m.t_percent) {
      std::snprintf(line, sizeof line, "%.4f", *m.t_percent);
      out << line;
    }
    out << '\n';
  }
}

}  // namespace caps
