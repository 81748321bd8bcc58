// caps: command-line front end for selection, simulation and cost tables.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "caps/baselines.hpp"
#include "caps/cost.hpp"
#include "caps/gateway.hpp"
#include "caps/harness.hpp"
#include "caps/pool_io.hpp"

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw caps::InvalidConfig("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw caps::InvalidConfig(path + ": " + e.what());
  }
}

std::vector<caps::Method> parse_methods(const std::string& list) {
  std::vector<caps::Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(caps::parse_method(item));
  }
  return out;
}

struct SelectArgs {
  std::string pool;
  std::string method = "caps";
  std::string judge = "sim";
  std::string preset = "default";
  std::string transcript;
  std::string config;
  std::string endpoint = "http://localhost:8000/v1";
  std::string model;
  bool v1_ratings = false;
  int max_in_flight = 1;
  std::int64_t context_limit = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> finalists;
  std::optional<double> margin;
};

int run_select(const SelectArgs& a) {
  const auto pool = caps::read_pool(a.pool);
  caps::MethodConfig mc;
  caps::SimJudgeConfig sim_cfg = caps::judge_preset(a.preset);
  caps::JudgeOptions base;
  if (!a.config.empty()) {
    const auto cfg = caps::experiment_config_from_json(load_json(a.config));
    mc = cfg.method;
    mc.seed = cfg.master_seed;
    sim_cfg = cfg.judge;
    base = cfg.judge_options;
  }
  if (a.seed) mc.seed = *a.seed;
  if (a.finalists) mc.caps.finalist_count = *a.finalists;
  if (a.margin) mc.caps.rescue_margin = *a.margin;
  sim_cfg.seed = mc.seed;
  base.max_in_flight = a.max_in_flight;

  std::unique_ptr<caps::JudgeBackend> backend;
  std::unique_ptr<caps::LlmClient> client;
  if (a.judge == "sim") {
    backend = std::make_unique<caps::SimulatedJudge>(sim_cfg);
  } else if (a.judge == "replay") {
    if (a.transcript.empty()) throw caps::InvalidConfig("--judge replay needs --transcript");
    backend = std::make_unique<caps::ReplayJudge>(std::filesystem::path(a.transcript));
  } else if (a.judge == "live") {
    caps::EndpointConfig ec;
    ec.url = a.endpoint;
    ec.model = a.model;
    ec.context_limit = a.context_limit;
    ec.max_in_flight = std::max(1, a.max_in_flight);
    client = std::make_unique<caps::LlmClient>(ec, [](std::string_view msg) { std::cerr << msg << '\n'; });
    caps::LlmJudgeOptions lo;
    lo.v1_ratings = a.v1_ratings;
    lo.counter = base.evidence.counter;
    backend = std::make_unique<caps::LlmJudge>(*client, lo);
  } else {
    throw caps::InvalidConfig("--judge must be sim, replay or live");
  }

  caps::PairJudge judge(*backend, pool.problem, pool.candidates, caps::judge_options_for(mc.caps, base));
  const auto result = caps::run_method(caps::parse_method(a.method), judge, mc);
  std::cout << caps::to_json(result).dump() << '\n';
  return 0;
}

struct SimulateArgs {
  std::string config;
  std::string experiment;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::string methods;
  std::optional<int> n;
  std::optional<double> p_correct;
  std::string difficulty;
  std::string dup_profile;
  std::string domain;
  std::string preset;
  std::optional<double> a1;
  std::optional<double> a2;
  std::optional<int> threads;
  std::optional<int> finalists;
  std::optional<double> margin;
  std::string records;
  std::string columns;
  bool json_only = false;
};

int run_simulate(const SimulateArgs& a) {
  caps::ExperimentConfig cfg;
  if (!a.experiment.empty()) cfg = caps::experiment_preset(a.experiment);
  if (!a.config.empty()) cfg = caps::experiment_config_from_json(load_json(a.config), cfg);
  if (a.trials) cfg.trials = *a.trials;
  if (a.seed) cfg.master_seed = *a.seed;
  if (!a.methods.empty()) cfg.methods = parse_methods(a.methods);
  if (a.n) cfg.pool.n = *a.n;
  if (!a.difficulty.empty()) cfg.pool.p_correct = caps::difficulty_p_correct(a.difficulty);
  if (a.p_correct) cfg.pool.p_correct = *a.p_correct;
  if (!a.dup_profile.empty()) cfg.pool.dup_profile = a.dup_profile;
  if (!a.domain.empty()) cfg.pool.domain = caps::parse_domain(a.domain);
  if (!a.preset.empty()) cfg.judge = caps::judge_preset(a.preset);
  if (a.a1) cfg.judge.accuracy_e1 = *a.a1;
  if (a.a2) cfg.judge.accuracy_e2 = *a.a2;
  if (a.threads) cfg.threads = *a.threads;
  if (a.finalists) cfg.method.caps.finalist_count = *a.finalists;
  if (a.margin) cfg.method.caps.rescue_margin = *a.margin;

  std::vector<caps::TrialRecord> records;
  const auto report = caps::run_experiment(cfg, &records);
  if (!a.records.empty()) {
    std::ofstream out(a.records);
    if (!out) throw caps::InvalidConfig("cannot write " + a.records);
    for (const auto& r : records) out << caps::to_json(r).dump() << '\n';
  }
  if (!a.columns.empty()) {
    std::ofstream out(a.columns);
    if (!out) throw caps::InvalidConfig("cannot write " + a.columns);
    caps::write_columns(out, report);
  }
  if (!a.json_only) caps::write_summary_table(std::cout, report);
  std::cout << caps::to_json(report).dump() << '\n';
  return 0;
}

struct CostArgs {
  std::vector<int> n = {16};
  int f = 4;
  double t1 = 1000;
  double t2 = 8500;
  double ovhd = 500;
  std::optional<double> e1_view;
  std::optional<double> e2_view;
  double k = 3.0;
  double p_r = 0.0;
};

int run_cost(const CostArgs& a) {
  caps::CostModel cm{a.t1, a.t2, a.ovhd};
  if (a.e1_view || a.e2_view) {
    cm = caps::CostModel::from_views(a.e1_view.value_or(250.0), a.e2_view.value_or(4000.0), a.ovhd);
  }
  caps::validate(cm);
  // T% is taken on the rescue-inclusive cost, which equals closed_form when p_r is 0.
  std::printf("%6s %3s %4s %6s %6s %14s %14s %14s %8s\n", "N'", "f", "r_B", "E1", "E2", "closed_form", "with_rescue",
              "asymptotic", "T%");
  for (int n : a.n) {
    const auto s = caps::caps_schedule(n, a.f);
    const double closed = caps::caps_cost_closed_form(n, a.f, cm);
    const double expected = caps::expected_cost_with_rescue(n, a.f, cm, a.p_r);
    const double baseline = std::round(a.k * n) * cm.t2;
    std::printf("%6d %3d %4d %6d %6d %14.1f %14.1f %14.1f %8.2f\n", n, a.f, s.stage_b_rounds(), s.calls_e1,
                s.calls_e2(), closed, expected, caps::caps_cost_asymptotic(n, a.f, cm),
                caps::t_percent(expected, baseline));
  }
  for (int n : a.n) {
    const auto s = caps::caps_schedule(n, a.f);
    const double baseline = std::round(a.k * n) * cm.t2;
    caps::CostRecord caps_rec{a.p_r > 0 ? "caps_r" : "caps", s.calls_e1, s.calls_e2(), s.calls_e1 * cm.t1,
                              s.calls_e2() * cm.t2 + caps::rescue_overhead(s.finalists, cm, a.p_r).mean, 0, 0};
    caps_rec.total = caps_rec.tokens_e1 + caps_rec.tokens_e2;
    caps_rec.t_percent = caps::t_percent(caps_rec.total, baseline);
    caps::CostRecord swiss{"swiss", 0, static_cast<std::int64_t>(std::round(a.k * n)), 0, baseline, baseline, 100.0};
    std::cout << caps::to_json_line(caps_rec) << '\n' << caps::to_json_line(swiss) << '\n';
  }
  return 0;
}

int run_report(const std::string& path, const std::string& columns) {
  std::ifstream in(path);
  if (!in) throw caps::InvalidConfig("cannot open " + path);
  std::vector<caps::TrialRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(caps::trial_record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw caps::InvalidConfig(path + ": " + e.what());
    }
  }
  const auto report = caps::aggregate(records);
  if (!columns.empty()) {
    std::ofstream out(columns);
    caps::write_columns(out, report);
  }
  caps::write_summary_table(std::cout, report);
  std::cout << caps::to_json(report).dump() << '\n';
  return 0;
}

int run_pool(const caps::PoolSpec& spec, const std::string& out_path) {
  const auto pool = caps::gen_pool(spec);
  if (out_path.empty() || out_path == "-") {
    caps::write_pool(std::cout, pool);
  } else {
    std::ofstream out(out_path);
    if (!out) throw caps::InvalidConfig("cannot write " + out_path);
    caps::write_pool(out, pool);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascaded pairwise selection over sampled candidates"};
  app.require_subcommand(1);

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "Select one candidate from a pool file");
  select->add_option("pool", sel.pool, "Pool file (JSONL)")->required()->check(CLI::ExistingFile);
  select->add_option("-m,--method", sel.method, "vanilla|pointwise|random|swiss|caps|caps_r");
  select->add_option("-j,--judge", sel.judge, "sim|replay|live");
  select->add_option("--preset", sel.preset, "Simulated judge preset");
  select->add_option("--transcript", sel.transcript, "Recorded judge output for --judge replay");
  select->add_option("-c,--config", sel.config, "JSON config file");
  select->add_option("--endpoint", sel.endpoint, "Chat-completions base URL for --judge live");
  select->add_option("--model", sel.model, "Model name for --judge live");
  select->add_flag("--v1-ratings", sel.v1_ratings, "Use the two-rating prompt at full evidence");
  select->add_option("--max-in-flight", sel.max_in_flight, "Concurrent judge calls per round");
  select->add_option("--context-limit", sel.context_limit, "Reject prompts that exceed this many tokens");
  select->add_option("--seed", sel.seed, "Seed for schedules and tie-breaks");
  select->add_option("-f,--finalists", sel.finalists, "Finalist count");
  select->add_option("--rescue-margin", sel.margin, "Rescue margin");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo comparison on synthetic pools");
  simulate->add_option("-c,--config", sim.config, "JSON config file");
  simulate->add_option("-e,--experiment", sim.experiment, "Experiment preset: rescue|diagnostic|oracle|null");
  simulate->add_option("-t,--trials", sim.trials, "Number of trials");
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--methods", sim.methods, "Comma-separated methods");
  simulate->add_option("-n,--pool-size", sim.n, "Candidates per pool");
  simulate->add_option("--p-correct", sim.p_correct, "Per-candidate correctness probability");
  simulate->add_option("--difficulty", sim.difficulty, "easy|medium|hard");
  simulate->add_option("--dup-profile", sim.dup_profile, "distinct|identical|K1+..+S|dup:p");
  simulate->add_option("--domain", sim.domain, "code|math");
  simulate->add_option("--preset", sim.preset, "Judge preset: default|perfect|null|rescue|diagnostic");
  simulate->add_option("--a1", sim.a1, "Judge accuracy at partial evidence");
  simulate->add_option("--a2", sim.a2, "Judge accuracy at full evidence");
  simulate->add_option("--threads", sim.threads, "Worker threads");
  simulate->add_option("-f,--finalists", sim.finalists, "Finalist count");
  simulate->add_option("--rescue-margin", sim.margin, "Rescue margin");
  simulate->add_option("--trial-records", sim.records, "Write per-trial records (JSONL)");
  simulate->add_option("--columns", sim.columns, "Write per-method CSV columns");
  simulate->add_flag("--json", sim.json_only, "Print only the JSON report");

  CostArgs cost;
  auto* cost_cmd = app.add_subcommand("cost", "Closed-form verifier-token cost table");
  cost_cmd->add_option("-n,--unique", cost.n, "Unique candidate counts N'")->expected(1, -1);
  cost_cmd->add_option("-f,--finalists", cost.f, "Finalist count");
  cost_cmd->add_option("--t1", cost.t1, "Tokens per partial-evidence call");
  cost_cmd->add_option("--t2", cost.t2, "Tokens per full-evidence call");
  cost_cmd->add_option("--overhead", cost.ovhd, "Prompt overhead tokens");
  cost_cmd->add_option("--e1-view", cost.e1_view, "Average partial view size (derives T1)");
  cost_cmd->add_option("--e2-view", cost.e2_view, "Average full view size (derives T2)");
  cost_cmd->add_option("-k,--budget", cost.k, "Swiss budget multiplier for T%");
  cost_cmd->add_option("--p-r", cost.p_r, "Rescue rate for the expected overhead");

  std::string records_path, report_columns;
  auto* report = app.add_subcommand("report", "Aggregate trial records into a summary");
  report->add_option("records", records_path, "Trial records (JSONL)")->required()->check(CLI::ExistingFile);
  report->add_option("--columns", report_columns, "Write per-method CSV columns");

  caps::PoolSpec spec;
  std::string pool_out, pool_domain;
  auto* pool_cmd = app.add_subcommand("pool", "Write a synthetic pool file");
  pool_cmd->add_option("-n,--pool-size", spec.n, "Candidates");
  pool_cmd->add_option("--p-correct", spec.p_correct, "Correctness probability");
  pool_cmd->add_option("--dup-profile", spec.dup_profile, "Duplicate structure");
  pool_cmd->add_option("--domain", pool_domain, "code|math");
  pool_cmd->add_option("--seed", spec.seed, "Seed");
  pool_cmd->add_option("-o,--out", pool_out, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*select) return run_select(sel);
    if (*simulate) return run_simulate(sim);
    if (*cost_cmd) return run_cost(cost);
    if (*report) return run_report(records_path, report_columns);
    if (*pool_cmd) {
      if (!pool_domain.empty()) spec.domain = caps::parse_domain(pool_domain);
      return run_pool(spec, pool_out);
    }
  } catch (const caps::Error& e) {
    std::cerr << "caps: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
