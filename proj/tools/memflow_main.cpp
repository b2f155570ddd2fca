#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "memflow/bench.hpp"
#include "memflow/instrumentation.hpp"
#include "memflow/topology.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitSolved = 10;
constexpr int kExitTimedOut = 20;
constexpr int kExitGateFailed = 30;

using memflow::BenchResult;
using memflow::RunConfig;
using memflow::RunOutcome;
using memflow::Verdict;

// CLI11 only processes config files attached to the top-level app; a
// set_config on a subcommand is never read. Ingest the key=value file by
// hand through the subcommand's own option table so every flag keeps its
// conversion and validation, with explicit command-line flags taking
// precedence over file values.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string entry = line.substr(first, last - first + 1);
    if (entry[0] == '#') continue;
    auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value");
    auto strip = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    std::string key = strip(entry.substr(0, eq));
    std::string value = strip(entry.substr(eq + 1));
    if (key == "config")
      throw std::runtime_error(path + ": nested config files are not supported");
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr)
      throw std::runtime_error(path + ": unknown config key: " + key);
    if (!opt->empty()) continue;  // explicit flags beat file values
    if (opt->get_expected_min() == 0) value = opt->get_flag_value("--" + key, value);
    opt->add_result(value);
    opt->run_callback();
  }
}

void add_param_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--seed", config.seed, "run seed (64-bit)");
  cmd->add_option("--dt", config.integrator.dt, "integration step");
  cmd->add_option("--t-max", config.integrator.t_max, "time budget");
  cmd->add_option("--theta", config.noise.theta, "noise intensity");
  cmd->add_option("--restarts", config.restarts, "restart attempts");
  cmd->add_option("--persistence", config.integrator.persistence_window,
                  "persistence window (time units; default 10*dt)");
  cmd->add_option("--record-stride", config.integrator.record_stride,
                  "sample every k steps");
  cmd->add_option("--alpha", config.params.alpha, "long-memory rate");
  cmd->add_option("--beta", config.params.beta, "short-memory rate");
  cmd->add_option("--gamma", config.params.gamma, "short-memory threshold");
  cmd->add_option("--delta", config.params.delta, "long-memory threshold");
  cmd->add_option("--epsilon", config.params.epsilon, "short-memory floor");
  cmd->add_option("--zeta", config.params.zeta, "rigidity weight");
  cmd->add_option("--xl-max", config.params.xl_max,
                  "long-memory cap (<=0: 1e4*M)");
}

void write_trace_csv(const std::string& path, const RunOutcome& outcome, int n,
                     int m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",v_" << i;
  for (int i = 1; i <= m; ++i) out << ",xs_" << i;
  for (int i = 1; i <= m; ++i) out << ",xl_" << i;
  out << ",defects\n";
  out << std::setprecision(17);
  for (const memflow::TrajectorySample& s : outcome.samples) {
    out << s.t;
    for (double x : s.state.x) out << ',' << x;
    out << ',' << s.defects << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_events_jsonl(const std::string& path, const RunOutcome& outcome) {
  struct Line {
    double t;
    std::string text;
  };
  std::vector<Line> lines;
  for (const memflow::CrossingEvent& e : outcome.crossings) {
    nlohmann::json j{{"type", "crossing"},
                     {"t", e.t},
                     {"var", e.variable + 1},
                     {"dir", e.direction}};
    lines.push_back({e.t, j.dump()});
  }
  if (outcome.trace) {
    for (const memflow::CriticalVisit& v : outcome.trace->visits) {
      nlohmann::json j{{"type", "critical"},
                       {"t", v.t},
                       {"residual", v.report.residual},
                       {"index", v.report.index},
                       {"center_dims", v.report.center_dims}};
      lines.push_back({v.t, j.dump()});
    }
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line& a, const Line& b) { return a.t < b.t; });
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open events file: " + path);
  for (const Line& line : lines) out << line.text << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

int run_solve(const RunConfig& config, bool as_json,
              const std::string& trace_path, const std::string& events_path) {
  RunOutcome outcome;
  memflow::CnfFormula formula;
  BenchResult result = memflow::run_single(config, &outcome, &formula);

  if (!trace_path.empty())
    write_trace_csv(trace_path, outcome, result.n, result.num_clauses);
  if (!events_path.empty()) write_events_jsonl(events_path, outcome);

  if (as_json) {
    std::cout << memflow::result_to_json(result) << '\n';
  } else {
    std::cout << "instance: " << result.instance << " (n=" << result.n
              << ", m=" << result.num_clauses << ")\n";
    std::cout << "verdict: "
              << (result.verdict == Verdict::Solved ? "SOLVED" : "TIMED-OUT")
              << '\n';
    if (result.t_solved)
      std::cout << "t_solved: " << std::setprecision(17) << *result.t_solved
                << '\n';
    std::cout << "crossings: " << result.crossings_total << '\n';
    if (outcome.assignment) {
      std::cout << "v";
      for (size_t i = 0; i < outcome.assignment->size(); ++i)
        std::cout << ' '
                  << ((*outcome.assignment)[i] ? static_cast<int>(i) + 1
                                               : -(static_cast<int>(i) + 1));
      std::cout << " 0\n";
    }
  }
  return result.verdict == Verdict::Solved ? kExitSolved : kExitTimedOut;
}

int run_bench_cmd(memflow::BenchOptions options, const std::string& out_path,
                  bool fit, double slope_max, double min_rate) {
  std::ofstream out(out_path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open results file: " + out_path);

  std::vector<BenchResult> results = memflow::run_bench(
      options, [&out](const BenchResult& r) {
        out << memflow::result_to_json(r) << '\n';
        out.flush();
      });
  if (!out) throw std::runtime_error("write failed: " + out_path);

  auto summaries = memflow::summarize_by_size(results);
  bool rates_ok = true;
  std::vector<std::pair<double, double>> points;
  for (const memflow::SizeSummary& s : summaries) {
    double rate = s.total > 0 ? static_cast<double>(s.solved) / s.total : 0.0;
    std::cout << "n=" << s.size << " solved " << s.solved << "/" << s.total
              << " (rate " << std::setprecision(3) << rate << ")";
    if (s.median_crossings)
      std::cout << " median crossings " << std::setprecision(10)
                << *s.median_crossings;
    std::cout << '\n';
    if (rate < min_rate) rates_ok = false;
    if (s.median_crossings)
      points.emplace_back(static_cast<double>(s.size), *s.median_crossings);
  }
  if (!fit) return kExitOk;

  if (points.size() < 3) {
    std::cout << "fit: fewer than 3 sizes with solved runs; gate FAILED\n";
    return kExitGateFailed;
  }
  memflow::ScalingFit scaling = memflow::fit_power_law(points);
  std::cout << "fit: slope " << std::setprecision(6) << scaling.slope
            << ", r^2 " << scaling.r_squared << " (gate: slope <= " << slope_max
            << ", rate >= " << min_rate << " per size)\n";
  bool pass = rates_ok && scaling.slope <= slope_max;
  std::cout << "gate: " << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kExitOk : kExitGateFailed;
}

int run_topo_check(const std::string& field, int sweep) {
  std::vector<memflow::FieldCheckRow> rows =
      memflow::run_field_checks(field, sweep);
  std::cout << std::left << std::setw(16) << "field" << std::setw(12)
            << "parameter" << std::setw(7) << "zeros" << std::setw(12)
            << "signed sum" << std::setw(10) << "expected"
            << "result\n";
  bool all_pass = true;
  for (const memflow::FieldCheckRow& row : rows) {
    std::cout << std::left << std::setw(16) << row.field << std::setw(12)
              << std::setprecision(4) << row.parameter << std::setw(7)
              << row.zero_count << std::setw(12) << row.signed_sum
              << std::setw(10) << row.expected
              << (row.pass ? "PASS" : "FAIL") << '\n';
    if (!row.pass) all_pass = false;
  }
  return all_pass ? kExitOk : kExitGateFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memflow: continuous-time dynamical-system SAT solver with "
               "topological instrumentation"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve one DIMACS CNF instance");
  std::string solve_config_path;
  solve->add_option("--config", solve_config_path,
                    "key=value file mirroring flags (flags win)");
  std::string cnf_path;
  solve->add_option("path", cnf_path, "DIMACS CNF file")->required();
  RunConfig solve_config;
  add_param_options(solve, solve_config);
  bool as_json = false;
  std::string trace_path, events_path;
  solve->add_flag("--json", as_json, "machine-readable result on stdout");
  solve->add_option("--trace", trace_path, "write trajectory CSV here");
  solve->add_option("--events", events_path, "write event JSONL here");

  // bench
  auto* bench = app.add_subcommand("bench", "seeded scaling suite");
  std::string bench_config_path;
  bench->add_option("--config", bench_config_path,
                    "key=value file mirroring flags (flags win)");
  memflow::BenchOptions bench_options;
  const char* jobs_env = std::getenv("MEMFLOW_JOBS");
  bench_options.jobs = jobs_env ? std::max(1, std::atoi(jobs_env)) : 1;
  bench->add_option("--sizes", bench_options.sizes, "problem sizes n")
      ->delimiter(',')
      ->required();
  bench->add_option("--ratio", bench_options.ratio, "clause ratio M/n");
  bench->add_option("--instances", bench_options.instances,
                    "instances per size");
  bench->add_option("--seed", bench_options.seed, "suite seed");
  bench->add_option("--k", bench_options.k, "literals per clause");
  bench->add_option("--restarts", bench_options.restarts, "restart attempts");
  bench->add_option("--jobs", bench_options.jobs,
                    "worker pool width (default MEMFLOW_JOBS or 1)");
  bench->add_option("--dt", bench_options.integrator.dt, "integration step");
  bench->add_option("--t-max", bench_options.integrator.t_max, "time budget");
  bench->add_option("--theta", bench_options.noise.theta, "noise intensity");
  std::string out_path;
  bench->add_option("--out", out_path, "JSONL results file (appended)")
      ->required();
  bool fit = false;
  double slope_max = 3.0, min_rate = 0.8;
  bench->add_flag("--fit", fit, "fit median crossings vs n and gate");
  bench->add_option("--slope-max", slope_max, "fit gate: max slope");
  bench->add_option("--min-rate", min_rate, "fit gate: min solve rate per size");

  // topo-check
  auto* topo = app.add_subcommand("topo-check", "index-sum topology checks");
  std::string field = "all";
  int sweep = 20;
  topo->add_option("--field", field, "sphere|torus|circle|doublewell|all")
      ->check(CLI::IsMember({"sphere", "torus", "circle", "doublewell", "all"}));
  topo->add_option("--sweep", sweep, "deformation sweep points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve->parsed()) {
      if (!solve_config_path.empty()) apply_config_file(solve, solve_config_path);
      solve_config.formula_path = cnf_path;
      solve_config.collect_trace = !events_path.empty();
      return run_solve(solve_config, as_json, trace_path, events_path);
    }
    if (bench->parsed()) {
      if (!bench_config_path.empty()) apply_config_file(bench, bench_config_path);
      if (fit && bench_options.sizes.size() < 3) {
        std::cerr << "bench --fit needs at least 3 sizes\n";
        return kExitUsage;
      }
      return run_bench_cmd(bench_options, out_path, fit, slope_max, min_rate);
    }
    if (topo->parsed()) return run_topo_check(field, sweep);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
