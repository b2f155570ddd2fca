// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Thresholds are pinned inline next to each check.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "memflow/bench.hpp"
#include "memflow/circuit.hpp"
#include "memflow/cnf.hpp"
#include "memflow/dynamics.hpp"
#include "memflow/instrumentation.hpp"
#include "memflow/rng.hpp"
#include "memflow/topology.hpp"

using namespace memflow;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  std::ostringstream line;
  line << 'C' << std::setw(2) << std::setfill('0') << id << std::setfill(' ')
       << ' ' << std::left << std::setw(26) << name
       << (pass ? "PASS" : "FAIL");
  if (!detail.empty()) line << "  " << detail;
  std::cout << line.str() << std::endl;
  if (!pass) ++g_failures;
}

void run_criterion(int id, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [pass, detail] = body();
    report(id, name, pass, detail);
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

int side(double v) { return v > 0.0 ? 1 : 0; }

void grow_1d(std::span<const double> x, std::span<double> d) { d[0] = x[0]; }
void decay_1d(std::span<const double> x, std::span<double> d) { d[0] = -x[0]; }

RunConfig planted_config(int n, uint64_t seed) {
  RunConfig config;
  GeneratorSpec gen;
  gen.n = n;
  gen.seed = seed;
  config.generator = gen;
  config.seed = seed;
  return config;
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream out;
  out << std::setprecision(prec) << v;
  return out.str();
}

}  // namespace

int main() {
  const uint64_t kSoundnessSuite = 0xACCE55;

  // Criteria 1 and 2 share one 200-instance suite at n=50, ratio 4.25.
  int solved_200 = 0;
  int false_positives = 0;
  run_criterion(1, "solver-soundness", [&] {
    for (int i = 0; i < 200; ++i) {
      uint64_t seed = instance_seed(kSoundnessSuite, 50, i);
      RunOutcome outcome;
      BenchResult result = run_single(planted_config(50, seed), &outcome);
      if (result.verdict != Verdict::Solved) continue;
      ++solved_200;
      // verify against a freshly generated copy of the instance
      CnfFormula formula = generate_planted_ksat(50, 4.25, 3, seed).formula;
      if (!outcome.assignment ||
          count_defects(formula, *outcome.assignment) != 0)
        ++false_positives;
    }
    return std::pair{false_positives == 0,
                     "solved=" + std::to_string(solved_200) +
                         "/200 false_positives=" +
                         std::to_string(false_positives)};
  });

  run_criterion(2, "solver-effectiveness", [&] {
    // gate: >= 90% of the 200 planted instances reach Solved within t_max
    return std::pair{solved_200 >= 180,
                     "solved=" + std::to_string(solved_200) + "/200 (gate 180)"};
  });

  run_criterion(3, "oracle-equivalence", [&] {
    int unsat_seen = 0, solver_solved = 0, disagreements = 0;
    for (int i = 0; i < 500; ++i) {
      int n = 4 + i % 9;  // 4..12
      int m = static_cast<int>(std::lround(4.3 * n));
      CnfFormula f = generate_uniform_ksat(n, m, 3, 1000 + i);
      auto oracle = brute_force_solve(f);
      if (!oracle) ++unsat_seen;

      CircuitSystem sys(f);
      IntegratorConfig cfg;
      cfg.t_max = 50.0;
      Pcg32 rng(2000 + i, 1);
      SolverState init = default_initial_state(sys, rng);
      RunOutcome out = integrate_until(sys, init, cfg, NoiseConfig{}, rng);
      if (out.verdict != Verdict::Solved) continue;
      ++solver_solved;
      if (!oracle) ++disagreements;  // Solved claim on an UNSAT formula
      if (!out.assignment || count_defects(f, *out.assignment) != 0)
        ++disagreements;
    }
    return std::pair{disagreements == 0 && unsat_seen > 0,
                     "solved=" + std::to_string(solver_solved) +
                         "/500 unsat_in_suite=" + std::to_string(unsat_seen) +
                         " disagreements=" + std::to_string(disagreements)};
  });

  run_criterion(4, "intersection-invariant", [&] {
    int runs = 0, variables_checked = 0, mismatches = 0, alternation_breaks = 0;
    for (int i = 0; i < 100; ++i) {
      uint64_t seed = instance_seed(0xC4, 30, i);
      CnfFormula formula = generate_planted_ksat(30, 4.25, 3, seed).formula;
      CircuitSystem sys(formula);
      Pcg32 rng(seed, 1);
      SolverState init = default_initial_state(sys, rng);
      RunOutcome out =
          integrate_until(sys, init, IntegratorConfig{}, NoiseConfig{}, rng);
      ++runs;
      const SolverState& fin = out.samples.back().state;
      for (int var = 0; var < sys.num_variables(); ++var) {
        ++variables_checked;
        int net = net_signed_crossings(out.crossings, var);
        if (net != side(fin.v(var)) - side(init.v(var))) ++mismatches;
      }
      std::vector<int> last_dir(sys.num_variables(), 0);
      for (const CrossingEvent& e : out.crossings) {
        if (last_dir[e.variable] != 0 && e.direction != -last_dir[e.variable])
          ++alternation_breaks;
        last_dir[e.variable] = e.direction;
      }
    }
    return std::pair{mismatches == 0 && alternation_breaks == 0 && runs >= 100,
                     "runs=" + std::to_string(runs) + " vars_checked=" +
                         std::to_string(variables_checked) + " mismatches=" +
                         std::to_string(mismatches) + " alternation_breaks=" +
                         std::to_string(alternation_breaks)};
  });

  run_criterion(5, "poincare-hopf", [&] {
    std::vector<FieldCheckRow> rows = run_field_checks("all", 20);
    int failing = 0;
    for (const FieldCheckRow& row : rows)
      if (!row.pass) ++failing;
    return std::pair{failing == 0 && rows.size() == 120,
                     "rows=" + std::to_string(rows.size()) + " failing=" +
                         std::to_string(failing)};
  });

  // Criteria 6 and 8 share 20 solved runs at n=40.
  std::vector<std::pair<CnfFormula, std::vector<double>>> solved_endpoints;
  run_criterion(6, "no-chaos", [&] {
    double worst_lambda = -1e9;
    for (int i = 0; solved_endpoints.size() < 20 && i < 40; ++i) {
      uint64_t seed = instance_seed(0xC6, 40, i);
      CnfFormula formula = generate_planted_ksat(40, 4.25, 3, seed).formula;
      CircuitSystem sys(formula);
      Pcg32 rng(seed, 1);
      SolverState init = default_initial_state(sys, rng);
      RunOutcome out =
          integrate_until(sys, init, IntegratorConfig{}, NoiseConfig{}, rng);
      if (out.verdict != Verdict::Solved) continue;
      LyapunovEstimate est = lyapunov_max(
          sys, out.samples.back().state.x, 500.0, rng, LyapunovOptions{});
      worst_lambda = std::max(worst_lambda, est.lambda_max);
      solved_endpoints.emplace_back(std::move(formula),
                                    out.samples.back().state.x);
    }
    bool enough = solved_endpoints.size() == 20;
    bool quiet = worst_lambda <= 0.05;  // gate: lambda_max <= 0.05 per run

    // Start the growing hook small and keep the horizon short so the state
    // stays tiny and the finite-difference separation is never swamped by
    // floating-point granularity.
    Pcg32 hook_rng(99, 0);
    CallbackFlow grow(1, grow_1d), decay(1, decay_1d);
    double up =
        lyapunov_max(grow, std::vector<double>{1e-10}, 20.0, hook_rng).lambda_max;
    double down =
        lyapunov_max(decay, std::vector<double>{1.0}, 20.0, hook_rng).lambda_max;
    bool hooks_ok =
        std::fabs(up - 1.0) <= 0.01 && std::fabs(down + 1.0) <= 0.01;

    return std::pair{enough && quiet && hooks_ok,
                     "solved=" + std::to_string(solved_endpoints.size()) +
                         "/20 max_lambda=" + fmt(worst_lambda) +
                         " (gate 0.05) hooks: +" + fmt(up) + "/" + fmt(down)};
  });

  // Criterion 7 results are reused by criterion 10.
  std::vector<BenchResult> bench_results;
  run_criterion(7, "scaling-property", [&] {
    BenchOptions options;
    options.sizes = {20, 40, 80, 160};
    options.instances = 25;
    options.seed = 0xBE7C;
    bench_results = run_bench(options);

    std::vector<SizeSummary> summaries = summarize_by_size(bench_results);
    bool rates_ok = true;
    std::vector<std::pair<double, double>> points;
    std::string rates;
    for (const SizeSummary& s : summaries) {
      double rate = static_cast<double>(s.solved) / s.total;
      rates += (rates.empty() ? "" : ",") + fmt(rate, 2);
      if (rate < 0.8) rates_ok = false;  // gate: solve rate >= 0.8 per size
      if (s.median_crossings)
        points.emplace_back(static_cast<double>(s.size), *s.median_crossings);
    }
    bool fit_ok = false;
    double slope = 0.0, r2 = 0.0;
    if (points.size() == 4) {
      ScalingFit fit = fit_power_law(points);
      slope = fit.slope;
      r2 = fit.r_squared;
      fit_ok = slope <= 3.0 && r2 >= 0.9;  // gate: slope <= 3.0, r^2 >= 0.9
    }

    // synthetic recovery: exact power laws come back to +-0.01
    std::vector<std::pair<double, double>> quad = {
        {10, 400}, {20, 1600}, {40, 6400}, {80, 25600}};
    std::vector<std::pair<double, double>> sesqui;
    for (double n : {10.0, 20.0, 40.0, 80.0})
      sesqui.emplace_back(n, 2.0 * std::pow(n, 1.5));
    bool synth_ok =
        std::fabs(fit_power_law(quad).slope - 2.0) <= 0.01 &&
        std::fabs(fit_power_law(sesqui).slope - 1.5) <= 0.01;

    return std::pair{rates_ok && fit_ok && synth_ok,
                     "slope=" + fmt(slope) + " r2=" + fmt(r2) + " rates=" +
                         rates + (synth_ok ? "" : " synthetic-fit-failed")};
  });

  run_criterion(8, "equilibrium-stability", [&] {
    int refined = 0, bad = 0;
    double worst_residual = 0.0;
    for (const auto& [formula, endpoint] : solved_endpoints) {
      CircuitSystem sys(formula);
      auto rep = refine_critical_point(sys, endpoint);
      if (!rep) {
        ++bad;
        continue;
      }
      ++refined;
      worst_residual = std::max(worst_residual, rep->residual);
      if (rep->residual > 1e-9 || rep->index != 0 || rep->center_dims < 1)
        ++bad;
    }
    return std::pair{bad == 0 && refined == 20,
                     "refined=" + std::to_string(refined) +
                         "/20 worst_residual=" + fmt(worst_residual, 2) +
                         " violations=" + std::to_string(bad)};
  });

  run_criterion(9, "zero-noise-limit", [&] {
    // byte identity: the theta=0 stochastic path equals plain Euler and
    // consumes no randomness
    int identical = 0;
    for (int i = 0; i < 10; ++i) {
      uint64_t seed = instance_seed(0xC9A, 20, i);
      CnfFormula formula = generate_planted_ksat(20, 4.25, 3, seed).formula;
      CircuitSystem sys(formula);
      IntegratorConfig emcfg;
      emcfg.method = StepMethod::EulerMaruyama;

      Pcg32 rng_a(seed, 1);
      SolverState init_a = default_initial_state(sys, rng_a);
      RunOutcome out =
          integrate_until(sys, init_a, emcfg, NoiseConfig{}, rng_a);

      Pcg32 rng_b(seed, 1);
      SolverState manual = default_initial_state(sys, rng_b);
      Pcg32 unrelated(0xFEED, 9);  // must stay untouched at theta = 0
      for (long k = 0; k < out.steps_taken; ++k)
        manual = step_euler_maruyama(sys, manual, emcfg.dt, NoiseConfig{},
                                     unrelated);
      bool untouched = unrelated.next_u32() == Pcg32(0xFEED, 9).next_u32();
      if (manual.x == out.samples.back().state.x && untouched) ++identical;
    }

    // fixed 50-instance suite: small noise changes the success rate by at
    // most 10 percentage points
    int det_solved = 0, noisy_solved = 0;
    for (int i = 0; i < 50; ++i) {
      uint64_t seed = instance_seed(0xC9B, 20, i);
      RunConfig det = planted_config(20, seed);
      if (run_single(det).verdict == Verdict::Solved) ++det_solved;
      RunConfig noisy = planted_config(20, seed);
      noisy.noise.theta = 1e-4;
      if (run_single(noisy).verdict == Verdict::Solved) ++noisy_solved;
    }
    double gap = std::fabs(det_solved - noisy_solved) / 50.0;
    return std::pair{identical == 10 && gap <= 0.10,
                     "byte_identical=" + std::to_string(identical) +
                         "/10 det=" + std::to_string(det_solved) +
                         "/50 theta1e-4=" + std::to_string(noisy_solved) +
                         "/50 gap=" + fmt(gap, 2)};
  });

  run_criterion(10, "determinism-persistence", [&] {
    // one record per bench size from criterion 7
    std::vector<BenchResult> records;
    for (size_t i = 0; i < bench_results.size(); i += 25)
      records.push_back(bench_results[i]);
    if (records.empty()) return std::pair{false, std::string("no bench records")};

    fs::path dir = fs::temp_directory_path() / "memflow_acceptance";
    fs::create_directories(dir);
    fs::path path = dir / "records.jsonl";
    std::error_code ec;
    fs::remove(path, ec);
    write_results(records, path.string());
    std::vector<BenchResult> back = read_results(path.string());

    int mismatches = 0;
    if (back.size() != records.size()) ++mismatches;
    for (size_t i = 0; i < back.size() && i < records.size(); ++i)
      if (result_to_json(back[i]) != result_to_json(records[i])) ++mismatches;

    // re-run every record from its echoed config
    int reproduced = 0;
    for (const BenchResult& record : back) {
      RunOutcome o1, o2;
      BenchResult r1 = run_single(record.config, &o1);
      BenchResult r2 = run_single(record.config, &o2);
      bool same = r1.verdict == record.verdict &&
                  r1.t_solved == record.t_solved &&
                  r1.crossings_total == record.crossings_total &&
                  r1.assignment_hash == record.assignment_hash &&
                  o1.steps_taken == o2.steps_taken &&
                  r2.t_solved == r1.t_solved;
      if (same) ++reproduced;
    }

    // DIMACS round trips are lossless
    int dimacs_bad = 0;
    for (int i = 0; i < 50; ++i) {
      CnfFormula f =
          generate_planted_ksat(5 + i % 36, 4.25, 3, 7000 + i).formula;
      if (parse_dimacs(emit_dimacs(f)) != f) ++dimacs_bad;
    }

    bool pass = mismatches == 0 &&
                reproduced == static_cast<int>(back.size()) && dimacs_bad == 0;
    return std::pair{pass, "jsonl_mismatches=" + std::to_string(mismatches) +
                               " reproduced=" + std::to_string(reproduced) +
                               "/" + std::to_string(back.size()) +
                               " dimacs_failures=" + std::to_string(dimacs_bad)};
  });

  if (g_failures == 0) {
    std::cout << "acceptance: all 10 criteria PASS" << std::endl;
    return 0;
  }
  std::cout << "acceptance: " << g_failures << " criteria FAILED" << std::endl;
  return 1;
}
