#ifndef MEMFLOW_BENCH_HPP
#define MEMFLOW_BENCH_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memflow/circuit.hpp"
#include "memflow/cnf.hpp"
#include "memflow/dynamics.hpp"

namespace memflow {

struct GeneratorSpec {
  int n = 0;
  double ratio = 4.25;
  int k = 3;
  uint64_t seed = 0;
};

// Everything a run needs; a result's echoed config replays it exactly.
struct RunConfig {
  std::optional<std::string> formula_path;  // exactly one source must be set
  std::optional<GeneratorSpec> generator;
  CircuitParams params;
  IntegratorConfig integrator;
  NoiseConfig noise;
  uint64_t seed = 0;
  int restarts = 1;
  bool collect_trace = false;      // refine slow points into an index sequence
  bool estimate_lyapunov = false;  // exponent from the final state, horizon 500

  void validate() const;
};

struct BenchResult {
  std::string instance;  // file path or generator descriptor
  int n = 0;
  int num_clauses = 0;
  Verdict verdict = Verdict::TimedOut;
  std::optional<double> t_solved;
  double wall_time_seconds = 0.0;
  long crossings_total = 0;  // summed across restart attempts
  int defects_initial = 0;   // of the decisive attempt
  std::vector<int> index_seq;
  std::optional<double> lambda_max;
  std::optional<std::string> assignment_hash;  // present iff Solved
  int restarts_used = 1;
  RunConfig config;  // full parameter echo
};

struct ScalingFit {
  std::vector<double> sizes;
  std::vector<double> medians;
  double slope = 0.0;
  double intercept = 0.0;  // of the log-log line
  double r_squared = 0.0;
};

// Least-squares line through (log n, log median). Needs >= 3 strictly
// increasing positive sizes with positive medians.
ScalingFit fit_power_law(std::span<const std::pair<double, double>> points);

// Runs one config end to end: materialize the formula, integrate with
// restarts (attempt r uses rng stream r+1; stream 0 belongs to generation),
// and summarize. Optional out-params expose the decisive attempt's outcome
// and the formula for trace/event dumps.
BenchResult run_single(const RunConfig& config, RunOutcome* outcome_out = nullptr,
                       CnfFormula* formula_out = nullptr);

struct BenchOptions {
  std::vector<int> sizes;
  double ratio = 4.25;
  int k = 3;
  int instances = 25;
  uint64_t seed = 0;
  int restarts = 1;
  int jobs = 1;
  CircuitParams params;
  IntegratorConfig integrator;
  NoiseConfig noise;
};

// Deterministic per-instance seed for a suite: a fixed splitmix chain over
// (suite seed, size, instance index), independent of worker scheduling.
uint64_t instance_seed(uint64_t suite_seed, int n, int index);

// Seeded scaling suite over options.sizes x options.instances. Results arrive
// through the sink in completion order (single-threaded writer); the returned
// vector is re-sorted by (size, instance index).
std::vector<BenchResult> run_bench(
    const BenchOptions& options,
    const std::function<void(const BenchResult&)>& sink = {});

// JSONL persistence, schema "memflow/1", one object per result, append-safe.
void write_results(std::span<const BenchResult> results,
                   const std::string& path);
std::vector<BenchResult> read_results(const std::string& path);

std::string result_to_json(const BenchResult& result);
BenchResult result_from_json(const std::string& line);

// Median crossings over Solved runs and solve rate, per size, plus the fit
// gate used by the bench CLI.
struct SizeSummary {
  int size = 0;
  int solved = 0;
  int total = 0;
  std::optional<double> median_crossings;
};

std::vector<SizeSummary> summarize_by_size(std::span<const BenchResult> results);

}  // namespace memflow

#endif
