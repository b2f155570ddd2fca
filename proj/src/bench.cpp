#include "memflow/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "memflow/instrumentation.hpp"

namespace memflow {

using nlohmann::json;

void RunConfig::validate() const {
  if (formula_path.has_value() == generator.has_value())
    throw std::invalid_argument("exactly one formula source must be set");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  params.validate();
  integrator.validate();
  if (noise.theta < 0.0) throw std::invalid_argument("theta must be >= 0");
}

ScalingFit fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_power_law needs at least 3 points");
  ScalingFit fit;
  double last = 0.0;
  std::vector<double> lx, ly;
  for (const auto& [n, median] : points) {
    if (!(n > 0.0)) throw std::invalid_argument("sizes must be positive");
    if (!(median > 0.0))
      throw std::invalid_argument("medians must be positive (log undefined)");
    if (!(n > last)) throw std::invalid_argument("sizes must be increasing");
    last = n;
    fit.sizes.push_back(n);
    fit.medians.push_back(median);
    lx.push_back(std::log(n));
    ly.push_back(std::log(median));
  }
  size_t m = lx.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("degenerate size spread");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < m; ++i) {
    double pred = fit.intercept + fit.slope * lx[i];
    ss_res += (ly[i] - pred) * (ly[i] - pred);
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

namespace {

std::string describe_generator(const GeneratorSpec& g) {
  std::ostringstream out;
  out << "gen:n=" << g.n << ",ratio=" << g.ratio << ",k=" << g.k
      << ",seed=" << g.seed;
  return out.str();
}

CnfFormula materialize(const RunConfig& config, std::string& descriptor) {
  if (config.formula_path) {
    std::ifstream in(*config.formula_path);
    if (!in)
      throw std::runtime_error("cannot read formula file: " +
                               *config.formula_path);
    descriptor = *config.formula_path;
    return parse_dimacs(in);
  }
  const GeneratorSpec& g = *config.generator;
  descriptor = describe_generator(g);
  return generate_planted_ksat(g.n, g.ratio, g.k, g.seed).formula;
}

}  // namespace

BenchResult run_single(const RunConfig& config, RunOutcome* outcome_out,
                       CnfFormula* formula_out) {
  config.validate();
  BenchResult result;
  result.config = config;

  CnfFormula formula = materialize(config, result.instance);
  result.n = formula.num_variables;
  result.num_clauses = static_cast<int>(formula.clauses.size());
  CircuitSystem system(formula, config.params);

  IntegratorConfig integrator = config.integrator;
  integrator.collect_trace = config.collect_trace;

  auto begin = std::chrono::steady_clock::now();
  RunOutcome decisive;
  for (int attempt = 0; attempt < config.restarts; ++attempt) {
    // stream 0 is reserved for instance generation
    Pcg32 rng(config.seed, static_cast<uint64_t>(attempt) + 1);
    SolverState state0 = default_initial_state(system, rng);
    RunOutcome outcome =
        integrate_until(system, std::move(state0), integrator, config.noise, rng);
    result.crossings_total +=
        instanton_step_count(std::span<const CrossingEvent>(outcome.crossings));
    result.restarts_used = attempt + 1;
    bool solved = outcome.verdict == Verdict::Solved;
    if (config.estimate_lyapunov && solved) {
      const SolverState& fin = outcome.samples.back().state;
      LyapunovOptions lopts;
      lopts.dt = integrator.dt;
      result.lambda_max =
          lyapunov_max(system, fin.x, 500.0, rng, lopts).lambda_max;
    }
    decisive = std::move(outcome);
    if (solved) break;
  }
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - begin)
          .count();

  result.verdict = decisive.verdict;
  result.t_solved = decisive.t_solved;
  result.defects_initial = decisive.defects_initial;
  if (decisive.trace) result.index_seq = index_sequence(*decisive.trace);
  if (decisive.verdict == Verdict::Solved) {
    if (!decisive.assignment || count_defects(formula, *decisive.assignment) != 0)
      throw std::logic_error("Solved verdict without a verifying assignment");
    result.assignment_hash =
        std::to_string(assignment_hash(*decisive.assignment));
  }

  if (outcome_out) *outcome_out = std::move(decisive);
  if (formula_out) *formula_out = std::move(formula);
  return result;
}

uint64_t instance_seed(uint64_t suite_seed, int n, int index) {
  SplitMix64 outer(suite_seed ^
                   0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(n));
  SplitMix64 inner(outer.next() ^ static_cast<uint64_t>(index));
  return inner.next();
}

std::vector<BenchResult> run_bench(
    const BenchOptions& options,
    const std::function<void(const BenchResult&)>& sink) {
  if (options.sizes.empty())
    throw std::invalid_argument("bench needs at least one size");
  if (options.instances < 1)
    throw std::invalid_argument("instances must be >= 1");
  int jobs = std::max(1, options.jobs);

  struct Task {
    int size_pos;
    int index;
  };
  std::vector<Task> tasks;
  for (size_t s = 0; s < options.sizes.size(); ++s)
    for (int i = 0; i < options.instances; ++i)
      tasks.push_back({static_cast<int>(s), i});

  std::vector<BenchResult> results(tasks.size());
  std::atomic<size_t> cursor{0};
  std::mutex sink_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      size_t at = cursor.fetch_add(1);
      if (at >= tasks.size()) return;
      const Task& task = tasks[at];
      int n = options.sizes[static_cast<size_t>(task.size_pos)];
      RunConfig config;
      GeneratorSpec gen;
      gen.n = n;
      gen.ratio = options.ratio;
      gen.k = options.k;
      gen.seed = instance_seed(options.seed, n, task.index);
      config.generator = gen;
      config.params = options.params;
      config.integrator = options.integrator;
      config.noise = options.noise;
      config.seed = gen.seed;
      config.restarts = options.restarts;
      try {
        BenchResult result = run_single(config);
        {
          std::lock_guard<std::mutex> lock(sink_mutex);
          if (sink) sink(result);
        }
        results[at] = std::move(result);
      } catch (...) {
        std::lock_guard<std::mutex> lock(sink_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;  // already ordered by (size, instance index)
}

namespace {

json config_to_json(const RunConfig& config) {
  json j;
  j["formula_path"] =
      config.formula_path ? json(*config.formula_path) : json(nullptr);
  if (config.generator) {
    const GeneratorSpec& g = *config.generator;
    j["generator"] = {
        {"n", g.n}, {"ratio", g.ratio}, {"k", g.k}, {"seed", g.seed}};
  } else {
    j["generator"] = nullptr;
  }
  const CircuitParams& p = config.params;
  j["params"] = {{"alpha", p.alpha},     {"beta", p.beta},
                 {"gamma", p.gamma},     {"delta", p.delta},
                 {"epsilon", p.epsilon}, {"zeta", p.zeta},
                 {"xl_max", p.xl_max}};
  const IntegratorConfig& ic = config.integrator;
  j["integrator"] = {
      {"dt", ic.dt},
      {"t_max", ic.t_max},
      {"record_stride", ic.record_stride},
      {"persistence_window", ic.persistence_window},
      {"method", ic.method == StepMethod::Rk4 ? "rk4" : "euler_maruyama"}};
  j["noise"] = {{"theta", config.noise.theta},
                {"coupling", config.noise.coupling == NoiseCoupling::VoltagesOnly
                                 ? "voltages_only"
                                 : "all_coordinates"}};
  j["seed"] = config.seed;
  j["restarts"] = config.restarts;
  j["collect_trace"] = config.collect_trace;
  j["estimate_lyapunov"] = config.estimate_lyapunov;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig config;
  if (!j.at("formula_path").is_null())
    config.formula_path = j.at("formula_path").get<std::string>();
  if (!j.at("generator").is_null()) {
    const json& g = j.at("generator");
    GeneratorSpec gen;
    gen.n = g.at("n").get<int>();
    gen.ratio = g.at("ratio").get<double>();
    gen.k = g.at("k").get<int>();
    gen.seed = g.at("seed").get<uint64_t>();
    config.generator = gen;
  }
  const json& p = j.at("params");
  config.params.alpha = p.at("alpha").get<double>();
  config.params.beta = p.at("beta").get<double>();
  config.params.gamma = p.at("gamma").get<double>();
  config.params.delta = p.at("delta").get<double>();
  config.params.epsilon = p.at("epsilon").get<double>();
  config.params.zeta = p.at("zeta").get<double>();
  config.params.xl_max = p.at("xl_max").get<double>();
  const json& ic = j.at("integrator");
  config.integrator.dt = ic.at("dt").get<double>();
  config.integrator.t_max = ic.at("t_max").get<double>();
  config.integrator.record_stride = ic.at("record_stride").get<int>();
  config.integrator.persistence_window =
      ic.at("persistence_window").get<double>();
  config.integrator.method = ic.at("method").get<std::string>() == "rk4"
                                 ? StepMethod::Rk4
                                 : StepMethod::EulerMaruyama;
  const json& nz = j.at("noise");
  config.noise.theta = nz.at("theta").get<double>();
  config.noise.coupling = nz.at("coupling").get<std::string>() == "voltages_only"
                              ? NoiseCoupling::VoltagesOnly
                              : NoiseCoupling::AllCoordinates;
  config.seed = j.at("seed").get<uint64_t>();
  config.restarts = j.at("restarts").get<int>();
  config.collect_trace = j.at("collect_trace").get<bool>();
  config.estimate_lyapunov = j.at("estimate_lyapunov").get<bool>();
  return config;
}

}  // namespace

std::string result_to_json(const BenchResult& result) {
  json j;
  j["schema"] = "memflow/1";
  j["instance"] = result.instance;
  j["n"] = result.n;
  j["m"] = result.num_clauses;
  j["verdict"] = result.verdict == Verdict::Solved ? "solved" : "timed_out";
  j["t_solved"] = result.t_solved ? json(*result.t_solved) : json(nullptr);
  j["wall_time_seconds"] = result.wall_time_seconds;
  j["crossings_total"] = result.crossings_total;
  j["defects_initial"] = result.defects_initial;
  j["index_sequence"] = result.index_seq;
  j["lambda_max"] = result.lambda_max ? json(*result.lambda_max) : json(nullptr);
  j["assignment_hash"] =
      result.assignment_hash ? json(*result.assignment_hash) : json(nullptr);
  j["restarts_used"] = result.restarts_used;
  j["config"] = config_to_json(result.config);
  return j.dump();
}

BenchResult result_from_json(const std::string& line) {
  json j = json::parse(line);
  if (j.at("schema").get<std::string>() != "memflow/1")
    throw std::runtime_error("unknown result schema: " +
                             j.at("schema").get<std::string>());
  BenchResult result;
  result.instance = j.at("instance").get<std::string>();
  result.n = j.at("n").get<int>();
  result.num_clauses = j.at("m").get<int>();
  result.verdict = j.at("verdict").get<std::string>() == "solved"
                       ? Verdict::Solved
                       : Verdict::TimedOut;
  if (!j.at("t_solved").is_null())
    result.t_solved = j.at("t_solved").get<double>();
  result.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  result.crossings_total = j.at("crossings_total").get<long>();
  result.defects_initial = j.at("defects_initial").get<int>();
  result.index_seq = j.at("index_sequence").get<std::vector<int>>();
  if (!j.at("lambda_max").is_null())
    result.lambda_max = j.at("lambda_max").get<double>();
  if (!j.at("assignment_hash").is_null())
    result.assignment_hash = j.at("assignment_hash").get<std::string>();
  result.restarts_used = j.at("restarts_used").get<int>();
  result.config = config_from_json(j.at("config"));
  return result;
}

void write_results(std::span<const BenchResult> results,
                   const std::string& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open results file: " + path);
  for (const BenchResult& r : results) out << result_to_json(r) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<BenchResult> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results file: " + path);
  std::vector<BenchResult> results;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    results.push_back(result_from_json(line));
  }
  return results;
}

std::vector<SizeSummary> summarize_by_size(
    std::span<const BenchResult> results) {
  std::vector<int> sizes;
  for (const BenchResult& r : results)
    if (std::find(sizes.begin(), sizes.end(), r.n) == sizes.end())
      sizes.push_back(r.n);
  std::sort(sizes.begin(), sizes.end());

  std::vector<SizeSummary> summaries;
  for (int n : sizes) {
    SizeSummary summary;
    summary.size = n;
    std::vector<double> solved_crossings;
    for (const BenchResult& r : results) {
      if (r.n != n) continue;
      ++summary.total;
      if (r.verdict == Verdict::Solved) {
        ++summary.solved;
        solved_crossings.push_back(static_cast<double>(r.crossings_total));
      }
    }
    if (!solved_crossings.empty()) {
      std::sort(solved_crossings.begin(), solved_crossings.end());
      size_t mid = solved_crossings.size() / 2;
      summary.median_crossings =
          solved_crossings.size() % 2 == 1
              ? solved_crossings[mid]
              : 0.5 * (solved_crossings[mid - 1] + solved_crossings[mid]);
    }
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

}  // namespace memflow
