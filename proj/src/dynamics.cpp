#include "memflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "memflow/instrumentation.hpp"

namespace memflow {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (dt > 0.25)
    throw std::invalid_argument("dt > 0.25 exceeds the stability guard");
  if (!(t_max >= dt)) throw std::invalid_argument("t_max must be >= dt");
  if (record_stride < 1)
    throw std::invalid_argument("record_stride must be >= 1");
}

namespace {

void check_finite(const std::vector<double>& increment) {
  for (size_t i = 0; i < increment.size(); ++i)
    if (!std::isfinite(increment[i]))
      throw std::runtime_error("integration fault: non-finite derivative at coordinate " +
                               std::to_string(i));
}

void em_step_flat(const CircuitSystem& system, std::vector<double>& x,
                  double dt, const NoiseConfig& noise, Pcg32& rng,
                  std::vector<double>& deriv) {
  int d = system.dim();
  system.eval(x, deriv);
  for (int i = 0; i < d; ++i) deriv[i] *= dt;
  check_finite(deriv);
  for (int i = 0; i < d; ++i) x[i] += deriv[i];
  if (noise.theta > 0.0) {
    double sigma = std::sqrt(2.0 * noise.theta * dt);
    int coupled = noise.coupling == NoiseCoupling::VoltagesOnly
                      ? system.num_variables()
                      : d;
    for (int i = 0; i < coupled; ++i) x[i] += sigma * rng.gaussian();
  }
  system.project(x);
}

}  // namespace

SolverState step_rk4(const CircuitSystem& system, const SolverState& state,
                     double dt) {
  system.validate_state(state);
  SolverState next = state;
  Rk4Workspace w(system.dim());
  rk4_in_place(system, next.x, dt, w);
  next.t = state.t + dt;
  return next;
}

SolverState step_euler_maruyama(const CircuitSystem& system,
                                const SolverState& state, double dt,
                                const NoiseConfig& noise, Pcg32& rng) {
  system.validate_state(state);
  if (noise.theta < 0.0) throw std::invalid_argument("theta must be >= 0");
  SolverState next = state;
  std::vector<double> deriv(system.dim());
  em_step_flat(system, next.x, dt, noise, rng, deriv);
  next.t = state.t + dt;
  return next;
}

RunOutcome integrate_until(const CircuitSystem& system, SolverState state,
                           const IntegratorConfig& config,
                           const NoiseConfig& noise, Pcg32& rng) {
  config.validate();
  if (noise.theta < 0.0) throw std::invalid_argument("theta must be >= 0");
  system.validate_state(state);

  const double dt = config.dt;
  const double t0 = state.t;
  const double pw = config.effective_persistence();
  const long required = std::max(0L, static_cast<long>(std::ceil(pw / dt - 1e-9)));
  const bool use_em =
      noise.theta > 0.0 || config.method == StepMethod::EulerMaruyama;

  RunOutcome out;
  out.defects_initial = state_defects(system, state);

  CrossingDetector detector(system.num_variables());
  detector.observe(t0, std::span<const double>(state.x.data(),
                                               system.num_variables()));

  Rk4Workspace w(system.dim());
  std::vector<double> em_deriv(system.dim());

  auto push_sample = [&](double t, int defects) {
    SolverState snap = state;
    snap.t = t;
    out.samples.push_back({t, std::move(snap), defects});
  };
  push_sample(t0, out.defects_initial);

  long k = 0;
  long sat_start = -1;  // step index where the current satisfying stretch began
  bool solved = false;
  double t = t0;

  if (out.defects_initial == 0) {
    sat_start = 0;
    if (required == 0) {
      solved = true;
      out.t_solved = t0;
    }
  }

  while (!solved && t < config.t_max) {
    if (use_em)
      em_step_flat(system, state.x, dt, noise, rng, em_deriv);
    else
      rk4_in_place(system, state.x, dt, w);
    ++k;
    t = t0 + static_cast<double>(k) * dt;
    state.t = t;

    detector.observe(t, std::span<const double>(state.x.data(),
                                                system.num_variables()));
    int defects = state_defects(system, state);
    if (defects == 0) {
      if (sat_start < 0) sat_start = k;
      if (k - sat_start >= required) {
        solved = true;
        out.t_solved = t0 + static_cast<double>(sat_start + required) * dt;
      }
    } else {
      sat_start = -1;
    }

    if (!solved && k % config.record_stride == 0) push_sample(t, defects);
  }

  out.steps_taken = k;
  out.crossings = detector.take_events();
  if (out.samples.back().t != t) push_sample(t, state_defects(system, state));

  if (solved) {
    out.verdict = Verdict::Solved;
    out.assignment = digital_readout(system, state);
  } else {
    out.verdict = Verdict::TimedOut;
  }

  if (config.collect_trace) {
    const TraceOptions topts;
    out.trace = extract_instanton_trace(system, out.samples, topts);
    if (solved) {
      // The endpoint of a solved run is a critical point (the readout
      // persisted), but the memory drains keep ||F|| above slow_tol for a
      // while after t_solved, so slow-sample detection misses it when the
      // run stops shortly after solving. Refine the endpoint and append the
      // visit unless the trace already ends there.
      if (auto report = refine_critical_point(system, state.x, topts.refine)) {
        bool covered = false;
        if (!out.trace->visits.empty()) {
          const std::vector<double>& prev =
              out.trace->visits.back().report.location;
          double dist = 0.0;
          for (size_t i = 0; i < prev.size(); ++i)
            dist = std::max(dist, std::abs(prev[i] - report->location[i]));
          covered = dist < topts.dedup_dist;
        }
        if (!covered) {
          if (!out.trace->visits.empty() &&
              report->index > out.trace->visits.back().report.index)
            out.trace->monotone = false;
          out.trace->visits.push_back({t, std::move(*report)});
          out.trace->step_count =
              static_cast<int>(out.trace->visits.size()) - 1;
        }
      }
    }
  }

  return out;
}

SolverState default_initial_state(const CircuitSystem& system, Pcg32& rng) {
  std::vector<double> x(system.dim());
  for (int i = 0; i < system.num_variables(); ++i) x[i] = rng.uniform_pm1();
  for (int m = 0; m < system.num_clauses(); ++m) {
    x[system.xs_offset() + m] = 0.5;
    x[system.xl_offset() + m] = 1.0;
  }
  return system.make_state(std::move(x), 0.0);
}

}  // namespace memflow
