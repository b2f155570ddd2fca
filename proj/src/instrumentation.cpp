#include "memflow/instrumentation.hpp"

#include <cmath>
#include <stdexcept>

namespace memflow {

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

double max_abs(const std::vector<double>& v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

double sum_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

CrossingDetector::CrossingDetector(int num_variables) {
  if (num_variables < 0)
    throw std::invalid_argument("num_variables must be nonnegative");
  vars_.resize(static_cast<size_t>(num_variables));
}

void CrossingDetector::observe(double t, std::span<const double> v) {
  if (v.size() != vars_.size())
    throw std::invalid_argument("observation width mismatch");
  for (size_t i = 0; i < vars_.size(); ++i) {
    PerVariable& pv = vars_[i];
    double value = v[i];
    int s = sign_of(value);
    if (!pv.seen) {
      pv.seen = true;
      pv.last_sign = s;
    } else {
      if (s != 0 && pv.last_sign != 0 && s != pv.last_sign) {
        // Strict sign change against the last nonzero sign; interpolate within
        // the immediately preceding interval. A zero previous sample puts the
        // crossing at the touch itself.
        double denom = value - pv.prev_v;
        double tc = denom != 0.0
                        ? pv.prev_t + (t - pv.prev_t) * (0.0 - pv.prev_v) / denom
                        : pv.prev_t;
        events_.push_back({tc, static_cast<int>(i), s});
      }
      if (s != 0) pv.last_sign = s;
    }
    pv.prev_t = t;
    pv.prev_v = value;
  }
}

std::vector<CrossingEvent> detect_crossings(
    std::span<const TrajectorySample> samples) {
  if (samples.empty()) return {};
  size_t width = samples.front().state.x.size();
  for (const TrajectorySample& s : samples)
    if (s.state.x.size() < width) width = s.state.x.size();
  CrossingDetector detector(static_cast<int>(width));
  for (const TrajectorySample& s : samples)
    detector.observe(s.t, std::span<const double>(s.state.x.data(), width));
  return detector.take_events();
}

int net_signed_crossings(std::span<const CrossingEvent> events,
                         int variable_index) {
  int net = 0;
  for (const CrossingEvent& e : events)
    if (e.variable == variable_index) net += e.direction;
  return net;
}

long instanton_step_count(std::span<const CrossingEvent> events) {
  return static_cast<long>(events.size());
}

std::optional<CriticalPointReport> refine_critical_point(
    const FlowSystem& system, std::span<const double> guess,
    const RefineOptions& opts) {
  int d = system.dim();
  if (static_cast<int>(guess.size()) != d)
    throw std::invalid_argument("guess dimension mismatch");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tol must be positive");

  std::vector<double> x(guess.begin(), guess.end());
  system.project(x);
  std::vector<double> f(d), trial(d), trial_f(d);
  system.eval(x, f);
  // Progress is measured in the smooth l2 merit: the sup norm plateaus when
  // several coordinates sit at the same drift magnitude and a step trades one
  // saturated row for another. Success is still judged in the sup norm.
  double merit = sum_sq(f);

  for (int iter = 0; iter < opts.max_iter && max_abs(f) > opts.tol; ++iter) {
    bool improved = false;

    // Damped Newton on the finite-difference Jacobian, step projected into the
    // box, damping halved until the merit drops.
    Eigen::MatrixXd jac = fd_jacobian(system, x, opts.fd_h);
    Eigen::VectorXd rhs(d);
    for (int i = 0; i < d; ++i) rhs(i) = -f[i];
    Eigen::VectorXd step = jac.partialPivLu().solve(rhs);
    if (!step.allFinite()) {
      // singular system: ridge retry
      Eigen::MatrixXd ridged = jac;
      for (int i = 0; i < d; ++i) ridged(i, i) += 1e-8;
      step = ridged.partialPivLu().solve(rhs);
    }
    if (step.allFinite()) {
      double damping = 1.0;
      for (int cut = 0; cut < 16 && !improved; ++cut, damping *= 0.5) {
        for (int i = 0; i < d; ++i) trial[i] = x[i] + damping * step(i);
        system.project(trial);
        system.eval(trial, trial_f);
        double mt = sum_sq(trial_f);
        if (mt < merit) {
          x = trial;
          f = trial_f;
          merit = mt;
          improved = true;
        }
      }
    }

    if (!improved) {
      // Projected flow relaxation: moves coordinates whose Jacobian column
      // vanishes (flat memory directions) onto their rest faces. The merit is
      // constant along such directions until the face is reached, so the step
      // length must be allowed to grow enormously; scan a geometric ladder
      // both ways and take the best improving step.
      double best_mt = merit;
      double best_eta = 0.0;
      auto probe = [&](double eta) {
        for (int i = 0; i < d; ++i) trial[i] = x[i] + eta * f[i];
        system.project(trial);
        system.eval(trial, trial_f);
        double mt = sum_sq(trial_f);
        if (mt < best_mt) {
          best_mt = mt;
          best_eta = eta;
        }
      };
      double eta = 1.0;
      for (int up = 0; up <= 60; ++up, eta *= 2.0) probe(eta);
      eta = 0.5;
      for (int down = 0; down < 60; ++down, eta *= 0.5) probe(eta);
      if (best_eta != 0.0) {
        for (int i = 0; i < d; ++i) trial[i] = x[i] + best_eta * f[i];
        system.project(trial);
        system.eval(trial, trial_f);
        x = trial;
        f = trial_f;
        merit = sum_sq(f);
        improved = true;
      }
    }

    if (!improved) break;  // stalled; no convergence
  }

  double r = max_abs(f);
  if (r > opts.tol) return std::nullopt;

  CriticalPointReport report;
  report.location = x;
  report.residual = r;
  Eigen::MatrixXd jac = fd_jacobian(system, x, opts.fd_h);
  auto [index, centers] = index_of(jac, opts.eps_c);
  report.index = index;
  report.center_dims = centers;
  return report;
}

std::pair<int, int> index_of(const Eigen::MatrixXd& jacobian, double eps_c) {
  if (jacobian.rows() != jacobian.cols())
    throw std::invalid_argument("jacobian must be square");
  if (!jacobian.allFinite())
    throw std::invalid_argument("jacobian entries must be finite");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(jacobian, false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigen-solver failure");
  int index = 0;
  int centers = 0;
  for (Eigen::Index i = 0; i < jacobian.rows(); ++i) {
    double re = solver.eigenvalues()(i).real();
    if (re > eps_c)
      ++index;
    else if (std::abs(re) <= eps_c)
      ++centers;
  }
  return {index, centers};
}

LyapunovEstimate lyapunov_max(const FlowSystem& system,
                              std::span<const double> state0, double horizon,
                              Pcg32& rng, const LyapunovOptions& opts) {
  int d = system.dim();
  if (static_cast<int>(state0.size()) != d)
    throw std::invalid_argument("state dimension mismatch");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(opts.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(opts.separation > 0.0))
    throw std::invalid_argument("degenerate perturbation: separation must be positive");

  const double d0 = opts.separation;
  std::vector<double> x(state0.begin(), state0.end());
  system.project(x);

  std::vector<double> u(d);
  double norm2 = 0.0;
  for (int i = 0; i < d; ++i) {
    u[i] = rng.gaussian();
    norm2 += u[i] * u[i];
  }
  double norm = std::sqrt(norm2);
  if (!(norm > 0.0))
    throw std::runtime_error("degenerate perturbation direction");
  for (int i = 0; i < d; ++i) u[i] /= norm;

  std::vector<double> y(d);
  for (int i = 0; i < d; ++i) y[i] = x[i] + d0 * u[i];

  long steps = std::max(1L, std::lround(horizon / opts.dt));
  Rk4Workspace w(d);
  double sum_log = 0.0;
  long counted = 0;
  for (long k = 0; k < steps; ++k) {
    rk4_in_place(system, x, opts.dt, w);
    rk4_in_place(system, y, opts.dt, w);
    double dist2 = 0.0;
    for (int i = 0; i < d; ++i) {
      double diff = y[i] - x[i];
      dist2 += diff * diff;
    }
    double dist = std::sqrt(dist2);
    if (dist > 0.0) {
      sum_log += std::log(dist / d0);
      ++counted;
      double scale = d0 / dist;
      for (int i = 0; i < d; ++i) y[i] = x[i] + scale * (y[i] - x[i]);
    } else {
      // box projection collapsed the pair; reseed the offset, skip the sample
      for (int i = 0; i < d; ++i) y[i] = x[i] + d0 * u[i];
    }
  }

  double lambda =
      counted > 0 ? sum_log / (static_cast<double>(counted) * opts.dt) : 0.0;
  return {lambda, horizon};
}

InstantonTrace extract_instanton_trace(const FlowSystem& system,
                                       std::span<const TrajectorySample> samples,
                                       const TraceOptions& opts) {
  InstantonTrace trace;
  int d = system.dim();
  std::vector<double> f(d);
  auto speed = [&](const TrajectorySample& s) {
    if (static_cast<int>(s.state.x.size()) != d)
      throw std::invalid_argument("sample dimension mismatch");
    system.eval(s.state.x, f);
    return max_abs(f);
  };

  size_t i = 0;
  const size_t n = samples.size();
  while (i < n) {
    if (speed(samples[i]) >= opts.slow_tol) {
      ++i;
      continue;
    }
    size_t begin = i;
    size_t best = i;
    double best_r = speed(samples[i]);
    ++i;
    while (i < n) {
      double ri = speed(samples[i]);
      if (ri >= opts.slow_tol) break;
      if (ri < best_r) {
        best_r = ri;
        best = i;
      }
      ++i;
    }
    if (i - begin < static_cast<size_t>(opts.min_consecutive)) continue;
    auto report = refine_critical_point(system, samples[best].state.x, opts.refine);
    if (!report) continue;  // no convergence: keep scanning
    if (!trace.visits.empty()) {
      const std::vector<double>& prev = trace.visits.back().report.location;
      double dist = 0.0;
      for (int k = 0; k < d; ++k)
        dist = std::max(dist, std::abs(prev[k] - report->location[k]));
      if (dist < opts.dedup_dist) continue;  // same critical point, still there
    }
    trace.visits.push_back({samples[best].t, std::move(*report)});
  }

  trace.step_count =
      trace.visits.empty() ? 0 : static_cast<int>(trace.visits.size()) - 1;
  trace.monotone = true;
  for (size_t k = 1; k < trace.visits.size(); ++k)
    if (trace.visits[k].report.index > trace.visits[k - 1].report.index)
      trace.monotone = false;
  return trace;
}

std::vector<int> index_sequence(const InstantonTrace& trace) {
  std::vector<int> seq;
  seq.reserve(trace.visits.size());
  for (const CriticalVisit& v : trace.visits) seq.push_back(v.report.index);
  return seq;
}

}  // namespace memflow
