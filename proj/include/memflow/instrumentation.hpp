#ifndef MEMFLOW_INSTRUMENTATION_HPP
#define MEMFLOW_INSTRUMENTATION_HPP

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "memflow/dynamics.hpp"
#include "memflow/events.hpp"
#include "memflow/flow.hpp"
#include "memflow/rng.hpp"

namespace memflow {

// Streaming threshold-crossing detector. A crossing is a strict sign change of
// a voltage between consecutive observations; exact zeros attach to the
// following interval and are never crossings by themselves. Crossing times are
// linearly interpolated.
class CrossingDetector {
 public:
  explicit CrossingDetector(int num_variables);

  void observe(double t, std::span<const double> v);
  const std::vector<CrossingEvent>& events() const { return events_; }
  std::vector<CrossingEvent> take_events() { return std::move(events_); }

 private:
  struct PerVariable {
    int last_sign = 0;  // sign of the last nonzero observation
    double prev_t = 0.0;
    double prev_v = 0.0;
    bool seen = false;
  };
  std::vector<PerVariable> vars_;
  std::vector<CrossingEvent> events_;
};

// Crossings of every variable over a recorded trajectory, chronological per
// variable (and globally, since samples are scanned in time order).
std::vector<CrossingEvent> detect_crossings(
    std::span<const TrajectorySample> samples);

// Sum of crossing directions for one variable; intersection-number proxy.
int net_signed_crossings(std::span<const CrossingEvent> events,
                         int variable_index);

// Total crossing count of a run: the elementary logical transitions taken.
long instanton_step_count(std::span<const CrossingEvent> events);

struct RefineOptions {
  double tol = 1e-9;
  int max_iter = 200;
  double eps_c = 1e-6;
  double fd_h = 1e-6;
};

// Polishes a guess to a zero of the integrated (projected) field. Damped
// Newton with ridge regularization, steps projected into the box; when the
// Newton direction stalls the iteration falls back to projected flow steps
// x <- project(x + eta F), which is what moves coordinates whose Jacobian
// column vanishes (the flat long-memory directions) onto their rest faces.
// Index and center counts come from the formula-field Jacobian at the result.
std::optional<CriticalPointReport> refine_critical_point(
    const FlowSystem& system, std::span<const double> guess,
    const RefineOptions& opts = {});

// Eigenvalue stability counts of a Jacobian: index = #{Re > eps_c},
// center_dims = #{|Re| <= eps_c}.
std::pair<int, int> index_of(const Eigen::MatrixXd& jacobian, double eps_c);

struct LyapunovOptions {
  double dt = 0.05;
  double separation = 1e-8;  // shadow-trajectory offset, renormalized each step
};

// Largest Lyapunov exponent by the two-trajectory Benettin method on the
// deterministic flow: a shadow state at a small separation along a random
// direction is co-evolved, the separation renormalized every step and its log
// growth accumulated.
LyapunovEstimate lyapunov_max(const FlowSystem& system,
                              std::span<const double> state0, double horizon,
                              Pcg32& rng, const LyapunovOptions& opts = {});

struct TraceOptions {
  double slow_tol = 1e-3;   // ||F||_inf below this marks a slow sample
  int min_consecutive = 5;  // samples a slow segment must span
  double dedup_dist = 1e-4; // L_inf distance merging consecutive visits
  RefineOptions refine;
};

// Slow-segment detection + refinement over a recorded trajectory: segments
// where the projected field stays small for min_consecutive samples are
// refined to critical points and deduplicated into visit order.
InstantonTrace extract_instanton_trace(const FlowSystem& system,
                                       std::span<const TrajectorySample> samples,
                                       const TraceOptions& opts = {});

std::vector<int> index_sequence(const InstantonTrace& trace);

}  // namespace memflow

#endif
