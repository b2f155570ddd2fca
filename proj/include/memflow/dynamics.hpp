#ifndef MEMFLOW_DYNAMICS_HPP
#define MEMFLOW_DYNAMICS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "memflow/circuit.hpp"
#include "memflow/cnf.hpp"
#include "memflow/events.hpp"
#include "memflow/rng.hpp"

namespace memflow {

enum class StepMethod { Rk4, EulerMaruyama };

struct IntegratorConfig {
  double dt = 0.05;
  double t_max = 1e4;
  int record_stride = 10;
  // time the digital readout must stay satisfying before Solved; < 0 means 10*dt
  double persistence_window = -1.0;
  StepMethod method = StepMethod::Rk4;  // noise > 0 forces EulerMaruyama
  bool collect_trace = false;  // extract slow-point visits after the run

  double effective_persistence() const {
    return persistence_window < 0.0 ? 10.0 * dt : persistence_window;
  }
  void validate() const;
};

enum class NoiseCoupling { VoltagesOnly, AllCoordinates };

struct NoiseConfig {
  double theta = 0.0;
  NoiseCoupling coupling = NoiseCoupling::VoltagesOnly;
};

struct TrajectorySample {
  double t;
  SolverState state;
  int defects;
};

enum class Verdict { Solved, TimedOut };

struct RunOutcome {
  Verdict verdict = Verdict::TimedOut;
  std::optional<Assignment> assignment;
  std::optional<double> t_solved;
  long steps_taken = 0;
  std::vector<TrajectorySample> samples;
  std::vector<CrossingEvent> crossings;
  std::optional<InstantonTrace> trace;
  int defects_initial = 0;
};

// One classical RK4 step of the projected field followed by box clamping.
// Throws if the derivative turns non-finite, naming the coordinate.
SolverState step_rk4(const CircuitSystem& system, const SolverState& state,
                     double dt);

// Euler-Maruyama step x' = clamp(x + dt F + sqrt(2 theta dt) eta) with
// independent standard Gaussians on the coupled coordinates. theta = 0 takes
// the plain Euler path and consumes no randomness.
SolverState step_euler_maruyama(const CircuitSystem& system,
                                const SolverState& state, double dt,
                                const NoiseConfig& noise, Pcg32& rng);

// Runs until the readout stays satisfying for the persistence window (Solved)
// or t_max elapses (TimedOut). Records samples every record_stride steps plus
// the initial and final states, and streams crossing events at step resolution.
RunOutcome integrate_until(const CircuitSystem& system, SolverState state,
                           const IntegratorConfig& config,
                           const NoiseConfig& noise, Pcg32& rng);

// v uniform in (-1,1) from rng; xs = 0.5 and xl = 1 fixed so restarts differ
// only through voltage randomness.
SolverState default_initial_state(const CircuitSystem& system, Pcg32& rng);

}  // namespace memflow

#endif
