#ifndef MEMFLOW_EVENTS_HPP
#define MEMFLOW_EVENTS_HPP

#include <vector>

namespace memflow {

// One digital-threshold crossing of a terminal voltage: linear-interpolated
// time, 0-based variable index (DIMACS-facing outputs add 1), direction
// +1 = false->true, -1 = true->false.
struct CrossingEvent {
  double t;
  int variable;
  int direction;
};

// A refined zero of the flow with its linear-stability counts at eps_c:
// index = eigenvalues with real part > eps_c, center_dims = |real part| <= eps_c.
struct CriticalPointReport {
  std::vector<double> location;
  double residual = 0.0;
  int index = 0;
  int center_dims = 0;
};

struct CriticalVisit {
  double t;  // trajectory time at which the slow segment was detected
  CriticalPointReport report;
};

// Ordered critical-point visits along one run; step_count counts the
// transitions between consecutive distinct visits.
struct InstantonTrace {
  std::vector<CriticalVisit> visits;
  int step_count = 0;
  bool monotone = true;  // indexes never increase along the visit order
};

struct LyapunovEstimate {
  double lambda_max = 0.0;
  double horizon = 0.0;
};

}  // namespace memflow

#endif
