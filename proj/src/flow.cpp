#include "memflow/flow.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace memflow {

Eigen::MatrixXd fd_jacobian(const FlowSystem& system, std::span<const double> x,
                            double h) {
  int d = system.dim();
  Eigen::MatrixXd jac(d, d);
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> fplus(d), fminus(d);
  for (int k = 0; k < d; ++k) {
    double xk = x[k];
    bool can_up = xk + h <= system.upper_bound(k);
    bool can_down = xk - h >= system.lower_bound(k);
    if (!can_up && !can_down) {
      // box thinner than h in this coordinate; freeze the column
      jac.col(k).setZero();
      continue;
    }
    double hi = can_up ? xk + h : xk;
    double lo = can_down ? xk - h : xk;
    probe[k] = hi;
    system.eval_formula(probe, fplus);
    probe[k] = lo;
    system.eval_formula(probe, fminus);
    probe[k] = xk;
    double denom = hi - lo;
    for (int i = 0; i < d; ++i) jac(i, k) = (fplus[i] - fminus[i]) / denom;
  }
  return jac;
}

void rk4_in_place(const FlowSystem& system, std::vector<double>& x, double dt,
                  Rk4Workspace& w) {
  int d = system.dim();
  system.eval(x, w.k1);
  for (int i = 0; i < d; ++i) w.tmp[i] = x[i] + 0.5 * dt * w.k1[i];
  system.eval(w.tmp, w.k2);
  for (int i = 0; i < d; ++i) w.tmp[i] = x[i] + 0.5 * dt * w.k2[i];
  system.eval(w.tmp, w.k3);
  for (int i = 0; i < d; ++i) w.tmp[i] = x[i] + dt * w.k3[i];
  system.eval(w.tmp, w.k4);
  for (int i = 0; i < d; ++i)
    w.tmp[i] = (dt / 6.0) * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
  for (int i = 0; i < d; ++i)
    if (!std::isfinite(w.tmp[i]))
      throw std::runtime_error(
          "integration fault: non-finite derivative at coordinate " +
          std::to_string(i));
  for (int i = 0; i < d; ++i) x[i] += w.tmp[i];
  system.project(x);
}

}  // namespace memflow
