#ifndef MEMFLOW_FLOW_HPP
#define MEMFLOW_FLOW_HPP

#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace memflow {

// A continuous-time system dx/dt = F(x), optionally confined to a coordinate
// box. eval() is the field the trajectories follow (for boxed systems: the
// projected field, zero where the raw drift points out of the box);
// eval_formula() is the unprojected formula field used for Jacobians. The two
// coincide on the interior and for unconstrained systems.
class FlowSystem {
 public:
  virtual ~FlowSystem() = default;

  virtual int dim() const = 0;
  virtual void eval(std::span<const double> x, std::span<double> dxdt) const = 0;

  virtual void eval_formula(std::span<const double> x,
                            std::span<double> dxdt) const {
    eval(x, dxdt);
  }

  // Projects a candidate state into the admissible box; identity by default.
  virtual void project(std::span<double> x) const {}

  virtual double lower_bound(int) const {
    return -std::numeric_limits<double>::infinity();
  }
  virtual double upper_bound(int) const {
    return std::numeric_limits<double>::infinity();
  }
};

// Finite-difference Jacobian of the formula field: central differences of
// stepsize h, falling back to one-sided differences where x +- h*e_k would
// leave the box. Kinks of the field yield subgradient values.
Eigen::MatrixXd fd_jacobian(const FlowSystem& system,
                            std::span<const double> x, double h = 1e-6);

struct Rk4Workspace {
  std::vector<double> k1, k2, k3, k4, tmp;

  explicit Rk4Workspace(int d) : k1(d), k2(d), k3(d), k4(d), tmp(d) {}
};

// Classical RK4 update of x in place, followed by box projection. Stage states
// are left unprojected so the stage arithmetic stays smooth. Throws on a
// non-finite increment, naming the coordinate.
void rk4_in_place(const FlowSystem& system, std::vector<double>& x, double dt,
                  Rk4Workspace& w);

// Convenience adapter for test fields given as plain callables.
class CallbackFlow : public FlowSystem {
 public:
  using Fn = void (*)(std::span<const double>, std::span<double>);

  CallbackFlow(int dim, Fn fn) : dim_(dim), fn_(fn) {}
  int dim() const override { return dim_; }
  void eval(std::span<const double> x, std::span<double> dxdt) const override {
    fn_(x, dxdt);
  }

 private:
  int dim_;
  Fn fn_;
};

}  // namespace memflow

#endif
