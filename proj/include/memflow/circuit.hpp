#ifndef MEMFLOW_CIRCUIT_HPP
#define MEMFLOW_CIRCUIT_HPP

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "memflow/cnf.hpp"
#include "memflow/flow.hpp"

namespace memflow {

// Tunable rates and thresholds of the gate dynamics. Defaults are a
// known-stable operating point for 3-SAT near clause ratio 4.25 and are echoed
// into every result record.
struct CircuitParams {
  double alpha = 5.0;     // long-memory rate
  double beta = 20.0;     // short-memory rate
  double gamma = 0.25;    // short-memory threshold, in (0,1)
  double delta = 0.05;    // long-memory threshold, in (0,delta) < gamma
  double epsilon = 1e-3;  // short-memory floor
  double zeta = 0.1;      // rigidity weight
  double xl_max = 0.0;    // long-memory cap; <= 0 means "use 1e4 * M"

  void validate() const;
  double effective_xl_max(int num_clauses) const;

  // Flat key=value block, one pair per line, round-trip exact decimals.
  std::string serialize() const;
  static CircuitParams deserialize(const std::string& text);
};

// Phase-space point: n terminal voltages in [-1,1], M short memories in [0,1],
// M long memories in [1, xl_max], stored flat as [v | xs | xl].
struct SolverState {
  std::vector<double> x;
  double t = 0.0;

  double v(int i) const { return x[i]; }
  double& v(int i) { return x[i]; }
};

// The flow vector field built from a CNF formula: one self-organizing gate per
// clause, coupled through short- and long-term memory. Implements FlowSystem;
// eval() is the box-projected field the integrators follow.
class CircuitSystem : public FlowSystem {
 public:
  CircuitSystem(CnfFormula formula, CircuitParams params = {});

  const CnfFormula& formula() const { return formula_; }
  const CircuitParams& params() const { return params_; }
  int num_variables() const { return n_; }
  int num_clauses() const { return m_; }
  int dim() const override { return n_ + 2 * m_; }

  int v_offset() const { return 0; }
  int xs_offset() const { return n_; }
  int xl_offset() const { return n_ + m_; }

  double lower_bound(int i) const override;
  double upper_bound(int i) const override;

  // Gate satisfaction degree C_m(v) = 0.5 * min over literals of (1 - q*v),
  // in [0,1]; 0 iff some literal sits at its satisfying rail.
  double clause_value(int clause_index, std::span<const double> v) const;

  void eval(std::span<const double> x, std::span<double> dxdt) const override;
  void eval_formula(std::span<const double> x,
                    std::span<double> dxdt) const override;
  void project(std::span<double> x) const override;

  SolverState make_state(std::vector<double> flat, double t = 0.0) const;
  void validate_state(const SolverState& state) const;

 private:
  void raw_field(std::span<const double> x, std::span<double> dxdt) const;

  CnfFormula formula_;
  CircuitParams params_;
  int n_;
  int m_;
  double xl_cap_;
  // per-clause flattened literals: 0-based variable and +-1 sign as double
  std::vector<int> clause_begin_;
  std::vector<int> lit_var_;
  std::vector<double> lit_sign_;
};

// Public op wrappers matching the module contract; they validate the state box
// before delegating to the FlowSystem methods.
std::vector<double> flow_field(const CircuitSystem& system,
                               const SolverState& state);
SolverState clamp_state(const CircuitSystem& system, SolverState state);
Eigen::MatrixXd jacobian_fd(const CircuitSystem& system,
                            const SolverState& state, double h = 1e-6);
Assignment digital_readout(const CircuitSystem& system,
                           const SolverState& state);
int state_defects(const CircuitSystem& system, const SolverState& state);

}  // namespace memflow

#endif
