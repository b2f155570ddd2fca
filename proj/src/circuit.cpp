#include "memflow/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace memflow {

void CircuitParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("alpha and beta must be positive");
  if (!(0.0 < delta && delta < gamma && gamma < 1.0))
    throw std::invalid_argument("need 0 < delta < gamma < 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (zeta < 0.0) throw std::invalid_argument("zeta must be nonnegative");
  if (xl_max > 0.0 && xl_max <= 1.0)
    throw std::invalid_argument("xl_max must exceed 1");
}

double CircuitParams::effective_xl_max(int num_clauses) const {
  return xl_max > 0.0 ? xl_max : 1e4 * num_clauses;
}

namespace {
std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string CircuitParams::serialize() const {
  std::ostringstream out;
  out << "alpha=" << exact(alpha) << '\n'
      << "beta=" << exact(beta) << '\n'
      << "gamma=" << exact(gamma) << '\n'
      << "delta=" << exact(delta) << '\n'
      << "epsilon=" << exact(epsilon) << '\n'
      << "zeta=" << exact(zeta) << '\n'
      << "xl_max=" << exact(xl_max) << '\n';
  return out.str();
}

CircuitParams CircuitParams::deserialize(const std::string& text) {
  CircuitParams p;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("bad params line: " + line);
    std::string key = line.substr(0, eq);
    double value = std::stod(line.substr(eq + 1));
    if (key == "alpha")
      p.alpha = value;
    else if (key == "beta")
      p.beta = value;
    else if (key == "gamma")
      p.gamma = value;
    else if (key == "delta")
      p.delta = value;
    else if (key == "epsilon")
      p.epsilon = value;
    else if (key == "zeta")
      p.zeta = value;
    else if (key == "xl_max")
      p.xl_max = value;
    else
      throw std::invalid_argument("unknown params key: " + key);
  }
  return p;
}

CircuitSystem::CircuitSystem(CnfFormula formula, CircuitParams params)
    : formula_(std::move(formula)),
      params_(params),
      n_(formula_.num_variables),
      m_(static_cast<int>(formula_.clauses.size())) {
  params_.validate();
  if (m_ < 1) throw std::invalid_argument("formula has no clauses");
  xl_cap_ = params_.effective_xl_max(m_);
  clause_begin_.reserve(m_ + 1);
  clause_begin_.push_back(0);
  for (const Clause& clause : formula_.clauses) {
    for (const Literal& lit : clause.literals) {
      if (lit.variable < 1 || lit.variable > n_)
        throw std::invalid_argument("literal outside variable range");
      lit_var_.push_back(lit.variable - 1);
      lit_sign_.push_back(static_cast<double>(lit.sign));
    }
    clause_begin_.push_back(static_cast<int>(lit_var_.size()));
  }
}

double CircuitSystem::lower_bound(int i) const {
  if (i < n_) return -1.0;
  if (i < n_ + m_) return 0.0;
  return 1.0;
}

double CircuitSystem::upper_bound(int i) const {
  if (i < n_) return 1.0;
  if (i < n_ + m_) return 1.0;
  return xl_cap_;
}

double CircuitSystem::clause_value(int clause_index,
                                   std::span<const double> v) const {
  if (clause_index < 0 || clause_index >= m_)
    throw std::out_of_range("clause index out of range");
  double min_gap = std::numeric_limits<double>::infinity();
  for (int p = clause_begin_[clause_index]; p < clause_begin_[clause_index + 1];
       ++p) {
    double gap = 1.0 - lit_sign_[p] * v[lit_var_[p]];
    if (gap < min_gap) min_gap = gap;
  }
  return 0.5 * min_gap;
}

void CircuitSystem::raw_field(std::span<const double> x,
                              std::span<double> dxdt) const {
  const double* v = x.data();
  const double* xs = x.data() + n_;
  const double* xl = x.data() + n_ + m_;
  double* dv = dxdt.data();
  double* dxs = dxdt.data() + n_;
  double* dxl = dxdt.data() + n_ + m_;

  std::fill(dv, dv + n_, 0.0);

  for (int m = 0; m < m_; ++m) {
    int begin = clause_begin_[m];
    int end = clause_begin_[m + 1];
    int size = end - begin;

    // smallest and second-smallest literal gaps; first position wins ties
    double min1 = std::numeric_limits<double>::infinity();
    double min2 = std::numeric_limits<double>::infinity();
    int argmin = begin;
    for (int p = begin; p < end; ++p) {
      double gap = 1.0 - lit_sign_[p] * v[lit_var_[p]];
      if (gap < min1) {
        min2 = min1;
        min1 = gap;
        argmin = p;
      } else if (gap < min2) {
        min2 = gap;
      }
    }
    double c = 0.5 * min1;

    double grad_weight = xl[m] * xs[m];
    double rigid_weight = (1.0 + params_.zeta * xl[m]) * (1.0 - xs[m]);
    for (int p = begin; p < end; ++p) {
      // min over the other literals; empty set (unary clause) counts as 1
      double others = (p == argmin) ? min2 : min1;
      if (size == 1) others = 1.0;
      double g = 0.5 * lit_sign_[p] * others;
      double r = (p == argmin) ? 0.5 * (lit_sign_[p] - v[lit_var_[p]]) : 0.0;
      dv[lit_var_[p]] += grad_weight * g + rigid_weight * r;
    }

    dxs[m] = params_.beta * (xs[m] + params_.epsilon) * (c - params_.gamma);
    dxl[m] = params_.alpha * (c - params_.delta);
  }
}

void CircuitSystem::eval_formula(std::span<const double> x,
                                 std::span<double> dxdt) const {
  raw_field(x, dxdt);
}

void CircuitSystem::eval(std::span<const double> x,
                         std::span<double> dxdt) const {
  raw_field(x, dxdt);
  // active-set projection: drift pointing out of the box is cancelled, which
  // makes clamped rest states true zeros of the integrated field
  int d = dim();
  for (int i = 0; i < d; ++i) {
    if ((x[i] <= lower_bound(i) && dxdt[i] < 0.0) ||
        (x[i] >= upper_bound(i) && dxdt[i] > 0.0))
      dxdt[i] = 0.0;
  }
}

void CircuitSystem::project(std::span<double> x) const {
  int d = dim();
  for (int i = 0; i < d; ++i)
    x[i] = std::clamp(x[i], lower_bound(i), upper_bound(i));
}

SolverState CircuitSystem::make_state(std::vector<double> flat,
                                      double t) const {
  if (static_cast<int>(flat.size()) != dim())
    throw std::invalid_argument("state dimension mismatch");
  return SolverState{std::move(flat), t};
}

void CircuitSystem::validate_state(const SolverState& state) const {
  if (static_cast<int>(state.x.size()) != dim())
    throw std::invalid_argument("state dimension mismatch");
  for (int i = 0; i < dim(); ++i)
    if (!(state.x[i] >= lower_bound(i) && state.x[i] <= upper_bound(i)))
      throw std::invalid_argument("state component " + std::to_string(i) +
                                  " outside its box");
}

std::vector<double> flow_field(const CircuitSystem& system,
                               const SolverState& state) {
  system.validate_state(state);
  std::vector<double> dxdt(system.dim());
  system.eval(state.x, dxdt);
  return dxdt;
}

SolverState clamp_state(const CircuitSystem& system, SolverState state) {
  system.project(state.x);
  return state;
}

Eigen::MatrixXd jacobian_fd(const CircuitSystem& system,
                            const SolverState& state, double h) {
  return fd_jacobian(system, state.x, h);
}

Assignment digital_readout(const CircuitSystem& system,
                           const SolverState& state) {
  Assignment out(system.num_variables());
  for (int i = 0; i < system.num_variables(); ++i) out[i] = state.v(i) > 0.0;
  return out;
}

int state_defects(const CircuitSystem& system, const SolverState& state) {
  return count_defects(system.formula(), digital_readout(system, state));
}

}  // namespace memflow
