#include "memflow/topology.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace memflow {

namespace {

constexpr double kDegenerateGuard = 1e-9;

std::array<double, 3> cross3(const std::array<double, 3>& a,
                             const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

std::array<double, 3> normalize3(std::array<double, 3> a) {
  double n = std::sqrt(dot3(a, a));
  if (!(n > 0.0)) throw std::invalid_argument("cannot normalize zero vector");
  for (double& c : a) c /= n;
  return a;
}

// Chart Jacobian of the field at an anchor: local representation
// g_j(u) = F(to_domain(u)) . E_j with the frame E_j = d(to_domain)/du_j at 0,
// differentiated centrally with stepsize h.
Eigen::MatrixXd chart_jacobian(const AnalyticVectorField& field,
                               std::span<const double> location, double h) {
  Chart chart = field.chart_at(location);
  int m = chart.local_dim;
  int d = field.coord_dim();

  std::vector<double> f(d);
  field.eval(location, f);
  double residual = 0.0;
  for (double c : f) residual = std::max(residual, std::abs(c));
  if (residual > 1e-9)
    throw std::invalid_argument("location is not a zero of the field");

  std::vector<std::vector<double>> frame(m);
  std::vector<double> u(m, 0.0);
  for (int k = 0; k < m; ++k) {
    u[k] = h;
    std::vector<double> plus = chart.to_domain(u);
    u[k] = -h;
    std::vector<double> minus = chart.to_domain(u);
    u[k] = 0.0;
    frame[k].resize(d);
    for (int j = 0; j < d; ++j)
      frame[k][j] = (plus[j] - minus[j]) / (2.0 * h);
  }

  auto local_field = [&](const std::vector<double>& uu, int j) {
    std::vector<double> p = chart.to_domain(uu);
    std::vector<double> fp(d);
    field.eval(p, fp);
    double g = 0.0;
    for (int c = 0; c < d; ++c) g += fp[c] * frame[j][c];
    return g;
  };

  Eigen::MatrixXd jac(m, m);
  for (int k = 0; k < m; ++k) {
    u[k] = h;
    std::vector<double> gplus(m);
    for (int j = 0; j < m; ++j) gplus[j] = local_field(u, j);
    u[k] = -h;
    for (int j = 0; j < m; ++j) jac(j, k) = (gplus[j] - local_field(u, j)) / (2.0 * h);
    u[k] = 0.0;
  }
  return jac;
}

Chart translation_chart(std::span<const double> anchor) {
  std::vector<double> base(anchor.begin(), anchor.end());
  int m = static_cast<int>(base.size());
  return {m, [base](std::span<const double> u) {
            std::vector<double> p(base);
            for (size_t i = 0; i < p.size(); ++i) p[i] += u[i];
            return p;
          }};
}

}  // namespace

AnalyticVectorField::AnalyticVectorField(
    std::string name, Domain domain, int coord_dim, Evaluator evaluator,
    ChartMaker chart_maker, std::vector<std::vector<double>> known_zeros)
    : name_(std::move(name)),
      domain_(domain),
      coord_dim_(coord_dim),
      evaluator_(std::move(evaluator)),
      chart_maker_(std::move(chart_maker)),
      known_zeros_(std::move(known_zeros)) {
  if (coord_dim_ < 1) throw std::invalid_argument("coord_dim must be >= 1");
  for (const auto& z : known_zeros_)
    if (static_cast<int>(z.size()) != coord_dim_)
      throw std::invalid_argument("zero coordinate dimension mismatch");
}

void AnalyticVectorField::eval(std::span<const double> p,
                               std::span<double> out) const {
  evaluator_(p, out);
}

Chart AnalyticVectorField::chart_at(std::span<const double> anchor) const {
  return chart_maker_(anchor);
}

int zero_index(const AnalyticVectorField& field,
               std::span<const double> location, double h) {
  Eigen::MatrixXd jac = chart_jacobian(field, location, h);
  double det = jac.determinant();
  if (!(std::abs(det) > kDegenerateGuard))
    throw std::runtime_error("degenerate zero");
  return det > 0.0 ? 1 : -1;
}

int morse_index_at(const AnalyticVectorField& field,
                   std::span<const double> location, double h) {
  Eigen::MatrixXd jac = chart_jacobian(field, location, h);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(jac, false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigen-solver failure");
  int unstable = 0;
  for (Eigen::Index i = 0; i < jac.rows(); ++i) {
    double re = solver.eigenvalues()(i).real();
    if (std::abs(re) <= kDegenerateGuard)
      throw std::runtime_error("degenerate zero");
    if (re > 0.0) ++unstable;
  }
  return unstable;
}

long poincare_hopf_sum(const AnalyticVectorField& field) {
  if (field.domain() == Domain::EuclideanBox)
    throw std::invalid_argument(
        "poincare_hopf_sum requires a compact domain field");
  long sum = 0;
  for (const auto& z : field.known_zeros()) sum += zero_index(field, z);
  return sum;
}

long morse_signed_sum(const AnalyticVectorField& field) {
  long sum = 0;
  for (const auto& z : field.known_zeros())
    sum += morse_index_at(field, z) % 2 == 0 ? 1 : -1;
  return sum;
}

std::vector<ZeroPoint> classify_zeros(const AnalyticVectorField& field) {
  std::vector<ZeroPoint> zeros;
  zeros.reserve(field.known_zeros().size());
  for (const auto& z : field.known_zeros()) {
    ZeroPoint zp;
    zp.location = z;
    zp.sign_index = zero_index(field, z);
    zp.morse_index = morse_index_at(field, z);
    zeros.push_back(std::move(zp));
  }
  return zeros;
}

AnalyticVectorField sphere_height_field(const std::array<double, 3>& tilt,
                                        double chart_rotation) {
  double mag = std::sqrt(dot3(tilt, tilt));
  if (!(mag > kDegenerateGuard))
    throw std::invalid_argument("sphere height field needs a nonzero tilt");
  std::array<double, 3> axis = normalize3(tilt);

  auto evaluator = [tilt](std::span<const double> p, std::span<double> out) {
    std::array<double, 3> q{p[0], p[1], p[2]};
    double ap = dot3(tilt, q);
    for (int i = 0; i < 3; ++i) out[i] = tilt[i] - ap * q[i];
  };

  // Oriented tangent chart: b1 x b2 = outward normal, so every chart carries
  // the standard orientation of the sphere. chart_rotation spins the tangent
  // frame, giving a genuinely different chart with the same orientation.
  auto chart_maker = [chart_rotation](std::span<const double> anchor) {
    std::array<double, 3> p0 = normalize3({anchor[0], anchor[1], anchor[2]});
    int least = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(p0[i]) < std::abs(p0[least])) least = i;
    std::array<double, 3> seed{0.0, 0.0, 0.0};
    seed[least] = 1.0;
    double proj = dot3(seed, p0);
    std::array<double, 3> t{seed[0] - proj * p0[0], seed[1] - proj * p0[1],
                            seed[2] - proj * p0[2]};
    t = normalize3(t);
    std::array<double, 3> s = cross3(p0, t);
    double c = std::cos(chart_rotation), n = std::sin(chart_rotation);
    std::array<double, 3> b1{c * t[0] + n * s[0], c * t[1] + n * s[1],
                             c * t[2] + n * s[2]};
    std::array<double, 3> b2 = cross3(p0, b1);
    return Chart{2, [p0, b1, b2](std::span<const double> u) {
                   std::array<double, 3> q{
                       p0[0] + u[0] * b1[0] + u[1] * b2[0],
                       p0[1] + u[0] * b1[1] + u[1] * b2[1],
                       p0[2] + u[0] * b1[2] + u[1] * b2[2]};
                   q = normalize3(q);
                   return std::vector<double>{q[0], q[1], q[2]};
                 }};
  };

  std::vector<std::vector<double>> zeros{
      {axis[0], axis[1], axis[2]}, {-axis[0], -axis[1], -axis[2]}};
  return AnalyticVectorField("sphere-height", Domain::Sphere, 3,
                             std::move(evaluator), std::move(chart_maker),
                             std::move(zeros));
}

AnalyticVectorField torus_morse_field(double major_radius,
                                      double minor_radius) {
  if (!(minor_radius > 0.0) || !(major_radius > minor_radius))
    throw std::invalid_argument("torus radii must satisfy 0 < r < R");
  double R = major_radius, r = minor_radius;

  // Gradient descent of the height h(theta, phi) = (R + r cos phi) sin theta
  // of a torus standing on edge, in the flat angle chart.
  auto evaluator = [R, r](std::span<const double> p, std::span<double> out) {
    double theta = p[0], phi = p[1];
    out[0] = -(R + r * std::cos(phi)) * std::cos(theta);
    out[1] = r * std::sin(phi) * std::sin(theta);
  };

  const double half_pi = std::numbers::pi / 2.0;
  std::vector<std::vector<double>> zeros{
      {half_pi, 0.0},                    // maximum of h
      {half_pi, std::numbers::pi},       // saddle
      {-half_pi, 0.0},                   // minimum
      {-half_pi, std::numbers::pi}};     // saddle
  return AnalyticVectorField("torus-morse", Domain::Torus, 2,
                             std::move(evaluator), translation_chart,
                             std::move(zeros));
}

AnalyticVectorField circle_rotation_field(double speed) {
  if (std::abs(speed) <= kDegenerateGuard)
    throw std::invalid_argument("rotation speed must be nonzero");
  auto evaluator = [speed](std::span<const double>, std::span<double> out) {
    out[0] = speed;
  };
  return AnalyticVectorField("circle-rotation", Domain::Circle, 1,
                             std::move(evaluator), translation_chart, {});
}

namespace {

// Roots of x^3 - x = t, the rest points of the tilted double well; requires
// the three-root regime |t| < 2/(3*sqrt(3)).
std::vector<double> cubic_roots(double tilt) {
  constexpr double kFoldTilt = 0.3849001794597505;  // 2 / (3*sqrt(3))
  if (!(std::abs(tilt) < kFoldTilt - 1e-6))
    throw std::invalid_argument("tilt collapses the double well");
  std::vector<double> roots;
  for (double x : {-1.2, 0.0, 1.2}) {
    for (int iter = 0; iter < 100; ++iter) {
      double fx = x * x * x - x - tilt;
      double dfx = 3.0 * x * x - 1.0;
      double step = fx / dfx;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    roots.push_back(x);
  }
  if (!(roots[0] < roots[1] && roots[1] < roots[2]))
    throw std::runtime_error("double-well root separation failed");
  return roots;
}

}  // namespace

AnalyticVectorField double_well_1d(double tilt) {
  auto evaluator = [tilt](std::span<const double> p, std::span<double> out) {
    out[0] = p[0] - p[0] * p[0] * p[0] + tilt;
  };
  std::vector<std::vector<double>> zeros;
  for (double root : cubic_roots(tilt)) zeros.push_back({root});
  return AnalyticVectorField("double-well-1d", Domain::EuclideanBox, 1,
                             std::move(evaluator), translation_chart,
                             std::move(zeros));
}

AnalyticVectorField single_well_1d(double tilt) {
  auto evaluator = [tilt](std::span<const double> p, std::span<double> out) {
    out[0] = tilt - p[0];
  };
  return AnalyticVectorField("single-well-1d", Domain::EuclideanBox, 1,
                             std::move(evaluator), translation_chart,
                             {{tilt}});
}

AnalyticVectorField double_well_2d(double tilt) {
  auto evaluator = [tilt](std::span<const double> p, std::span<double> out) {
    out[0] = p[0] - p[0] * p[0] * p[0] + tilt;
    out[1] = -p[1];
  };
  std::vector<std::vector<double>> zeros;
  for (double root : cubic_roots(tilt)) zeros.push_back({root, 0.0});
  return AnalyticVectorField("double-well-2d", Domain::EuclideanBox, 2,
                             std::move(evaluator), translation_chart,
                             std::move(zeros));
}

std::vector<FieldCheckRow> run_field_checks(const std::string& which,
                                            int sweep) {
  if (sweep < 1) throw std::invalid_argument("sweep must be >= 1");
  bool all = which == "all";
  if (!all && which != "sphere" && which != "torus" && which != "circle" &&
      which != "doublewell")
    throw std::invalid_argument("unknown field name: " + which);

  std::vector<FieldCheckRow> rows;
  auto frac = [sweep](int k) {
    return sweep > 1 ? static_cast<double>(k) / (sweep - 1) : 0.0;
  };
  auto add = [&rows](const std::string& name, double parameter,
                     const AnalyticVectorField& field, long sum,
                     long expected) {
    rows.push_back({name, parameter,
                    static_cast<int>(field.known_zeros().size()), sum, expected,
                    sum == expected});
  };

  if (all || which == "sphere") {
    for (int k = 0; k < sweep; ++k) {
      double tau = 0.2 + 2.7 * frac(k);
      double scale = 0.5 + 1.5 * frac(k);
      std::array<double, 3> tilt{scale * std::sin(tau),
                                 scale * 0.3 * std::sin(2.0 * tau),
                                 scale * std::cos(tau)};
      auto field = sphere_height_field(tilt);
      add("sphere", tau, field, poincare_hopf_sum(field), 2);
    }
  }
  if (all || which == "torus") {
    for (int k = 0; k < sweep; ++k) {
      double r = 0.15 + 0.7 * frac(k);
      auto field = torus_morse_field(1.0, r);
      add("torus", r, field, poincare_hopf_sum(field), 0);
    }
  }
  if (all || which == "circle") {
    for (int k = 0; k < sweep; ++k) {
      double speed = 0.5 + 0.25 * k;
      auto field = circle_rotation_field(speed);
      add("circle", speed, field, poincare_hopf_sum(field), 0);
    }
  }
  if (all || which == "doublewell") {
    for (int k = 0; k < sweep; ++k) {
      double tilt = -0.3 + 0.6 * frac(k);
      auto well1 = double_well_1d(tilt);
      add("doublewell-1d", tilt, well1, morse_signed_sum(well1), 1);
      auto well2 = double_well_2d(tilt);
      add("doublewell-2d", tilt, well2, morse_signed_sum(well2), 1);
      auto single = single_well_1d(tilt);
      add("singlewell-1d", tilt, single, morse_signed_sum(single), 1);
    }
  }
  return rows;
}

}  // namespace memflow
