#ifndef MEMFLOW_TOPOLOGY_HPP
#define MEMFLOW_TOPOLOGY_HPP

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memflow {

enum class Domain { Sphere, Torus, Circle, EuclideanBox };

// Oriented local chart anchored at a point of the domain: to_domain maps local
// coordinates to domain coordinates with to_domain(0) = anchor. Charts of one
// field share an orientation, which is what makes signed indexes well defined.
struct Chart {
  int local_dim = 0;
  std::function<std::vector<double>(std::span<const double>)> to_domain;
};

struct ZeroPoint {
  std::vector<double> location;
  int sign_index = 0;
  std::optional<int> morse_index;
};

// A vector field with an exhaustive, hand-certified zero list. Built-in
// families below cover the desk-scale index-sum checks; there is no general
// zero finder because exhaustiveness cannot be certified for arbitrary fields.
class AnalyticVectorField {
 public:
  using Evaluator =
      std::function<void(std::span<const double>, std::span<double>)>;
  using ChartMaker = std::function<Chart(std::span<const double>)>;

  AnalyticVectorField(std::string name, Domain domain, int coord_dim,
                      Evaluator evaluator, ChartMaker chart_maker,
                      std::vector<std::vector<double>> known_zeros);

  const std::string& name() const { return name_; }
  Domain domain() const { return domain_; }
  int coord_dim() const { return coord_dim_; }
  void eval(std::span<const double> p, std::span<double> out) const;
  Chart chart_at(std::span<const double> anchor) const;
  const std::vector<std::vector<double>>& known_zeros() const {
    return known_zeros_;
  }

 private:
  std::string name_;
  Domain domain_;
  int coord_dim_;
  Evaluator evaluator_;
  ChartMaker chart_maker_;
  std::vector<std::vector<double>> known_zeros_;
};

// Sign of det(J) of the field's chart representation at a nondegenerate zero,
// finite differences of stepsize h. Throws "degenerate zero" when |det| falls
// below the 1e-9 guard, and rejects locations that are not zeros at all.
int zero_index(const AnalyticVectorField& field,
               std::span<const double> location, double h = 1e-6);

// Number of unstable flow directions (eigenvalues of the chart Jacobian with
// positive real part). For gradient descent fields this is the Morse index of
// the potential. Throws "degenerate zero" on eigenvalues inside the 1e-9 band.
int morse_index_at(const AnalyticVectorField& field,
                   std::span<const double> location, double h = 1e-6);

// Sum of zero_index over the exhaustive zero list of a compact-domain field;
// equals the Euler characteristic of the domain for the built-ins.
long poincare_hopf_sum(const AnalyticVectorField& field);

// Sum of (-1)^morse_index over the zero list; the Witten-index style signed
// count, invariant under deformations that keep every zero nondegenerate.
long morse_signed_sum(const AnalyticVectorField& field);

// All known zeros with their signs and Morse indexes.
std::vector<ZeroPoint> classify_zeros(const AnalyticVectorField& field);

// Built-in families. Coordinates: sphere fields live on unit vectors in R^3,
// torus fields in flat (theta, phi) angles, circle fields in a single angle,
// well fields in ordinary Euclidean coordinates.
AnalyticVectorField sphere_height_field(const std::array<double, 3>& tilt,
                                        double chart_rotation = 0.0);
AnalyticVectorField torus_morse_field(double major_radius,
                                      double minor_radius);
AnalyticVectorField circle_rotation_field(double speed = 1.0);
AnalyticVectorField double_well_1d(double tilt = 0.0);
AnalyticVectorField single_well_1d(double tilt = 0.0);
AnalyticVectorField double_well_2d(double tilt = 0.0);

struct FieldCheckRow {
  std::string field;
  double parameter = 0.0;
  int zero_count = 0;
  long signed_sum = 0;
  long expected = 0;
  bool pass = false;
};

// Deformation sweep over the built-in families: sweep parameter values per
// family, each row carrying the signed sum and its expected invariant.
// `which` is one of sphere|torus|circle|doublewell|all.
std::vector<FieldCheckRow> run_field_checks(const std::string& which = "all",
                                            int sweep = 20);

}  // namespace memflow

#endif
