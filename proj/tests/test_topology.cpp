#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "memflow/topology.hpp"

using namespace memflow;

namespace {

// 1-D field with an isolated but degenerate zero at the origin.
AnalyticVectorField parabolic_field() {
  auto evaluator = [](std::span<const double> p, std::span<double> out) {
    out[0] = p[0] * p[0];
  };
  auto chart_maker = [](std::span<const double> anchor) {
    double base = anchor[0];
    return Chart{1, [base](std::span<const double> u) {
                   return std::vector<double>{base + u[0]};
                 }};
  };
  return AnalyticVectorField("parabolic", Domain::EuclideanBox, 1, evaluator,
                             chart_maker, {{0.0}});
}

}  // namespace

TEST_CASE("zero_index signs on the 1-d double well") {
  AnalyticVectorField well = double_well_1d(0.0);
  REQUIRE(well.known_zeros().size() == 3);
  CHECK(zero_index(well, std::vector<double>{-1.0}) == -1);
  CHECK(zero_index(well, std::vector<double>{0.0}) == +1);
  CHECK(zero_index(well, std::vector<double>{1.0}) == -1);
  CHECK(morse_index_at(well, std::vector<double>{0.0}) == 1);
  CHECK(morse_index_at(well, std::vector<double>{1.0}) == 0);
  CHECK(morse_signed_sum(well) == 1);
  CHECK_THROWS_AS(poincare_hopf_sum(well), std::invalid_argument);
}

TEST_CASE("zero_index rejects non-zero locations and degenerate zeros") {
  AnalyticVectorField well = double_well_1d(0.0);
  CHECK_THROWS_AS(zero_index(well, std::vector<double>{0.5}),
                  std::invalid_argument);

  AnalyticVectorField flatzero = parabolic_field();
  CHECK_THROWS_WITH_AS(zero_index(flatzero, std::vector<double>{0.0}),
                       "degenerate zero", std::runtime_error);
  CHECK_THROWS_WITH_AS(morse_index_at(flatzero, std::vector<double>{0.0}),
                       "degenerate zero", std::runtime_error);
}

TEST_CASE("sphere height field sums to the euler characteristic 2") {
  AnalyticVectorField field = sphere_height_field({0.0, 0.0, 1.0});
  REQUIRE(field.known_zeros().size() == 2);
  CHECK(zero_index(field, field.known_zeros()[0]) == +1);
  CHECK(zero_index(field, field.known_zeros()[1]) == +1);
  CHECK(poincare_hopf_sum(field) == 2);

  std::vector<ZeroPoint> zeros = classify_zeros(field);
  REQUIRE(zeros.size() == 2);
  CHECK(zeros[0].morse_index == 0);  // top of the height: flow sink
  CHECK(zeros[1].morse_index == 2);  // bottom: flow source
  CHECK(morse_signed_sum(field) == 2);

  AnalyticVectorField tilted = sphere_height_field({0.3, -0.2, 0.9});
  CHECK(poincare_hopf_sum(tilted) == 2);
  // zeros moved with the tilt: they lie on the tilt axis
  double norm = std::sqrt(0.3 * 0.3 + 0.2 * 0.2 + 0.9 * 0.9);
  CHECK(tilted.known_zeros()[0][0] == doctest::Approx(0.3 / norm));
  CHECK(tilted.known_zeros()[0][2] == doctest::Approx(0.9 / norm));

  CHECK_THROWS_AS(sphere_height_field({0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("sphere indexes do not depend on the chart") {
  AnalyticVectorField plain = sphere_height_field({0.4, 0.1, 0.8}, 0.0);
  AnalyticVectorField spun = sphere_height_field({0.4, 0.1, 0.8}, 0.7);
  for (size_t z = 0; z < plain.known_zeros().size(); ++z) {
    CHECK(zero_index(plain, plain.known_zeros()[z]) ==
          zero_index(spun, spun.known_zeros()[z]));
    CHECK(morse_index_at(plain, plain.known_zeros()[z]) ==
          morse_index_at(spun, spun.known_zeros()[z]));
  }
}

TEST_CASE("torus morse field has the classical 2-2 structure summing to 0") {
  AnalyticVectorField field = torus_morse_field(1.0, 0.4);
  REQUIRE(field.known_zeros().size() == 4);
  CHECK(poincare_hopf_sum(field) == 0);
  CHECK(morse_signed_sum(field) == 0);

  std::vector<int> morse;
  for (const ZeroPoint& z : classify_zeros(field))
    morse.push_back(*z.morse_index);
  std::sort(morse.begin(), morse.end());
  CHECK(morse == std::vector<int>{0, 1, 1, 2});

  CHECK_THROWS_AS(torus_morse_field(1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(torus_morse_field(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("circle rotation field has no zeros, matching chi = 0") {
  AnalyticVectorField field = circle_rotation_field(0.75);
  CHECK(field.known_zeros().empty());
  CHECK(poincare_hopf_sum(field) == 0);
  CHECK_THROWS_AS(circle_rotation_field(0.0), std::invalid_argument);
}

TEST_CASE("tilting the wells moves zeros but not the signed sum") {
  for (double tilt : {-0.3, -0.1, 0.0, 0.1, 0.3}) {
    AnalyticVectorField w1 = double_well_1d(tilt);
    CHECK(w1.known_zeros().size() == 3);
    CHECK(morse_signed_sum(w1) == 1);

    AnalyticVectorField w2 = double_well_2d(tilt);
    CHECK(w2.known_zeros().size() == 3);
    CHECK(morse_signed_sum(w2) == 1);

    AnalyticVectorField s1 = single_well_1d(tilt);
    REQUIRE(s1.known_zeros().size() == 1);
    CHECK(s1.known_zeros()[0][0] == doctest::Approx(tilt));
    CHECK(morse_signed_sum(s1) == 1);
  }
  // past the fold the two wells merge; the family refuses to certify zeros
  CHECK_THROWS_AS(double_well_1d(0.39), std::invalid_argument);
  CHECK_THROWS_AS(double_well_2d(-0.5), std::invalid_argument);
}

TEST_CASE("field check sweep passes across every family") {
  std::vector<FieldCheckRow> rows = run_field_checks("all", 20);
  CHECK(rows.size() == 20 * 3 + 20 * 3);  // 3 compact sweeps + 3 well families
  for (const FieldCheckRow& row : rows) {
    CHECK(row.pass);
    CHECK(row.signed_sum == row.expected);
  }

  auto count = [&rows](const std::string& name) {
    return std::count_if(rows.begin(), rows.end(), [&](const FieldCheckRow& r) {
      return r.field == name;
    });
  };
  CHECK(count("sphere") == 20);
  CHECK(count("torus") == 20);
  CHECK(count("circle") == 20);
  CHECK(count("doublewell-1d") == 20);
  CHECK(count("doublewell-2d") == 20);
  CHECK(count("singlewell-1d") == 20);

  std::vector<FieldCheckRow> sphere_only = run_field_checks("sphere", 5);
  CHECK(sphere_only.size() == 5);
  for (const FieldCheckRow& row : sphere_only) {
    CHECK(row.field == "sphere");
    CHECK(row.zero_count == 2);
    CHECK(row.expected == 2);
  }

  CHECK_THROWS_AS(run_field_checks("bogus", 5), std::invalid_argument);
  CHECK_THROWS_AS(run_field_checks("all", 0), std::invalid_argument);
}
