#include "signorini/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace signorini;
using nlohmann::json;

namespace {

Coord pt(double a, double b) {
  Coord x(2);
  x << a, b;
  return x;
}

// Coefficient list with the given (exponent, value) entries placed by graded-lex position.
std::vector<double> coeffs(int vars, const std::vector<std::pair<std::array<int, 4>, double>>& terms) {
  const auto monos = graded_lex_monomials(vars, 35);
  std::vector<double> c;
  for (const auto& [e, value] : terms) {
    const auto it = std::find(monos.begin(), monos.end(), e);
    const auto idx = static_cast<std::size_t>(it - monos.begin());
    if (c.size() <= idx) c.resize(idx + 1, 0.0);
    c[idx] = value;
  }
  return c;
}

}  // namespace

TEST(Polynomial, GradedLexOrder) {
  const auto m = graded_lex_monomials(3, 10);
  const std::vector<std::array<int, 4>> want{{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {2, 0, 0, 0},
                                             {1, 1, 0, 0}, {1, 0, 1, 0}, {0, 2, 0, 0}, {0, 1, 1, 0}, {0, 0, 2, 0}};
  EXPECT_EQ(m, want);
  // 1 + 2x - y + 3x^2 at (2, 5)
  const Polynomial p(2, {1.0, 2.0, -1.0, 3.0});
  Eigen::VectorXd x(2);
  x << 2.0, 5.0;
  EXPECT_DOUBLE_EQ(p(x), 1.0 + 4.0 - 5.0 + 12.0);
  EXPECT_DOUBLE_EQ(p.derivative(0)(x), 2.0 + 12.0);
}

TEST(Presets, HalfspaceValues) {
  const auto p = preset("halfspace32", json::object(), GridSpec{2, 17, 0.01, -0.1, 0.0});
  EXPECT_DOUBLE_EQ(oracle_eval(p, OracleQuantity::v, pt(0.25, 0.0), 0.0), 0.125);
  EXPECT_EQ(oracle_eval(p, OracleQuantity::v, pt(-0.25, 0.0), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(oracle_eval(p, OracleQuantity::flux, pt(-0.25, 0.0), 0.0), -0.75);
  EXPECT_NEAR(oracle_eval(p, OracleQuantity::flux, pt(-0.09, 0.0), 0.0), -0.45, 1e-15);
  EXPECT_EQ(oracle_eval(p, OracleQuantity::dtv, pt(0.3, 0.2), -0.05), 0.0);
  // r^{3/2} cos(3 theta / 2) off the plane
  const double r = 0.5, th = 1.1;
  EXPECT_NEAR(oracle_eval(p, OracleQuantity::v, pt(r * std::cos(th), r * std::sin(th)), 0.0),
              std::pow(r, 1.5) * std::cos(1.5 * th), 1e-15);
}

TEST(Presets, FullAndNoContact) {
  const GridSpec g{2, 17, 0.01, -1.0, 0.0};
  const auto full = preset("full_contact", json::object(), g);
  EXPECT_EQ(oracle_eval(full, OracleQuantity::v, pt(0.3, 0.0), -0.5), 0.0);
  EXPECT_EQ(oracle_eval(full, OracleQuantity::flux, pt(0.3, 0.0), -0.5), -1.0);

  const auto none = preset("no_contact", json{{"c", 3.0}}, g);
  EXPECT_EQ(oracle_eval(none, OracleQuantity::dtv, pt(0.3, 0.4), -0.5), 1.0);
  EXPECT_EQ(oracle_eval(none, OracleQuantity::flux, pt(0.3, 0.0), -0.5), 0.0);
  EXPECT_DOUBLE_EQ(oracle_eval(none, OracleQuantity::v, pt(0.0, 0.0), -1.0), 2.0);
  EXPECT_THROW(preset("no_contact", json{{"c", 0.5}}, g), std::invalid_argument);
}

TEST(Presets, Errors) {
  const GridSpec g{2, 17, 0.01, -1.0, 0.0};
  EXPECT_THROW(preset("bogus", json::object(), g), std::invalid_argument);
  const auto md = preset("moving_data", json::object(), g);
  EXPECT_FALSE(md.oracle.has_value());
  EXPECT_THROW(oracle_eval(md, OracleQuantity::v, pt(0.0, 0.0), 0.0), std::invalid_argument);
  EXPECT_THROW(preset("moving_data", json{{"kink", -1.0}}, g), std::invalid_argument);
}

TEST(Presets, MovingDataFollowsPath) {
  const GridSpec g{2, 17, 0.01, -1.0, 0.0};
  const auto p = preset("moving_data", json{{"s0", 0.1}, {"speed", 0.2}, {"accel", 0.0}}, g);
  EXPECT_DOUBLE_EQ(p.path(-1.0), 0.1);
  EXPECT_NEAR(p.path(0.0), 0.3, 1e-15);
  // Boundary data is the profile translated by s(t).
  EXPECT_NEAR(p.boundary(pt(1.0, 0.3), -0.5), halfspace_profile(1.0 - 0.2, 0.3), 1e-15);
}

TEST(Reduce, ZeroObstacleIsIdentity) {
  const GridSpec g{2, 9, 0.05, -0.2, 0.0};
  const Grid grid(g);
  const auto p = preset("halfspace32", json::object(), g);
  const ReducedProblem r = reduce(p, g);
  EXPECT_TRUE(r.zero_obstacle);
  EXPECT_EQ(r.forcing.cwiseAbs().maxCoeff(), 0.0);
  for (int q = 0; q < grid.nodes(); ++q) EXPECT_EQ(r.initial[q], p.initial(grid.point(q)));
  EXPECT_TRUE(unreduce_initial(grid, r) == r.initial);
}

TEST(Reduce, TimeSquaredObstacle) {
  // phi = t^2: f = 2t, initial data shifted by -t0^2.
  const GridSpec g{2, 9, 0.125, -0.5, 0.0};
  const Grid grid(g);
  const json params{{"phi", coeffs(2, {{{0, 2, 0, 0}, 1.0}})}, {"phi0", std::vector<double>{1.0}},
                    {"boundary", std::vector<double>{1.0}}};
  const auto p = preset("custom", params, g);
  const ReducedProblem r = reduce(p, g);
  for (int k = 0; k < grid.slices(); ++k) {
    for (int j = 0; j < grid.thin_count(); ++j) EXPECT_DOUBLE_EQ(r.forcing(j, k), 2.0 * grid.time(k));
  }
  for (int q = 0; q < grid.nodes(); ++q) EXPECT_DOUBLE_EQ(r.initial[q], 1.0 - 0.25);
  // Dyadic data: the add-back is exact.
  EXPECT_TRUE(unreduce_initial(grid, r) == Eigen::VectorXd::Ones(grid.nodes()));
  EXPECT_TRUE(unreduce_boundary(grid, r) == Eigen::MatrixXd::Ones(r.boundary.rows(), r.boundary.cols()));
  EXPECT_DOUBLE_EQ(r.budget.sup_dt_forcing, 2.0);
}

TEST(Reduce, ForcingMatchesSymbolicDerivatives) {
  // phi = x1^2 t - 0.3 x1 t^2 + 0.1 x1^3: f = dt phi - phi_x1x1.
  const GridSpec g{2, 17, 0.05, -0.5, 0.0};
  const Grid grid(g);
  const json params{
      {"phi", coeffs(2, {{{2, 1, 0, 0}, 1.0}, {{1, 2, 0, 0}, -0.3}, {{3, 0, 0, 0}, 0.1}, {{0, 0, 0, 0}, -2.0}})},
      {"phi0", std::vector<double>{5.0}},
      {"boundary", std::vector<double>{5.0}}};
  const ReducedProblem r = reduce(preset("custom", params, g), g);
  for (int k = 0; k < grid.slices(); ++k) {
    const double t = grid.time(k);
    for (int j = 0; j < grid.thin_count(); ++j) {
      const double x = grid.point(grid.thin_node(j))[0];
      const double f = (x * x - 0.6 * x * t) - (2.0 * t + 0.6 * x);
      EXPECT_NEAR(r.forcing(j, k), f, 1e-12);
    }
  }
}

TEST(Reduce, GenericRoundTripWithinOneUlp) {
  const GridSpec g{3, 9, 0.1, -0.3, 0.0};
  const Grid grid(g);
  const json params{{"phi", coeffs(3, {{{1, 0, 0, 0}, 0.37}, {{0, 1, 1, 0}, -0.11}, {{0, 0, 0, 0}, -1.0}})},
                    {"phi0", coeffs(3, {{{0, 0, 0, 0}, 1.3}, {{0, 0, 1, 0}, 0.7}})},
                    {"boundary", coeffs(4, {{{0, 0, 0, 0}, 1.3}, {{0, 0, 1, 0}, 0.7}, {{0, 0, 0, 1}, 0.2}})}};
  const auto p = preset("custom", params, g);
  const ReducedProblem r = reduce(p, g);
  const Eigen::VectorXd v0 = unreduce_initial(grid, r);
  for (int q = 0; q < grid.nodes(); ++q) {
    const double want = p.initial(grid.point(q));
    EXPECT_LE(std::abs(v0[q] - want), 2.0 * std::numeric_limits<double>::epsilon() * std::abs(want));
  }
}

TEST(Reduce, RejectsInitialDataBelowObstacle) {
  const GridSpec g{2, 9, 0.1, -0.5, 0.0};
  const json params{{"phi", std::vector<double>{1.0}}, {"phi0", std::vector<double>{0.5}},
                    {"boundary", std::vector<double>{1.0}}};
  try {
    reduce(preset("custom", params, g), g);
    FAIL() << "expected a compatibility error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("x' = (-1"), std::string::npos) << e.what();
  }
}

TEST(Reduce, OracleSatisfiesDiscreteSignoriniConditions) {
  for (const std::string name : {"halfspace32", "full_contact", "no_contact"}) {
    const GridSpec g{2, 33, 0.01, -0.1, 0.0};
    const Grid grid(g);
    const auto p = preset(name, json::object(), g);
    for (int j = 0; j < grid.thin_count(); ++j) {
      const Coord x = grid.point(grid.thin_node(j));
      const double v = oracle_eval(p, OracleQuantity::v, x, 0.0);
      const double q = oracle_eval(p, OracleQuantity::flux, x, 0.0);
      EXPECT_GE(v, 0.0) << name;
      EXPECT_LE(q, 0.0) << name;
      EXPECT_LE(std::abs(v * q), 1e-12) << name;
    }
  }
}
