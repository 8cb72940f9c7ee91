#pragma once

#include "json.hpp"
#include "signorini/grid.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace signorini {

using SpaceTimeFn = std::function<double(const Coord&, double)>;
using SpaceFn = std::function<double(const Coord&)>;

/// Polynomial with coefficients listed in graded-lex order: by total
/// degree, then lexicographically descending exponents (x_1 > x_2 > ...).
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int vars, const std::vector<double>& coeffs);

  int vars() const { return vars_; }
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Polynomial derivative(int var) const;
  bool is_zero() const { return terms_.empty(); }

 private:
  struct Term {
    std::array<int, 4> exps{0, 0, 0, 0};
    double coeff = 0.0;
  };
  int vars_ = 0;
  std::vector<Term> terms_;
};

/// Exponent vectors of the first `count` monomials in graded-lex order.
std::vector<std::array<int, 4>> graded_lex_monomials(int vars, int count);

/// Thin obstacle phi(x', t) with the derivatives the reduction needs. Every
/// callable ignores the normal coordinate of its point.
struct ThinObstacle {
  SpaceTimeFn value;
  SpaceTimeFn dt;
  SpaceTimeFn lap;         // tangential Laplacian
  SpaceTimeFn dt_forcing;  // d/dt (dt phi - lap phi)
  bool zero = false;
};

ThinObstacle zero_obstacle();
/// Polynomial in (x_1, ..., x_{n-1}, t).
ThinObstacle polynomial_obstacle(int n, const Polynomial& phi);
/// Samples on the thin plane (thin_count x slices); derivatives come from
/// grid stencils and the obstacle may only be evaluated at grid nodes.
ThinObstacle sampled_obstacle(const Grid& grid, const Eigen::MatrixXd& samples);

struct Oracle {
  SpaceTimeFn v;
  SpaceTimeFn dtv;
  SpaceTimeFn flux;  // d/dx_n v at x_n = 0+
};

struct SignoriniProblem {
  std::string preset;
  int n = 2;
  ThinObstacle phi;
  SpaceFn initial;       // v at t0
  SpaceTimeFn boundary;  // v on the outer faces
  std::optional<Oracle> oracle;
  /// Thin-plane free-boundary path s(t) when the preset prescribes one.
  std::function<double(double)> path;
};

/// Presets: halfspace32, full_contact, no_contact, moving_data, custom.
SignoriniProblem preset(const std::string& name, const nlohmann::json& params, const GridSpec& grid);

/// Re(z^{3/2}) for z = a + i|b|, exact zero on the slit {a <= 0, b = 0}.
double halfspace_profile(double a, double b);

enum class OracleQuantity { v, dtv, flux };
double oracle_eval(const SignoriniProblem& problem, OracleQuantity which, const Coord& x, double t);

/// Sup norms standing in for the obstacle regularity budget.
struct ObstacleBudget {
  double sup_phi = 0.0;
  double sup_dt_phi = 0.0;
  double sup_lap_phi = 0.0;
  double sup_dt_forcing = 0.0;

  double surrogate() const;
};

/// Zero-obstacle problem for u = v - phi, sampled on the grid.
struct ReducedProblem {
  GridSpec spec;
  Eigen::MatrixXd phi;      // thin_count x slices
  Eigen::MatrixXd forcing;  // thin_count x slices, f = dt phi - lap phi
  Eigen::VectorXd initial;  // half-grid slice at t0
  Eigen::MatrixXd boundary;  // outer_count x slices
  ObstacleBudget budget;
  bool zero_obstacle = false;
};

/// Throws std::invalid_argument naming the node where phi0 < phi(., t0).
ReducedProblem reduce(const SignoriniProblem& problem, const GridSpec& spec);

/// Thin-plane column of a node (its tangential projection).
inline int column_of(const Grid& grid, int node) {
  return grid.thin_index(node - node % grid.dim(grid.n() - 1));
}

/// f on the half grid, constant in x_n.
ScalarField forcing_field(const Grid& grid, const ReducedProblem& reduced);

/// v = u + phi at every node of every slice.
ScalarField unreduce(const Grid& grid, const ReducedProblem& reduced, const ScalarField& u);

/// v-side data recovered from the reduced problem: initial slice and
/// outer boundary values.
Eigen::VectorXd unreduce_initial(const Grid& grid, const ReducedProblem& reduced);
Eigen::MatrixXd unreduce_boundary(const Grid& grid, const ReducedProblem& reduced);

}  // namespace signorini
