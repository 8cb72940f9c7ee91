#pragma once

#include "signorini/grid.hpp"
#include "signorini/regression.hpp"
#include "signorini/run.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace signorini {

/// Sub-cylinder Q_rho of the computational box with the box's proportions:
/// |x_i| <= rho, 0 <= x_n <= rho, t >= t1 - rho^2 (t1 - t0).
bool in_cylinder(const Grid& grid, int node, int k, double rho);

// ------------------------------------------------------------ quotients

struct QuotientPair {
  int shift = 1;  // h = shift * dt
  double h = 0.0;
  ScalarField Uh;  // slice j sits at original slice j + shift
  ScalarField Fh;
};

/// (u(t) - u(t - h)) / h and the same for f, on slices >= shift.
QuotientPair quotients(const ScalarField& u, const ScalarField& f, int shift);

/// (Lap_h - d_t) U_h - F_h on slice j >= 1 of the pair; outer nodes 0.
/// Vanishes wherever the solver's slice equations hold with equality at
/// both ends of the quotient.
Eigen::VectorXd caloric_defect(const QuotientPair& pair, int j);

struct SubcaloricityResult {
  double min_residual = 0.0;  // over non-interface nodes
  double min_interface = 0.0;  // over nodes whose stencil sees a sign change
  int node = -1;               // argmin of min_residual
  int slice = -1;              // original slice index
  bool plus_part = true;       // argmin is in the U_h^+ test
  long tested = 0;
  long interface_nodes = 0;
};

/// R+ = (Lap_h - d_t) U_h^+ + F_h^-, R- = (Lap_h - d_t) U_h^- + F_h^+ over the
/// non-outer nodes of Q_rho.
SubcaloricityResult subcaloricity_check(const QuotientPair& pair, double rho = 0.75);

// ------------------------------------------------------------ sup bound

struct DtBound {
  double sup_dt = 0.0;  // sup over Q_1/2 of |backward_dt v|
  double l2_v = 0.0;    // over the whole box
  double surrogate = 0.0;
  double ratio = 0.0;   // sup_dt / (l2_v + surrogate)
};

double l2_norm(const Grid& grid, const ScalarField& field);
DtBound sup_dt_bound(const Run& run, double rho = 0.5);

/// Refinement verdict on sup_dt across levels, coarse to fine.
struct DtStability {
  double last_change = 0.0;  // |s_L - s_{L-1}| / s_{L-1}
  bool no_blowup = false;    // finite and no level-to-level growth above 1.2x
};
DtStability dt_stability(const std::vector<double>& sup_dt);

// ------------------------------------------------------------ energy

struct EnergyRatio {
  double value = 0.0;
  double d2 = 0.0;      // ||D^2 u||_{L2(Q_rho^+)}
  double dt = 0.0;      // ||d_t u||_{L2(Q_rho^+)}
  double u_norm = 0.0;  // ||u||_{L2(Q_1)}
  double f_norm = 0.0;
  bool degenerate = false;
};

/// Second differences are taken at nodes with x_n >= hx; the first node row
/// off the thin plane carries the plane's half cell.
EnergyRatio energy_ratio(const Grid& grid, const ScalarField& u, const ScalarField& f, double rho);
EnergyRatio energy_ratio(const Run& run, double rho);

// ------------------------------------------------------------ decay at a point

struct SpaceTimePoint {
  Coord x;
  double t = 0.0;
};

/// sup of |field| over the parabolic ball |x - x0|^2 + |t - t0| <= r^2,
/// over grid nodes plus interpolated samples on the ball's boundary, using
/// slices from `first_slice` on. Nodes flagged by `skip(k, node)` are left
/// out. Returns nullopt when nothing inside the ball is usable.
std::optional<double> parabolic_ball_sup(const Grid& grid, const ScalarField& field, const SpaceTimePoint& c,
                                         double r, const std::function<bool(int, int)>& skip = {},
                                         int first_slice = 0);

/// M(r) of |backward_dt u| off the contact set, one entry per radius; zero
/// where the ball has no usable node.
std::vector<double> dt_modulus(const Run& run, const SpaceTimePoint& c, const std::vector<double>& radii);

struct HolderFit {
  std::vector<double> radii;  // those with M(r) > 0
  std::vector<double> M;
  LogLogFit fit;
  bool pass = false;  // slope > 0.05 and residual < 0.2
};

/// Fit log M(r) against log r. Needs at least three usable radii.
HolderFit holder_fit(const std::vector<double>& radii, const std::vector<double>& M);
HolderFit holder_fit(const Run& run, const SpaceTimePoint& c, const std::vector<double>& radii);

struct ModulusCheck {
  std::vector<double> radii;
  std::vector<double> omega;
  double tau = 0.5;
  double C = 0.0;
  double theta = 0.0;  // least theta with omega(tau R) <= theta omega(R) + C R^2
  bool pass = false;   // theta < 1
};

/// Radii must be geometric with ratio tau (relative tolerance 1e-9).
ModulusCheck modulus_iteration(const std::vector<double>& radii, const std::vector<double>& omega, double tau,
                               double C);
/// C is taken from the forcing budget, sup |d_t f|.
ModulusCheck modulus_iteration_check(const Run& run, const SpaceTimePoint& c, double tau,
                                     const std::vector<double>& radii);

}  // namespace signorini
