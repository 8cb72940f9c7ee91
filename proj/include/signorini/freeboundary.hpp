#pragma once

#include "signorini/grid.hpp"
#include "signorini/regression.hpp"
#include "signorini/run.hpp"
#include "signorini/solver.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace signorini {

/// Contact iff u <= tol at a thin-plane node.
CoincidenceMask extract_mask(const Grid& grid, const ScalarField& u, double tol);
CoincidenceMask extract_mask(const Run& run);

/// Part of the thin cylinder searched for the graph x_{n-1} = g(x'', t).
struct GraphWindow {
  double x_lo = -1.0, x_hi = 1.0;  // along x_{n-1}
  double y_lo = -1.0, y_hi = 1.0;  // along x'' (n = 3 only)
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
};

/// One (x'', t) column of the thin plane.
struct GraphColumn {
  int slice = 0;
  int row = 0;     // x'' node index; 0 when n = 2
  double t = 0.0;
  double y = 0.0;  // x''
  double g = 0.0;
  int transitions = 0;
  int orientation = 0;  // +1 contact below g, -1 contact above g
  bool flagged = false;
};

struct FreeBoundaryGraph {
  int n = 2;
  double hx = 0.0;
  double dt = 0.0;
  std::vector<GraphColumn> columns;
  int flagged = 0;
  bool graphical = false;  // at most 10% of the columns flagged
  double min_sep = 0.0;    // parabolic separation used by L_est
  double L_est = 0.0;
};

/// One contact/detached transition per column is required; other columns
/// are flagged and excluded. g is the zero of the secant through u^{2/3}
/// at the second and third detached nodes (u ~ d^{3/2} near a regular
/// point), clamped to within a cell of the transition.
/// min_sep <= 0 selects 2 hx.
FreeBoundaryGraph fit_graph(const Grid& grid, const ScalarField& u, const CoincidenceMask& mask,
                            const GraphWindow& window, double min_sep = 0.0);
FreeBoundaryGraph fit_graph(const Run& run, const GraphWindow& window, double min_sep = 0.0);

/// max |g_a - g_b| / (|y_a - y_b|^2 + |t_a - t_b|)^{1/2} over pairs of valid
/// columns at dyadic index offsets and parabolic distance >= min_sep.
double parabolic_lipschitz(const std::vector<GraphColumn>& columns, double min_sep);

/// Copies of the valid columns with g replaced by path(y, t).
std::vector<GraphColumn> columns_from(const FreeBoundaryGraph& graph,
                                      const std::function<double(double, double)>& path);

/// sup |g - path| over the valid columns.
double tracking_error(const FreeBoundaryGraph& graph, const std::function<double(double, double)>& path);

struct Smoothness {
  std::vector<double> delta;  // separations
  std::vector<double> osc;    // oscillation of the difference quotient at that separation
  double floor = 0.0;         // second differences at or below this are discarded
  LogLogFit fit;
  bool flat = false;  // no separation above the floor
  bool pass = false;  // flat, or exponent > 0.05 from at least two separations
};

/// Modulus of continuity of d_t g, by sup |g(t+d) - 2g(t) + g(t-d)| / d over
/// dyadic d >= min_delta (default (2 hx)^2) on runs of consecutive valid
/// slices. Separations whose largest second difference does not exceed hx^2,
/// the localization scale of g, are dropped. Needs at least 8 consecutive
/// valid slices.
Smoothness time_smoothness(const FreeBoundaryGraph& graph, double min_delta = 0.0);

/// Same in x'' for n = 3 (one row of columns per slice).
Smoothness space_smoothness(const FreeBoundaryGraph& graph, double min_delta = 0.0);

}  // namespace signorini
