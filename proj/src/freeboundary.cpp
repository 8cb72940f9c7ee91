#include "signorini/freeboundary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

namespace signorini {

CoincidenceMask extract_mask(const Grid& grid, const ScalarField& u, double tol) {
  CoincidenceMask mask(grid.thin_count(), u.slices());
  for (int k = 0; k < u.slices(); ++k) {
    for (int j = 0; j < grid.thin_count(); ++j) mask.set(k, j, u(k, grid.thin_node(j)) <= tol);
  }
  return mask;
}

CoincidenceMask extract_mask(const Run& run) { return extract_mask(run.grid(), run.u, run.contact_tol()); }

namespace {

constexpr double kEdge = 1e-9;

// Thin index of tangential position (row along x'', i along x_{n-1}).
int thin_at(const Grid& grid, int row, int i) { return grid.n() == 2 ? i : row * grid.spec().m + i; }

}  // namespace

FreeBoundaryGraph fit_graph(const Grid& grid, const ScalarField& u, const CoincidenceMask& mask,
                            const GraphWindow& window, double min_sep) {
  const int n = grid.n();
  const int m = grid.spec().m;
  FreeBoundaryGraph graph;
  graph.n = n;
  graph.hx = grid.hx();
  graph.dt = grid.dt();
  graph.min_sep = min_sep > 0.0 ? min_sep : 2.0 * grid.hx();

  std::vector<int> xs;
  for (int i = 0; i < m; ++i) {
    const double x = grid.coord(n - 2, i);
    if (x >= window.x_lo - kEdge && x <= window.x_hi + kEdge) xs.push_back(i);
  }
  std::vector<int> rows{0};
  if (n == 3) {
    rows.clear();
    for (int r = 0; r < m; ++r) {
      const double y = grid.coord(0, r);
      if (y >= window.y_lo - kEdge && y <= window.y_hi + kEdge) rows.push_back(r);
    }
  }
  if (xs.size() < 2) throw std::invalid_argument("fit_graph: window holds fewer than two nodes along x_{n-1}");

  auto lift = [](double value) { return std::cbrt(std::max(value, 0.0) * std::max(value, 0.0)); };
  for (int k = 0; k < u.slices(); ++k) {
    const double t = grid.time(k);
    if (t < window.t_lo - kEdge || t > window.t_hi + kEdge) continue;
    for (const int row : rows) {
      GraphColumn col;
      col.slice = k;
      col.row = row;
      col.t = t;
      col.y = n == 3 ? grid.coord(0, row) : 0.0;
      int last = -1;  // position in xs of the last transition
      for (std::size_t a = 1; a < xs.size(); ++a) {
        if (mask.contact(k, thin_at(grid, row, xs[a])) != mask.contact(k, thin_at(grid, row, xs[a - 1]))) {
          ++col.transitions;
          last = static_cast<int>(a);
        }
      }
      if (col.transitions != 1) {
        col.flagged = true;
        graph.columns.push_back(col);
        continue;
      }
      const bool contact_left = mask.contact(k, thin_at(grid, row, xs[last - 1]));
      col.orientation = contact_left ? 1 : -1;
      const int ic = contact_left ? last - 1 : last;  // last contact position
      const int step = contact_left ? 1 : -1;
      const int size = static_cast<int>(xs.size());
      const double xc = grid.coord(n - 2, xs[ic]);
      const double x1 = grid.coord(n - 2, xs[ic + step]);
      auto lifted = [&](int pos) { return lift(u(k, grid.thin_node(thin_at(grid, row, xs[pos])))); };
      // The first detached node sits in the discrete boundary layer of the
      // transition, so the secant starts one node further out when it can.
      double g = 0.5 * (xc + x1);
      for (const int first : {2, 1}) {
        const int da = ic + first * step, db = ic + (first + 1) * step;
        if (db < 0 || db >= size) continue;
        const double xa = grid.coord(n - 2, xs[da]), xb = grid.coord(n - 2, xs[db]);
        const double a = lifted(da), b = lifted(db);
        if (!(b > a)) continue;
        // The discrete contact node may sit up to a cell inside the detached set.
        const double lo = xc - (x1 - xc);
        g = std::clamp(xa - a * (xb - xa) / (b - a), std::min(lo, x1), std::max(lo, x1));
        break;
      }
      col.g = g;
      graph.columns.push_back(col);
    }
  }
  for (const auto& c : graph.columns) graph.flagged += c.flagged ? 1 : 0;
  const int total = static_cast<int>(graph.columns.size());
  graph.graphical = total > 0 && graph.flagged <= 0.1 * total;
  if (graph.graphical) graph.L_est = parabolic_lipschitz(graph.columns, graph.min_sep);
  return graph;
}

FreeBoundaryGraph fit_graph(const Run& run, const GraphWindow& window, double min_sep) {
  return fit_graph(run.grid(), run.u, run.mask, window, min_sep);
}

double parabolic_lipschitz(const std::vector<GraphColumn>& columns, double min_sep) {
  std::map<std::pair<int, int>, const GraphColumn*> at;
  int max_slice = 0, max_row = 0;
  for (const auto& c : columns) {
    if (c.flagged) continue;
    at[{c.slice, c.row}] = &c;
    max_slice = std::max(max_slice, c.slice);
    max_row = std::max(max_row, c.row);
  }
  std::vector<int> offsets{0};
  for (int d = 1; d <= std::max(max_slice, max_row); d *= 2) offsets.push_back(d);

  double L = 0.0;
  for (const auto& [key, a] : at) {
    for (const int ds : offsets) {
      for (const int dr : offsets) {
        for (const int sr : {1, -1}) {
          if (ds == 0 && dr == 0) continue;
          if (dr == 0 && sr < 0) continue;
          const auto it = at.find({key.first + ds, key.second + sr * dr});
          if (it == at.end()) continue;
          const GraphColumn* b = it->second;
          const double dist = std::sqrt((a->y - b->y) * (a->y - b->y) + std::abs(a->t - b->t));
          if (dist < min_sep - kEdge) continue;
          L = std::max(L, std::abs(a->g - b->g) / dist);
        }
      }
    }
  }
  return L;
}

std::vector<GraphColumn> columns_from(const FreeBoundaryGraph& graph,
                                      const std::function<double(double, double)>& path) {
  std::vector<GraphColumn> out;
  for (auto c : graph.columns) {
    if (c.flagged) continue;
    c.g = path(c.y, c.t);
    out.push_back(c);
  }
  return out;
}

double tracking_error(const FreeBoundaryGraph& graph, const std::function<double(double, double)>& path) {
  double e = 0.0;
  for (const auto& c : graph.columns) {
    if (!c.flagged) e = std::max(e, std::abs(c.g - path(c.y, c.t)));
  }
  return e;
}

namespace {

// Oscillation of the difference quotient over uniformly spaced series with
// gaps (nullopt entries break a series).
Smoothness smoothness(const std::vector<std::vector<std::optional<double>>>& series, double step, double min_delta,
                      double floor) {
  std::size_t longest = 0;
  for (const auto& s : series) {
    std::size_t run = 0;
    for (const auto& v : s) {
      run = v ? run + 1 : 0;
      longest = std::max(longest, run);
    }
  }
  if (longest < 8) throw std::invalid_argument("graph smoothness needs at least 8 consecutive valid samples");

  int d0 = 1;
  while (d0 * step < min_delta - kEdge * step) d0 *= 2;
  Smoothness out;
  out.floor = floor;
  for (int d = d0; 2 * d < static_cast<int>(longest); d *= 2) {
    double second = 0.0;
    bool seen = false;
    for (const auto& s : series) {
      for (int k = d; k + d < static_cast<int>(s.size()); ++k) {
        if (!s[k - d] || !s[k] || !s[k + d]) continue;
        second = std::max(second, std::abs(*s[k + d] - 2.0 * *s[k] + *s[k - d]));
        seen = true;
      }
    }
    // Second differences below the localization floor carry no information.
    if (!seen || second <= floor) continue;
    out.delta.push_back(d * step);
    out.osc.push_back(second / (d * step));
  }
  if (out.delta.empty()) {
    out.flat = true;
    out.pass = true;
    return out;
  }
  if (out.delta.size() < 2) return out;
  out.fit = loglog_fit(out.delta, out.osc);
  out.pass = out.fit.slope > 0.05;
  return out;
}

}  // namespace

Smoothness time_smoothness(const FreeBoundaryGraph& graph, double min_delta) {
  if (!(min_delta > 0.0)) min_delta = 4.0 * graph.hx * graph.hx;
  std::map<int, std::map<int, double>> by_row;
  int first = 1 << 30, last = -1;
  for (const auto& c : graph.columns) {
    if (c.flagged) continue;
    by_row[c.row][c.slice] = c.g;
    first = std::min(first, c.slice);
    last = std::max(last, c.slice);
  }
  std::vector<std::vector<std::optional<double>>> series;
  for (const auto& [row, m] : by_row) {
    std::vector<std::optional<double>> s(last - first + 1);
    for (const auto& [k, g] : m) s[k - first] = g;
    series.push_back(std::move(s));
  }
  if (series.empty()) throw std::invalid_argument("graph smoothness needs at least 8 consecutive valid samples");
  return smoothness(series, graph.dt, min_delta, graph.hx * graph.hx);
}

Smoothness space_smoothness(const FreeBoundaryGraph& graph, double min_delta) {
  if (graph.n != 3) throw std::invalid_argument("space smoothness needs n = 3");
  if (!(min_delta > 0.0)) min_delta = 2.0 * graph.hx;
  std::map<int, std::map<int, double>> by_slice;
  int first = 1 << 30, last = -1;
  for (const auto& c : graph.columns) {
    if (c.flagged) continue;
    by_slice[c.slice][c.row] = c.g;
    first = std::min(first, c.row);
    last = std::max(last, c.row);
  }
  std::vector<std::vector<std::optional<double>>> series;
  for (const auto& [k, m] : by_slice) {
    std::vector<std::optional<double>> s(last - first + 1);
    for (const auto& [row, g] : m) s[row - first] = g;
    series.push_back(std::move(s));
  }
  if (series.empty()) throw std::invalid_argument("graph smoothness needs at least 8 consecutive valid samples");
  return smoothness(series, graph.hx, min_delta, graph.hx * graph.hx);
}

}  // namespace signorini
