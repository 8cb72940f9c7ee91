#include "signorini/timereg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace signorini {

namespace {

constexpr double kEdge = 1e-9;

bool in_box(const Grid& grid, int node, double rho) {
  const MultiIndex idx = grid.multi(node);
  const int n = grid.n();
  for (int a = 0; a < n - 1; ++a) {
    if (std::abs(grid.coord(a, idx[a])) > rho + kEdge) return false;
  }
  return grid.coord(n - 1, idx[n - 1]) <= rho + kEdge;
}

// Lower end of the time window of Q_rho for a run that started at t_start.
double window_start(const GridSpec& spec, double t_start, double rho) {
  return spec.t1 - rho * rho * (spec.t1 - t_start);
}

// Trapezoid weights along one axis of a contiguous included index range.
double edge_weight(bool left, bool right, double h) { return 0.5 * h * (left ? 1.0 : 0.0) + 0.5 * h * (right ? 1.0 : 0.0); }

}  // namespace

bool in_cylinder(const Grid& grid, int node, int k, double rho) {
  return in_box(grid, node, rho) && grid.time(k) >= window_start(grid.spec(), grid.spec().t0, rho) - kEdge;
}

// ------------------------------------------------------------ quotients

QuotientPair quotients(const ScalarField& u, const ScalarField& f, int shift) {
  if (!(u.spec() == f.spec())) throw std::invalid_argument("quotients: u and f live on different grids");
  if (shift < 1) throw std::invalid_argument("quotients: shift must be at least 1");
  if (shift >= u.slices()) throw std::invalid_argument("quotients: shift leaves no overlap");
  QuotientPair pair;
  pair.shift = shift;
  pair.h = shift * u.spec().dt;
  const ScalarField head = trim_front(u, shift);
  pair.Uh = head;
  pair.Fh = trim_front(f, shift);
  const Eigen::Index len = head.data().size();
  pair.Uh.data() = (head.data() - u.data().head(len)) / pair.h;
  pair.Fh.data() = (pair.Fh.data() - f.data().head(len)) / pair.h;
  return pair;
}

Eigen::VectorXd caloric_defect(const QuotientPair& pair, int j) {
  if (j < 1 || j >= pair.Uh.slices()) throw std::invalid_argument("caloric_defect: slice out of range");
  const Grid grid(pair.Uh.spec());
  Eigen::VectorXd d = laplacian(grid, pair.Uh, j) - backward_dt(pair.Uh, j) - pair.Fh.slice(j);
  for (const int p : grid.outer_nodes()) d[p] = 0.0;
  return d;
}

SubcaloricityResult subcaloricity_check(const QuotientPair& pair, double rho) {
  const ScalarField& U = pair.Uh;
  if (U.slices() < 3) throw std::invalid_argument("subcaloricity_check: need at least 3 slices");
  const Grid grid(U.spec());
  const int n = grid.n();
  const double dt = grid.dt();
  const double t_lo = window_start(U.spec(), U.spec().t0 - pair.h, rho);

  SubcaloricityResult out;
  out.min_residual = std::numeric_limits<double>::infinity();
  out.min_interface = std::numeric_limits<double>::infinity();
  for (int j = 1; j < U.slices(); ++j) {
    if (grid.time(j) < t_lo - kEdge) continue;
    const Eigen::VectorXd up = U.slice(j).cwiseMax(0.0);
    const Eigen::VectorXd um = (-U.slice(j)).cwiseMax(0.0);
    const Eigen::VectorXd up_prev = U.slice(j - 1).cwiseMax(0.0);
    const Eigen::VectorXd um_prev = (-U.slice(j - 1)).cwiseMax(0.0);
    const Eigen::VectorXd lap_p = laplacian(grid, up);
    const Eigen::VectorXd lap_m = laplacian(grid, um);
    for (const int p : grid.free_nodes()) {
      if (!in_box(grid, p, rho)) continue;
      const double F = pair.Fh(j, p);
      const double rp = lap_p[p] - (up[p] - up_prev[p]) / dt + std::max(-F, 0.0);
      const double rm = lap_m[p] - (um[p] - um_prev[p]) / dt + std::max(F, 0.0);

      bool pos = false, neg = false;
      auto see = [&](double value) {
        pos = pos || value > 0.0;
        neg = neg || value < 0.0;
      };
      see(U(j, p));
      see(U(j - 1, p));
      for (int a = 0; a < n; ++a) {
        for (const int dir : {-1, 1}) see(U(j, grid.neighbor(p, a, dir)));
      }
      ++out.tested;
      const double r = std::min(rp, rm);
      if (pos && neg) {
        ++out.interface_nodes;
        out.min_interface = std::min(out.min_interface, r);
        continue;
      }
      if (r < out.min_residual) {
        out.min_residual = r;
        out.node = p;
        out.slice = j + pair.shift;
        out.plus_part = rp <= rm;
      }
    }
  }
  if (out.tested == out.interface_nodes) out.min_residual = 0.0;
  if (out.interface_nodes == 0) out.min_interface = 0.0;
  return out;
}

// ------------------------------------------------------------ sup bound

namespace {

std::vector<double> time_weights(const Grid& grid) {
  std::vector<double> w(grid.slices(), grid.dt());
  w.front() *= 0.5;
  w.back() *= 0.5;
  if (grid.slices() == 1) w.front() = 1.0;
  return w;
}

}  // namespace

double l2_norm(const Grid& grid, const ScalarField& field) {
  const std::vector<double> wt = time_weights(grid);
  std::vector<double> ws(grid.nodes());
  for (int p = 0; p < grid.nodes(); ++p) ws[p] = trapezoid_weight(grid, p);
  double acc = 0.0;
  for (int k = 0; k < field.slices(); ++k) {
    double s = 0.0;
    for (int p = 0; p < grid.nodes(); ++p) s += ws[p] * field(k, p) * field(k, p);
    acc += wt[k] * s;
  }
  return std::sqrt(acc);
}

DtBound sup_dt_bound(const Run& run, double rho) {
  const Grid grid = run.grid();
  DtBound b;
  for (int k = 1; k < grid.slices(); ++k) {
    if (grid.time(k) < window_start(grid.spec(), grid.spec().t0, rho) - kEdge) continue;
    for (int p = 0; p < grid.nodes(); ++p) {
      if (!in_box(grid, p, rho)) continue;
      b.sup_dt = std::max(b.sup_dt, std::abs(run.v(k, p) - run.v(k - 1, p)) / grid.dt());
    }
  }
  b.l2_v = l2_norm(grid, run.v);
  b.surrogate = run.reduced.budget.surrogate();
  const double rhs = b.l2_v + b.surrogate;
  b.ratio = rhs > 0.0 ? b.sup_dt / rhs : 0.0;
  return b;
}

DtStability dt_stability(const std::vector<double>& sup_dt) {
  if (sup_dt.size() < 2) throw std::invalid_argument("dt_stability: need at least two levels");
  DtStability s;
  s.no_blowup = true;
  for (std::size_t l = 0; l < sup_dt.size(); ++l) {
    if (!std::isfinite(sup_dt[l])) s.no_blowup = false;
    if (l > 0 && sup_dt[l] > 1.2 * sup_dt[l - 1]) s.no_blowup = false;
  }
  const double a = sup_dt[sup_dt.size() - 2], b = sup_dt.back();
  s.last_change = a > 0.0 ? std::abs(b - a) / a : (b == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return s;
}

// ------------------------------------------------------------ energy

EnergyRatio energy_ratio(const Grid& grid, const ScalarField& u, const ScalarField& f, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("energy_ratio: rho must lie in (0, 1)");
  const int n = grid.n();
  const double hx = grid.hx();
  const double dt = grid.dt();
  const double t_lo = window_start(grid.spec(), grid.spec().t0, rho);
  auto inside = [&](int a, int i) {
    if (i < 0 || i >= grid.dim(a)) return false;
    const double x = grid.coord(a, i);
    return a == n - 1 ? x <= rho + kEdge : std::abs(x) <= rho + kEdge;
  };
  auto in_time = [&](int k) { return k >= 1 && k < grid.slices() && grid.time(k) >= t_lo - kEdge; };

  double d2 = 0.0, dtn = 0.0;
  for (int k = 1; k < grid.slices(); ++k) {
    if (!in_time(k)) continue;
    const double wt = edge_weight(in_time(k - 1), in_time(k + 1), dt);
    if (wt == 0.0) continue;
    for (const int p : grid.free_nodes()) {
      const MultiIndex idx = grid.multi(p);
      if (idx[n - 1] == 0) continue;
      bool ok = true;
      for (int a = 0; a < n; ++a) ok = ok && inside(a, idx[a]);
      if (!ok) continue;
      double ws = 1.0;
      for (int a = 0; a < n; ++a) {
        double w = edge_weight(inside(a, idx[a] - 1), inside(a, idx[a] + 1), hx);
        if (a == n - 1 && idx[a] == 1) w += 0.5 * hx;
        ws *= w;
      }
      double hess = 0.0;
      for (int a = 0; a < n; ++a) {
        const double c = u(k, p);
        const double daa = (u(k, grid.neighbor(p, a, 1)) - 2.0 * c + u(k, grid.neighbor(p, a, -1))) / (hx * hx);
        hess += daa * daa;
        for (int b = a + 1; b < n; ++b) {
          auto at = [&](int sa, int sb) { return u(k, grid.neighbor(grid.neighbor(p, a, sa), b, sb)); };
          const double dab = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hx * hx);
          hess += 2.0 * dab * dab;
        }
      }
      const double ut = (u(k, p) - u(k - 1, p)) / dt;
      d2 += wt * ws * hess;
      dtn += wt * ws * ut * ut;
    }
  }
  EnergyRatio e;
  e.d2 = std::sqrt(d2);
  e.dt = std::sqrt(dtn);
  e.u_norm = l2_norm(grid, u);
  e.f_norm = l2_norm(grid, f);
  const double den = e.u_norm + e.f_norm;
  if (!(den > 0.0)) {
    e.degenerate = true;
    return e;
  }
  e.value = (e.d2 + e.dt) / den;
  return e;
}

EnergyRatio energy_ratio(const Run& run, double rho) { return energy_ratio(run.grid(), run.u, run.f, rho); }

// ------------------------------------------------------------ decay at a point

std::optional<double> parabolic_ball_sup(const Grid& grid, const ScalarField& field, const SpaceTimePoint& c,
                                         double r, const std::function<bool(int, int)>& skip, int first_slice) {
  const int n = grid.n();
  const double r2 = r * r;
  const double t_first = grid.time(first_slice);
  const double t_last = grid.time(field.slices() - 1);
  bool any = false;
  double sup = 0.0;
  for (int k = first_slice; k < field.slices(); ++k) {
    const double dtc = std::abs(grid.time(k) - c.t);
    if (dtc > r2 + kEdge) continue;
    for (int p = 0; p < grid.nodes(); ++p) {
      if ((grid.point(p) - c.x).squaredNorm() + dtc > r2 + kEdge) continue;
      if (skip && skip(k, p)) continue;
      any = true;
      sup = std::max(sup, std::abs(field(k, p)));
    }
  }

  // Boundary samples: |x - x0| = r sqrt(1 - s), |t - t0| = s r^2.
  std::vector<Coord> dirs;
  if (n == 2) {
    for (int i = 0; i <= 32; ++i) {
      const double th = std::numbers::pi * i / 32.0;
      Coord d(2);
      d << std::cos(th), std::sin(th);
      dirs.push_back(d);
    }
  } else {
    for (int i = 0; i <= 8; ++i) {
      const double polar = 0.5 * std::numbers::pi * i / 8.0;
      const int around = i == 8 ? 1 : 32;
      for (int a = 0; a < around; ++a) {
        const double az = 2.0 * std::numbers::pi * a / around;
        Coord d(3);
        d << std::cos(polar) * std::cos(az), std::cos(polar) * std::sin(az), std::sin(polar);
        dirs.push_back(d);
      }
    }
  }
  for (int level = 0; level <= 8; ++level) {
    const double s = level / 8.0;
    const double radius = r * std::sqrt(1.0 - s);
    for (const double sign : {-1.0, 1.0}) {
      if (level == 0 && sign > 0) continue;
      const double t = c.t + sign * s * r2;
      if (t < t_first - kEdge || t > t_last + kEdge) continue;
      for (const Coord& d : dirs) {
        const Coord x = c.x + radius * d;
        bool inbox = x[n - 1] >= -kEdge && x[n - 1] <= 1.0 + kEdge;
        for (int a = 0; a < n - 1; ++a) inbox = inbox && std::abs(x[a]) <= 1.0 + kEdge;
        if (!inbox) continue;
        any = true;
        sup = std::max(sup, std::abs(interpolate(grid, field, x, std::clamp(t, t_first, t_last))));
        if (radius == 0.0) break;
      }
    }
  }
  if (!any) return std::nullopt;
  return sup;
}

std::vector<double> dt_modulus(const Run& run, const SpaceTimePoint& c, const std::vector<double>& radii) {
  const Grid grid = run.grid();
  const ScalarField dtu = backward_dt_field(run.u);
  auto skip = [&](int k, int p) {
    const int j = grid.thin_index(p);
    return j >= 0 && run.mask.contact(k, j);
  };
  std::vector<double> M;
  for (const double r : radii) M.push_back(parabolic_ball_sup(grid, dtu, c, r, skip, 1).value_or(0.0));
  return M;
}

HolderFit holder_fit(const std::vector<double>& radii, const std::vector<double>& M) {
  if (radii.size() != M.size()) throw std::invalid_argument("holder_fit: size mismatch");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] < radii[i - 1])) throw std::invalid_argument("holder_fit: radii must be decreasing");
  }
  HolderFit h;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (M[i] > 0.0) {
      h.radii.push_back(radii[i]);
      h.M.push_back(M[i]);
    }
  }
  if (h.radii.size() < 3) throw std::invalid_argument("holder_fit: fewer than 3 usable radii");
  h.fit = loglog_fit(h.radii, h.M);
  h.pass = h.fit.slope > 0.05 && h.fit.residual < 0.2;
  return h;
}

HolderFit holder_fit(const Run& run, const SpaceTimePoint& c, const std::vector<double>& radii) {
  return holder_fit(radii, dt_modulus(run, c, radii));
}

ModulusCheck modulus_iteration(const std::vector<double>& radii, const std::vector<double>& omega, double tau,
                               double C) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("modulus_iteration: tau must lie in (0, 1)");
  if (radii.size() != omega.size() || radii.size() < 2) {
    throw std::invalid_argument("modulus_iteration: need at least two radii with one omega each");
  }
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (std::abs(radii[i] / radii[i - 1] - tau) > 1e-9 * tau) {
      throw std::invalid_argument("modulus_iteration: radii must be geometric with ratio tau");
    }
  }
  ModulusCheck m;
  m.radii = radii;
  m.omega = omega;
  m.tau = tau;
  m.C = C;
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    const double need = omega[i + 1] - C * radii[i] * radii[i];
    double theta = 0.0;
    if (omega[i] > 0.0) {
      theta = need / omega[i];
    } else if (need > 0.0) {
      theta = std::numeric_limits<double>::infinity();
    }
    m.theta = std::max(m.theta, theta);
  }
  m.pass = m.theta < 1.0;
  return m;
}

ModulusCheck modulus_iteration_check(const Run& run, const SpaceTimePoint& c, double tau,
                                     const std::vector<double>& radii) {
  return modulus_iteration(radii, dt_modulus(run, c, radii), tau, run.reduced.budget.sup_dt_forcing);
}

}  // namespace signorini
