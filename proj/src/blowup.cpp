#include "signorini/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace signorini {

double heat_kernel(const Coord& x, double t) {
  if (!(t > 0.0)) return 0.0;
  const double n = static_cast<double>(x.size());
  return std::pow(4.0 * std::numbers::pi * t, -0.5 * n) * std::exp(-x.squaredNorm() / (4.0 * t));
}

double Cutoff::operator()(double dist) const {
  if (full || dist <= inner) return 1.0;
  if (dist >= outer) return 0.0;
  const double s = (outer - dist) / (outer - inner);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

namespace {

constexpr double kEdge = 1e-9;

int center_slice(const Grid& grid, const SpaceTimePoint& c) {
  const int n = grid.n();
  if (c.x.size() != n) throw std::invalid_argument("center has the wrong dimension");
  if (std::abs(c.x[n - 1]) > kEdge) throw std::invalid_argument("center must lie on the thin plane");
  const double s = (c.t - grid.spec().t0) / grid.dt();
  const long k = std::lround(s);
  if (std::abs(s - k) > 1e-6 || k < 0 || k >= grid.slices()) {
    throw std::invalid_argument("center time must be a grid time");
  }
  return static_cast<int>(k);
}

}  // namespace

double height(const Grid& grid, const ScalarField& u, const SpaceTimePoint& center, double r, const Cutoff& psi) {
  const int kc = center_slice(grid, center);
  const double dt = grid.dt();
  const double t_lo = center.t - r * r;
  if (!(r > 0.0)) throw std::invalid_argument("height: r must be positive");
  if (t_lo < grid.spec().t0 - kEdge) throw std::invalid_argument("height: r^2 reaches before the first slice");
  const int k_hi = kc - 2;
  const int k_lo = static_cast<int>(std::ceil((t_lo - grid.spec().t0) / dt - 1e-9));
  if (k_lo > k_hi) throw std::invalid_argument("height: r is too small for the time step");

  std::vector<double> w(grid.nodes());
  std::vector<Coord> offset(grid.nodes());
  for (int p = 0; p < grid.nodes(); ++p) {
    offset[p] = center.x - grid.point(p);
    const double cut = psi(offset[p].norm());
    w[p] = 2.0 * trapezoid_weight(grid, p) * cut * cut;  // both halves of the even extension
  }
  auto slice_integral = [&](int k) {
    const double lag = center.t - grid.time(k);
    double s = 0.0;
    for (int p = 0; p < grid.nodes(); ++p) {
      if (w[p] == 0.0) continue;
      s += w[p] * u(k, p) * u(k, p) * heat_kernel(offset[p], lag);
    }
    return s;
  };

  double acc = 0.0;
  double prev = slice_integral(k_lo);
  for (int k = k_lo + 1; k <= k_hi; ++k) {
    const double cur = slice_integral(k);
    acc += 0.5 * dt * (prev + cur);
    prev = cur;
  }
  const double a = grid.time(k_lo) - t_lo;
  if (a > kEdge && k_lo > 0) {
    const double first = slice_integral(k_lo);
    const double below = slice_integral(k_lo - 1);
    const double at_lo = first + (below - first) * a / dt;
    acc += 0.5 * a * (first + at_lo);
  }
  return acc / (r * r);
}

HeightSeries height_series(const Grid& grid, const ScalarField& u, const SpaceTimePoint& center,
                           const std::vector<double>& radii, const Cutoff& psi) {
  HeightSeries h{center, radii, {}, psi};
  for (const double r : radii) h.H.push_back(height(grid, u, center, r, psi));
  return h;
}

GridSpec reference_spec(int n) { return GridSpec{n, 33, 1.0 / 16.0, -1.0, 0.0}; }

double rotated_profile(const Coord& y, double rotation) {
  const int n = static_cast<int>(y.size());
  double a = 0.0;
  if (n == 2) {
    a = std::cos(rotation) * y[0];
  } else {
    a = std::cos(rotation) * y[1] - std::sin(rotation) * y[0];
  }
  return halfspace_profile(a, y[n - 1]);
}

namespace {

// G-weighted inner products on the reference cylinder.
struct ReferenceWeights {
  Grid grid;
  std::vector<double> w;  // slice-major, nodes fastest

  explicit ReferenceWeights(int n) : grid(reference_spec(n)) {
    w.assign(static_cast<std::size_t>(grid.slices()) * grid.nodes(), 0.0);
    for (int k = 0; k < grid.slices(); ++k) {
      const double lag = -grid.time(k);
      const double wt = (k == 0 || k == grid.slices() - 1) ? 0.5 * grid.dt() : grid.dt();
      for (int p = 0; p < grid.nodes(); ++p) {
        w[static_cast<std::size_t>(k) * grid.nodes() + p] =
            wt * trapezoid_weight(grid, p) * heat_kernel(grid.point(p), lag);
      }
    }
  }
};

const ReferenceWeights& weights_for(int n) {
  static const ReferenceWeights w2(2), w3(3);
  return n == 2 ? w2 : w3;
}

}  // namespace

ProfileMatch profile_distance(const ScalarField& ur) {
  const int n = ur.spec().n;
  if (!(ur.spec() == reference_spec(n))) throw std::invalid_argument("profile_distance expects the reference grid");
  const ReferenceWeights& ref = weights_for(n);
  const Grid& grid = ref.grid;
  const int nodes = grid.nodes();
  const Eigen::VectorXd& a = ur.data();

  double aa = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) aa += ref.w[i] * a[i] * a[i];
  if (!(aa > 0.0)) return {std::sqrt(2.0), 0.0};

  std::vector<Coord> points(nodes);
  for (int p = 0; p < nodes; ++p) points[p] = grid.point(p);
  // Correlation of the normalized field with the normalized profile.
  auto corr = [&](double rotation) {
    std::vector<double> prof(nodes);
    for (int p = 0; p < nodes; ++p) prof[p] = rotated_profile(points[p], rotation);
    double ab = 0.0, bb = 0.0;
    for (int k = 0; k < grid.slices(); ++k) {
      for (int p = 0; p < nodes; ++p) {
        const std::size_t i = static_cast<std::size_t>(k) * nodes + p;
        ab += ref.w[i] * a[static_cast<Eigen::Index>(i)] * prof[p];
        bb += ref.w[i] * prof[p] * prof[p];
      }
    }
    return ab / std::sqrt(aa * bb);
  };
  // Direct norm of the difference; sqrt(2 - 2c) loses half the digits near c = 1.
  auto distance = [&](double rotation) {
    std::vector<double> prof(nodes);
    double bb = 0.0;
    for (int k = 0; k < grid.slices(); ++k) {
      for (int p = 0; p < nodes; ++p) {
        if (k == 0) prof[p] = rotated_profile(points[p], rotation);
        bb += ref.w[static_cast<std::size_t>(k) * nodes + p] * prof[p] * prof[p];
      }
    }
    const double sa = 1.0 / std::sqrt(aa), sb = 1.0 / std::sqrt(bb);
    double dd = 0.0;
    for (int k = 0; k < grid.slices(); ++k) {
      for (int p = 0; p < nodes; ++p) {
        const std::size_t i = static_cast<std::size_t>(k) * nodes + p;
        const double d = a[static_cast<Eigen::Index>(i)] * sa - prof[p] * sb;
        dd += ref.w[i] * d * d;
      }
    }
    return std::sqrt(dd);
  };

  ProfileMatch best{2.0, 0.0};
  if (n == 2) {
    for (const double rot : {0.0, std::numbers::pi}) {
      const double d = distance(rot);
      if (d < best.D) best = {d, rot};
    }
    return best;
  }
  const int samples = 72;
  double best_c = -2.0, best_rot = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double rot = 2.0 * std::numbers::pi * i / samples;
    const double c = corr(rot);
    if (c > best_c) {
      best_c = c;
      best_rot = rot;
    }
  }
  // Golden-section refinement inside the bracketing samples.
  const double step = 2.0 * std::numbers::pi / samples;
  double lo = best_rot - step, hi = best_rot + step;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double c1 = corr(x1), c2 = corr(x2);
  for (int it = 0; it < 40; ++it) {
    if (c1 > c2) {
      hi = x2;
      x2 = x1;
      c2 = c1;
      x1 = hi - phi * (hi - lo);
      c1 = corr(x1);
    } else {
      lo = x1;
      x1 = x2;
      c1 = c2;
      x2 = lo + phi * (hi - lo);
      c2 = corr(x2);
    }
  }
  const double rot = 0.5 * (lo + hi);
  const double c = corr(rot);
  if (c > best_c) {
    best_c = c;
    best_rot = rot;
  }
  best_rot = std::fmod(best_rot + 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  return {distance(best_rot), best_rot};
}

BlowupSample rescale(const Grid& grid, const ScalarField& u, const SpaceTimePoint& center, double r, double scale,
                     const Cutoff& psi) {
  BlowupSample s;
  s.r = r;
  s.H = height(grid, u, center, r, psi);
  if (!(s.H >= 1e-14 * scale * scale)) throw DegenerateCenter("degenerate center: height vanishes at r = " + std::to_string(r));
  const int n = grid.n();
  for (int a = 0; a < n - 1; ++a) {
    if (std::abs(center.x[a]) + r > 1.0 + kEdge) throw std::invalid_argument("rescale: cylinder leaves the box");
  }
  const GridSpec ref = reference_spec(n);
  const Grid rg(ref);
  s.ur = ScalarField(ref);
  const double norm = 1.0 / std::sqrt(s.H);
  for (int k = 0; k < rg.slices(); ++k) {
    const double t = std::max(center.t + r * r * rg.time(k), grid.spec().t0);
    for (int p = 0; p < rg.nodes(); ++p) {
      const Coord x = center.x + r * rg.point(p);
      s.ur(k, p) = norm * interpolate(grid, u, x, t);
    }
  }
  const ProfileMatch match = profile_distance(s.ur);
  s.D = match.D;
  s.rotation = match.rotation;
  return s;
}

bool on_free_boundary(const Run& run, const SpaceTimePoint& center) {
  const Grid grid = run.grid();
  const int k = center_slice(grid, center);
  bool contact = false, detached = false;
  for (int j = 0; j < grid.thin_count(); ++j) {
    if ((grid.point(grid.thin_node(j)) - center.x).norm() > 1.5 * grid.hx() + kEdge) continue;
    (run.mask.contact(k, j) ? contact : detached) = true;
  }
  return contact && detached;
}

Classification classify(const Run& run, const SpaceTimePoint& center, const std::vector<double>& radii,
                        const Cutoff& psi, double slack, double floor) {
  if (radii.size() < 3) throw std::invalid_argument("classify: need at least three radii");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] < radii[i - 1])) throw std::invalid_argument("classify: radii must be decreasing");
  }
  const Grid grid = run.grid();
  if (radii.back() < 2.0 * grid.hx() - kEdge) throw std::invalid_argument("classify: radii must be at least 2 hx");
  Classification c;
  c.slack = slack;
  c.floor = floor;
  for (const double r : radii) {
    const double H = height(grid, run.u, center, r, psi);
    if (!(H >= 1e-14 * run.scale * run.scale)) {
      throw DegenerateCenter("degenerate center: height vanishes at r = " + std::to_string(r));
    }
  }
  if (!on_free_boundary(run, center)) throw std::invalid_argument("classify: center is not on the free boundary");
  for (const double r : radii) c.samples.push_back(rescale(grid, run.u, center, r, run.scale, psi));

  bool settling = true;
  for (std::size_t i = 1; i < c.samples.size(); ++i) {
    const double D = c.samples[i].D;
    settling = settling && (D <= c.samples[i - 1].D + slack || D < floor);
  }
  c.verdict = settling && c.samples.back().D < 0.15 ? PointClass::regular : PointClass::inconclusive;
  return c;
}

}  // namespace signorini
