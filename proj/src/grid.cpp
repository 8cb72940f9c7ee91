#include "signorini/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace signorini {

int GridSpec::slices() const { return static_cast<int>(std::lround((t1 - t0) / dt)) + 1; }

void validate(const GridSpec& spec) {
  if (spec.n != 2 && spec.n != 3) {
    throw std::invalid_argument("n must be 2 or 3, got " + std::to_string(spec.n));
  }
  if (spec.m % 2 == 0) throw std::invalid_argument("m must be odd");
  if (spec.m < 9) throw std::invalid_argument("m must be at least 9");
  if (!(spec.dt > 0.0) || !std::isfinite(spec.dt)) throw std::invalid_argument("dt must be positive");
  if (!(spec.t0 < spec.t1)) throw std::invalid_argument("t0 must be less than t1");
  if (spec.t1 > 0.0) throw std::invalid_argument("t1 must not exceed 0");
  const double steps = (spec.t1 - spec.t0) / spec.dt;
  if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps)) {
    throw std::invalid_argument("t1 - t0 must be a whole number of time steps dt");
  }
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  validate(spec);
  slices_ = spec.slices();
  hx_ = spec.hx();
  const int n = spec.n;
  for (int a = 0; a < n - 1; ++a) dims_[a] = spec.m;
  dims_[n - 1] = spec.half_nodes();
  strides_[n - 1] = 1;
  for (int a = n - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * dims_[a + 1];
  nodes_ = strides_[0] * dims_[0];

  kinds_.resize(nodes_);
  thin_of_node_.assign(nodes_, -1);
  for (int p = 0; p < nodes_; ++p) {
    const MultiIndex idx = multi(p);
    bool outer = idx[n - 1] == dims_[n - 1] - 1;
    for (int a = 0; a < n - 1; ++a) outer = outer || idx[a] == 0 || idx[a] == spec.m - 1;
    if (outer) {
      kinds_[p] = NodeKind::outer;
      outer_.push_back(p);
    } else {
      kinds_[p] = idx[n - 1] == 0 ? NodeKind::thin : NodeKind::interior;
      free_.push_back(p);
    }
    if (idx[n - 1] == 0) {
      thin_of_node_[p] = static_cast<int>(thin_plane_.size());
      thin_plane_.push_back(p);
    }
  }
}

MultiIndex Grid::multi(int node) const {
  MultiIndex idx{0, 0, 0};
  for (int a = 0; a < n(); ++a) {
    idx[a] = node / strides_[a];
    node -= idx[a] * strides_[a];
  }
  return idx;
}

int Grid::node(const MultiIndex& idx) const {
  int p = 0;
  for (int a = 0; a < n(); ++a) p += idx[a] * strides_[a];
  return p;
}

double Grid::coord(int axis, int i) const {
  return axis == n() - 1 ? i * hx_ : -1.0 + i * hx_;
}

Coord Grid::point(int node) const {
  const MultiIndex idx = multi(node);
  Coord x(n());
  for (int a = 0; a < n(); ++a) x[a] = coord(a, idx[a]);
  return x;
}

int Grid::neighbor(int node, int axis, int dir) const {
  if (axis == n() - 1 && dir < 0 && node % dims_[axis] == 0) return node + strides_[axis];
  return node + dir * strides_[axis];
}

ScalarField::ScalarField(const GridSpec& spec)
    : spec_(spec), slices_(spec.slices()), nodes_(Grid(spec).nodes()) {
  data_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(slices_) * nodes_);
}

ScalarField::ScalarField(const GridSpec& spec, Eigen::VectorXd data)
    : spec_(spec), slices_(spec.slices()), nodes_(Grid(spec).nodes()), data_(std::move(data)) {
  if (data_.size() != static_cast<Eigen::Index>(slices_) * nodes_) {
    throw std::invalid_argument("field data length does not match grid");
  }
}

ScalarField trim_front(const ScalarField& field, int first) {
  if (first < 0 || first >= field.slices()) throw std::invalid_argument("trim past end of field");
  GridSpec spec = field.spec();
  spec.t0 = spec.time(first);
  const Eigen::Index offset = static_cast<Eigen::Index>(first) * field.nodes();
  return ScalarField(spec, field.data().tail(field.data().size() - offset));
}

namespace {

// Full-grid strides mirror the half-grid layout with m nodes on the normal axis.
struct FullLayout {
  std::array<int, 3> dims{1, 1, 1};
  std::array<int, 3> strides{0, 0, 0};
  int total = 0;

  explicit FullLayout(const Grid& grid) {
    const int n = grid.n();
    for (int a = 0; a < n; ++a) dims[a] = grid.spec().m;
    strides[n - 1] = 1;
    for (int a = n - 2; a >= 0; --a) strides[a] = strides[a + 1] * dims[a + 1];
    total = strides[0] * dims[0];
  }
};

}  // namespace

int full_nodes(const Grid& grid) { return FullLayout(grid).total; }

Eigen::VectorXd even_extend(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& half) {
  const FullLayout full(grid);
  const int n = grid.n();
  const int mh = grid.dim(n - 1);
  Eigen::VectorXd out(full.total);
  for (int q = 0; q < full.total; ++q) {
    int rest = q;
    int p = 0;
    for (int a = 0; a < n; ++a) {
      int i = rest / full.strides[a];
      rest -= i * full.strides[a];
      if (a == n - 1) i = std::abs(i - (mh - 1));
      p += i * grid.stride(a);
    }
    out[q] = half[p];
  }
  return out;
}

Eigen::VectorXd restrict_half(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& full) {
  const FullLayout layout(grid);
  const int n = grid.n();
  const int mh = grid.dim(n - 1);
  Eigen::VectorXd out(grid.nodes());
  for (int p = 0; p < grid.nodes(); ++p) {
    const MultiIndex idx = grid.multi(p);
    int q = 0;
    for (int a = 0; a < n; ++a) {
      const int i = a == n - 1 ? idx[a] + mh - 1 : idx[a];
      q += i * layout.strides[a];
    }
    out[p] = full[q];
  }
  return out;
}

Eigen::VectorXd reflect(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& full) {
  const FullLayout layout(grid);
  const int m = grid.spec().m;
  Eigen::VectorXd out(layout.total);
  for (int q = 0; q < layout.total; ++q) {
    const int i = q % m;
    out[q - i + (m - 1 - i)] = full[q];
  }
  return out;
}

Eigen::VectorXd laplacian(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice) {
  const int n = grid.n();
  const double inv_h2 = 1.0 / (grid.hx() * grid.hx());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.nodes());
  for (const int p : grid.free_nodes()) {
    double acc = -2.0 * n * slice[p];
    for (int a = 0; a < n; ++a) acc += slice[grid.neighbor(p, a, 1)] + slice[grid.neighbor(p, a, -1)];
    out[p] = acc * inv_h2;
  }
  return out;
}

Eigen::VectorXd laplacian(const Grid& grid, const ScalarField& field, int k) {
  return laplacian(grid, field.slice(k));
}

Eigen::VectorXd full_laplacian(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& full) {
  const FullLayout layout(grid);
  const int n = grid.n();
  const int m = grid.spec().m;
  const double inv_h2 = 1.0 / (grid.hx() * grid.hx());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(layout.total);
  for (int q = 0; q < layout.total; ++q) {
    int rest = q;
    bool face = false;
    for (int a = 0; a < n; ++a) {
      const int i = rest / layout.strides[a];
      rest -= i * layout.strides[a];
      face = face || i == 0 || i == m - 1;
    }
    if (face) continue;
    double acc = -2.0 * n * full[q];
    for (int a = 0; a < n; ++a) acc += full[q + layout.strides[a]] + full[q - layout.strides[a]];
    out[q] = acc * inv_h2;
  }
  return out;
}

Eigen::VectorXd backward_dt(const ScalarField& field, int k) {
  if (k < 1 || k >= field.slices()) {
    throw std::invalid_argument("backward_dt needs a slice with a predecessor");
  }
  return (field.slice(k) - field.slice(k - 1)) / field.spec().dt;
}

ScalarField backward_dt_field(const ScalarField& field) {
  ScalarField out(field.spec());
  for (int k = 1; k < field.slices(); ++k) out.slice(k) = backward_dt(field, k);
  return out;
}

double interpolate(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice, const Coord& x) {
  const int n = grid.n();
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int a = 0; a < n; ++a) {
    const double lo = a == n - 1 ? 0.0 : -1.0;
    const double xa = a == n - 1 ? std::abs(x[a]) : x[a];
    const double s = std::clamp((xa - lo) / grid.hx(), 0.0, static_cast<double>(grid.dim(a) - 1));
    int i = static_cast<int>(std::floor(s));
    if (i >= grid.dim(a) - 1) i = grid.dim(a) - 2;
    base[a] = i;
    frac[a] = s - i;
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    int p = 0;
    for (int a = 0; a < n; ++a) {
      const int bit = (corner >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      p += (base[a] + bit) * grid.stride(a);
    }
    if (w != 0.0) acc += w * slice[p];
  }
  return acc;
}

double interpolate(const Grid& grid, const ScalarField& field, const Coord& x, double t) {
  const double s = (t - grid.spec().t0) / grid.dt();
  const double last = field.slices() - 1;
  if (s < -1e-9 || s > last + 1e-9) throw std::out_of_range("interpolation time outside field");
  const double sc = std::clamp(s, 0.0, last);
  int k = static_cast<int>(std::floor(sc));
  if (k >= field.slices() - 1) k = field.slices() - 2;
  const double w = sc - k;
  const double lo = interpolate(grid, field.slice(k), x);
  if (w == 0.0) return lo;
  return (1.0 - w) * lo + w * interpolate(grid, field.slice(k + 1), x);
}

double trapezoid_weight(const Grid& grid, int node) {
  const MultiIndex idx = grid.multi(node);
  double w = 1.0;
  for (int a = 0; a < grid.n(); ++a) {
    const bool face = idx[a] == 0 || idx[a] == grid.dim(a) - 1;
    w *= face ? 0.5 * grid.hx() : grid.hx();
  }
  return w;
}

}  // namespace signorini
