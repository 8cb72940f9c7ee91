#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace signorini {

/// Spatial point with up to three coordinates (x_1, ..., x_n).
using Coord = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using MultiIndex = std::array<int, 3>;

/// Space-time tensor grid over the half box [-1,1]^{n-1} x [0,1] x [t0,t1].
///
/// `m` counts nodes on a full axis [-1,1]; the normal axis x_n in [0,1]
/// carries (m+1)/2 nodes so that the spacing is the same on every axis and
/// the thin plane x_n = 0 is a node plane of the even extension.
struct GridSpec {
  int n = 2;
  int m = 17;
  double dt = 1e-3;
  double t0 = -1.0;
  double t1 = 0.0;

  int half_nodes() const { return (m + 1) / 2; }
  double hx() const { return 2.0 / (m - 1); }
  int slices() const;
  double time(int k) const { return t0 + k * dt; }

  bool operator==(const GridSpec&) const = default;
};

/// Throws std::invalid_argument on unusable grid parameters.
void validate(const GridSpec& spec);

enum class NodeKind : std::uint8_t { interior, thin, outer };

/// Index maps for a validated GridSpec. Node indices are row-major with
/// x_1 slowest and x_n fastest.
class Grid {
 public:
  explicit Grid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int n() const { return spec_.n; }
  int slices() const { return slices_; }
  int nodes() const { return nodes_; }
  double hx() const { return hx_; }
  double dt() const { return spec_.dt; }
  double time(int k) const { return spec_.time(k); }
  int dim(int axis) const { return dims_[axis]; }
  int stride(int axis) const { return strides_[axis]; }

  MultiIndex multi(int node) const;
  int node(const MultiIndex& idx) const;
  double coord(int axis, int i) const;
  Coord point(int node) const;
  NodeKind kind(int node) const { return kinds_[node]; }

  /// Non-outer nodes (interior plus thin), in index order.
  const std::vector<int>& free_nodes() const { return free_; }
  const std::vector<int>& outer_nodes() const { return outer_; }

  /// Nodes of the thin plane x_n = 0, including those on outer faces,
  /// enumerated over the tangential multi-index.
  int thin_count() const { return static_cast<int>(thin_plane_.size()); }
  int thin_node(int j) const { return thin_plane_[j]; }
  /// Position of a thin-plane node in the thin enumeration, or -1.
  int thin_index(int node) const { return thin_of_node_[node]; }

  /// Neighbour along `axis` in direction `dir` (+1/-1). Below the thin plane
  /// the even extension mirrors onto the node above. Undefined for outer
  /// nodes stepping out of the box.
  int neighbor(int node, int axis, int dir) const;

 private:
  GridSpec spec_;
  int slices_ = 0;
  int nodes_ = 0;
  double hx_ = 0.0;
  std::array<int, 3> dims_{1, 1, 1};
  std::array<int, 3> strides_{0, 0, 0};
  std::vector<NodeKind> kinds_;
  std::vector<int> free_;
  std::vector<int> outer_;
  std::vector<int> thin_plane_;
  std::vector<int> thin_of_node_;
};

/// Values on every node of every time slice, time-slowest.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& spec);
  ScalarField(const GridSpec& spec, Eigen::VectorXd data);

  const GridSpec& spec() const { return spec_; }
  int slices() const { return slices_; }
  int nodes() const { return nodes_; }

  auto slice(int k) { return data_.segment(static_cast<Eigen::Index>(k) * nodes_, nodes_); }
  auto slice(int k) const {
    return data_.segment(static_cast<Eigen::Index>(k) * nodes_, nodes_);
  }
  double& operator()(int k, int node) { return data_[static_cast<Eigen::Index>(k) * nodes_ + node]; }
  double operator()(int k, int node) const {
    return data_[static_cast<Eigen::Index>(k) * nodes_ + node];
  }

  Eigen::VectorXd& data() { return data_; }
  const Eigen::VectorXd& data() const { return data_; }

  bool all_finite() const { return data_.allFinite(); }

 private:
  GridSpec spec_;
  int slices_ = 0;
  int nodes_ = 0;
  Eigen::VectorXd data_;
};

/// Trailing slices [first, slices) of a field, retimed to start at t_first.
ScalarField trim_front(const ScalarField& field, int first);

// Even extension across x_n = 0. The full grid has m nodes on every axis,
// x_n running from -1 to 1.

int full_nodes(const Grid& grid);
Eigen::VectorXd even_extend(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& half);
Eigen::VectorXd restrict_half(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& full);
/// x_n -> -x_n on a full-grid slice.
Eigen::VectorXd reflect(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& full);

/// Second-order 2n+1 point Laplacian at every non-outer node; the ghost
/// value below the thin plane is the mirror value. Outer nodes are 0.
Eigen::VectorXd laplacian(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice);
Eigen::VectorXd laplacian(const Grid& grid, const ScalarField& field, int k);

/// Same stencil on the full even-extended grid, at nodes off the box faces.
Eigen::VectorXd full_laplacian(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& full);

/// (u(t_k) - u(t_{k-1})) / dt. Requires k >= 1.
Eigen::VectorXd backward_dt(const ScalarField& field, int k);

/// Field of backward differences; slice 0 is left at zero.
ScalarField backward_dt_field(const ScalarField& field);

/// Multilinear interpolation of a slice at x; x_n is mirrored to |x_n|.
/// Points outside the box are clamped onto it.
double interpolate(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice, const Coord& x);

/// Multilinear in space, linear in time. t must lie in [t0, t_last].
double interpolate(const Grid& grid, const ScalarField& field, const Coord& x, double t);

/// Trapezoid weight of a node for integration over the half box.
double trapezoid_weight(const Grid& grid, int node);

}  // namespace signorini
