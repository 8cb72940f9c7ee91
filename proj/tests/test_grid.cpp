#include "signorini/field_io.hpp"
#include "signorini/grid.hpp"
#include "signorini/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

using namespace signorini;

namespace {

template <typename F>
ScalarField sample(const GridSpec& spec, F fn) {
  const Grid grid(spec);
  ScalarField u(spec);
  for (int k = 0; k < grid.slices(); ++k) {
    for (int p = 0; p < grid.nodes(); ++p) u(k, p) = fn(grid.point(p), grid.time(k));
  }
  return u;
}

}  // namespace

TEST(Grid, SliceAndNodeCounts) {
  const Grid g2(GridSpec{2, 9, 0.01, -1.0, 0.0});
  EXPECT_EQ(g2.slices(), 101);
  EXPECT_EQ(g2.dim(0), 9);
  EXPECT_EQ(g2.dim(1), 5);
  EXPECT_EQ(g2.nodes(), 45);

  const Grid g3(GridSpec{3, 17, 0.02, -0.5, 0.0});
  EXPECT_EQ(g3.slices(), 26);
  EXPECT_EQ(g3.nodes(), 17 * 17 * 9);
  EXPECT_EQ(g3.thin_count(), 17 * 17);
}

TEST(Grid, RejectsBadSpecs) {
  EXPECT_THROW(Grid(GridSpec{2, 8, 0.01, -1.0, 0.0}), std::invalid_argument);
  try {
    validate(GridSpec{2, 8, 0.01, -1.0, 0.0});
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "m must be odd");
  }
  EXPECT_THROW(validate(GridSpec{2, 9, 0.0, -1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(validate(GridSpec{2, 9, 0.01, 0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(validate(GridSpec{4, 9, 0.01, -1.0, 0.0}), std::invalid_argument);
}

TEST(Grid, NodeKinds) {
  const Grid g(GridSpec{2, 9, 0.1, -1.0, 0.0});
  int thin = 0, outer = 0;
  for (int p = 0; p < g.nodes(); ++p) {
    const Coord x = g.point(p);
    const bool face = std::abs(std::abs(x[0]) - 1.0) < 1e-12 || std::abs(x[1] - 1.0) < 1e-12;
    EXPECT_EQ(g.kind(p) == NodeKind::outer, face);
    if (g.kind(p) == NodeKind::thin) {
      EXPECT_EQ(x[1], 0.0);
      ++thin;
    }
    outer += face ? 1 : 0;
  }
  EXPECT_EQ(thin, 7);
  EXPECT_EQ(static_cast<int>(g.outer_nodes().size()), outer);
  for (int j = 0; j < g.thin_count(); ++j) EXPECT_EQ(g.thin_index(g.thin_node(j)), j);
}

TEST(Laplacian, ExactOnQuadratics) {
  for (const int n : {2, 3}) {
    const GridSpec spec{n, 9, 0.1, -0.2, 0.0};
    const Grid grid(spec);
    const ScalarField u = sample(spec, [n](const Coord& x, double) {
      return x[0] * x[0] + 0.5 * x[n - 2] - 3.0 * x[n - 1] * x[n - 1];
    });
    const Eigen::VectorXd lap = laplacian(grid, u, 1);
    for (const int p : grid.free_nodes()) EXPECT_NEAR(lap[p], 2.0 - 6.0, 1e-11) << p;
  }
}

TEST(Laplacian, MirrorGhostAtThinPlane) {
  const GridSpec spec{2, 17, 0.1, -0.2, 0.0};
  const Grid grid(spec);
  const ScalarField u = sample(spec, [](const Coord& x, double) { return x[1]; });
  const Eigen::VectorXd lap = laplacian(grid, u, 0);
  for (int j = 0; j < grid.thin_count(); ++j) {
    const int p = grid.thin_node(j);
    if (grid.kind(p) == NodeKind::outer) continue;
    EXPECT_NEAR(lap[p], 2.0 / grid.hx(), 1e-10);
  }
}

TEST(Laplacian, HalfspaceProfileResidualDecays) {
  // Second order away from the origin; near it the residual grows like hx^{-1/2}.
  double prev = 1e300;
  for (const int m : {17, 33, 65}) {
    const GridSpec spec{2, m, 0.1, -0.1, 0.0};
    const Grid grid(spec);
    const ScalarField u = sample(spec, [](const Coord& x, double) { return halfspace_profile(x[0], x[1]); });
    const Eigen::VectorXd lap = laplacian(grid, u, 0);
    double far = 0.0, near = 0.0;
    for (const int p : grid.free_nodes()) {
      if (grid.kind(p) != NodeKind::interior) continue;
      double& worst = grid.point(p).norm() >= 0.25 ? far : near;
      worst = std::max(worst, std::abs(lap[p]));
    }
    EXPECT_LT(far, prev / 3.0);
    EXPECT_LT(near, 2.0 / std::sqrt(grid.hx()));
    prev = far;
  }
}

TEST(Laplacian, CommutesWithReflection) {
  const GridSpec spec{3, 9, 0.1, -0.2, 0.0};
  const Grid grid(spec);
  const ScalarField u = sample(spec, [](const Coord& x, double) { return std::sin(3 * x[0]) * std::cos(x[1] + x[2]); });
  const Eigen::VectorXd full = even_extend(grid, u.slice(0));
  EXPECT_TRUE(reflect(grid, full) == full);
  const Eigen::VectorXd lap = full_laplacian(grid, full);
  EXPECT_LE((reflect(grid, lap) - lap).cwiseAbs().maxCoeff(), 1e-12);
  // The half-grid stencil agrees with the full stencil restricted back.
  const Eigen::VectorXd half = laplacian(grid, u.slice(0));
  const Eigen::VectorXd back = restrict_half(grid, lap);
  for (const int p : grid.free_nodes()) EXPECT_NEAR(half[p], back[p], 1e-10);
}

TEST(Grid, TimeRangeIsWholeSteps) {
  EXPECT_THROW(validate(GridSpec{2, 9, 4e-3, -0.25, 0.0}), std::invalid_argument);
  EXPECT_NO_THROW(validate(GridSpec{2, 9, 2.5e-4, -0.064, 0.0}));
  const GridSpec spec{2, 9, 1e-3, -0.25, 0.0};
  const ScalarField u(spec);
  for (int first = 0; first + 1 < u.slices(); ++first) {
    const ScalarField t = trim_front(u, first);
    EXPECT_EQ(t.slices(), u.slices() - first);
    EXPECT_DOUBLE_EQ(t.spec().t0, spec.time(first));
  }
}

TEST(EvenExtension, RoundTripIsExact) {
  const GridSpec spec{2, 11, 0.1, -0.2, 0.0};
  const Grid grid(spec);
  const ScalarField u = sample(spec, [](const Coord& x, double t) { return std::exp(x[0] - x[1]) + t; });
  const Eigen::VectorXd full = even_extend(grid, u.slice(1));
  EXPECT_EQ(full.size(), full_nodes(grid));
  EXPECT_TRUE(restrict_half(grid, full) == u.slice(1));
  EXPECT_TRUE(even_extend(grid, restrict_half(grid, full)) == full);
}

TEST(BackwardDt, Examples) {
  const GridSpec spec{2, 9, 0.05, -1.0, 0.0};
  const ScalarField lin = sample(spec, [](const Coord&, double t) { return t; });
  const ScalarField quad = sample(spec, [](const Coord&, double t) { return t * t; });
  const ScalarField flat = sample(spec, [](const Coord& x, double) { return x[0]; });
  for (const int k : {1, 7, 20}) {
    const double t = spec.time(k), s = spec.time(k - 1);
    EXPECT_NEAR(backward_dt(lin, k).maxCoeff(), 1.0, 1e-12);
    EXPECT_NEAR(backward_dt(quad, k)[3], t + s, 1e-12);
    EXPECT_EQ(backward_dt(flat, k).cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_THROW(backward_dt(lin, 0), std::invalid_argument);
}

TEST(Interpolate, ExactForMultilinear) {
  const GridSpec spec{3, 9, 0.1, -0.3, 0.0};
  const Grid grid(spec);
  auto fn = [](const Coord& x, double t) { return 1.0 + x[0] - 2.0 * x[1] + 0.5 * x[2] + x[0] * x[1] + 3.0 * t; };
  const ScalarField u = sample(spec, fn);
  Coord x(3);
  x << 0.13, -0.71, 0.37;
  EXPECT_NEAR(interpolate(grid, u, x, -0.17), fn(x, -0.17), 1e-12);
  // Below the thin plane the even extension is sampled.
  Coord below = x;
  below[2] = -x[2];
  EXPECT_NEAR(interpolate(grid, u, below, -0.17), fn(x, -0.17), 1e-12);
  EXPECT_THROW(interpolate(grid, u, x, 0.5), std::out_of_range);
}

TEST(Trapezoid, WeightsIntegrateTheHalfBox) {
  for (const int n : {2, 3}) {
    const Grid grid(GridSpec{n, 9, 0.1, -0.2, 0.0});
    double vol = 0.0, first = 0.0;
    for (int p = 0; p < grid.nodes(); ++p) {
      vol += trapezoid_weight(grid, p);
      first += trapezoid_weight(grid, p) * (grid.point(p)[n - 1] + grid.point(p)[0]);
    }
    EXPECT_NEAR(vol, std::pow(2.0, n - 1), 1e-12);
    EXPECT_NEAR(first, 0.5 * std::pow(2.0, n - 1), 1e-12);
  }
}

TEST(Sigf, RoundTripIsBitExact) {
  const GridSpec spec{2, 9, 0.1, -0.3, 0.0};
  const ScalarField u = sample(spec, [](const Coord& x, double t) { return std::sin(x[0] * 7.1) / 3.0 + t * M_PI; });
  const auto dir = std::filesystem::temp_directory_path() / "signorini_sigf_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "u.sigf";
  write_sigf(path, u);

  const SigfHeader h = read_sigf_header(path);
  EXPECT_EQ(h.version, 1u);
  EXPECT_EQ(h.n, 2u);
  EXPECT_EQ(h.sizes, (std::vector<std::uint32_t>{9, 5}));
  EXPECT_EQ(h.slices, 4u);
  EXPECT_EQ(std::filesystem::file_size(path), 4 + 4 * 5 + 8 * 45 * 4u);

  const ScalarField back = read_sigf(path);
  EXPECT_TRUE(back.spec() == spec);
  EXPECT_EQ(std::memcmp(back.data().data(), u.data().data(), sizeof(double) * u.data().size()), 0);

  std::ofstream(path, std::ios::binary | std::ios::trunc) << "NOPE";
  EXPECT_THROW(read_sigf(path), std::runtime_error);
  std::filesystem::remove_all(dir);
}
