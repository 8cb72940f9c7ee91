#pragma once

#include "signorini/grid.hpp"
#include "signorini/run.hpp"
#include "signorini/timereg.hpp"

#include <stdexcept>
#include <vector>

namespace signorini {

/// (4 pi t)^{-n/2} exp(-|x|^2 / 4t) for t > 0, else 0; n = x.size().
double heat_kernel(const Coord& x, double t);

/// Radial cutoff psi(|x - x0|): 1 up to `inner`, 0 from `outer`, quintic
/// smoothstep between. `full` makes it 1 everywhere.
struct Cutoff {
  double inner = 0.5;
  double outer = 0.9;
  bool full = false;

  double operator()(double dist) const;
  static Cutoff everywhere() { return {0.0, 0.0, true}; }
};

/// Raised when the height at a center is below 1e-14 (data scale)^2.
class DegenerateCenter : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (1/r^2) int_{t0-r^2}^{t0} int u^2 psi^2 G(x0 - x, t0 - t) dx dt over the
/// even-extended box, by trapezoid sums on the grid. The two slices nearest
/// t0 are left out. The center must lie on the thin plane at a grid time,
/// with r^2 <= t0 - (first grid time).
double height(const Grid& grid, const ScalarField& u, const SpaceTimePoint& center, double r,
              const Cutoff& psi = {});

struct HeightSeries {
  SpaceTimePoint center;
  std::vector<double> radii;
  std::vector<double> H;
  Cutoff psi;
};

HeightSeries height_series(const Grid& grid, const ScalarField& u, const SpaceTimePoint& center,
                           const std::vector<double>& radii, const Cutoff& psi = {});

/// Reference cylinder for rescalings: the half box with m = 33 over
/// s in [-1, 0] with 17 slices.
GridSpec reference_spec(int n);

struct BlowupSample {
  double r = 0.0;
  double H = 0.0;
  ScalarField ur;         // on reference_spec(n)
  double D = 0.0;         // distance to the normalized half-space profile
  double rotation = 0.0;  // angle of the profile's x_{n-1} axis in the x' plane (n = 2: 0 or pi)
};

/// u_r(y, s) = u(x0 + r y, t0 + r^2 s) / H(r)^{1/2}, with its profile
/// distance. `scale` is the data scale used by the degeneracy test.
BlowupSample rescale(const Grid& grid, const ScalarField& u, const SpaceTimePoint& center, double r,
                     double scale, const Cutoff& psi = {});

/// Profile c Re(y_{n-1} + i|y_n|)^{3/2} turned by `rotation` in the x' plane.
double rotated_profile(const Coord& y, double rotation);

struct ProfileMatch {
  double D = 0.0;
  double rotation = 0.0;
};

/// min over rotations (n = 3) or signs (n = 2) of the G-weighted L2 distance
/// between the unit-normalized field and the unit-normalized profile.
ProfileMatch profile_distance(const ScalarField& ur);

enum class PointClass { regular, inconclusive };

struct Classification {
  PointClass verdict = PointClass::inconclusive;
  std::vector<BlowupSample> samples;  // one per radius, decreasing r
  double slack = 0.0;                 // allowed growth of D between radii
  double floor = 0.0;                 // growth below this level is not counted
};

/// Thin-plane nodes within 1.5 hx of x0 at the center slice include both
/// contact and detached ones.
bool on_free_boundary(const Run& run, const SpaceTimePoint& center);

/// Regular iff D(r_min) < 0.15 and D does not grow by more than `slack`
/// from one radius to the next smaller one, unless it stays below `floor`.
/// On a grid, D picks up an error that grows like a function of hx / r even
/// for an exact blowup profile; `floor` is that resolution level at r >= 2hx.
/// Radii must be decreasing, at least three, and >= 2 hx. Throws
/// DegenerateCenter, and std::invalid_argument when the center is not on the
/// free boundary.
Classification classify(const Run& run, const SpaceTimePoint& center, const std::vector<double>& radii,
                        const Cutoff& psi = {}, double slack = 0.01, double floor = 0.05);

}  // namespace signorini
