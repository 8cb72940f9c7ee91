// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "signorini/blowup.hpp"
#include "signorini/experiment.hpp"
#include "signorini/freeboundary.hpp"
#include "signorini/lcp.hpp"
#include "signorini/regression.hpp"
#include "signorini/timereg.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace signorini;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const std::vector<double>& xs) {
  std::ostringstream s;
  s.precision(4);
  for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? " " : "") << xs[i];
  return s.str();
}

std::string fmt(double x) { return fmt(std::vector<double>{x}); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> half_octaves(double r_max, int count) {
  std::vector<double> r;
  for (int i = 0; i < count; ++i) r.push_back(r_max * std::pow(2.0, -0.5 * i));
  return r;
}

SpaceTimePoint origin(int n, double t) { return SpaceTimePoint{Coord::Zero(n), t}; }

// Re(x1 + i x2)^{3/2} on the principal branch.
double halfspace_oracle(const Coord& x) {
  return std::real(std::pow(std::complex<double>(x[0], x[1]), 1.5));
}

// Shared runs.
struct Runs {
  std::vector<signorini::Run> halfspace;  // m = 17, 33, 65
  signorini::Run moving;                  // m = 65
  std::vector<double> moving_sup_dt;      // m = 17, 33, 65
};

const GridSpec kHalfspaceLevels[] = {{2, 17, 4e-3, -0.064, 0.0}, {2, 33, 1e-3, -0.064, 0.0},
                                     {2, 65, 2.5e-4, -0.064, 0.0}};
const GridSpec kMovingLevels[] = {{2, 17, 4e-3, -1.0, 0.0}, {2, 33, 1e-3, -1.0, 0.0}, {2, 65, 2.5e-4, -1.0, 0.0}};

Outcome oracle_convergence(Runs& runs) {
  std::vector<double> errs;
  double total = 0.0;
  for (const GridSpec& g : kHalfspaceLevels) {
    const auto start = std::chrono::steady_clock::now();
    runs.halfspace.push_back(solve_problem(preset("halfspace32", json::object(), g), g, SolverSpec{}));
    total += seconds_since(start);
    const signorini::Run& run = runs.halfspace.back();
    const Grid grid = run.grid();
    const double t_lo = g.t1 - 0.25 * (g.t1 - g.t0);
    double e = 0.0;
    for (int k = 0; k < grid.slices(); ++k) {
      if (grid.time(k) < t_lo - 1e-12) continue;
      for (int p = 0; p < grid.nodes(); ++p) {
        const Coord x = grid.point(p);
        if (std::abs(x[0]) > 0.5 + 1e-12 || x[1] > 0.5 + 1e-12) continue;
        e = std::max(e, std::abs(run.v(k, p) - halfspace_oracle(x)));
      }
    }
    errs.push_back(e);
  }
  const bool monotone = errs[1] < errs[0] && errs[2] < errs[1];
  const bool converged = runs.halfspace[0].converged && runs.halfspace[1].converged && runs.halfspace[2].converged;
  return {monotone && errs[2] <= 1e-2 && total <= 120.0 && converged,
          "sup errors " + fmt(errs) + "; solve time " + fmt(total) + " s"};
}

Outcome growth_exponent(const Runs& runs) {
  const signorini::Run& run = runs.halfspace.back();
  const Grid grid = run.grid();
  std::vector<double> radii, sups;
  for (int i = 0; i <= 8; ++i) {
    const double r = 0.25 * std::pow(0.04 / 0.25, i / 8.0);
    radii.push_back(r);
    sups.push_back(parabolic_ball_sup(grid, run.v, origin(2, 0.0), r).value());
  }
  const LogLogFit fit = loglog_fit(radii, sups);
  return {std::abs(fit.slope - 1.5) <= 0.1, "slope " + fmt(fit.slope) + " (residual " + fmt(fit.residual) + ")"};
}

Outcome bounded_time_derivative(Runs& runs) {
  for (const GridSpec& g : kMovingLevels) {
    signorini::Run run = solve_problem(preset("moving_data", json::object(), g), g, SolverSpec{});
    runs.moving_sup_dt.push_back(sup_dt_bound(run).sup_dt);
    if (g.m == 65) runs.moving = std::move(run);
  }
  const DtStability s = dt_stability(runs.moving_sup_dt);
  return {s.last_change <= 0.10 && s.no_blowup,
          "sup|dt v| " + fmt(runs.moving_sup_dt) + "; last change " + fmt(100.0 * s.last_change) + "%"};
}

Outcome subcaloricity() {
  struct Case {
    std::string preset;
    json params;
    GridSpec grid;
  };
  // A non-zero obstacle 1/4 - x1^2 - t, so F_h enters.
  const json custom{{"phi", std::vector<double>{0.25, 0.0, -1.0, -1.0}},
                    {"phi0", std::vector<double>{0.375, 0.0, 0.0, -1.0}},
                    {"boundary", std::vector<double>{0.375, 0.0, 0.0, 0.0, -1.0}}};
  const std::vector<Case> cases{{"halfspace32", json::object(), {2, 33, 1e-3, -0.25, 0.0}},
                                {"full_contact", json::object(), {2, 33, 1e-3, -0.25, 0.0}},
                                {"no_contact", json::object(), {2, 33, 1e-3, -0.25, 0.0}},
                                {"moving_data", json::object(), {2, 33, 1e-3, -1.0, 0.0}},
                                {"custom", custom, {2, 33, 1e-3, -0.125, 0.0}},
                                {"moving_data", json::object(), {3, 33, 1.0 / 256.0, -0.25, 0.0}}};
  bool pass = true;
  std::ostringstream detail;
  detail.precision(3);
  for (const Case& c : cases) {
    const signorini::Run run = solve_problem(preset(c.preset, c.params, c.grid), c.grid, SolverSpec{});
    const SubcaloricityResult r = subcaloricity_check(quotients(run.u, run.f, 4));
    const double bound = -1e-6 * run.scale;
    pass = pass && r.tested > 0 && r.min_residual >= bound;
    if (detail.tellp() > 0) detail << "; ";
    detail << c.preset << (c.grid.n == 3 ? "(n=3)" : "") << " " << r.min_residual / run.scale;
  }
  return {pass, "min residual / scale: " + detail.str()};
}

Outcome lcp_triangle() {
  struct Toy {
    std::string preset;
    GridSpec grid;
    int slice;
  };
  const std::vector<Toy> toys{{"halfspace32", {2, 13, 0.01, -0.05, 0.0}, 1},
                              {"moving_data", {2, 13, 0.01, -0.05, 0.0}, 3},
                              {"full_contact", {2, 9, 0.01, -0.05, 0.0}, 1},
                              {"halfspace32", {2, 13, 0.01, -0.05, 0.0}, 4},
                              {"moving_data", {2, 11, 4e-3, -0.1, 0.0}, 10}};
  double worst_psor = 0.0, worst_ratio = 1e300, final_gap = 0.0;
  bool monotone = true;
  int thin_max = 0;
  for (const Toy& t : toys) {
    const SignoriniProblem p = preset(t.preset, json::object(), t.grid);
    const ReducedProblem reduced = reduce(p, t.grid);
    const Grid grid(t.grid);
    const SliceSystem sys(grid);
    Eigen::VectorXd prev = reduced.initial;
    for (int k = 1; k < t.slice; ++k) prev = step(sys, reduced, k, prev, SolverSpec{}).u;
    const Eigen::VectorXd b = sys.rhs(reduced, t.slice, prev);
    const lcp::DenseMatrix<double> M(sys.matrix());
    int thin = 0;
    for (const auto c : sys.constrained()) thin += c;
    thin_max = std::max(thin_max, thin);

    const auto exact = lcp::enumerate_active_sets<double>(M, b, sys.constrained());
    Eigen::VectorXd z = Eigen::VectorXd::Zero(b.size());
    lcp::psor<double>(sys.matrix(), b, sys.constrained(), z);
    worst_psor = std::max(worst_psor, (z - exact.z).cwiseAbs().maxCoeff());

    std::vector<double> gaps;
    Eigen::VectorXd last;
    for (const double eps : {1e-2, 1e-3, 1e-4}) {
      const Eigen::VectorXd ze = penalty_step(sys, b, eps, exact.z);
      // From below, and increasing as eps shrinks.
      if ((exact.z - ze).minCoeff() < -1e-12) monotone = false;
      if (last.size() && (ze - last).minCoeff() < -1e-12) monotone = false;
      gaps.push_back((exact.z - ze).cwiseAbs().maxCoeff());
      last = ze;
    }
    if (gaps[0] > 0.0) {
      worst_ratio = std::min({worst_ratio, gaps[0] / std::max(gaps[1], 1e-300), gaps[1] / std::max(gaps[2], 1e-300)});
    }
    final_gap = std::max(final_gap, gaps[2]);
  }
  const bool shrinking = worst_ratio > 5.0;
  return {worst_psor <= 1e-8 && monotone && shrinking && thin_max <= 12,
          "max |psor - enum| " + fmt(worst_psor) + " over <= " + std::to_string(thin_max) +
              " thin rows; penalty gap at 1e-4 " + fmt(final_gap) + ", worst gap ratio per decade " +
              fmt(worst_ratio)};
}

Outcome regular_classification(const Runs& runs) {
  const signorini::Run& run = runs.halfspace.back();
  const std::vector<double> radii = half_octaves(0.25, 5);  // down to 2 hx
  const Classification c = classify(run, origin(2, 0.0), radii);
  const Classification big = classify(scaled(run, 10.0), origin(2, 0.0), radii);
  std::vector<double> D, D10;
  for (const auto& s : c.samples) D.push_back(s.D);
  for (const auto& s : big.samples) D10.push_back(s.D);
  bool decreasing_in_r = true;
  for (std::size_t i = 1; i < D.size(); ++i) decreasing_in_r = decreasing_in_r && D[i] > D[i - 1];
  const bool same = big.verdict == c.verdict;
  const bool pass = c.verdict == PointClass::regular && D.back() <= 0.15 && decreasing_in_r && same;
  return {pass, "D(r) at r = " + fmt(radii) + ": " + fmt(D) + "; 10u: " + fmt(D10) +
                    (same ? "; same decision" : "; decision differs")};
}

Outcome holder_decay(const Runs& runs) {
  const signorini::Run& run = runs.moving;
  const std::optional<SpaceTimePoint> c = default_point(run);
  if (!c) return {false, "no free boundary point at t = -0.25"};
  const Classification cls = classify(run, *c, half_octaves(0.25, 5));
  const HolderFit h = holder_fit(run, *c, half_octaves(0.25, 5));
  const ModulusCheck m = modulus_iteration_check(run, *c, 0.5, {0.25, 0.125, 0.0625});
  const bool regular = cls.verdict == PointClass::regular;
  return {regular && h.fit.slope > 0.1 && h.fit.residual < 0.2 && m.theta < 1.0,
          "point (" + fmt(c->x[0]) + ", " + fmt(c->t) + ") " + (regular ? "regular" : "not regular") + "; alpha " +
              fmt(h.fit.slope) + " residual " + fmt(h.fit.residual) + "; theta " + fmt(m.theta) + " (omega " +
              fmt(m.omega) + ")"};
}

Outcome free_boundary_graph(const Runs& runs) {
  const signorini::Run& hs = runs.halfspace.back();
  const FreeBoundaryGraph flat = fit_graph(hs, default_window(hs.spec()));
  const double flat_err = tracking_error(flat, [](double, double) { return 0.0; });

  const signorini::Run& mv = runs.moving;
  const auto path = [&](double, double t) { return mv.problem.path(t); };
  const FreeBoundaryGraph graph = fit_graph(mv, default_window(mv.spec()));
  const double track = tracking_error(graph, path);
  const double L_path = parabolic_lipschitz(columns_from(graph, path), graph.min_sep);
  const Smoothness s = time_smoothness(graph);
  const double two_hx = 2.0 * graph.hx;
  const bool pass = flat.graphical && graph.graphical && flat_err <= 2.0 * flat.hx && track <= two_hx &&
                    std::abs(graph.L_est - L_path) <= 0.5 * L_path && !s.flat && s.fit.slope > 0.1;
  return {pass, "halfspace sup|g| " + fmt(flat_err) + "; moving sup|g - s| " + fmt(track) + " (2hx " +
                    fmt(two_hx) + "); L_est " + fmt(graph.L_est) + " vs path " + fmt(L_path) +
                    "; d_t g exponent " + fmt(s.fit.slope)};
}

Outcome height_calibration(const Runs& runs) {
  const GridSpec g = kHalfspaceLevels[2];
  const Grid grid(g);
  ScalarField one(g), oracle(g);
  for (int k = 0; k < grid.slices(); ++k) {
    for (int p = 0; p < grid.nodes(); ++p) {
      one(k, p) = 1.0;
      oracle(k, p) = halfspace_oracle(grid.point(p));
    }
  }
  const Cutoff full = Cutoff::everywhere();
  const std::vector<double> radii = half_octaves(0.25, 5);

  // Unit height where r^2 spans many slices; the two slices nearest the center are left out.
  std::vector<double> H1;
  bool unit = true;
  for (const double r : {0.25, 0.25 / std::sqrt(2.0), 0.125}) {
    H1.push_back(height(grid, one, origin(2, 0.0), r, full));
    unit = unit && std::abs(H1.back() - 1.0) <= 0.05;
  }

  const signorini::Run& run = runs.halfspace.back();
  ScalarField big = run.u;
  big.data() *= 10.0;
  double homog = 0.0;
  for (const double r : radii) {
    const double a = height(grid, run.u, origin(2, 0.0), r);
    const double b = height(grid, big, origin(2, 0.0), r);
    homog = std::max(homog, std::abs(b - 100.0 * a) / (100.0 * a));
  }

  std::vector<double> q;
  for (const double r : radii) q.push_back(height(grid, oracle, origin(2, 0.0), r, full) / std::pow(r, 3));
  const double spread = *std::max_element(q.begin(), q.end()) / *std::min_element(q.begin(), q.end()) - 1.0;
  return {unit && homog <= 1e-12 && spread <= 0.10,
          "H[1] " + fmt(H1) + "; homogeneity " + fmt(homog) + "; H/r^3 " + fmt(q) + " (spread " +
              fmt(100.0 * spread) + "%)"};
}

}  // namespace

int main() {
  Runs runs;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 oracle convergence", [&] { return oracle_convergence(runs); }},
      {"2 growth exponent 3/2", [&] { return growth_exponent(runs); }},
      {"3 bounded time derivative", [&] { return bounded_time_derivative(runs); }},
      {"4 subcaloricity", [] { return subcaloricity(); }},
      {"5 LCP oracle triangle", [] { return lcp_triangle(); }},
      {"6 regular point classification", [&] { return regular_classification(runs); }},
      {"7 Holder decay at a regular point", [&] { return holder_decay(runs); }},
      {"8 free boundary graph", [&] { return free_boundary_graph(runs); }},
      {"9 height calibration", [&] { return height_calibration(runs); }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
