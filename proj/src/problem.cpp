#include "signorini/problem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace signorini {

// ---------------------------------------------------------------- Polynomial

std::vector<std::array<int, 4>> graded_lex_monomials(int vars, int count) {
  if (vars < 1 || vars > 4) throw std::invalid_argument("polynomials support 1 to 4 variables");
  std::vector<std::array<int, 4>> out;
  for (int degree = 0; static_cast<int>(out.size()) < count; ++degree) {
    // Enumerate exponent vectors of this degree, lexicographically descending.
    std::array<int, 4> e{0, 0, 0, 0};
    std::function<void(int, int)> fill = [&](int var, int left) {
      if (static_cast<int>(out.size()) >= count) return;
      if (var == vars - 1) {
        e[var] = left;
        out.push_back(e);
        return;
      }
      for (int k = left; k >= 0; --k) {
        e[var] = k;
        fill(var + 1, left - k);
      }
      e[var] = 0;
    };
    fill(0, degree);
  }
  return out;
}

Polynomial::Polynomial(int vars, const std::vector<double>& coeffs) : vars_(vars) {
  const auto monos = graded_lex_monomials(vars, static_cast<int>(coeffs.size()));
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] != 0.0) terms_.push_back({monos[i], coeffs[i]});
  }
}

double Polynomial::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double acc = 0.0;
  for (const auto& term : terms_) {
    double v = term.coeff;
    for (int a = 0; a < vars_; ++a) {
      for (int k = 0; k < term.exps[a]; ++k) v *= x[a];
    }
    acc += v;
  }
  return acc;
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial d;
  d.vars_ = vars_;
  for (const auto& term : terms_) {
    if (term.exps[var] == 0) continue;
    Term t = term;
    t.coeff *= term.exps[var];
    t.exps[var] -= 1;
    d.terms_.push_back(t);
  }
  return d;
}

// ------------------------------------------------------------------ Obstacles

namespace {

SpaceTimeFn constant_fn(double c) {
  return [c](const Coord&, double) { return c; };
}

// (x_1, ..., x_{n-1}, t) as a polynomial argument.
Eigen::VectorXd tangential_args(const Coord& x, double t, int n) {
  Eigen::VectorXd a(n);
  for (int i = 0; i < n - 1; ++i) a[i] = x[i];
  a[n - 1] = t;
  return a;
}

}  // namespace

ThinObstacle zero_obstacle() {
  return {constant_fn(0.0), constant_fn(0.0), constant_fn(0.0), constant_fn(0.0), true};
}

ThinObstacle polynomial_obstacle(int n, const Polynomial& phi) {
  if (phi.vars() != n) throw std::invalid_argument("obstacle polynomial needs n variables (x', t)");
  if (phi.is_zero()) return zero_obstacle();
  const int tv = n - 1;
  Polynomial dt = phi.derivative(tv);
  std::vector<Polynomial> seconds;
  for (int a = 0; a < n - 1; ++a) seconds.push_back(phi.derivative(a).derivative(a));
  Polynomial dt2 = dt.derivative(tv);
  std::vector<Polynomial> dt_seconds;
  for (const auto& s : seconds) dt_seconds.push_back(s.derivative(tv));

  auto eval = [n](const Polynomial& p) {
    return [p, n](const Coord& x, double t) { return p(tangential_args(x, t, n)); };
  };
  auto eval_sum = [n](std::vector<Polynomial> ps) {
    return [ps = std::move(ps), n](const Coord& x, double t) {
      const Eigen::VectorXd a = tangential_args(x, t, n);
      double acc = 0.0;
      for (const auto& p : ps) acc += p(a);
      return acc;
    };
  };
  ThinObstacle o;
  o.value = eval(phi);
  o.dt = eval(dt);
  o.lap = eval_sum(seconds);
  auto lap_dt = eval_sum(dt_seconds);
  auto dtt = eval(dt2);
  o.dt_forcing = [dtt, lap_dt](const Coord& x, double t) { return dtt(x, t) - lap_dt(x, t); };
  return o;
}

ThinObstacle sampled_obstacle(const Grid& grid, const Eigen::MatrixXd& samples) {
  if (samples.rows() != grid.thin_count() || samples.cols() != grid.slices()) {
    throw std::invalid_argument("obstacle samples must be thin_count x slices");
  }
  const int n = grid.n();
  const int m = grid.spec().m;
  const int slices = grid.slices();
  const double dt = grid.dt();
  const double inv_h2 = 1.0 / (grid.hx() * grid.hx());

  // Thin-plane strides over the tangential multi-index.
  std::array<int, 2> tstride{1, 1};
  if (n == 3) tstride = {m, 1};

  auto time_derivative = [&](const Eigen::MatrixXd& s) {
    Eigen::MatrixXd d(s.rows(), s.cols());
    for (int k = 0; k < slices; ++k) {
      const int lo = std::max(k - 1, 0);
      const int hi = std::min(k + 1, slices - 1);
      d.col(k) = (s.col(hi) - s.col(lo)) / ((hi - lo) * dt);
    }
    return d;
  };
  auto tangential_laplacian = [&](const Eigen::MatrixXd& s) {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(s.rows(), s.cols());
    for (int j = 0; j < grid.thin_count(); ++j) {
      int rest = j;
      for (int a = 0; a < n - 1; ++a) {
        const int i = rest / tstride[a];
        rest -= i * tstride[a];
        // Edge nodes reuse the stencil of their inward neighbour.
        const int c = j + (i == 0 ? tstride[a] : (i == m - 1 ? -tstride[a] : 0));
        l.row(j) += (s.row(c + tstride[a]) - 2.0 * s.row(c) + s.row(c - tstride[a])) * inv_h2;
      }
    }
    return l;
  };

  const Eigen::MatrixXd dts = time_derivative(samples);
  const Eigen::MatrixXd laps = tangential_laplacian(samples);
  const Eigen::MatrixXd dtf = time_derivative(dts - laps);

  auto lookup = [&grid, m, n](const Eigen::MatrixXd& table) -> SpaceTimeFn {
    const GridSpec spec = grid.spec();
    const double hx = grid.hx();
    return [table, spec, hx, m, n](const Coord& x, double t) {
      const double ks = (t - spec.t0) / spec.dt;
      const long k = std::lround(ks);
      if (std::abs(ks - k) > 1e-6 || k < 0 || k >= table.cols()) {
        throw std::invalid_argument("sampled obstacle evaluated off the time grid");
      }
      int j = 0;
      for (int a = 0; a < n - 1; ++a) {
        const double is = (x[a] + 1.0) / hx;
        const long i = std::lround(is);
        if (std::abs(is - i) > 1e-6 || i < 0 || i >= m) {
          throw std::invalid_argument("sampled obstacle evaluated off the spatial grid");
        }
        j = j * m + static_cast<int>(i);
      }
      return table(j, k);
    };
  };
  ThinObstacle o;
  o.value = lookup(samples);
  o.dt = lookup(dts);
  o.lap = lookup(laps);
  o.dt_forcing = lookup(dtf);
  o.zero = samples.isZero(0.0);
  return o;
}

// -------------------------------------------------------------------- Presets

double halfspace_profile(double a, double b) {
  b = std::abs(b);
  const double r = std::hypot(a, b);
  // z^{1/2} = (sqrt((r+a)/2), sqrt((r-a)/2)) on the closed upper half plane.
  const double re = std::sqrt(0.5 * std::max(r + a, 0.0));
  const double im = std::sqrt(0.5 * std::max(r - a, 0.0));
  return a * re - b * im;
}

namespace {

// d/da and d/db of Re(a + ib)^{3/2} for b >= 0.
double halfspace_db(double a, double b) {
  const double r = std::hypot(a, b);
  return -1.5 * std::sqrt(0.5 * std::max(r - a, 0.0));
}

double param(const nlohmann::json& params, const char* key, double fallback) {
  if (params.is_object() && params.contains(key)) return params.at(key).get<double>();
  return fallback;
}

Polynomial param_poly(const nlohmann::json& params, const char* key, int vars) {
  if (!params.is_object() || !params.contains(key)) return Polynomial(vars, {});
  return Polynomial(vars, params.at(key).get<std::vector<double>>());
}

SignoriniProblem halfspace32(int n) {
  SignoriniProblem p;
  p.preset = "halfspace32";
  p.n = n;
  p.phi = zero_obstacle();
  auto v = [n](const Coord& x, double) { return halfspace_profile(x[n - 2], x[n - 1]); };
  p.initial = [v](const Coord& x) { return v(x, 0.0); };
  p.boundary = v;
  p.oracle = Oracle{v, constant_fn(0.0), [n](const Coord& x, double) {
                      return halfspace_db(x[n - 2], 0.0);
                    }};
  p.path = [](double) { return 0.0; };
  return p;
}

SignoriniProblem full_contact(int n) {
  SignoriniProblem p;
  p.preset = "full_contact";
  p.n = n;
  p.phi = zero_obstacle();
  auto v = [n](const Coord& x, double) { return -x[n - 1]; };
  p.initial = [v](const Coord& x) { return v(x, 0.0); };
  p.boundary = v;
  p.oracle = Oracle{v, constant_fn(0.0), constant_fn(-1.0)};
  return p;
}

SignoriniProblem no_contact(int n, const nlohmann::json& params, const GridSpec& grid) {
  const double c = param(params, "c", 3.0);
  if (!(c + std::min(grid.t0, grid.t1) > 0.0)) {
    std::ostringstream msg;
    msg << "no_contact: c = " << c << " too small; need c + t0 > 0 (t0 = " << grid.t0 << ")";
    throw std::invalid_argument(msg.str());
  }
  SignoriniProblem p;
  p.preset = "no_contact";
  p.n = n;
  p.phi = zero_obstacle();
  auto v = [c, n](const Coord& x, double t) { return c + t + x.squaredNorm() / (2.0 * n); };
  p.initial = [v, t0 = grid.t0](const Coord& x) { return v(x, t0); };
  p.boundary = v;
  p.oracle = Oracle{v, constant_fn(1.0), [n](const Coord& x, double) { return x[n - 1] / n; }};
  return p;
}

SignoriniProblem moving_data(int n, const nlohmann::json& params, const GridSpec& grid) {
  const double s0 = param(params, "s0", 0.0);
  const double speed = param(params, "speed", -0.2);
  const double accel = param(params, "accel", 0.2);
  const double kink = param(params, "kink", 0.2);
  const double kink_radius = param(params, "kink_radius", 0.25);
  const double t0 = grid.t0;
  if (kink < 0.0) throw std::invalid_argument("moving_data: kink must be nonnegative");

  auto path = [=](double t) { return s0 + speed * (t - t0) + accel * (t - t0) * (t - t0); };
  SignoriniProblem p;
  p.preset = "moving_data";
  p.n = n;
  p.phi = zero_obstacle();
  p.path = path;
  p.boundary = [n, path](const Coord& x, double t) {
    return halfspace_profile(x[n - 2] - path(t), x[n - 1]);
  };
  // Lipschitz cone bump away from the thin plane on top of the translated profile.
  p.initial = [=](const Coord& x) {
    Coord c = Coord::Zero(n);
    c[n - 2] = 0.5;
    c[n - 1] = 0.6;
    const double cone = std::max(0.0, kink_radius - (x - c).norm());
    return halfspace_profile(x[n - 2] - path(t0), x[n - 1]) + kink * cone;
  };
  return p;
}

SignoriniProblem custom(int n, const nlohmann::json& params) {
  SignoriniProblem p;
  p.preset = "custom";
  p.n = n;
  const Polynomial phi = param_poly(params, "phi", n);
  p.phi = polynomial_obstacle(n, phi);
  const Polynomial phi0 = param_poly(params, "phi0", n);
  const Polynomial bnd = param_poly(params, "boundary", n + 1);
  // All-zero data: v = 0 is the solution.
  if (phi.is_zero() && phi0.is_zero() && bnd.is_zero()) {
    p.oracle = Oracle{constant_fn(0.0), constant_fn(0.0), constant_fn(0.0)};
  }
  p.initial = [phi0, n](const Coord& x) { return phi0(Eigen::VectorXd(x.head(n))); };
  p.boundary = [bnd, n](const Coord& x, double t) {
    Eigen::VectorXd a(n + 1);
    a.head(n) = x.head(n);
    a[n] = t;
    return bnd(a);
  };
  return p;
}

}  // namespace

SignoriniProblem preset(const std::string& name, const nlohmann::json& params, const GridSpec& grid) {
  validate(grid);
  const int n = grid.n;
  if (name == "halfspace32") return halfspace32(n);
  if (name == "full_contact") return full_contact(n);
  if (name == "no_contact") return no_contact(n, params, grid);
  if (name == "moving_data") return moving_data(n, params, grid);
  if (name == "custom") return custom(n, params);
  throw std::invalid_argument("unknown preset '" + name + "'");
}

double oracle_eval(const SignoriniProblem& problem, OracleQuantity which, const Coord& x, double t) {
  if (!problem.oracle) throw std::invalid_argument("problem '" + problem.preset + "' has no oracle");
  switch (which) {
    case OracleQuantity::v:
      return problem.oracle->v(x, t);
    case OracleQuantity::dtv:
      return problem.oracle->dtv(x, t);
    case OracleQuantity::flux:
      return problem.oracle->flux(x, t);
  }
  return 0.0;
}

// ------------------------------------------------------------------ Reduction

double ObstacleBudget::surrogate() const {
  return std::max({sup_phi, sup_dt_phi, sup_lap_phi, sup_dt_forcing});
}

ReducedProblem reduce(const SignoriniProblem& problem, const GridSpec& spec) {
  const Grid grid(spec);
  if (problem.n != spec.n) throw std::invalid_argument("problem and grid dimensions differ");
  const int slices = grid.slices();
  ReducedProblem r;
  r.spec = spec;
  r.zero_obstacle = problem.phi.zero;
  r.phi.resize(grid.thin_count(), slices);
  r.forcing.resize(grid.thin_count(), slices);
  for (int k = 0; k < slices; ++k) {
    const double t = grid.time(k);
    for (int j = 0; j < grid.thin_count(); ++j) {
      const Coord x = grid.point(grid.thin_node(j));
      const double phi = problem.phi.value(x, t);
      const double dtphi = problem.phi.dt(x, t);
      const double lap = problem.phi.lap(x, t);
      const double dtf = problem.phi.dt_forcing(x, t);
      r.phi(j, k) = phi;
      r.forcing(j, k) = dtphi - lap;
      r.budget.sup_phi = std::max(r.budget.sup_phi, std::abs(phi));
      r.budget.sup_dt_phi = std::max(r.budget.sup_dt_phi, std::abs(dtphi));
      r.budget.sup_lap_phi = std::max(r.budget.sup_lap_phi, std::abs(lap));
      r.budget.sup_dt_forcing = std::max(r.budget.sup_dt_forcing, std::abs(dtf));
    }
  }
  if (!r.phi.allFinite() || !r.forcing.allFinite() || !std::isfinite(r.budget.sup_dt_forcing)) {
    throw std::invalid_argument("obstacle or its derivatives are not finite on the grid");
  }

  for (int j = 0; j < grid.thin_count(); ++j) {
    const int p = grid.thin_node(j);
    const Coord x = grid.point(p);
    const double phi0 = problem.initial(x);
    if (phi0 < r.phi(j, 0)) {
      std::ostringstream msg;
      msg << "initial data below obstacle at thin node x' = (";
      for (int a = 0; a < spec.n - 1; ++a) msg << (a ? ", " : "") << x[a];
      msg << "): phi0 = " << phi0 << " < phi = " << r.phi(j, 0);
      throw std::invalid_argument(msg.str());
    }
  }

  r.initial.resize(grid.nodes());
  for (int p = 0; p < grid.nodes(); ++p) {
    r.initial[p] = problem.initial(grid.point(p)) - r.phi(column_of(grid, p), 0);
  }
  const auto& outer = grid.outer_nodes();
  r.boundary.resize(static_cast<Eigen::Index>(outer.size()), slices);
  for (int k = 0; k < slices; ++k) {
    const double t = grid.time(k);
    for (std::size_t i = 0; i < outer.size(); ++i) {
      const int p = outer[i];
      r.boundary(static_cast<Eigen::Index>(i), k) = problem.boundary(grid.point(p), t) - r.phi(column_of(grid, p), k);
    }
  }
  if (!r.initial.allFinite() || !r.boundary.allFinite()) {
    throw std::invalid_argument("initial or boundary data not finite on the grid");
  }
  return r;
}

ScalarField forcing_field(const Grid& grid, const ReducedProblem& reduced) {
  ScalarField f(grid.spec());
  for (int k = 0; k < grid.slices(); ++k) {
    for (int p = 0; p < grid.nodes(); ++p) f(k, p) = reduced.forcing(column_of(grid, p), k);
  }
  return f;
}

ScalarField unreduce(const Grid& grid, const ReducedProblem& reduced, const ScalarField& u) {
  ScalarField v(u.spec());
  for (int k = 0; k < u.slices(); ++k) {
    for (int p = 0; p < grid.nodes(); ++p) v(k, p) = u(k, p) + reduced.phi(column_of(grid, p), k);
  }
  return v;
}

Eigen::VectorXd unreduce_initial(const Grid& grid, const ReducedProblem& reduced) {
  Eigen::VectorXd v(grid.nodes());
  for (int p = 0; p < grid.nodes(); ++p) v[p] = reduced.initial[p] + reduced.phi(column_of(grid, p), 0);
  return v;
}

Eigen::MatrixXd unreduce_boundary(const Grid& grid, const ReducedProblem& reduced) {
  Eigen::MatrixXd b = reduced.boundary;
  const auto& outer = grid.outer_nodes();
  for (Eigen::Index k = 0; k < b.cols(); ++k) {
    for (std::size_t i = 0; i < outer.size(); ++i) {
      b(static_cast<Eigen::Index>(i), k) += reduced.phi(column_of(grid, outer[i]), k);
    }
  }
  return b;
}

}  // namespace signorini
