#include "signorini/solver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace signorini {

Method method_from_string(const std::string& name) {
  if (name == "psor") return Method::psor;
  if (name == "active_set") return Method::active_set;
  if (name == "penalty") return Method::penalty;
  throw std::invalid_argument("unknown solver method '" + name + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::psor:
      return "psor";
    case Method::active_set:
      return "active_set";
    case Method::penalty:
      return "penalty";
  }
  return "psor";
}

void validate(const SolverSpec& spec) {
  if (!(spec.omega > 0.0 && spec.omega < 2.0)) throw std::invalid_argument("omega must lie in (0, 2)");
  if (!(spec.tol_residual > 0.0) || !(spec.tol_comp > 0.0)) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
  if (spec.max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  for (std::size_t i = 0; i < spec.penalty_eps.size(); ++i) {
    if (!(spec.penalty_eps[i] > 0.0) || (i > 0 && !(spec.penalty_eps[i] < spec.penalty_eps[i - 1]))) {
      throw std::invalid_argument("penalty_eps must be positive and strictly decreasing");
    }
  }
  if (spec.method == Method::penalty && spec.penalty_eps.empty()) {
    throw std::invalid_argument("penalty method needs at least one eps");
  }
}

int CoincidenceMask::count(int k) const {
  int c = 0;
  for (int j = 0; j < thin_; ++j) c += contact(k, j) ? 1 : 0;
  return c;
}

double data_scale(const ReducedProblem& reduced) {
  double s = 1.0;
  if (reduced.initial.size()) s = std::max(s, reduced.initial.cwiseAbs().maxCoeff());
  if (reduced.boundary.size()) s = std::max(s, reduced.boundary.cwiseAbs().maxCoeff());
  if (reduced.forcing.size()) s = std::max(s, reduced.forcing.cwiseAbs().maxCoeff());
  return s;
}

SliceSystem::SliceSystem(const Grid& grid) : grid_(grid) {
  const int n = grid.n();
  const double dt = grid.dt();
  const double c = dt / (grid.hx() * grid.hx());
  const auto& free = grid.free_nodes();
  row_of_.assign(grid.nodes(), -1);
  for (std::size_t r = 0; r < free.size(); ++r) row_of_[free[r]] = static_cast<int>(r);
  std::vector<int> outer_pos(grid.nodes(), -1);
  for (std::size_t i = 0; i < grid.outer_nodes().size(); ++i) outer_pos[grid.outer_nodes()[i]] = static_cast<int>(i);

  const Eigen::Index rows = static_cast<Eigen::Index>(free.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(free.size() * (2 * n + 1));
  constrained_.assign(free.size(), 0);
  row_scale_.assign(free.size(), 1.0);
  for (std::size_t r = 0; r < free.size(); ++r) {
    const int p = free[r];
    const bool thin = grid.kind(p) == NodeKind::thin;
    const double s = thin ? 0.5 : 1.0;
    constrained_[r] = thin ? 1 : 0;
    row_scale_[r] = s;
    trips.emplace_back(r, r, s * (1.0 + 2.0 * n * c));
    for (int a = 0; a < n; ++a) {
      for (const int dir : {-1, 1}) {
        const int q = grid.neighbor(p, a, dir);
        if (row_of_[q] >= 0) {
          trips.emplace_back(r, row_of_[q], -s * c);
        } else {
          couplings_.push_back({static_cast<int>(r), outer_pos[q], s * c});
        }
      }
    }
  }
  matrix_.resize(rows, rows);
  matrix_.setFromTriplets(trips.begin(), trips.end());
  matrix_.makeCompressed();
}

Eigen::VectorXd SliceSystem::rhs(const ReducedProblem& reduced, int k, const Eigen::Ref<const Eigen::VectorXd>& prev) const {
  const auto& free = grid_.free_nodes();
  const double dt = grid_.dt();
  Eigen::VectorXd b(static_cast<Eigen::Index>(free.size()));
  for (std::size_t r = 0; r < free.size(); ++r) {
    const int p = free[r];
    b[r] = row_scale_[r] * (prev[p] - dt * reduced.forcing(column_of(grid_, p), k));
  }
  for (const auto& cp : couplings_) b[cp.row] += cp.coeff * reduced.boundary(cp.outer, k);
  return b;
}

Eigen::VectorXd SliceSystem::gather(const Eigen::Ref<const Eigen::VectorXd>& slice) const {
  const auto& free = grid_.free_nodes();
  Eigen::VectorXd z(static_cast<Eigen::Index>(free.size()));
  for (std::size_t r = 0; r < free.size(); ++r) z[r] = slice[free[r]];
  return z;
}

Eigen::VectorXd SliceSystem::scatter(const Eigen::VectorXd& z, const ReducedProblem& reduced, int k) const {
  Eigen::VectorXd slice(grid_.nodes());
  const auto& free = grid_.free_nodes();
  for (std::size_t r = 0; r < free.size(); ++r) slice[free[r]] = z[r];
  const auto& outer = grid_.outer_nodes();
  for (std::size_t i = 0; i < outer.size(); ++i) slice[outer[i]] = reduced.boundary(i, k);
  return slice;
}

std::vector<std::uint8_t> contact_of(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice, double tol) {
  std::vector<std::uint8_t> c(grid.thin_count());
  for (int j = 0; j < grid.thin_count(); ++j) c[j] = slice[grid.thin_node(j)] <= tol ? 1 : 0;
  return c;
}

namespace {

Eigen::VectorXd solve_active_set(const SliceSystem& system, const Eigen::VectorXd& b) {
  int count = 0;
  for (const auto c : system.constrained()) count += c;
  if (count > 12) throw std::invalid_argument("active_set method is limited to 12 thin nodes");
  const lcp::DenseMatrix<double> M(system.matrix());
  return lcp::enumerate_active_sets<double>(M, b, system.constrained()).z;
}

}  // namespace

StepResult step(const SliceSystem& system, const ReducedProblem& reduced, int k,
                const Eigen::Ref<const Eigen::VectorXd>& prev, const SolverSpec& spec) {
  if (k < 1) throw std::invalid_argument("step needs k >= 1");
  if (!prev.allFinite()) throw NumericalError("non-finite previous slice", k);
  const double scale = data_scale(reduced);
  const Eigen::VectorXd b = system.rhs(reduced, k, prev);
  Eigen::VectorXd z = system.gather(prev);
  const auto& M = system.matrix();
  const auto& cons = system.constrained();

  StepResult out;
  switch (spec.method) {
    case Method::psor: {
      lcp::PsorOptions<double> opts{spec.omega, spec.tol_residual * scale, spec.max_iters};
      const auto res = lcp::psor<double>(M, b, cons, z, opts);
      out.iterations = res.iterations;
      out.converged = res.converged;
      break;
    }
    case Method::active_set:
      z = solve_active_set(system, b);
      out.iterations = 1;
      out.converged = true;
      break;
    case Method::penalty:
      for (const double eps : spec.penalty_eps) {
        z = penalty_step(system, b, eps, z, k);
        ++out.iterations;
      }
      out.converged = true;
      break;
  }
  if (!z.allFinite()) throw NumericalError("non-finite iterate", k);

  const Eigen::VectorXd w = M * z - b;
  for (Eigen::Index r = 0; r < z.size(); ++r) {
    if (cons[r]) {
      out.comp_gap = std::max(out.comp_gap, std::abs(z[r] * w[r]));
    } else {
      out.residual = std::max(out.residual, std::abs(w[r]));
    }
  }
  const Grid& grid = system.grid();
  out.u = system.scatter(z, reduced, k);
  out.contact = contact_of(grid, out.u, spec.tol_comp * scale);
  out.flux = Eigen::VectorXd::Zero(grid.thin_count());
  // Halved thin rows: w = (u - dt Lap u - rhs) / 2 ~ -(dt / hx) d/dx_n u.
  const double to_flux = -grid.hx() / grid.dt();
  for (int j = 0; j < grid.thin_count(); ++j) {
    const int r = system.row_of(grid.thin_node(j));
    if (r >= 0) out.flux[j] = to_flux * w[r];
  }
  return out;
}

Solution solve(const ReducedProblem& reduced, const SolverSpec& spec) {
  validate(spec);
  const Grid grid(reduced.spec);
  const SliceSystem system(grid);
  Solution sol;
  sol.scale = data_scale(reduced);
  sol.u = ScalarField(reduced.spec);
  sol.mask = CoincidenceMask(grid.thin_count(), grid.slices());
  sol.stats.resize(grid.slices());
  sol.u.slice(0) = reduced.initial;
  {
    const auto c0 = contact_of(grid, reduced.initial, spec.tol_comp * sol.scale);
    for (int j = 0; j < grid.thin_count(); ++j) sol.mask.set(0, j, c0[j]);
  }
  for (int k = 1; k < grid.slices(); ++k) {
    StepResult r = step(system, reduced, k, sol.u.slice(k - 1), spec);
    sol.u.slice(k) = r.u;
    for (int j = 0; j < grid.thin_count(); ++j) sol.mask.set(k, j, r.contact[j]);
    sol.stats[k] = {r.iterations, r.residual, r.comp_gap, r.converged};
    sol.converged = sol.converged && r.converged;
  }
  return sol;
}

Eigen::VectorXd penalty_step(const SliceSystem& system, const Eigen::VectorXd& b, double eps, Eigen::VectorXd z,
                             int slice) {
  if (!(eps > 0.0)) throw std::invalid_argument("penalty eps must be positive");
  const auto& cons = system.constrained();
  const Eigen::SparseMatrix<double> base(system.matrix());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.analyzePattern(base);
  std::vector<std::uint8_t> active(z.size(), 0);
  for (Eigen::Index r = 0; r < z.size(); ++r) active[r] = cons[r] && z[r] < 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::SparseMatrix<double> A = base;
    for (Eigen::Index r = 0; r < z.size(); ++r) {
      if (active[r]) A.coeffRef(r, r) += 1.0 / eps;
    }
    ldlt.factorize(A);
    if (ldlt.info() != Eigen::Success) throw NumericalError("penalty factorization failed", slice);
    z = ldlt.solve(b);
    bool changed = false;
    for (Eigen::Index r = 0; r < z.size(); ++r) {
      const std::uint8_t next = cons[r] && z[r] < 0.0;
      changed = changed || next != active[r];
      active[r] = next;
    }
    if (!changed) return z;
  }
  throw NumericalError("penalty Newton iteration did not settle", slice);
}

ScalarField penalty_solve(const ReducedProblem& reduced, double eps) {
  const Grid grid(reduced.spec);
  const SliceSystem system(grid);
  ScalarField u(reduced.spec);
  u.slice(0) = reduced.initial;
  for (int k = 1; k < grid.slices(); ++k) {
    const Eigen::VectorXd b = system.rhs(reduced, k, u.slice(k - 1));
    const Eigen::VectorXd z = penalty_step(system, b, eps, system.gather(u.slice(k - 1)), k);
    u.slice(k) = system.scatter(z, reduced, k);
  }
  return u;
}

}  // namespace signorini
