#include "signorini/run.hpp"

namespace signorini {

Run solve_problem(const SignoriniProblem& problem, const GridSpec& spec, const SolverSpec& solver) {
  Run run;
  run.problem = problem;
  run.reduced = reduce(problem, spec);
  run.solver = solver;
  Solution sol = solve(run.reduced, solver);
  const Grid grid(spec);
  run.u = std::move(sol.u);
  run.v = unreduce(grid, run.reduced, run.u);
  run.f = forcing_field(grid, run.reduced);
  run.mask = std::move(sol.mask);
  run.stats = std::move(sol.stats);
  run.scale = sol.scale;
  run.converged = sol.converged;
  return run;
}

Run assemble_run(const SignoriniProblem& problem, const GridSpec& spec, const SolverSpec& solver,
                 ScalarField u) {
  if (!(u.spec() == spec)) throw std::invalid_argument("field grid does not match the run grid");
  Run run;
  run.problem = problem;
  run.reduced = reduce(problem, spec);
  run.solver = solver;
  run.scale = data_scale(run.reduced);
  const Grid grid(spec);
  run.u = std::move(u);
  run.v = unreduce(grid, run.reduced, run.u);
  run.f = forcing_field(grid, run.reduced);
  run.mask = CoincidenceMask(grid.thin_count(), grid.slices());
  for (int k = 0; k < grid.slices(); ++k) {
    const auto c = contact_of(grid, run.u.slice(k), run.contact_tol());
    for (int j = 0; j < grid.thin_count(); ++j) run.mask.set(k, j, c[j]);
  }
  run.stats.resize(grid.slices());
  return run;
}

Run scaled(const Run& run, double lambda) {
  Run out = run;
  out.u.data() *= lambda;
  out.v.data() *= lambda;
  out.f.data() *= lambda;
  out.reduced.phi *= lambda;
  out.reduced.forcing *= lambda;
  out.reduced.initial *= lambda;
  out.reduced.boundary *= lambda;
  out.reduced.budget.sup_phi *= lambda;
  out.reduced.budget.sup_dt_phi *= lambda;
  out.reduced.budget.sup_lap_phi *= lambda;
  out.reduced.budget.sup_dt_forcing *= lambda;
  out.scale = data_scale(out.reduced);
  return out;
}

}  // namespace signorini
