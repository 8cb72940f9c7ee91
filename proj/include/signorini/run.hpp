#pragma once

#include "signorini/grid.hpp"
#include "signorini/problem.hpp"
#include "signorini/solver.hpp"

#include <functional>
#include <optional>

namespace signorini {

/// A solved problem with everything the analyses read.
struct Run {
  SignoriniProblem problem;
  ReducedProblem reduced;
  SolverSpec solver;
  ScalarField u;  // reduced solution, zero thin obstacle
  ScalarField v;  // u + phi
  ScalarField f;  // forcing, constant in x_n
  CoincidenceMask mask;
  std::vector<StepStats> stats;
  double scale = 1.0;
  bool converged = true;

  const GridSpec& spec() const { return reduced.spec; }
  Grid grid() const { return Grid(reduced.spec); }
  /// Contact threshold used for the mask.
  double contact_tol() const { return solver.tol_comp * scale; }
};

Run solve_problem(const SignoriniProblem& problem, const GridSpec& spec, const SolverSpec& solver);

/// A run whose u was computed elsewhere (read back from disk, or synthetic).
Run assemble_run(const SignoriniProblem& problem, const GridSpec& spec, const SolverSpec& solver,
                 ScalarField u);

/// Run with u, v, f multiplied by lambda; the mask is unchanged.
Run scaled(const Run& run, double lambda);

}  // namespace signorini
