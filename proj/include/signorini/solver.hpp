#pragma once

#include "signorini/grid.hpp"
#include "signorini/lcp.hpp"
#include "signorini/problem.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace signorini {

enum class Method { psor, active_set, penalty };

Method method_from_string(const std::string& name);
std::string to_string(Method method);

struct SolverSpec {
  Method method = Method::psor;
  double omega = 1.5;
  double tol_residual = 1e-13;
  double tol_comp = 1e-10;
  int max_iters = 20000;
  std::vector<double> penalty_eps{1e-2, 1e-3, 1e-4};
};

void validate(const SolverSpec& spec);

/// Aborts a run: non-finite iterate or a failed inner solve.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int slice)
      : std::runtime_error(what + " at slice " + std::to_string(slice)), slice_(slice) {}
  int slice() const { return slice_; }

 private:
  int slice_;
};

/// Contact indicator per (slice, thin-plane node).
class CoincidenceMask {
 public:
  CoincidenceMask() = default;
  CoincidenceMask(int thin_count, int slices) : thin_(thin_count), slices_(slices), bits_(thin_count * slices, 0) {}

  int thin_count() const { return thin_; }
  int slices() const { return slices_; }
  bool contact(int k, int j) const { return bits_[static_cast<std::size_t>(k) * thin_ + j] != 0; }
  void set(int k, int j, bool c) { bits_[static_cast<std::size_t>(k) * thin_ + j] = c ? 1 : 0; }
  const std::vector<std::uint8_t>& bytes() const { return bits_; }
  int count(int k) const;

  bool operator==(const CoincidenceMask&) const = default;

 private:
  int thin_ = 0;
  int slices_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// max(1, sup of |initial|, |boundary|, |f|): the unit for solver tolerances.
double data_scale(const ReducedProblem& reduced);

/// Implicit Euler slice system (I - dt Lap_h) u_k = u_{k-1} - dt f_k over the
/// non-outer nodes. Thin-plane rows are halved so that the matrix is a
/// symmetric positive definite M-matrix; those rows are the complementarity
/// rows of the mixed LCP.
class SliceSystem {
 public:
  explicit SliceSystem(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const lcp::SparseMatrix<double>& matrix() const { return matrix_; }
  const lcp::RowMask& constrained() const { return constrained_; }
  Eigen::Index size() const { return matrix_.rows(); }

  /// Right-hand side for slice k given the previous slice.
  Eigen::VectorXd rhs(const ReducedProblem& reduced, int k, const Eigen::Ref<const Eigen::VectorXd>& prev) const;
  /// Unknown vector from a half-grid slice.
  Eigen::VectorXd gather(const Eigen::Ref<const Eigen::VectorXd>& slice) const;
  /// Half-grid slice from unknowns plus the outer boundary values of slice k.
  Eigen::VectorXd scatter(const Eigen::VectorXd& z, const ReducedProblem& reduced, int k) const;
  /// Row of a free node, -1 for outer nodes.
  int row_of(int node) const { return row_of_[node]; }

 private:
  struct Coupling {
    int row;
    int outer;
    double coeff;
  };
  Grid grid_;
  lcp::SparseMatrix<double> matrix_;
  lcp::RowMask constrained_;
  std::vector<double> row_scale_;
  std::vector<int> row_of_;
  std::vector<Coupling> couplings_;
};

struct StepResult {
  Eigen::VectorXd u;                  // half-grid slice at t_k
  std::vector<std::uint8_t> contact;  // per thin-plane node
  Eigen::VectorXd flux;               // discrete d/dx_n u(x', 0+) per thin-plane node; 0 off free rows
  int iterations = 0;
  double residual = 0.0;   // sup equation residual over interior rows
  double comp_gap = 0.0;   // sup |u * w| over thin rows
  bool converged = false;
};

StepResult step(const SliceSystem& system, const ReducedProblem& reduced, int k,
                const Eigen::Ref<const Eigen::VectorXd>& prev, const SolverSpec& spec);

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
  double comp_gap = 0.0;
  bool converged = true;
};

struct Solution {
  ScalarField u;
  CoincidenceMask mask;
  std::vector<StepStats> stats;  // one per slice, slice 0 empty
  double scale = 1.0;
  bool converged = true;
};

/// Marches from the initial slice to t1.
Solution solve(const ReducedProblem& reduced, const SolverSpec& spec);

/// Penalised slice solve: M z + (1/eps) min(z, 0) = b on constrained rows,
/// by semismooth Newton (active-set iteration) from the warm start z.
Eigen::VectorXd penalty_step(const SliceSystem& system, const Eigen::VectorXd& b, double eps,
                             Eigen::VectorXd z, int slice = 0);

/// Whole-run penalty march at fixed eps.
ScalarField penalty_solve(const ReducedProblem& reduced, double eps);

/// Contact iff u <= tol at a thin-plane node.
std::vector<std::uint8_t> contact_of(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& slice, double tol);

}  // namespace signorini
