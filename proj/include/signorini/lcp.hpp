#pragma once

// Mixed linear complementarity problems:
//
//   find z with  w = M z - b,
//     w_i = 0                              for free rows,
//     z_i >= 0, w_i >= 0, z_i w_i = 0      for constrained rows.
//
// M is expected to be a symmetric positive definite M-matrix, which makes the
// solution unique and PSOR convergent for omega in (0, 2).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace signorini::lcp {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

/// Row kinds; `constrained[i] != 0` marks a complementarity row.
using RowMask = std::vector<std::uint8_t>;

template <typename Scalar>
struct Residuals {
  Scalar equation = 0;        // sup |w_i| over free rows
  Scalar complementarity = 0;  // sup |min(z_i, w_i)| over constrained rows
};

template <typename Matrix, typename Scalar>
Residuals<Scalar> residuals(const Matrix& M, const Vector<Scalar>& b, const RowMask& constrained,
                            const Vector<Scalar>& z) {
  const Vector<Scalar> w = M * z - b;
  Residuals<Scalar> r;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (constrained[i]) {
      r.complementarity = std::max<Scalar>(r.complementarity, std::abs(std::min(z[i], w[i])));
    } else {
      r.equation = std::max<Scalar>(r.equation, std::abs(w[i]));
    }
  }
  return r;
}

template <typename Scalar>
struct PsorOptions {
  Scalar omega = Scalar(1.5);
  Scalar tol = Scalar(1e-13);  // on both residual kinds
  int max_iters = 20000;
};

template <typename Scalar>
struct PsorResult {
  int iterations = 0;
  Residuals<Scalar> residual;
  bool converged = false;
};

/// Projected SOR with lexicographic sweeps, warm-started from z. A constrained
/// unknown projected onto zero is stored as exactly zero.
template <typename Scalar>
PsorResult<Scalar> psor(const SparseMatrix<Scalar>& M, const Vector<Scalar>& b, const RowMask& constrained,
                        Vector<Scalar>& z, const PsorOptions<Scalar>& opts = {}) {
  if (!(opts.omega > 0 && opts.omega < 2)) throw std::invalid_argument("omega must lie in (0, 2)");
  const Eigen::Index n = M.rows();
  Vector<Scalar> diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    diag[i] = M.coeff(i, i);
    if (!(diag[i] > 0)) throw std::invalid_argument("PSOR needs a positive diagonal");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (constrained[i] && z[i] < 0) z[i] = 0;
  }

  PsorResult<Scalar> out;
  for (out.iterations = 1; out.iterations <= opts.max_iters; ++out.iterations) {
    Scalar change = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar off = 0;
      for (typename SparseMatrix<Scalar>::InnerIterator it(M, i); it; ++it) {
        if (it.col() != i) off += it.value() * z[it.col()];
      }
      Scalar next = z[i] + opts.omega * ((b[i] - off) / diag[i] - z[i]);
      if (constrained[i] && next <= 0) next = 0;
      change = std::max<Scalar>(change, std::abs(next - z[i]) * diag[i]);
      z[i] = next;
    }
    if (!std::isfinite(change)) break;
    // The full residual is only certified once the sweep has nearly stalled.
    if (change > opts.tol && out.iterations < opts.max_iters) continue;
    out.residual = residuals(M, b, constrained, z);
    if (!std::isfinite(out.residual.equation) || !std::isfinite(out.residual.complementarity)) break;
    if (out.residual.equation <= opts.tol && out.residual.complementarity <= opts.tol) {
      out.converged = true;
      return out;
    }
  }
  out.iterations = std::min(out.iterations, opts.max_iters);
  return out;
}

template <typename Scalar>
struct EnumerationResult {
  Vector<Scalar> z;
  RowMask active;  // constrained rows held at z = 0
  long sets_tried = 0;
};

/// Exhaustive search over all active sets of the constrained rows. Each
/// candidate fixes z = 0 on its active rows and solves the remaining
/// equations; the first candidate with z >= -tol off the active set and
/// w >= -tol on it is returned. Limited to 20 constrained rows.
template <typename Scalar>
EnumerationResult<Scalar> enumerate_active_sets(const DenseMatrix<Scalar>& M, const Vector<Scalar>& b,
                                                const RowMask& constrained,
                                                Scalar tol = Scalar(1e-12)) {
  const Eigen::Index n = M.rows();
  std::vector<Eigen::Index> cons;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (constrained[i]) cons.push_back(i);
  }
  if (cons.size() > 20) throw std::invalid_argument("too many constrained rows to enumerate");
  const long sets = 1L << cons.size();
  // Larger active sets first so ties at z = 0 resolve to contact.
  for (long s = sets - 1; s >= 0; --s) {
    RowMask active(n, 0);
    for (std::size_t c = 0; c < cons.size(); ++c) active[cons[c]] = (s >> c) & 1;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[i]) rows.push_back(i);
    }
    Vector<Scalar> z = Vector<Scalar>::Zero(n);
    if (!rows.empty()) {
      const Eigen::Index k = static_cast<Eigen::Index>(rows.size());
      DenseMatrix<Scalar> A(k, k);
      Vector<Scalar> rhs(k);
      for (Eigen::Index r = 0; r < k; ++r) {
        rhs[r] = b[rows[r]];
        for (Eigen::Index c = 0; c < k; ++c) A(r, c) = M(rows[r], rows[c]);
      }
      const Vector<Scalar> sol = A.partialPivLu().solve(rhs);
      for (Eigen::Index r = 0; r < k; ++r) z[rows[r]] = sol[r];
    }
    const Vector<Scalar> w = M * z - b;
    const Scalar scale = std::max<Scalar>(Scalar(1), b.cwiseAbs().maxCoeff());
    bool feasible = true;
    for (const Eigen::Index i : cons) {
      if (active[i] ? w[i] < -tol * scale : z[i] < -tol * scale) {
        feasible = false;
        break;
      }
    }
    if (feasible) {
      for (const Eigen::Index i : cons) {
        if (!active[i]) z[i] = std::max<Scalar>(z[i], Scalar(0));
      }
      return {z, active, sets - s};
    }
  }
  throw std::runtime_error("no feasible active set; matrix is not a P-matrix");
}

/// Schur complement of the free rows: returns (S, c) with S = M_CC -
/// M_CF M_FF^{-1} M_FC and c = b_C - M_CF M_FF^{-1} b_F, so that the
/// constrained unknowns solve the pure LCP (S, c).
template <typename Scalar>
std::pair<DenseMatrix<Scalar>, Vector<Scalar>> schur_onto_constrained(const DenseMatrix<Scalar>& M,
                                                                       const Vector<Scalar>& b,
                                                                       const RowMask& constrained) {
  std::vector<Eigen::Index> C, F;
  for (Eigen::Index i = 0; i < M.rows(); ++i) (constrained[i] ? C : F).push_back(i);
  auto block = [&](const std::vector<Eigen::Index>& r, const std::vector<Eigen::Index>& c) {
    DenseMatrix<Scalar> B(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) B(i, j) = M(r[i], c[j]);
    return B;
  };
  auto part = [&](const std::vector<Eigen::Index>& r) {
    Vector<Scalar> v(static_cast<Eigen::Index>(r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) v[i] = b[r[i]];
    return v;
  };
  const DenseMatrix<Scalar> Mcc = block(C, C), Mcf = block(C, F), Mff = block(F, F), Mfc = block(F, C);
  const auto llt = Mff.llt();
  if (llt.info() != Eigen::Success) throw std::invalid_argument("free block is not positive definite");
  return {Mcc - Mcf * llt.solve(Mfc), part(C) - Mcf * llt.solve(part(F))};
}

}  // namespace signorini::lcp
