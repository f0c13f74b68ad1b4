#pragma once

#include "wlelm/core.hpp"

namespace wlelm {

/// Instantaneous second-order statistics of a hidden-layer matrix H (N x L)
/// against a target x (N):
///   C = H^H H   (Hermitian, PSD)
///   P = H^T H   (complex symmetric)
///   r = H^H x,  s = H^T x
/// Column-vector convention throughout: the row-vector forms x^H H and
/// x^T H are r^H and s^T respectively.
struct SecondOrderStats {
  ComplexMatrix C;
  ComplexMatrix P;
  ComplexVector r;
  ComplexVector s;
  Eigen::Index n_samples = 0;

  Eigen::Index dim() const { return C.rows(); }
};

/// Output weights of a widely-linear regressor: x_hat = H beta + conj(H) alpha.
struct WidelyLinearWeights {
  ComplexVector beta;
  ComplexVector alpha;

  Eigen::Index dim() const { return beta.size(); }
};

SecondOrderStats compute_stats(const ComplexMatrix& H, const ComplexVector& x);

/// Solves the widely-linear normal equations
///   (C + ridge I) beta + conj(P) alpha = r
///   P beta + (conj(C) + ridge I) alpha = s
/// by eliminating beta through the Schur complement of C. Throws
/// SingularSystem naming the block that failed to factor.
WidelyLinearWeights wlls_solve(const SecondOrderStats& stats, double ridge = 0.0);

/// Minimum-norm least squares on the augmented matrix [H, conj(H)].
WidelyLinearWeights augmented_pinv_solve(const ComplexMatrix& H, const ComplexVector& x);

/// Strictly linear minimum-norm least squares (alpha is zero).
WidelyLinearWeights linear_pinv_solve(const ComplexMatrix& H, const ComplexVector& x);

/// Moore-Penrose inverse via SVD; singular values at or below
/// max(rows, cols) * eps * sigma_max count as zero.
ComplexMatrix pseudo_inverse(const ComplexMatrix& M);
RealMatrix pseudo_inverse(const RealMatrix& M);

ComplexVector predict(const ComplexMatrix& H, const WidelyLinearWeights& w);

/// Ridge value suggested when wlls_solve reports a singular system.
double fallback_ridge(const SecondOrderStats& stats);

}  // namespace wlelm
