#include "wlelm/numerics.hpp"

#include <algorithm>
#include <limits>

namespace wlelm {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSingularTol = 64.0 * kEps;

void require_shape(const ComplexMatrix& H, const ComplexVector& x) {
  if (H.rows() < 1 || H.cols() < 1) throw ContractViolation("H must be at least 1x1");
  if (H.rows() != x.size()) {
    throw ContractViolation("H has " + std::to_string(H.rows()) + " rows but x has " +
                            std::to_string(x.size()) + " entries");
  }
  require_finite(H, "H");
  if (!x.allFinite()) throw InputError("x contains non-finite values");
}

// Factorization of a Hermitian matrix: Cholesky when it is numerically
// positive definite, full-pivot LU otherwise. `scale` is the norm of the
// matrix A was derived from; eigenvalues below kSingularTol * L * scale are
// rounding noise (a Schur complement of exactly dependent columns is never
// exactly zero), so the pivot test inside LU alone is not enough.
class HermitianSolver {
 public:
  HermitianSolver(const ComplexMatrix& A, std::string block, double scale) : block_(std::move(block)) {
    const double n = static_cast<double>(A.rows());
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(A, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().cwiseAbs().minCoeff();
    if (!(smallest > kSingularTol * n * scale)) throw SingularSystem(block_);
    llt_.compute(A);
    if (llt_.info() == Eigen::Success && llt_.rcond() > n * kEps) {
      use_llt_ = true;
      return;
    }
    lu_.compute(A);
    if (!lu_.isInvertible()) throw SingularSystem(block_);
  }

  template <typename Rhs>
  ComplexMatrix solve(const Rhs& b) const {
    return use_llt_ ? ComplexMatrix(llt_.solve(b)) : ComplexMatrix(lu_.solve(b));
  }

 private:
  std::string block_;
  bool use_llt_ = false;
  Eigen::LLT<ComplexMatrix> llt_;
  Eigen::FullPivLU<ComplexMatrix> lu_;
};

template <typename Matrix, typename Rhs>
Matrix svd_apply_pinv(const Matrix& M, const Rhs& rhs) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  const double tol =
      static_cast<double>(std::max(M.rows(), M.cols())) * kEps * sigma_max;
  Eigen::VectorXd inv_sigma = Eigen::VectorXd::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol) inv_sigma(i) = 1.0 / sigma(i);
  }
  return svd.matrixV() * inv_sigma.asDiagonal() * (svd.matrixU().adjoint() * rhs);
}

}  // namespace

SecondOrderStats compute_stats(const ComplexMatrix& H, const ComplexVector& x) {
  require_shape(H, x);
  SecondOrderStats st;
  st.C = H.adjoint() * H;
  st.P = H.transpose() * H;
  // Exact symmetry regardless of how the products were blocked.
  st.C = (0.5 * (st.C + st.C.adjoint())).eval();
  st.P = (0.5 * (st.P + st.P.transpose())).eval();
  st.r = H.adjoint() * x;
  st.s = H.transpose() * x;
  st.n_samples = H.rows();
  return st;
}

WidelyLinearWeights wlls_solve(const SecondOrderStats& stats, double ridge) {
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InputError("ridge must be a finite value >= 0");
  const Eigen::Index L = stats.dim();
  if (L < 1 || stats.C.cols() != L || stats.P.rows() != L || stats.P.cols() != L ||
      stats.r.size() != L || stats.s.size() != L) {
    throw ContractViolation("second-order statistics blocks disagree in dimension");
  }

  const ComplexMatrix I = ComplexMatrix::Identity(L, L);
  const ComplexMatrix Cr = stats.C + ridge * I;
  const ComplexMatrix Cr_conj = stats.C.conjugate() + ridge * I;
  const ComplexMatrix P_conj = stats.P.conjugate();

  const double scale = Cr.norm();
  const HermitianSolver c_solver(Cr, "C", scale);

  // alpha solves (conj(C) - P C^-1 conj(P)) alpha = s - P C^-1 r.
  const ComplexMatrix Cinv_Pconj = c_solver.solve(P_conj);
  const ComplexVector Cinv_r = c_solver.solve(stats.r);
  ComplexMatrix schur = Cr_conj - stats.P * Cinv_Pconj;
  schur = (0.5 * (schur + schur.adjoint())).eval();
  const ComplexVector rhs = stats.s - stats.P * Cinv_r;

  const HermitianSolver schur_solver(schur, "Schur complement of C", scale);
  WidelyLinearWeights w;
  w.alpha = schur_solver.solve(rhs);
  w.beta = c_solver.solve(stats.r - P_conj * w.alpha);
  if (!w.alpha.allFinite() || !w.beta.allFinite()) throw SingularSystem("Schur complement of C");
  return w;
}

WidelyLinearWeights augmented_pinv_solve(const ComplexMatrix& H, const ComplexVector& x) {
  require_shape(H, x);
  const Eigen::Index L = H.cols();
  ComplexMatrix aug(H.rows(), 2 * L);
  aug << H, H.conjugate();
  const ComplexMatrix w = svd_apply_pinv(aug, x);
  return {w.col(0).head(L), w.col(0).tail(L)};
}

WidelyLinearWeights linear_pinv_solve(const ComplexMatrix& H, const ComplexVector& x) {
  require_shape(H, x);
  const ComplexMatrix w = svd_apply_pinv(H, x);
  return {w.col(0), ComplexVector::Zero(H.cols())};
}

ComplexMatrix pseudo_inverse(const ComplexMatrix& M) {
  if (M.rows() < 1 || M.cols() < 1) throw ContractViolation("matrix must be at least 1x1");
  require_finite(M, "M");
  return svd_apply_pinv(M, ComplexMatrix::Identity(M.rows(), M.rows()));
}

RealMatrix pseudo_inverse(const RealMatrix& M) {
  if (M.rows() < 1 || M.cols() < 1) throw ContractViolation("matrix must be at least 1x1");
  if (!M.allFinite()) throw InputError("M contains non-finite values");
  return svd_apply_pinv(M, RealMatrix::Identity(M.rows(), M.rows()));
}

ComplexVector predict(const ComplexMatrix& H, const WidelyLinearWeights& w) {
  if (w.beta.size() != H.cols() || w.alpha.size() != H.cols()) {
    throw ContractViolation("weights of length " + std::to_string(w.beta.size()) + "/" +
                            std::to_string(w.alpha.size()) + " do not match " +
                            std::to_string(H.cols()) + " hidden columns");
  }
  return H * w.beta + H.conjugate() * w.alpha;
}

double fallback_ridge(const SecondOrderStats& stats) {
  const double L = static_cast<double>(std::max<Eigen::Index>(stats.dim(), 1));
  const double trace = stats.C.trace().real();
  return trace > 0.0 ? 1e-10 * trace / L : 1e-10;
}

}  // namespace wlelm
