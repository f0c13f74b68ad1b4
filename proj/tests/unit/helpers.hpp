#pragma once

#include <cmath>

#include <Eigen/QR>

#include "wlelm/numerics.hpp"
#include "wlelm/rng.hpp"

namespace wlelm::test {

inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline ComplexMatrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal(1.0);
  return m;
}

inline ComplexVector random_vector(Rng& rng, Eigen::Index n) { return random_matrix(rng, n, 1).col(0); }

// Improper columns: z = a + k conj(a) with a circular, k random.
inline ComplexMatrix improper_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  ComplexMatrix a = random_matrix(rng, rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const cdouble k = rng.complex_normal(0.5);
    a.col(j) = (a.col(j) + k * a.col(j).conjugate()).eval();
  }
  return a;
}

inline double rel_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

// Widely-linear LS rewritten as a real LS problem in the 4L unknowns
// [Re b, Im b, Re a, Im a] and solved by column-pivoting QR. Shares no code
// with the library solvers.
inline WidelyLinearWeights real_augmented_lstsq(const ComplexMatrix& H, const ComplexVector& x) {
  const Eigen::Index n = H.rows();
  const Eigen::Index l = H.cols();
  const RealMatrix hr = H.real();
  const RealMatrix hi = H.imag();
  RealMatrix A(2 * n, 4 * l);
  A << hr, -hi, hr, hi,
       hi, hr, -hi, hr;
  RealVector t(2 * n);
  t << x.real(), x.imag();
  const RealVector u = A.colPivHouseholderQr().solve(t);
  WidelyLinearWeights w;
  w.beta = u.segment(0, l).cast<cdouble>() + cdouble(0, 1) * u.segment(l, l).cast<cdouble>();
  w.alpha = u.segment(2 * l, l).cast<cdouble>() + cdouble(0, 1) * u.segment(3 * l, l).cast<cdouble>();
  return w;
}

}  // namespace wlelm::test
