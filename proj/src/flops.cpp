#include <algorithm>
#include <cmath>

#include "wlelm/harness.hpp"

// FLOP ledger. Real floating-point operations; complex arithmetic is
// expanded as
//   complex multiply-add   8
//   complex multiply       6
//   complex add            2
//   complex divide        11
//   complex asinh         40   (sqrt + log + a handful of mul/add)
//   real asinh            20
//   n-point FFT           5 n log2 n
// Thin SVD of an m x n matrix (m >= n) costs 4mn^2 + 22n^3 real FLOPs; the
// complex version is 4x that. Counts cover pilot training plus one data
// symbol of equalization, matching a reception-to-equalization measurement.

namespace wlelm {
namespace {

using u64 = std::uint64_t;

constexpr u64 kCmac = 8;
constexpr u64 kCmul = 6;
constexpr u64 kCadd = 2;
constexpr u64 kCdiv = 11;
constexpr u64 kCasinh = 40;
constexpr u64 kRasinh = 20;

u64 fft_flops(u64 n) {
  if (n < 2) return 0;
  return static_cast<u64>(std::llround(5.0 * static_cast<double>(n) * std::log2(static_cast<double>(n))));
}

u64 complex_svd(u64 m, u64 n) { return 4 * (4 * m * n * n + 22 * n * n * n); }
u64 real_svd(u64 m, u64 n) { return 4 * m * n * n + 22 * n * n * n; }

// V diag(1/s) U^H x for an m x n complex system.
u64 complex_pinv_apply(u64 m, u64 n) { return kCmac * m * n + kCmul * n + kCmac * n * n; }

u64 complex_hidden(u64 n, u64 l, u64 i) { return n * l * (kCmac * i + kCadd + kCasinh); }
u64 real_hidden(u64 n, u64 l, u64 i) { return n * l * (2 * 2 * i + 1 + kRasinh); }

// Second-order statistics plus block elimination on L x L blocks.
u64 wlls_solve_flops(u64 n, u64 l) {
  const u64 gram = 2 * kCmac * n * l * (l + 1) / 2;  // C and P, symmetric halves
  const u64 cross = 2 * kCmac * n * l;                // r and s
  const u64 cholesky = kCmac * l * l * l / 3;
  const u64 multi_rhs = kCmac * 2 * l * l * l;        // C^-1 conj(P)
  const u64 schur = kCmac * l * l * l + kCadd * l * l;
  const u64 vectors = 6 * kCmac * l * l;              // remaining triangular solves and products
  return gram + cross + 2 * cholesky + multi_rhs + schur + vectors;
}

// LS/MMSE: FFT of the pilot; |X|^2 and conj(X) Y; two inverse transforms
// for the Toeplitz column and right-hand side; Levinson solve on the
// estimate window (three length-m inner products/updates per step); FFT back
// to subcarriers; then FFT, one-tap equalizer and despreading IDFT of the
// data symbol.
u64 baseline_flops(u64 n, u64 per_subcarrier_eq) {
  const u64 w = std::min<u64>(kDefaultEstimateWindow, n);
  const u64 levinson = 3 * kCmac * w * w + 2 * kCdiv * w;
  return 6 * fft_flops(n) + (3 + kCmul) * n + levinson + per_subcarrier_eq * n;
}

}  // namespace

std::uint64_t flops_estimate(ReceiverKind kind, std::size_t n_, std::size_t hidden_, std::size_t taps_) {
  if (n_ < 1 || hidden_ < 1 || taps_ < 1) throw InputError("flops_estimate needs positive dimensions");
  const u64 n = n_;
  const u64 l = hidden_;
  const u64 i = taps_;
  switch (kind) {
    case ReceiverKind::kLs:
      return baseline_flops(n, kCdiv);
    case ReceiverKind::kMmse:
      // conj(H) Y, |H|^2 + s2, real divide of both parts.
      return baseline_flops(n, kCmul + 3 + 1 + 2);
    case ReceiverKind::kElm: {
      const u64 train = real_hidden(n, l, i) + real_svd(n, l) + 2 * (2 * n * l + 2 * l * l);
      const u64 infer = real_hidden(n, l, i) + 2 * 2 * n * l;
      return train + infer;
    }
    case ReceiverKind::kCelm: {
      const u64 train = complex_hidden(n, l, i) + complex_svd(n, l) + complex_pinv_apply(n, l);
      const u64 infer = complex_hidden(n, l, i) + kCmac * n * l;
      return train + infer;
    }
    case ReceiverKind::kCelmah: {
      const u64 train = complex_hidden(n, l, i) + complex_svd(n, 2 * l) + complex_pinv_apply(n, 2 * l);
      const u64 infer = complex_hidden(n, l, i) + kCmac * n * 2 * l;
      return train + infer;
    }
    case ReceiverKind::kCelmWlls: {
      const u64 train = complex_hidden(n, l, i) + wlls_solve_flops(n, l);
      const u64 infer = complex_hidden(n, l, i) + kCmac * n * 2 * l;
      return train + infer;
    }
  }
  return 0;
}

}  // namespace wlelm
