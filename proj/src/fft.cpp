#include "wlelm/fft.hpp"

#include <cmath>

#include <unsupported/Eigen/FFT>

namespace wlelm::fft {
namespace {

// Eigen::FFT caches twiddle plans internally and is not safe to share
// between threads, so each thread keeps its own.
Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> instance = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return instance;
}

}  // namespace

std::vector<cdouble> forward(std::span<const cdouble> in) {
  if (in.size() < 2) return {in.begin(), in.end()};  // kissfft faults on n = 1
  std::vector<cdouble> out(in.size());
  std::vector<cdouble> src(in.begin(), in.end());
  engine().fwd(out, src);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
  for (auto& z : out) z *= scale;
  return out;
}

std::vector<cdouble> inverse(std::span<const cdouble> in) {
  if (in.size() < 2) return {in.begin(), in.end()};
  std::vector<cdouble> out(in.size());
  std::vector<cdouble> src(in.begin(), in.end());
  engine().inv(out, src);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
  for (auto& z : out) z *= scale;
  return out;
}

}  // namespace wlelm::fft
