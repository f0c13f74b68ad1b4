#include "wlelm/core.hpp"

#include <cmath>
#include <numeric>

namespace wlelm {

double ComplexSignal::energy() const {
  return std::accumulate(samples.begin(), samples.end(), 0.0,
                         [](double acc, cdouble z) { return acc + std::norm(z); });
}

double ComplexSignal::mean_power() const {
  return samples.empty() ? 0.0 : energy() / static_cast<double>(samples.size());
}

void require_finite(std::span<const cdouble> values, const char* what) {
  for (const auto& z : values) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw InputError(std::string(what) + " contains non-finite values");
    }
  }
}

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + " contains non-finite values");
}

}  // namespace wlelm
