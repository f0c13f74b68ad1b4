#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wlelm {

using cdouble = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Bits = std::vector<std::uint8_t>;

/// Complex baseband samples tagged with the rate they were produced at.
struct ComplexSignal {
  std::vector<cdouble> samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const { return samples.size(); }
  double energy() const;
  double mean_power() const;
};

// Error hierarchy. Every failure the library reports derives from Error so
// the CLI can print a single machine-parseable line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error("contract", what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("input", what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

/// Raised when a block of the widely-linear normal equations cannot be
/// factored. block() names the offending matrix.
class SingularSystem : public Error {
 public:
  explicit SingularSystem(std::string block)
      : Error("singular", "singular system in block '" + block + "'"),
        block_(std::move(block)) {}
  const std::string& block() const noexcept { return block_; }

 private:
  std::string block_;
};

void require_finite(std::span<const cdouble> values, const char* what);
void require_finite(const ComplexMatrix& m, const char* what);

inline Eigen::Map<const ComplexVector> as_vector(std::span<const cdouble> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

}  // namespace wlelm
