#pragma once

#include <span>
#include <vector>

#include "wlelm/core.hpp"

namespace wlelm::fft {

// Unitary transforms (1/sqrt(n) on both directions), any length.
std::vector<cdouble> forward(std::span<const cdouble> in);
std::vector<cdouble> inverse(std::span<const cdouble> in);

}  // namespace wlelm::fft
