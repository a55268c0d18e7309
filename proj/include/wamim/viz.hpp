#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wamim {

// Signed detail plane to gray: 128 + 127 * w / max|w|, so zero sits at
// mid-gray. An all-zero plane is uniformly 128.
std::vector<std::uint8_t> detail_to_gray(std::span<const double> plane);

// Approximation plane to gray by plain min-max. A constant plane maps to 0.
std::vector<std::uint8_t> approx_to_gray(std::span<const double> plane);

}  // namespace wamim
