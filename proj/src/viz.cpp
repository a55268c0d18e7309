#include "wamim/viz.hpp"

#include <algorithm>
#include <cmath>

namespace wamim {

std::vector<std::uint8_t> detail_to_gray(std::span<const double> plane) {
  double peak = 0.0;
  for (double v : plane) peak = std::max(peak, std::abs(v));
  std::vector<std::uint8_t> out(plane.size(), 128);
  if (peak == 0.0) return out;
  for (std::size_t i = 0; i < plane.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(128.0 + 127.0 * plane[i] / peak));
  }
  return out;
}

std::vector<std::uint8_t> approx_to_gray(std::span<const double> plane) {
  std::vector<std::uint8_t> out(plane.size(), 0);
  if (plane.empty()) return out;
  const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
  const double range = *hi - *lo;
  if (range == 0.0) return out;
  for (std::size_t i = 0; i < plane.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(255.0 * (plane[i] - *lo) / range));
  }
  return out;
}

}  // namespace wamim
