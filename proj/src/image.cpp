#include "wamim/image.hpp"

#include <cmath>
#include <string>

#include "wamim/errors.hpp"

namespace wamim {

void ImageTensor::validate() const {
  if (channels == 0 || rows == 0 || cols == 0) {
    throw DimensionError("image dims must be positive, got " + std::to_string(channels) + "x" +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (data.size() != channels * rows * cols) {
    throw DimensionError("image buffer holds " + std::to_string(data.size()) +
                         " values, expected " + std::to_string(channels * rows * cols));
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw InputError("image contains a non-finite value");
  }
}

double energy(const ImageTensor& t) {
  double e = 0.0;
  for (double v : t.data) e += v * v;
  return e;
}

double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw DimensionError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace wamim
