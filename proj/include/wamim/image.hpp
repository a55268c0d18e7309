#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wamim {

// channels x rows x cols real buffer, row-major per channel, channels
// stored back to back.
struct ImageTensor {
  std::size_t channels = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  ImageTensor() = default;
  ImageTensor(std::size_t c, std::size_t r, std::size_t w, double fill = 0.0)
      : channels(c), rows(r), cols(w), data(c * r * w, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t plane_size() const { return rows * cols; }

  double& at(std::size_t c, std::size_t r, std::size_t w) {
    return data[(c * rows + r) * cols + w];
  }
  double at(std::size_t c, std::size_t r, std::size_t w) const {
    return data[(c * rows + r) * cols + w];
  }

  std::span<double> channel(std::size_t c) {
    return {data.data() + c * plane_size(), plane_size()};
  }
  std::span<const double> channel(std::size_t c) const {
    return {data.data() + c * plane_size(), plane_size()};
  }

  bool same_shape(const ImageTensor& o) const {
    return channels == o.channels && rows == o.rows && cols == o.cols;
  }

  // Throws DimensionError on empty dims or a size mismatch and InputError
  // on NaN/Inf.
  void validate() const;
};

double energy(const ImageTensor& t);
double max_abs_diff(const ImageTensor& a, const ImageTensor& b);

}  // namespace wamim
