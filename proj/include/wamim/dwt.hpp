#pragma once

// Multi-level separable 2D orthonormal Haar transform.
//
// Level indexing is by decomposition depth: level 1 is the finest
// (highest-frequency) detail level, level J the coarsest. Orientation
// convention for a 2x2 block [[a, b], [c, d]]:
//
//   ll = (a + b + c + d) / 2     low along columns, low along rows
//   h  = (a - b + c - d) / 2     high along columns, low along rows
//   v  = (a + b - c - d) / 2     low along columns, high along rows
//   d  = (a - b - c + d) / 2     high along both
//
// "along columns" means the filter runs across the column index within a
// row, so h responds to horizontal changes and v to vertical ones.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "wamim/image.hpp"

namespace wamim {

struct FilterPair {
  std::vector<double> low;
  std::vector<double> high;
};

FilterPair haar_filters();

struct Plane {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Plane(std::size_t r, std::size_t c, std::vector<double> values);

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct LevelBands {
  Plane ll, h, v, d;
};

// One analysis step on a single plane. Throws DimensionError on odd dims,
// InputError on non-finite values.
LevelBands dwt2_level(const Plane& plane);

enum class Orientation { H = 0, V = 1, D = 2 };
inline constexpr std::array<Orientation, 3> kOrientations = {Orientation::H, Orientation::V,
                                                             Orientation::D};
char orientation_letter(Orientation o);

struct DetailLevel {
  ImageTensor h, v, d;

  const ImageTensor& band(Orientation o) const;
  ImageTensor& band(Orientation o);
};

struct WaveletPyramid {
  std::size_t source_rows = 0;
  std::size_t source_cols = 0;
  std::vector<DetailLevel> levels;  // levels[0] is level 1 (finest)
  ImageTensor approx;

  std::size_t depth() const { return levels.size(); }
  std::size_t channels() const { return approx.channels; }
  const DetailLevel& level(std::size_t l) const { return levels.at(l - 1); }

  // Checks every plane halves exactly per level. Throws StructureError.
  void validate() const;
  double energy() const;

  static WaveletPyramid zeros(std::size_t channels, std::size_t rows, std::size_t cols,
                              std::size_t depth);
};

// Record name used for a plane in the tensor container: L<level>_<H|V|D>.
std::string plane_record_name(std::size_t level, Orientation o);
inline constexpr const char* kApproxRecordName = "approx";

// Throws DimensionError unless rows and cols are divisible by 2^depth
// and depth >= 1.
void check_dyadic(std::size_t rows, std::size_t cols, std::size_t depth);

WaveletPyramid dwt2_multi(const ImageTensor& image, std::size_t depth);
ImageTensor idwt2_multi(const WaveletPyramid& pyramid);

// Reference transform by explicit inner products with materialized 2D Haar
// basis images. Cost is O(rows * cols) per coefficient; meant for inputs up
// to 64x64.
WaveletPyramid dwt2_oracle(const ImageTensor& image, std::size_t depth);

double max_abs_diff(const WaveletPyramid& a, const WaveletPyramid& b);

}  // namespace wamim
