#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wamim/image.hpp"
#include "wamim/masking.hpp"

namespace wamim {

enum class Metric { L1, L2 };

Metric parse_metric(const std::string& s);
const char* metric_name(Metric m);

struct LevelDistance {
  double mean = 0.0;         // over masked cells and all channels
  std::size_t masked = 0;    // masked spatial cells

  bool operator==(const LevelDistance&) const = default;
};

struct LossReport {
  std::vector<LevelDistance> levels;
  std::vector<double> weights;
  double total = 0.0;

  bool operator==(const LossReport&) const = default;
};

// Mean of |p - t| (L1) or (p - t)^2 (L2) over masked cells and channels of
// channels x side x side grids. Throws DimensionError on shape mismatch and
// DegenerateError when no cell is masked.
LevelDistance masked_distance(const ImageTensor& pred, const ImageTensor& target,
                              const ScaleMask& mask, Metric metric);

// d(mean)/d(pred), scaled by `scale`; zero on visible cells. L1 uses sign
// with sign(0) = 0.
ImageTensor masked_distance_grad(const ImageTensor& pred, const ImageTensor& target,
                                 const ScaleMask& mask, Metric metric, double scale);

// Sum of weight_k * mean_k. Throws ConfigError on a length mismatch.
double total_loss(std::span<const LevelDistance> per_level, std::span<const double> weights);

LossReport make_report(std::vector<LevelDistance> per_level, std::vector<double> weights);

}  // namespace wamim
