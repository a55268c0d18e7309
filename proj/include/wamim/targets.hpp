#pragma once

#include <cstddef>
#include <vector>

#include "wamim/dwt.hpp"
#include "wamim/image.hpp"

namespace wamim {

// Which pyramid levels become reconstruction targets, which encoder layer
// predicts each, and how much each level weighs in the total loss. Entry k
// pairs the k-th finest selected level with the k-th shallowest tap.
struct LevelSelection {
  std::vector<std::size_t> selected_levels;  // ascending decomposition depths
  std::vector<std::size_t> tap_layers;       // strictly increasing, 1-based
  std::vector<double> weights;
  bool attach_approximation = true;

  std::size_t size() const { return selected_levels.size(); }

  // Throws ConfigError. Pass depth = 0 / num_layers = 0 to skip those bounds.
  void validate(std::size_t depth, std::size_t num_layers) const;
};

struct ChannelStats {
  double mean = 0.0;
  double variance = 0.0;
};

struct TargetEntry {
  std::size_t level = 0;  // decomposition depth this entry came from
  std::size_t layer = 0;
  double weight = 1.0;
  bool has_approximation = false;
  ImageTensor values;  // (3C or 4C) x side x side
  std::vector<ChannelStats> stats;  // empty until normalized

  std::size_t side() const { return values.rows; }
};

struct TargetSet {
  std::vector<TargetEntry> entries;  // shallow -> deep
  double epsilon = 0.0;              // 0 until normalized

  std::size_t size() const { return entries.size(); }
  bool normalized() const { return epsilon > 0.0; }
};

// Channel order per entry: H(ch0..C-1), V(...), D(...), then approximation
// (ch0..C-1) on the last entry when requested.
TargetSet build_targets(const WaveletPyramid& pyramid, const LevelSelection& sel);

inline constexpr double kDefaultNormEpsilon = 1e-6;

// Per entry, per channel: (w - mean) / sqrt(var + eps) with statistics over
// that channel's spatial positions.
TargetSet normalize_targets(const TargetSet& ts, double epsilon = kDefaultNormEpsilon);

// 1-based k. Throws ConfigError when out of range.
std::size_t layer_for_level(const LevelSelection& sel, std::size_t k);

}  // namespace wamim
