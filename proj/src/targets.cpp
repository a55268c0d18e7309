#include "wamim/targets.hpp"

#include <cmath>
#include <string>

#include "wamim/errors.hpp"

namespace wamim {

void LevelSelection::validate(std::size_t depth, std::size_t num_layers) const {
  const std::size_t k = selected_levels.size();
  if (k == 0) throw ConfigError("selected_levels must not be empty");
  if (tap_layers.size() != k || weights.size() != k) {
    throw ConfigError("selected_levels, tap_layers and weights must have equal lengths (" +
                      std::to_string(k) + ", " + std::to_string(tap_layers.size()) + ", " +
                      std::to_string(weights.size()) + ")");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (selected_levels[i] == 0 || (depth != 0 && selected_levels[i] > depth)) {
      throw ConfigError("selected level " + std::to_string(selected_levels[i]) +
                        " outside 1.." + std::to_string(depth));
    }
    if (i > 0 && selected_levels[i] <= selected_levels[i - 1]) {
      throw ConfigError("selected_levels must be strictly ascending");
    }
    if (tap_layers[i] == 0 || (num_layers != 0 && tap_layers[i] > num_layers)) {
      throw ConfigError("tap layer " + std::to_string(tap_layers[i]) + " outside 1.." +
                        std::to_string(num_layers));
    }
    if (i > 0 && tap_layers[i] <= tap_layers[i - 1]) {
      throw ConfigError("tap_layers must be strictly increasing");
    }
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw ConfigError("loss weights must be finite and non-negative");
    }
  }
  if (attach_approximation && depth != 0 && selected_levels.back() != depth) {
    throw ConfigError("deepest selected level " + std::to_string(selected_levels.back()) +
                      " must equal decomposition depth " + std::to_string(depth) +
                      " when the approximation is attached");
  }
}

TargetSet build_targets(const WaveletPyramid& pyramid, const LevelSelection& sel) {
  pyramid.validate();
  sel.validate(pyramid.depth(), 0);

  const std::size_t channels = pyramid.channels();
  TargetSet ts;
  for (std::size_t k = 0; k < sel.size(); ++k) {
    const std::size_t level = sel.selected_levels[k];
    const DetailLevel& lv = pyramid.level(level);
    const bool last = k + 1 == sel.size();
    const bool with_approx = last && sel.attach_approximation;

    TargetEntry e;
    e.level = level;
    e.layer = sel.tap_layers[k];
    e.weight = sel.weights[k];
    e.has_approximation = with_approx;
    e.values = ImageTensor((with_approx ? 4 : 3) * channels, lv.h.rows, lv.h.cols);

    std::size_t out_ch = 0;
    auto append = [&](const ImageTensor& src) {
      for (std::size_t c = 0; c < channels; ++c, ++out_ch) {
        const auto in = src.channel(c);
        auto dst = e.values.channel(out_ch);
        std::copy(in.begin(), in.end(), dst.begin());
      }
    };
    for (Orientation o : kOrientations) append(lv.band(o));
    if (with_approx) append(pyramid.approx);
    ts.entries.push_back(std::move(e));
  }
  return ts;
}

TargetSet normalize_targets(const TargetSet& ts, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("normalization epsilon must be positive");
  TargetSet out = ts;
  out.epsilon = epsilon;
  for (TargetEntry& e : out.entries) {
    e.stats.assign(e.values.channels, {});
    const double n = static_cast<double>(e.values.plane_size());
    for (std::size_t c = 0; c < e.values.channels; ++c) {
      auto chan = e.values.channel(c);
      double mean = 0.0;
      for (double x : chan) mean += x;
      mean /= n;
      double var = 0.0;
      for (double x : chan) var += (x - mean) * (x - mean);
      var /= n;
      const double inv = 1.0 / std::sqrt(var + epsilon);
      for (double& x : chan) x = (x - mean) * inv;
      e.stats[c] = {mean, var};
    }
  }
  return out;
}

std::size_t layer_for_level(const LevelSelection& sel, std::size_t k) {
  if (k == 0 || k > sel.tap_layers.size()) {
    throw ConfigError("level index " + std::to_string(k) + " outside 1.." +
                      std::to_string(sel.tap_layers.size()));
  }
  return sel.tap_layers[k - 1];
}

}  // namespace wamim
