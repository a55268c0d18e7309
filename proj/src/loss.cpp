#include "wamim/loss.hpp"

#include <cmath>

#include "wamim/errors.hpp"

namespace wamim {

namespace {

void check_shapes(const ImageTensor& pred, const ImageTensor& target, const ScaleMask& mask) {
  if (!pred.same_shape(target) || pred.data.size() != target.data.size()) {
    throw DimensionError("prediction and target shapes differ");
  }
  if (pred.rows != mask.side || pred.cols != mask.side) {
    throw DimensionError("mask side " + std::to_string(mask.side) + " does not match grid " +
                         std::to_string(pred.rows) + "x" + std::to_string(pred.cols));
  }
}

}  // namespace

Metric parse_metric(const std::string& s) {
  if (s == "l1" || s == "L1") return Metric::L1;
  if (s == "l2" || s == "L2") return Metric::L2;
  throw ConfigError("unknown metric '" + s + "' (expected l1 or l2)");
}

const char* metric_name(Metric m) { return m == Metric::L1 ? "l1" : "l2"; }

LevelDistance masked_distance(const ImageTensor& pred, const ImageTensor& target,
                              const ScaleMask& mask, Metric metric) {
  check_shapes(pred, target, mask);
  const std::size_t masked = mask.masked_count();
  if (masked == 0) throw DegenerateError("masked distance over zero masked cells");

  double acc = 0.0;
  for (std::size_t c = 0; c < pred.channels; ++c) {
    for (std::size_t i = 0; i < mask.flags.size(); ++i) {
      if (!mask.flags[i]) continue;
      const double diff = pred.channel(c)[i] - target.channel(c)[i];
      acc += metric == Metric::L1 ? std::abs(diff) : diff * diff;
    }
  }
  return {acc / static_cast<double>(masked * pred.channels), masked};
}

ImageTensor masked_distance_grad(const ImageTensor& pred, const ImageTensor& target,
                                 const ScaleMask& mask, Metric metric, double scale) {
  check_shapes(pred, target, mask);
  const std::size_t masked = mask.masked_count();
  if (masked == 0) throw DegenerateError("masked distance over zero masked cells");
  const double norm = scale / static_cast<double>(masked * pred.channels);

  ImageTensor g(pred.channels, pred.rows, pred.cols);
  for (std::size_t c = 0; c < pred.channels; ++c) {
    for (std::size_t i = 0; i < mask.flags.size(); ++i) {
      if (!mask.flags[i]) continue;
      const double diff = pred.channel(c)[i] - target.channel(c)[i];
      double d;
      if (metric == Metric::L2) {
        d = 2.0 * diff;
      } else {
        d = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      }
      g.channel(c)[i] = norm * d;
    }
  }
  return g;
}

double total_loss(std::span<const LevelDistance> per_level, std::span<const double> weights) {
  if (per_level.size() != weights.size()) {
    throw ConfigError("total_loss: " + std::to_string(per_level.size()) + " levels but " +
                      std::to_string(weights.size()) + " weights");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) total += weights[k] * per_level[k].mean;
  return total;
}

LossReport make_report(std::vector<LevelDistance> per_level, std::vector<double> weights) {
  LossReport r;
  r.total = total_loss(per_level, weights);
  r.levels = std::move(per_level);
  r.weights = std::move(weights);
  return r;
}

}  // namespace wamim
