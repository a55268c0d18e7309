#pragma once

#include <cstddef>
#include <cstdint>

#include "wamim/params.hpp"

namespace wamim {

// Linear warmup from peak/warmup to peak over `warmup` steps, then cosine
// decay to zero at `total`. Steps are 0-based.
struct LrSchedule {
  double peak = 0.0;
  std::size_t warmup = 0;
  std::size_t total = 0;

  double at(std::size_t step) const;
};

struct AdamWHyper {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

// Decoupled weight decay (p *= 1 - lr * wd, matrices only), then the
// bias-corrected Adam update. Fixed (non-trainable) tensors are skipped.
struct AdamWState {
  ParamSet m;
  ParamSet v;
  std::uint64_t t = 0;

  static AdamWState zeros_like(const ParamSet& params);
  void step(ParamSet& params, const ParamSet& grads, double lr, const AdamWHyper& h);
};

}  // namespace wamim
