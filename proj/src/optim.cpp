#include "wamim/optim.hpp"

#include <cmath>
#include <numbers>

#include "wamim/errors.hpp"

namespace wamim {

double LrSchedule::at(std::size_t step) const {
  if (warmup > 0 && step < warmup) {
    return peak * static_cast<double>(step + 1) / static_cast<double>(warmup);
  }
  if (total <= warmup) return peak;
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(total - warmup);
  return 0.5 * peak * (1.0 + std::cos(std::numbers::pi * std::min(progress, 1.0)));
}

AdamWState AdamWState::zeros_like(const ParamSet& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void AdamWState::step(ParamSet& params, const ParamSet& grads, double lr, const AdamWHyper& h) {
  if (!params.same_layout(grads) || !params.same_layout(m)) {
    throw StructureError("optimizer state does not match parameter layout");
  }
  ++t;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& e = params.entry(i);
    if (!e.trainable) continue;
    auto& p = e.value.data;
    const auto& g = grads.entry(i).value.data;
    auto& mi = m.entry(i).value.data;
    auto& vi = v.entry(i).value.data;
    const double decay = e.decay ? 1.0 - lr * h.weight_decay : 1.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      mi[j] = h.beta1 * mi[j] + (1.0 - h.beta1) * g[j];
      vi[j] = h.beta2 * vi[j] + (1.0 - h.beta2) * g[j] * g[j];
      const double mhat = mi[j] / bc1;
      const double vhat = vi[j] / bc2;
      p[j] = p[j] * decay - lr * mhat / (std::sqrt(vhat) + h.eps);
    }
  }
}

}  // namespace wamim
