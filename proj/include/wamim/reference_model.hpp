#pragma once

#include <span>

#include "wamim/loss.hpp"
#include "wamim/masking.hpp"
#include "wamim/model.hpp"
#include "wamim/targets.hpp"

namespace wamim {

// Forward-only re-implementation of forward_loss in long double with plain
// loops, written against the parameter names rather than the layer kernels.
// Finite differences of this function resolve gradients far below what a
// double-valued loss allows at step 1e-5.
long double reference_loss(const ModelParams& params, const ModelConfig& cfg,
                           const ImageTensor& image, const PatchMask& pm,
                           const TargetSet& targets, Metric metric,
                           std::span<const double> weights);

}  // namespace wamim
