#pragma once

// Record layouts inside the tensor container:
//   pyramid : L<l>_<H|V|D> and approx, f64, dims (C, rows, cols)
//   targets : target_k<k> f64 (channels, s, s); target_k<k>_stats f64
//             (channels, 2) holding (mean, variance) when normalized
//   masks   : mask_g<g> bool (g, g); mask_s<s> bool (s, s) per target side

#include "wamim/container.hpp"
#include "wamim/dwt.hpp"
#include "wamim/masking.hpp"
#include "wamim/targets.hpp"

namespace wamim {

void add_pyramid(TensorContainer& tc, const WaveletPyramid& p);
WaveletPyramid read_pyramid(const TensorContainer& tc);

void add_targets(TensorContainer& tc, const TargetSet& ts);
void add_patch_mask(TensorContainer& tc, const PatchMask& pm);
void add_scale_mask(TensorContainer& tc, const ScaleMask& sm);

std::string target_record_name(std::size_t k);
std::string patch_mask_record_name(std::size_t grid);
std::string scale_mask_record_name(std::size_t side);

}  // namespace wamim
