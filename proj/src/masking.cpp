#include "wamim/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wamim/errors.hpp"
#include "wamim/random.hpp"

namespace wamim {

std::size_t PatchMask::masked_count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

PatchMask PatchMask::all_visible(std::size_t grid) {
  PatchMask pm;
  pm.grid = grid;
  pm.flags.assign(grid * grid, 0);
  return pm;
}

PatchMask PatchMask::from_flags(std::size_t grid, std::vector<std::uint8_t> flags) {
  if (flags.size() != grid * grid) throw DimensionError("mask flag count does not match grid");
  PatchMask pm;
  pm.grid = grid;
  pm.flags = std::move(flags);
  for (auto& f : pm.flags) f = f ? 1 : 0;
  pm.ratio = grid ? static_cast<double>(pm.masked_count()) / static_cast<double>(grid * grid) : 0;
  return pm;
}

std::size_t ScaleMask::masked_count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

const char* rescale_rule_name(RescaleRule r) {
  switch (r) {
    case RescaleRule::Identity: return "identity";
    case RescaleRule::Replicate: return "replicate";
    case RescaleRule::AllCovered: return "all-covered";
  }
  return "?";
}

std::size_t mask_target_count(std::size_t grid, double ratio) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(grid * grid)));
}

PatchMask gen_block_mask(std::size_t grid, double ratio, std::size_t block, std::uint64_t seed) {
  if (grid == 0) throw ConfigError("mask grid must be positive");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("mask ratio must lie in (0, 1)");
  if (block == 0 || block > grid) {
    throw ConfigError("mask block side must lie in 1.." + std::to_string(grid));
  }
  const std::size_t n = grid * grid;
  const std::size_t target = mask_target_count(grid, ratio);
  if (target == 0 || target == n) {
    throw DegenerateError("mask ratio " + std::to_string(ratio) + " on a " +
                          std::to_string(grid) + "x" + std::to_string(grid) +
                          " grid masks nothing or everything");
  }

  std::vector<std::size_t> anchors(n);
  std::iota(anchors.begin(), anchors.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(anchors.begin(), anchors.end());

  PatchMask pm;
  pm.grid = grid;
  pm.ratio = ratio;
  pm.seed = seed;
  pm.block = block;
  pm.flags.assign(n, 0);

  std::size_t count = 0;
  for (std::size_t a : anchors) {
    const std::size_t r0 = a / grid, c0 = a % grid;
    const std::size_t r1 = std::min(r0 + block, grid), c1 = std::min(c0 + block, grid);
    for (std::size_t r = r0; r < r1 && count < target; ++r) {
      for (std::size_t c = c0; c < c1 && count < target; ++c) {
        auto& f = pm.flags[r * grid + c];
        if (!f) {
          f = 1;
          ++count;
        }
      }
    }
    if (count == target) break;
  }
  return pm;
}

ScaleMask rescale_mask(const PatchMask& pm, std::size_t side) {
  const std::size_t g = pm.grid;
  if (side == 0 || g == 0 || (side % g != 0 && g % side != 0)) {
    throw DimensionError("cannot rescale a " + std::to_string(g) + "-grid mask to side " +
                         std::to_string(side));
  }
  ScaleMask sm;
  sm.side = side;
  sm.source_grid = g;
  sm.flags.assign(side * side, 0);
  if (side == g) {
    sm.rule = RescaleRule::Identity;
    sm.flags = pm.flags;
  } else if (side > g) {
    sm.rule = RescaleRule::Replicate;
    const std::size_t f = side / g;
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) sm.flags[r * side + c] = pm.flags[(r / f) * g + c / f];
    }
  } else {
    sm.rule = RescaleRule::AllCovered;
    const std::size_t f = g / side;
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) {
        bool all = true;
        for (std::size_t dr = 0; dr < f && all; ++dr) {
          for (std::size_t dc = 0; dc < f && all; ++dc) all = pm.flags[(r * f + dr) * g + c * f + dc];
        }
        sm.flags[r * side + c] = all ? 1 : 0;
      }
    }
  }
  return sm;
}

std::vector<std::size_t> visible_indices(const PatchMask& pm) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pm.flags.size(); ++i) {
    if (!pm.flags[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> masked_indices(const PatchMask& pm) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pm.flags.size(); ++i) {
    if (pm.flags[i]) out.push_back(i);
  }
  return out;
}

}  // namespace wamim
