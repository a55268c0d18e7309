#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wamim {

// g x g patch flags, true = masked.
struct PatchMask {
  std::size_t grid = 0;
  std::vector<std::uint8_t> flags;  // row-major, 0/1
  double ratio = 0.0;
  std::uint64_t seed = 0;
  std::size_t block = 1;

  bool masked(std::size_t r, std::size_t c) const { return flags[r * grid + c] != 0; }
  std::size_t masked_count() const;

  // Test-only bypass: nothing masked.
  static PatchMask all_visible(std::size_t grid);
  static PatchMask from_flags(std::size_t grid, std::vector<std::uint8_t> flags);
};

enum class RescaleRule { Identity, Replicate, AllCovered };

struct ScaleMask {
  std::size_t side = 0;
  std::vector<std::uint8_t> flags;
  std::size_t source_grid = 0;
  RescaleRule rule = RescaleRule::Identity;

  bool masked(std::size_t r, std::size_t c) const { return flags[r * side + c] != 0; }
  std::size_t masked_count() const;
};

const char* rescale_rule_name(RescaleRule r);

inline constexpr std::size_t kDefaultBlockSide = 2;

// Target masked count: round(ratio * grid^2), half away from zero.
std::size_t mask_target_count(std::size_t grid, double ratio);

// Block-wise masking with an exact masked count. Every patch is a candidate
// block anchor; anchors are shuffled with Rng(seed) and visited in order.
// Each anchor covers the b x b block starting at it, truncated at the grid
// edge. Newly covered patches are added in row-major order until the target
// count is reached, which trims the final block.
//
// Throws ConfigError on ratio outside (0, 1), b == 0 or b > g, and
// DegenerateError when the target count is 0 or g^2.
PatchMask gen_block_mask(std::size_t grid, double ratio, std::size_t block, std::uint64_t seed);

// Requires side and grid to divide one another. Coarser cells are masked
// iff every covered patch is masked; finer cells replicate their patch.
ScaleMask rescale_mask(const PatchMask& pm, std::size_t side);

std::vector<std::size_t> visible_indices(const PatchMask& pm);
std::vector<std::size_t> masked_indices(const PatchMask& pm);

}  // namespace wamim
