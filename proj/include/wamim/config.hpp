#pragma once

// Run configuration: an INI-style `key = value` file with [section]
// grouping, `;` comments. Lists are comma separated. Unknown keys are
// rejected.
//
//   [data]    source, synthetic_count, image_side, channels, augment,
//             crop_min_scale
//   [wavelet] levels, selected_levels, attach_approximation, normalize,
//             norm_epsilon
//   [mask]    ratio, block
//   [model]   patch, depth, width, heads, decoder_width, decoder_heads,
//             mlp_ratio, taps
//   [loss]    metric, weights
//   [optim]   base_lr, lr_reference_batch, weight_decay, beta1, beta2,
//             eps, warmup_steps
//   [train]   steps, batch_size, checkpoint_every, seed
//
// Defaults follow the desk-scale reference run; the full-size ViT-B/16
// values (224 input, 16-pixel patches, 5 levels, taps 3/6/9/12) ship as
// configs/vit_base.ini.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wamim/loss.hpp"
#include "wamim/model.hpp"
#include "wamim/targets.hpp"

namespace wamim {

struct RunConfig {
  // [data]
  std::string source = "synthetic";
  std::size_t synthetic_count = 256;
  std::size_t image_side = 32;
  std::size_t channels = 3;
  bool augment = true;
  double crop_min_scale = 0.5;

  // [wavelet]
  std::size_t levels = 4;
  std::vector<std::size_t> selected_levels{1, 2, 3, 4};
  bool attach_approximation = true;
  bool normalize = true;
  double norm_epsilon = kDefaultNormEpsilon;

  // [mask]
  double mask_ratio = 0.75;
  std::size_t mask_block = kDefaultBlockSide;

  // [model]
  std::size_t patch = 4;
  std::size_t depth = 8;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t decoder_width = 32;
  std::size_t decoder_heads = 2;
  std::size_t mlp_ratio = 4;
  std::vector<std::size_t> taps{2, 4, 6, 8};

  // [loss]
  Metric metric = Metric::L2;
  std::vector<double> weights{0.8, 0.9, 1.1, 1.2};

  // [optim]
  double base_lr = 1e-3;
  double lr_reference_batch = 256.0;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  std::size_t warmup_steps = 30;

  // [train]
  std::size_t steps = 300;
  std::size_t batch_size = 8;
  std::size_t checkpoint_every = 100;
  std::uint64_t seed = 0;

  // Every cross-module consistency check; throws ConfigError naming the
  // offending key.
  void validate() const;

  LevelSelection level_selection() const;
  ModelConfig model_config() const;
  std::size_t grid() const { return image_side / patch; }

  // lr = base_lr * batch_size / lr_reference_batch
  double peak_lr() const;

  // Canonical INI text (every key, fixed order and formatting).
  std::string to_ini() const;
  std::uint64_t hash() const;  // FNV-1a 64 of to_ini()
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace wamim
