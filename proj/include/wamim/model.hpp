#pragma once

// Tiny columnar transformer autoencoder with K encoder taps, one light
// decoder per tapped level, and hand-written reverse-mode gradients.
//
// Encoder: visible patches -> linear embedding -> + fixed 2D sin-cos
// position (at the patch's original grid slot) -> `depth` pre-norm blocks.
// Decoder k: LayerNorm(tap) -> linear to decoder width -> scatter onto the
// full g x g grid with the level's mask token at masked slots -> + position
// -> one pre-norm block -> LayerNorm -> size-adapting linear head.
//
// Head size adaptation for a target of side s on a token grid of side g:
//   s >= g: each token emits its (s/g) x (s/g) sub-grid, values ordered
//           (dy, dx, channel);
//   s <  g: tokens are merged space-to-depth in (g/s) x (g/s) groups,
//           concatenated in row-major (dy, dx) order, before the head.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wamim/image.hpp"
#include "wamim/loss.hpp"
#include "wamim/masking.hpp"
#include "wamim/params.hpp"
#include "wamim/targets.hpp"

namespace wamim {

struct LevelGeometry {
  std::size_t side = 0;
  std::size_t channels = 0;
  bool operator==(const LevelGeometry&) const = default;
};

// Target grid side and channel count of each selected level for a square
// image_side x image_side x channels input.
std::vector<LevelGeometry> target_geometry(std::size_t image_side, std::size_t channels,
                                           const LevelSelection& sel);

struct ModelConfig {
  std::size_t image_side = 32;
  std::size_t channels = 3;
  std::size_t patch = 4;
  std::size_t depth = 8;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t decoder_width = 32;
  std::size_t decoder_heads = 2;
  std::size_t mlp_ratio = 4;
  std::vector<std::size_t> taps{2, 4, 6, 8};
  std::vector<LevelGeometry> levels{{16, 9}, {8, 9}, {4, 9}, {2, 12}};

  std::size_t grid() const { return patch ? image_side / patch : 0; }
  std::size_t tokens() const { return grid() * grid(); }
  std::size_t patch_dim() const { return patch * patch * channels; }

  // Throws ConfigError naming the offending field.
  void validate() const;

  // Desk-scale reference: 32x32x3, p=4, 8 layers of width 64 with 4 heads,
  // taps {2,4,6,8}, target grids {16,8,4,2}, decoders of width 32 / 2 heads.
  static ModelConfig reference() { return {}; }
};

using ModelParams = ParamSet;

ModelParams make_param_layout(const ModelConfig& cfg);

// Xavier-uniform matrices drawn from Rng(seed) in layout order, zero biases,
// unit LayerNorm gains, zero mask tokens, fixed sin-cos position tables.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

// Fixed 2D sin-cos table, grid^2 x dim; first half encodes the row, second
// half the column. dim must be divisible by 4.
std::vector<double> sincos_position_table(std::size_t grid, std::size_t dim);

struct FeatureMatrix {
  std::size_t rows = 0;  // tokens
  std::size_t cols = 0;  // width
  std::vector<double> data;
};

struct EncoderTaps {
  std::vector<std::size_t> visible;  // grid slots of the encoded tokens
  std::vector<std::size_t> layers;
  std::vector<FeatureMatrix> features;  // ordered shallow -> deep
};

EncoderTaps encode_taps(const ModelParams& params, const ModelConfig& cfg,
                        const ImageTensor& image, const PatchMask& pm);

// Prediction grid for level k (1-based): channels_k x s_k x s_k.
ImageTensor decode_level(const ModelParams& params, const ModelConfig& cfg,
                         const FeatureMatrix& tap, const PatchMask& pm, std::size_t k);

// Predictions for every configured level.
std::vector<ImageTensor> predict(const ModelParams& params, const ModelConfig& cfg,
                                 const ImageTensor& image, const PatchMask& pm);

LossReport forward_loss(const ModelParams& params, const ModelConfig& cfg,
                        const ImageTensor& image, const PatchMask& pm, const TargetSet& targets,
                        Metric metric, std::span<const double> weights);

struct LossAndGrad {
  LossReport report;
  ModelParams grads;  // same layout as the params; zero for fixed tables
};

// Exact reverse-mode gradient of forward_loss's total. Throws GradientError
// when the loss is not finite.
LossAndGrad grad(const ModelParams& params, const ModelConfig& cfg, const ImageTensor& image,
                 const PatchMask& pm, const TargetSet& targets, Metric metric,
                 std::span<const double> weights);

}  // namespace wamim
