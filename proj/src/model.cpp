#include "wamim/model.hpp"

#include <cmath>
#include <string>

#include "nn.hpp"
#include "wamim/errors.hpp"
#include "wamim/random.hpp"

namespace wamim {

using nn::LayerNormCache;
using nn::Matrix;

std::vector<LevelGeometry> target_geometry(std::size_t image_side, std::size_t channels,
                                           const LevelSelection& sel) {
  std::vector<LevelGeometry> out;
  for (std::size_t k = 0; k < sel.size(); ++k) {
    const std::size_t level = sel.selected_levels[k];
    if (level >= 32 || image_side % (std::size_t{1} << level) != 0) {
      throw ConfigError("image side " + std::to_string(image_side) + " not divisible by 2^" +
                        std::to_string(level));
    }
    const bool with_approx = sel.attach_approximation && k + 1 == sel.size();
    out.push_back({image_side >> level, (with_approx ? 4 : 3) * channels});
  }
  return out;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("model." + field + ": " + why);
  };
  if (channels == 0) fail("channels", "must be positive");
  if (patch == 0) fail("patch", "must be positive");
  if (image_side == 0 || image_side % patch != 0) {
    fail("image_side", "must be a positive multiple of the patch side");
  }
  if (depth == 0) fail("depth", "must be positive");
  if (heads == 0 || width % heads != 0) fail("heads", "must divide the encoder width");
  if (width == 0 || width % 4 != 0) fail("width", "must be a positive multiple of 4");
  if (decoder_heads == 0 || decoder_width % decoder_heads != 0) {
    fail("decoder_heads", "must divide the decoder width");
  }
  if (decoder_width == 0 || decoder_width % 4 != 0) {
    fail("decoder_width", "must be a positive multiple of 4");
  }
  if (mlp_ratio == 0) fail("mlp_ratio", "must be positive");
  if (taps.empty()) fail("taps", "must not be empty");
  if (taps.size() != levels.size()) fail("taps", "need exactly one tap per target level");
  for (std::size_t k = 0; k < taps.size(); ++k) {
    if (taps[k] == 0 || taps[k] > depth) fail("taps", "layer outside 1..depth");
    if (k > 0 && taps[k] <= taps[k - 1]) fail("taps", "must be strictly increasing");
  }
  const std::size_t g = grid();
  for (const auto& lv : levels) {
    if (lv.side == 0 || lv.channels == 0) fail("levels", "empty target geometry");
    if (lv.side % g != 0 && g % lv.side != 0) {
      fail("levels", "target side " + std::to_string(lv.side) + " and token grid " +
                         std::to_string(g) + " must divide one another");
    }
  }
}

std::vector<double> sincos_position_table(std::size_t grid, std::size_t dim) {
  if (dim % 4 != 0) throw ConfigError("position embedding width must be divisible by 4");
  const std::size_t quarter = dim / 4;
  std::vector<double> table(grid * grid * dim);
  for (std::size_t r = 0; r < grid; ++r) {
    for (std::size_t c = 0; c < grid; ++c) {
      double* row = table.data() + (r * grid + c) * dim;
      for (std::size_t i = 0; i < quarter; ++i) {
        const double omega =
            1.0 / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(quarter));
        row[i] = std::sin(static_cast<double>(r) * omega);
        row[quarter + i] = std::cos(static_cast<double>(r) * omega);
        row[2 * quarter + i] = std::sin(static_cast<double>(c) * omega);
        row[3 * quarter + i] = std::cos(static_cast<double>(c) * omega);
      }
    }
  }
  return table;
}

namespace {

std::string enc_prefix(std::size_t layer) { return "enc." + std::to_string(layer); }
std::string dec_prefix(std::size_t k) { return "dec." + std::to_string(k); }

void add_block(ModelParams& ps, const std::string& p, std::size_t d, std::size_t hidden) {
  ps.add(p + ".ln1.gamma", {d}, true, false);
  ps.add(p + ".ln1.beta", {d}, true, false);
  ps.add(p + ".attn.qkv.weight", {d, 3 * d}, true, true);
  ps.add(p + ".attn.qkv.bias", {3 * d}, true, false);
  ps.add(p + ".attn.proj.weight", {d, d}, true, true);
  ps.add(p + ".attn.proj.bias", {d}, true, false);
  ps.add(p + ".ln2.gamma", {d}, true, false);
  ps.add(p + ".ln2.beta", {d}, true, false);
  ps.add(p + ".mlp.fc1.weight", {d, hidden}, true, true);
  ps.add(p + ".mlp.fc1.bias", {hidden}, true, false);
  ps.add(p + ".mlp.fc2.weight", {hidden, d}, true, true);
  ps.add(p + ".mlp.fc2.bias", {d}, true, false);
}

struct HeadShape {
  std::size_t factor;  // s/g when expanding, g/s when merging
  bool merge;
  std::size_t in, out;
};

HeadShape head_shape(const ModelConfig& cfg, std::size_t k) {
  const std::size_t g = cfg.grid();
  const LevelGeometry& lv = cfg.levels[k];
  if (lv.side >= g) {
    const std::size_t f = lv.side / g;
    return {f, false, cfg.decoder_width, f * f * lv.channels};
  }
  const std::size_t f = g / lv.side;
  return {f, true, f * f * cfg.decoder_width, lv.channels};
}

// Resolved indices of one transformer block's parameters.
struct BlockIdx {
  std::size_t ln1_g, ln1_b, qkv_w, qkv_b, proj_w, proj_b, ln2_g, ln2_b, fc1_w, fc1_b, fc2_w,
      fc2_b;
  std::size_t heads;

  BlockIdx(const ModelParams& ps, const std::string& p, std::size_t h)
      : ln1_g(ps.index(p + ".ln1.gamma")),
        ln1_b(ps.index(p + ".ln1.beta")),
        qkv_w(ps.index(p + ".attn.qkv.weight")),
        qkv_b(ps.index(p + ".attn.qkv.bias")),
        proj_w(ps.index(p + ".attn.proj.weight")),
        proj_b(ps.index(p + ".attn.proj.bias")),
        ln2_g(ps.index(p + ".ln2.gamma")),
        ln2_b(ps.index(p + ".ln2.beta")),
        fc1_w(ps.index(p + ".mlp.fc1.weight")),
        fc1_b(ps.index(p + ".mlp.fc1.bias")),
        fc2_w(ps.index(p + ".mlp.fc2.weight")),
        fc2_b(ps.index(p + ".mlp.fc2.bias")),
        heads(h) {}
};

std::span<const double> val(const ModelParams& ps, std::size_t i) {
  return ps.entry(i).value.data;
}
std::span<double> mut(ModelParams& ps, std::size_t i) { return ps.entry(i).value.data; }
std::size_t cols_of(const ModelParams& ps, std::size_t i) { return ps.entry(i).value.shape.back(); }

struct BlockCache {
  Matrix x, ln1, qkv, attn, mid, ln2, hidden, act;
  LayerNormCache n1, n2;
  std::vector<double> probs;
};

Matrix block_forward(const ModelParams& ps, const BlockIdx& b, const Matrix& x, BlockCache& c) {
  c.x = x;
  nn::layernorm_forward(x, val(ps, b.ln1_g), val(ps, b.ln1_b), c.ln1, c.n1);
  nn::linear_forward(c.ln1, val(ps, b.qkv_w), val(ps, b.qkv_b), cols_of(ps, b.qkv_w), c.qkv);
  nn::attention_forward(c.qkv, b.heads, c.attn, c.probs);
  Matrix proj;
  nn::linear_forward(c.attn, val(ps, b.proj_w), val(ps, b.proj_b), cols_of(ps, b.proj_w), proj);
  c.mid = x;
  for (std::size_t i = 0; i < proj.data.size(); ++i) c.mid.data[i] += proj.data[i];
  nn::layernorm_forward(c.mid, val(ps, b.ln2_g), val(ps, b.ln2_b), c.ln2, c.n2);
  nn::linear_forward(c.ln2, val(ps, b.fc1_w), val(ps, b.fc1_b), cols_of(ps, b.fc1_w), c.hidden);
  nn::gelu_forward(c.hidden, c.act);
  Matrix mlp;
  nn::linear_forward(c.act, val(ps, b.fc2_w), val(ps, b.fc2_b), cols_of(ps, b.fc2_w), mlp);
  Matrix out = c.mid;
  for (std::size_t i = 0; i < mlp.data.size(); ++i) out.data[i] += mlp.data[i];
  return out;
}

Matrix block_backward(const ModelParams& ps, ModelParams& gs, const BlockIdx& b,
                      const BlockCache& c, const Matrix& dout) {
  Matrix dmid = dout;
  Matrix dact(c.act.rows, c.act.cols);
  nn::linear_backward(dout, c.act, val(ps, b.fc2_w), &dact, mut(gs, b.fc2_w), mut(gs, b.fc2_b));
  Matrix dhidden(c.hidden.rows, c.hidden.cols);
  nn::gelu_backward(dact, c.hidden, dhidden);
  Matrix dln2(c.ln2.rows, c.ln2.cols);
  nn::linear_backward(dhidden, c.ln2, val(ps, b.fc1_w), &dln2, mut(gs, b.fc1_w),
                      mut(gs, b.fc1_b));
  nn::layernorm_backward(dln2, c.mid, val(ps, b.ln2_g), c.n2, dmid, mut(gs, b.ln2_g),
                         mut(gs, b.ln2_b));

  Matrix dx = dmid;
  Matrix dattn(c.attn.rows, c.attn.cols);
  nn::linear_backward(dmid, c.attn, val(ps, b.proj_w), &dattn, mut(gs, b.proj_w),
                      mut(gs, b.proj_b));
  Matrix dqkv(c.qkv.rows, c.qkv.cols);
  nn::attention_backward(dattn, c.qkv, b.heads, c.probs, dqkv);
  Matrix dln1(c.ln1.rows, c.ln1.cols);
  nn::linear_backward(dqkv, c.ln1, val(ps, b.qkv_w), &dln1, mut(gs, b.qkv_w), mut(gs, b.qkv_b));
  nn::layernorm_backward(dln1, c.x, val(ps, b.ln1_g), c.n1, dx, mut(gs, b.ln1_g),
                         mut(gs, b.ln1_b));
  return dx;
}

void check_inputs(const ModelConfig& cfg, const ImageTensor& image, const PatchMask& pm) {
  if (image.channels != cfg.channels || image.rows != cfg.image_side ||
      image.cols != cfg.image_side || image.data.size() != image.channels * image.rows * image.cols) {
    throw DimensionError("image " + std::to_string(image.channels) + "x" +
                         std::to_string(image.rows) + "x" + std::to_string(image.cols) +
                         " does not match model input " + std::to_string(cfg.channels) + "x" +
                         std::to_string(cfg.image_side) + "x" + std::to_string(cfg.image_side));
  }
  if (pm.grid != cfg.grid() || pm.flags.size() != cfg.tokens()) {
    throw DimensionError("mask grid " + std::to_string(pm.grid) + " does not match token grid " +
                         std::to_string(cfg.grid()));
  }
}

struct EncoderCache {
  std::vector<std::size_t> visible;
  Matrix patches;
  std::vector<BlockCache> blocks;
  std::vector<Matrix> outputs;  // per layer
};

void run_encoder(const ModelParams& ps, const ModelConfig& cfg, const ImageTensor& image,
                 const PatchMask& pm, EncoderCache& ec) {
  check_inputs(cfg, image, pm);
  ec.visible = visible_indices(pm);
  if (ec.visible.empty()) throw DegenerateError("every patch is masked; nothing to encode");

  const std::size_t g = cfg.grid(), p = cfg.patch, pd = cfg.patch_dim();
  ec.patches = Matrix(ec.visible.size(), pd);
  for (std::size_t i = 0; i < ec.visible.size(); ++i) {
    const std::size_t tr = ec.visible[i] / g, tc = ec.visible[i] % g;
    double* row = ec.patches.row(i);
    for (std::size_t ch = 0; ch < cfg.channels; ++ch) {
      for (std::size_t dy = 0; dy < p; ++dy) {
        for (std::size_t dx = 0; dx < p; ++dx) {
          row[(ch * p + dy) * p + dx] = image.at(ch, tr * p + dy, tc * p + dx);
        }
      }
    }
  }
  Matrix x;
  const std::size_t ew = ps.index("patch_embed.weight");
  nn::linear_forward(ec.patches, val(ps, ew), val(ps, ps.index("patch_embed.bias")), cfg.width, x);
  const auto pos = val(ps, ps.index("pos_embed"));
  for (std::size_t i = 0; i < ec.visible.size(); ++i) {
    const double* pr = pos.data() + ec.visible[i] * cfg.width;
    double* xr = x.row(i);
    for (std::size_t j = 0; j < cfg.width; ++j) xr[j] += pr[j];
  }

  ec.blocks.assign(cfg.depth, {});
  ec.outputs.clear();
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    x = block_forward(ps, BlockIdx(ps, enc_prefix(l + 1), cfg.heads), x, ec.blocks[l]);
    ec.outputs.push_back(x);
  }
}

struct DecoderCache {
  Matrix tap, tap_normed, embedded, seq, block_out, normed, head_in, head_out;
  LayerNormCache tap_norm, out_norm;
  BlockCache block;
};

ImageTensor run_decoder(const ModelParams& ps, const ModelConfig& cfg, const Matrix& tap,
                        const std::vector<std::size_t>& visible, std::size_t k, DecoderCache& dc) {
  const std::string pre = dec_prefix(k + 1);
  const std::size_t g = cfg.grid(), n = cfg.tokens(), dw = cfg.decoder_width;
  dc.tap = tap;
  nn::layernorm_forward(tap, val(ps, ps.index(pre + ".norm.gamma")),
                        val(ps, ps.index(pre + ".norm.beta")), dc.tap_normed, dc.tap_norm);
  nn::linear_forward(dc.tap_normed, val(ps, ps.index(pre + ".embed.weight")),
                     val(ps, ps.index(pre + ".embed.bias")), dw, dc.embedded);

  const auto mask_token = val(ps, ps.index(pre + ".mask_token"));
  const auto pos = val(ps, ps.index(pre + ".pos_embed"));
  dc.seq = Matrix(n, dw);
  for (std::size_t t = 0; t < n; ++t) {
    std::copy(mask_token.begin(), mask_token.end(), dc.seq.row(t));
  }
  for (std::size_t i = 0; i < visible.size(); ++i) {
    std::copy(dc.embedded.row(i), dc.embedded.row(i) + dw, dc.seq.row(visible[i]));
  }
  for (std::size_t i = 0; i < dc.seq.data.size(); ++i) dc.seq.data[i] += pos[i];

  dc.block_out = block_forward(ps, BlockIdx(ps, pre + ".block", cfg.decoder_heads), dc.seq,
                               dc.block);
  nn::layernorm_forward(dc.block_out, val(ps, ps.index(pre + ".norm_out.gamma")),
                        val(ps, ps.index(pre + ".norm_out.beta")), dc.normed, dc.out_norm);

  const HeadShape hs = head_shape(cfg, k);
  const LevelGeometry& lv = cfg.levels[k];
  if (hs.merge) {
    const std::size_t f = hs.factor, s = lv.side;
    dc.head_in = Matrix(s * s, hs.in);
    for (std::size_t r = 0; r < s; ++r) {
      for (std::size_t c = 0; c < s; ++c) {
        double* dst = dc.head_in.row(r * s + c);
        for (std::size_t dy = 0; dy < f; ++dy) {
          for (std::size_t dx = 0; dx < f; ++dx) {
            const double* src = dc.normed.row((r * f + dy) * g + c * f + dx);
            std::copy(src, src + dw, dst + (dy * f + dx) * dw);
          }
        }
      }
    }
  } else {
    dc.head_in = dc.normed;
  }
  nn::linear_forward(dc.head_in, val(ps, ps.index(pre + ".head.weight")),
                     val(ps, ps.index(pre + ".head.bias")), hs.out, dc.head_out);

  ImageTensor pred(lv.channels, lv.side, lv.side);
  if (hs.merge) {
    for (std::size_t cell = 0; cell < lv.side * lv.side; ++cell) {
      for (std::size_t ch = 0; ch < lv.channels; ++ch) {
        pred.channel(ch)[cell] = dc.head_out.row(cell)[ch];
      }
    }
  } else {
    const std::size_t f = hs.factor;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t tr = t / g, tc = t % g;
      const double* out = dc.head_out.row(t);
      for (std::size_t dy = 0; dy < f; ++dy) {
        for (std::size_t dx = 0; dx < f; ++dx) {
          for (std::size_t ch = 0; ch < lv.channels; ++ch) {
            pred.at(ch, tr * f + dy, tc * f + dx) = out[(dy * f + dx) * lv.channels + ch];
          }
        }
      }
    }
  }
  return pred;
}

// Returns d(loss)/d(tap) given d(loss)/d(pred).
Matrix decoder_backward(const ModelParams& ps, ModelParams& gs, const ModelConfig& cfg,
                        const std::vector<std::size_t>& visible, std::size_t k,
                        const DecoderCache& dc, const ImageTensor& dpred) {
  const std::string pre = dec_prefix(k + 1);
  const std::size_t g = cfg.grid(), n = cfg.tokens(), dw = cfg.decoder_width;
  const HeadShape hs = head_shape(cfg, k);
  const LevelGeometry& lv = cfg.levels[k];

  Matrix dhead_out(dc.head_out.rows, dc.head_out.cols);
  if (hs.merge) {
    for (std::size_t cell = 0; cell < lv.side * lv.side; ++cell) {
      for (std::size_t ch = 0; ch < lv.channels; ++ch) {
        dhead_out.row(cell)[ch] = dpred.channel(ch)[cell];
      }
    }
  } else {
    const std::size_t f = hs.factor;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t tr = t / g, tc = t % g;
      double* out = dhead_out.row(t);
      for (std::size_t dy = 0; dy < f; ++dy) {
        for (std::size_t dx = 0; dx < f; ++dx) {
          for (std::size_t ch = 0; ch < lv.channels; ++ch) {
            out[(dy * f + dx) * lv.channels + ch] = dpred.at(ch, tr * f + dy, tc * f + dx);
          }
        }
      }
    }
  }

  const std::size_t hw = ps.index(pre + ".head.weight");
  Matrix dhead_in(dc.head_in.rows, dc.head_in.cols);
  nn::linear_backward(dhead_out, dc.head_in, val(ps, hw), &dhead_in, mut(gs, hw),
                      mut(gs, ps.index(pre + ".head.bias")));

  Matrix dnormed(n, dw);
  if (hs.merge) {
    const std::size_t f = hs.factor, s = lv.side;
    for (std::size_t r = 0; r < s; ++r) {
      for (std::size_t c = 0; c < s; ++c) {
        const double* src = dhead_in.row(r * s + c);
        for (std::size_t dy = 0; dy < f; ++dy) {
          for (std::size_t dx = 0; dx < f; ++dx) {
            double* dst = dnormed.row((r * f + dy) * g + c * f + dx);
            const double* part = src + (dy * f + dx) * dw;
            for (std::size_t j = 0; j < dw; ++j) dst[j] += part[j];
          }
        }
      }
    }
  } else {
    dnormed = std::move(dhead_in);
  }

  Matrix dblock_out(n, dw);
  const std::size_t og = ps.index(pre + ".norm_out.gamma");
  nn::layernorm_backward(dnormed, dc.block_out, val(ps, og), dc.out_norm, dblock_out, mut(gs, og),
                         mut(gs, ps.index(pre + ".norm_out.beta")));
  const Matrix dseq = block_backward(ps, gs, BlockIdx(ps, pre + ".block", cfg.decoder_heads),
                                     dc.block, dblock_out);

  std::vector<std::uint8_t> is_visible(n, 0);
  for (std::size_t v : visible) is_visible[v] = 1;
  auto dmask = mut(gs, ps.index(pre + ".mask_token"));
  for (std::size_t t = 0; t < n; ++t) {
    if (is_visible[t]) continue;
    const double* src = dseq.row(t);
    for (std::size_t j = 0; j < dw; ++j) dmask[j] += src[j];
  }
  Matrix dembedded(visible.size(), dw);
  for (std::size_t i = 0; i < visible.size(); ++i) {
    std::copy(dseq.row(visible[i]), dseq.row(visible[i]) + dw, dembedded.row(i));
  }

  const std::size_t ew = ps.index(pre + ".embed.weight");
  Matrix dtap_normed(dc.tap_normed.rows, dc.tap_normed.cols);
  nn::linear_backward(dembedded, dc.tap_normed, val(ps, ew), &dtap_normed, mut(gs, ew),
                      mut(gs, ps.index(pre + ".embed.bias")));
  Matrix dtap(dc.tap.rows, dc.tap.cols);
  const std::size_t ng = ps.index(pre + ".norm.gamma");
  nn::layernorm_backward(dtap_normed, dc.tap, val(ps, ng), dc.tap_norm, dtap, mut(gs, ng),
                         mut(gs, ps.index(pre + ".norm.beta")));
  return dtap;
}

Matrix to_matrix(const FeatureMatrix& f) {
  Matrix m(f.rows, f.cols);
  m.data = f.data;
  return m;
}

void check_targets(const ModelConfig& cfg, const TargetSet& targets,
                   std::span<const double> weights) {
  if (targets.size() != cfg.levels.size()) {
    throw DimensionError("target set has " + std::to_string(targets.size()) +
                         " entries, model predicts " + std::to_string(cfg.levels.size()));
  }
  if (weights.size() != cfg.levels.size()) {
    throw ConfigError("need one loss weight per level");
  }
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const ImageTensor& t = targets.entries[k].values;
    const LevelGeometry& lv = cfg.levels[k];
    if (t.rows != lv.side || t.cols != lv.side || t.channels != lv.channels) {
      throw DimensionError("target " + std::to_string(k + 1) + " shape does not match level " +
                           "geometry");
    }
  }
}

struct Forward {
  EncoderCache enc;
  std::vector<DecoderCache> dec;
  std::vector<ImageTensor> preds;
  std::vector<ScaleMask> masks;
  LossReport report;
};

void run_forward(const ModelParams& ps, const ModelConfig& cfg, const ImageTensor& image,
                 const PatchMask& pm, const TargetSet& targets, Metric metric,
                 std::span<const double> weights, Forward& fw) {
  check_targets(cfg, targets, weights);
  run_encoder(ps, cfg, image, pm, fw.enc);
  const std::size_t levels = cfg.levels.size();
  fw.dec.assign(levels, {});
  fw.preds.clear();
  fw.masks.clear();
  std::vector<LevelDistance> dists;
  for (std::size_t k = 0; k < levels; ++k) {
    fw.preds.push_back(
        run_decoder(ps, cfg, fw.enc.outputs[cfg.taps[k] - 1], fw.enc.visible, k, fw.dec[k]));
    fw.masks.push_back(rescale_mask(pm, cfg.levels[k].side));
    // A coarse level can end up with no fully masked cell; it then reports
    // zero masked cells and contributes nothing.
    if (fw.masks[k].masked_count() == 0) {
      dists.push_back({0.0, 0});
    } else {
      dists.push_back(
          masked_distance(fw.preds[k], targets.entries[k].values, fw.masks[k], metric));
    }
  }
  fw.report = make_report(std::move(dists), {weights.begin(), weights.end()});
}

}  // namespace

ModelParams make_param_layout(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams ps;
  const std::size_t w = cfg.width, dw = cfg.decoder_width;
  ps.add("patch_embed.weight", {cfg.patch_dim(), w}, true, true);
  ps.add("patch_embed.bias", {w}, true, false);
  ps.add("pos_embed", {cfg.tokens(), w}, false, false);
  for (std::size_t l = 1; l <= cfg.depth; ++l) add_block(ps, enc_prefix(l), w, cfg.mlp_ratio * w);
  for (std::size_t k = 0; k < cfg.levels.size(); ++k) {
    const std::string p = dec_prefix(k + 1);
    ps.add(p + ".norm.gamma", {w}, true, false);
    ps.add(p + ".norm.beta", {w}, true, false);
    ps.add(p + ".embed.weight", {w, dw}, true, true);
    ps.add(p + ".embed.bias", {dw}, true, false);
    ps.add(p + ".mask_token", {dw}, true, false);
    ps.add(p + ".pos_embed", {cfg.tokens(), dw}, false, false);
    add_block(ps, p + ".block", dw, cfg.mlp_ratio * dw);
    ps.add(p + ".norm_out.gamma", {dw}, true, false);
    ps.add(p + ".norm_out.beta", {dw}, true, false);
    const HeadShape hs = head_shape(cfg, k);
    ps.add(p + ".head.weight", {hs.in, hs.out}, true, true);
    ps.add(p + ".head.bias", {hs.out}, true, false);
  }
  return ps;
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams ps = make_param_layout(cfg);
  Rng rng(seed);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto& e = ps.entry(i);
    const auto& name = e.name;
    auto ends_with = [&](const char* suffix) {
      const std::string s(suffix);
      return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    if (name == "pos_embed") {
      e.value.data = sincos_position_table(cfg.grid(), cfg.width);
    } else if (ends_with(".pos_embed")) {
      e.value.data = sincos_position_table(cfg.grid(), cfg.decoder_width);
    } else if (ends_with(".gamma")) {
      std::fill(e.value.data.begin(), e.value.data.end(), 1.0);
    } else if (e.value.shape.size() == 2) {
      const double fan_in = static_cast<double>(e.value.shape[0]);
      const double fan_out = static_cast<double>(e.value.shape[1]);
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      for (double& v : e.value.data) v = rng.uniform(-bound, bound);
    }
  }
  return ps;
}

EncoderTaps encode_taps(const ModelParams& params, const ModelConfig& cfg,
                        const ImageTensor& image, const PatchMask& pm) {
  cfg.validate();
  EncoderCache ec;
  run_encoder(params, cfg, image, pm, ec);
  EncoderTaps taps;
  taps.visible = ec.visible;
  taps.layers = cfg.taps;
  for (std::size_t l : cfg.taps) {
    const Matrix& m = ec.outputs[l - 1];
    taps.features.push_back({m.rows, m.cols, m.data});
  }
  return taps;
}

ImageTensor decode_level(const ModelParams& params, const ModelConfig& cfg,
                         const FeatureMatrix& tap, const PatchMask& pm, std::size_t k) {
  cfg.validate();
  if (k == 0 || k > cfg.levels.size()) {
    throw ConfigError("decoder level " + std::to_string(k) + " not configured");
  }
  if (pm.grid != cfg.grid()) throw DimensionError("mask grid does not match token grid");
  const auto visible = visible_indices(pm);
  if (tap.rows != visible.size() || tap.cols != cfg.width) {
    throw DimensionError("tap features do not match the visible token count or width");
  }
  DecoderCache dc;
  return run_decoder(params, cfg, to_matrix(tap), visible, k - 1, dc);
}

std::vector<ImageTensor> predict(const ModelParams& params, const ModelConfig& cfg,
                                 const ImageTensor& image, const PatchMask& pm) {
  cfg.validate();
  EncoderCache ec;
  run_encoder(params, cfg, image, pm, ec);
  std::vector<ImageTensor> preds;
  for (std::size_t k = 0; k < cfg.levels.size(); ++k) {
    DecoderCache dc;
    preds.push_back(run_decoder(params, cfg, ec.outputs[cfg.taps[k] - 1], ec.visible, k, dc));
  }
  return preds;
}

LossReport forward_loss(const ModelParams& params, const ModelConfig& cfg,
                        const ImageTensor& image, const PatchMask& pm, const TargetSet& targets,
                        Metric metric, std::span<const double> weights) {
  cfg.validate();
  Forward fw;
  run_forward(params, cfg, image, pm, targets, metric, weights, fw);
  return fw.report;
}

LossAndGrad grad(const ModelParams& params, const ModelConfig& cfg, const ImageTensor& image,
                 const PatchMask& pm, const TargetSet& targets, Metric metric,
                 std::span<const double> weights) {
  cfg.validate();
  Forward fw;
  run_forward(params, cfg, image, pm, targets, metric, weights, fw);
  if (!std::isfinite(fw.report.total)) {
    throw GradientError("loss is not finite; cannot differentiate");
  }

  LossAndGrad out{fw.report, params.zeros_like()};
  ModelParams& gs = out.grads;

  std::vector<Matrix> dtaps;
  for (std::size_t k = 0; k < cfg.levels.size(); ++k) {
    const ImageTensor dpred =
        fw.report.levels[k].masked == 0
            ? ImageTensor(cfg.levels[k].channels, cfg.levels[k].side, cfg.levels[k].side)
            : masked_distance_grad(fw.preds[k], targets.entries[k].values, fw.masks[k], metric,
                                   weights[k]);
    dtaps.push_back(decoder_backward(params, gs, cfg, fw.enc.visible, k, fw.dec[k], dpred));
  }

  const std::size_t n = fw.enc.visible.size();
  Matrix dx(n, cfg.width);
  for (std::size_t l = cfg.depth; l >= 1; --l) {
    for (std::size_t k = 0; k < cfg.taps.size(); ++k) {
      if (cfg.taps[k] != l) continue;
      for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dtaps[k].data[i];
    }
    dx = block_backward(params, gs, BlockIdx(params, enc_prefix(l), cfg.heads),
                        fw.enc.blocks[l - 1], dx);
  }
  const std::size_t ew = params.index("patch_embed.weight");
  nn::linear_backward(dx, fw.enc.patches, val(params, ew), nullptr, mut(gs, ew),
                      mut(gs, params.index("patch_embed.bias")));
  return out;
}

}  // namespace wamim
