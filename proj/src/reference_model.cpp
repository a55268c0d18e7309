#include "wamim/reference_model.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "wamim/errors.hpp"

namespace wamim {

namespace {

using Real = long double;
using Mat = std::vector<std::vector<Real>>;  // tokens x features

struct View {
  const ModelParams& ps;
  const std::vector<double>& operator()(const std::string& name) const { return ps.at(name).data; }
  std::size_t cols(const std::string& name) const { return ps.at(name).shape.back(); }
};

Mat linear(const Mat& x, const View& v, const std::string& p) {
  const auto& w = v(p + ".weight");
  const auto& b = v(p + ".bias");
  const std::size_t out = v.cols(p + ".weight");
  Mat y(x.size(), std::vector<Real>(out));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t o = 0; o < out; ++o) {
      Real acc = b[o];
      for (std::size_t j = 0; j < x[i].size(); ++j) acc += x[i][j] * static_cast<Real>(w[j * out + o]);
      y[i][o] = acc;
    }
  }
  return y;
}

Mat layernorm(const Mat& x, const View& v, const std::string& p) {
  const auto& g = v(p + ".gamma");
  const auto& b = v(p + ".beta");
  Mat y = x;
  for (auto& row : y) {
    Real mean = 0, var = 0;
    for (Real e : row) mean += e;
    mean /= static_cast<Real>(row.size());
    for (Real e : row) var += (e - mean) * (e - mean);
    var /= static_cast<Real>(row.size());
    const Real inv = 1 / std::sqrt(var + static_cast<Real>(1e-6));
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean) * inv * g[j] + b[j];
  }
  return y;
}

Mat attention(const Mat& qkv, std::size_t heads) {
  const std::size_t n = qkv.size(), d = qkv[0].size() / 3, dh = d / heads;
  const Real scale = 1 / std::sqrt(static_cast<Real>(dh));
  Mat out(n, std::vector<Real>(d, 0));
  std::vector<Real> s(n);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      Real mx = -INFINITY;
      for (std::size_t j = 0; j < n; ++j) {
        Real dot = 0;
        for (std::size_t e = 0; e < dh; ++e) dot += qkv[i][h * dh + e] * qkv[j][d + h * dh + e];
        s[j] = dot * scale;
        mx = std::max(mx, s[j]);
      }
      Real z = 0;
      for (Real& e : s) z += (e = std::exp(e - mx));
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t e = 0; e < dh; ++e) out[i][h * dh + e] += s[j] / z * qkv[j][2 * d + h * dh + e];
      }
    }
  }
  return out;
}

void add_into(Mat& a, const Mat& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
  }
}

Mat block(const Mat& x, const View& v, const std::string& p, std::size_t heads) {
  Mat mid = x;
  add_into(mid, linear(attention(linear(layernorm(x, v, p + ".ln1"), v, p + ".attn.qkv"), heads), v,
                       p + ".attn.proj"));
  Mat hidden = linear(layernorm(mid, v, p + ".ln2"), v, p + ".mlp.fc1");
  for (auto& row : hidden) {
    for (Real& e : row) e = e / 2 * (1 + std::erf(e / std::sqrt(static_cast<Real>(2))));
  }
  add_into(mid, linear(hidden, v, p + ".mlp.fc2"));
  return mid;
}

}  // namespace

long double reference_loss(const ModelParams& params, const ModelConfig& cfg,
                           const ImageTensor& image, const PatchMask& pm,
                           const TargetSet& targets, Metric metric,
                           std::span<const double> weights) {
  cfg.validate();
  if (targets.size() != cfg.levels.size() || weights.size() != cfg.levels.size()) {
    throw DimensionError("reference loss: one target and one weight per level required");
  }
  const View v{params};
  const std::size_t g = cfg.grid(), p = cfg.patch;

  std::vector<std::size_t> visible;
  for (std::size_t t = 0; t < g * g; ++t) {
    if (!pm.flags[t]) visible.push_back(t);
  }
  Mat x(visible.size());
  for (std::size_t i = 0; i < visible.size(); ++i) {
    const std::size_t tr = visible[i] / g, tc = visible[i] % g;
    for (std::size_t ch = 0; ch < cfg.channels; ++ch) {
      for (std::size_t dy = 0; dy < p; ++dy) {
        for (std::size_t dx = 0; dx < p; ++dx) x[i].push_back(image.at(ch, tr * p + dy, tc * p + dx));
      }
    }
  }
  x = linear(x, v, "patch_embed");
  const auto& pos = v("pos_embed");
  for (std::size_t i = 0; i < visible.size(); ++i) {
    for (std::size_t j = 0; j < cfg.width; ++j) x[i][j] += pos[visible[i] * cfg.width + j];
  }
  std::vector<Mat> layers;
  for (std::size_t l = 1; l <= cfg.depth; ++l) {
    x = block(x, v, "enc." + std::to_string(l), cfg.heads);
    layers.push_back(x);
  }

  Real total = 0;
  for (std::size_t k = 0; k < cfg.levels.size(); ++k) {
    const std::string pre = "dec." + std::to_string(k + 1);
    const std::size_t dw = cfg.decoder_width, s = cfg.levels[k].side, ch = cfg.levels[k].channels;
    const Mat emb = linear(layernorm(layers[cfg.taps[k] - 1], v, pre + ".norm"), v, pre + ".embed");
    const auto& token = v(pre + ".mask_token");
    const auto& dpos = v(pre + ".pos_embed");
    Mat seq(g * g, std::vector<Real>(token.begin(), token.end()));
    for (std::size_t i = 0; i < visible.size(); ++i) seq[visible[i]] = emb[i];
    for (std::size_t t = 0; t < g * g; ++t) {
      for (std::size_t j = 0; j < dw; ++j) seq[t][j] += dpos[t * dw + j];
    }
    const Mat normed = layernorm(block(seq, v, pre + ".block", cfg.decoder_heads), v, pre + ".norm_out");

    // pred[c][y][x] as long double
    std::vector<Real> pred(ch * s * s);
    if (s >= g) {
      const std::size_t f = s / g;
      const Mat out = linear(normed, v, pre + ".head");
      for (std::size_t t = 0; t < g * g; ++t) {
        for (std::size_t dy = 0; dy < f; ++dy) {
          for (std::size_t dx = 0; dx < f; ++dx) {
            for (std::size_t c = 0; c < ch; ++c) {
              pred[(c * s + (t / g) * f + dy) * s + (t % g) * f + dx] = out[t][(dy * f + dx) * ch + c];
            }
          }
        }
      }
    } else {
      const std::size_t f = g / s;
      Mat merged(s * s);
      for (std::size_t cell = 0; cell < s * s; ++cell) {
        for (std::size_t dy = 0; dy < f; ++dy) {
          for (std::size_t dx = 0; dx < f; ++dx) {
            const auto& src = normed[((cell / s) * f + dy) * g + (cell % s) * f + dx];
            merged[cell].insert(merged[cell].end(), src.begin(), src.end());
          }
        }
      }
      const Mat out = linear(merged, v, pre + ".head");
      for (std::size_t cell = 0; cell < s * s; ++cell) {
        for (std::size_t c = 0; c < ch; ++c) pred[c * s * s + cell] = out[cell][c];
      }
    }

    const ScaleMask m = rescale_mask(pm, s);
    Real acc = 0;
    std::size_t count = 0;
    for (std::size_t cell = 0; cell < s * s; ++cell) {
      if (!m.flags[cell]) continue;
      ++count;
      for (std::size_t c = 0; c < ch; ++c) {
        const Real d = pred[c * s * s + cell] - targets.entries[k].values.channel(c)[cell];
        acc += metric == Metric::L1 ? std::fabs(d) : d * d;
      }
    }
    if (count > 0) total += weights[k] * (acc / static_cast<Real>(count * ch));
  }
  return total;
}

}  // namespace wamim
