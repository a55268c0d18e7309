#include "wamim/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wamim/errors.hpp"
#include "wamim/netpbm.hpp"

namespace wamim {

ImageTensor synth_image(std::size_t side, std::size_t channels, std::uint64_t seed,
                        std::uint64_t index) {
  Rng rng(derive_seed(seed, index));
  ImageTensor img(channels, side, side);

  struct Grating {
    double amplitude, freq, cos_t, sin_t, phase;
    std::vector<double> gain;
  };
  std::vector<double> base(channels), gx(channels), gy(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    base[c] = rng.uniform(0.3, 0.7);
    gx[c] = rng.uniform(-0.3, 0.3);
    gy[c] = rng.uniform(-0.3, 0.3);
  }
  const double max_freq = std::max(1.0, static_cast<double>(side) / 4.0);
  Grating gr[2];
  for (auto& g : gr) {
    g.amplitude = rng.uniform(0.05, 0.2);
    g.freq = rng.uniform(1.0, max_freq);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    g.cos_t = std::cos(theta);
    g.sin_t = std::sin(theta);
    g.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    g.gain.resize(channels);
    for (auto& w : g.gain) w = rng.uniform(-1.0, 1.0);
  }

  const double inv = 1.0 / static_cast<double>(side);
  for (std::size_t r = 0; r < side; ++r) {
    const double v = static_cast<double>(r) * inv - 0.5;
    for (std::size_t col = 0; col < side; ++col) {
      const double u = static_cast<double>(col) * inv - 0.5;
      for (std::size_t c = 0; c < channels; ++c) {
        double x = base[c] + gx[c] * u + gy[c] * v;
        for (const auto& g : gr) {
          const double arg = 2.0 * std::numbers::pi * g.freq * (u * g.cos_t + v * g.sin_t) + g.phase;
          x += g.amplitude * g.gain[c] * std::sin(arg);
        }
        img.at(c, r, col) = std::clamp(x, 0.0, 1.0);
      }
    }
  }
  return img;
}

std::vector<ImageTensor> synth_corpus(std::size_t count, std::size_t side, std::size_t channels,
                                      std::uint64_t seed) {
  std::vector<ImageTensor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(synth_image(side, channels, seed, i));
  return out;
}

std::vector<ImageTensor> load_image_dir(const std::filesystem::path& dir, std::size_t side,
                                        std::size_t channels) {
  if (!std::filesystem::is_directory(dir)) throw IoError("data directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".ppm" || ext == ".pgm")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .ppm/.pgm images in " + dir.string());
  std::vector<ImageTensor> out;
  for (const auto& f : files) {
    ImageTensor img = read_netpbm(f);
    if (img.channels != channels || img.rows != side || img.cols != side) {
      throw DimensionError(f.string() + " is not " + std::to_string(channels) + "x" +
                           std::to_string(side) + "x" + std::to_string(side));
    }
    out.push_back(std::move(img));
  }
  return out;
}

ImageTensor resize_bilinear(const ImageTensor& src, std::size_t rows, std::size_t cols) {
  ImageTensor out(src.channels, rows, cols);
  const double sy = static_cast<double>(src.rows) / static_cast<double>(rows);
  const double sx = static_cast<double>(src.cols) / static_cast<double>(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double fy = std::clamp((static_cast<double>(r) + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(src.rows - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src.rows - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t c = 0; c < cols; ++c) {
      const double fx = std::clamp((static_cast<double>(c) + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(src.cols - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src.cols - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t ch = 0; ch < src.channels; ++ch) {
        const double top = src.at(ch, y0, x0) * (1.0 - wx) + src.at(ch, y0, x1) * wx;
        const double bot = src.at(ch, y1, x0) * (1.0 - wx) + src.at(ch, y1, x1) * wx;
        out.at(ch, r, c) = top * (1.0 - wy) + bot * wy;
      }
    }
  }
  return out;
}

ImageTensor hflip(const ImageTensor& src) {
  ImageTensor out(src.channels, src.rows, src.cols);
  for (std::size_t ch = 0; ch < src.channels; ++ch) {
    for (std::size_t r = 0; r < src.rows; ++r) {
      for (std::size_t c = 0; c < src.cols; ++c) out.at(ch, r, c) = src.at(ch, r, src.cols - 1 - c);
    }
  }
  return out;
}

ImageTensor augment(const ImageTensor& src, double min_scale, Rng& rng) {
  const double scale = rng.uniform(min_scale, 1.0);
  const double frac = std::sqrt(scale);
  const auto ch = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(frac * static_cast<double>(src.rows))), 1, src.rows);
  const auto cw = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(frac * static_cast<double>(src.cols))), 1, src.cols);
  const std::size_t top = static_cast<std::size_t>(rng.bounded(src.rows - ch + 1));
  const std::size_t left = static_cast<std::size_t>(rng.bounded(src.cols - cw + 1));
  const bool flip = (rng.next() >> 63) != 0;

  ImageTensor crop(src.channels, ch, cw);
  for (std::size_t c = 0; c < src.channels; ++c) {
    for (std::size_t r = 0; r < ch; ++r) {
      for (std::size_t x = 0; x < cw; ++x) crop.at(c, r, x) = src.at(c, top + r, left + x);
    }
  }
  ImageTensor out = (ch == src.rows && cw == src.cols) ? std::move(crop)
                                                       : resize_bilinear(crop, src.rows, src.cols);
  return flip ? hflip(out) : out;
}

}  // namespace wamim
