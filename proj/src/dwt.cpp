#include "wamim/dwt.hpp"

#include <cmath>
#include <span>

#include "wamim/errors.hpp"

namespace wamim {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Fused separable Haar butterfly: the column-axis pair followed by the
// row-axis pair collapses to the 2x2 closed forms with weight 1/2.
void haar_forward(std::span<const double> src, std::size_t rows, std::size_t cols,
                  std::span<double> ll, std::span<double> h, std::span<double> v,
                  std::span<double> d) {
  const std::size_t half_cols = cols / 2;
  for (std::size_t m = 0; m < rows / 2; ++m) {
    const double* top = src.data() + (2 * m) * cols;
    const double* bot = top + cols;
    for (std::size_t n = 0; n < half_cols; ++n) {
      const double a = top[2 * n], b = top[2 * n + 1];
      const double c = bot[2 * n], e = bot[2 * n + 1];
      const std::size_t o = m * half_cols + n;
      ll[o] = 0.5 * ((a + b) + (c + e));
      h[o] = 0.5 * ((a - b) + (c - e));
      v[o] = 0.5 * ((a + b) - (c + e));
      d[o] = 0.5 * ((a - b) - (c - e));
    }
  }
}

void haar_inverse(std::span<const double> ll, std::span<const double> h,
                  std::span<const double> v, std::span<const double> d, std::size_t rows,
                  std::size_t cols, std::span<double> dst) {
  const std::size_t half_cols = cols / 2;
  for (std::size_t m = 0; m < rows / 2; ++m) {
    double* top = dst.data() + (2 * m) * cols;
    double* bot = top + cols;
    for (std::size_t n = 0; n < half_cols; ++n) {
      const std::size_t o = m * half_cols + n;
      const double s = ll[o], x = h[o], y = v[o], z = d[o];
      top[2 * n] = 0.5 * ((s + x) + (y + z));
      top[2 * n + 1] = 0.5 * ((s - x) + (y - z));
      bot[2 * n] = 0.5 * ((s + x) - (y + z));
      bot[2 * n + 1] = 0.5 * ((s - x) - (y - z));
    }
  }
}

void check_finite(std::span<const double> values) {
  for (double x : values) {
    if (!std::isfinite(x)) throw InputError("transform input contains a non-finite value");
  }
}

// 1D Haar functions at dilation 2^level, sampled on the integer grid.
double scaling_sample(std::size_t level, std::size_t shift, std::size_t t) {
  const double width = std::ldexp(1.0, static_cast<int>(level));
  const double lo = static_cast<double>(shift) * width;
  const double x = static_cast<double>(t);
  if (x < lo || x >= lo + width) return 0.0;
  return 1.0 / std::sqrt(width);
}

double wavelet_sample(std::size_t level, std::size_t shift, std::size_t t) {
  const double width = std::ldexp(1.0, static_cast<int>(level));
  const double lo = static_cast<double>(shift) * width;
  const double x = static_cast<double>(t);
  if (x < lo || x >= lo + width) return 0.0;
  const double sign = (x < lo + width / 2.0) ? 1.0 : -1.0;
  return sign / std::sqrt(width);
}

std::vector<double> sample_1d(bool wavelet, std::size_t level, std::size_t shift, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    out[t] = wavelet ? wavelet_sample(level, shift, t) : scaling_sample(level, shift, t);
  }
  return out;
}

// <image channel, row_fn (x) col_fn> with the basis image materialized.
double basis_inner_product(std::span<const double> chan, std::size_t rows, std::size_t cols,
                           const std::vector<double>& row_fn, const std::vector<double>& col_fn) {
  std::vector<double> basis(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) basis[r * cols + c] = row_fn[r] * col_fn[c];
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < rows * cols; ++i) acc += chan[i] * basis[i];
  return acc;
}

}  // namespace

FilterPair haar_filters() {
  return FilterPair{{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}};
}

Plane::Plane(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) throw DimensionError("plane buffer size does not match dims");
}

LevelBands dwt2_level(const Plane& plane) {
  if (plane.rows == 0 || plane.cols == 0 || plane.rows % 2 != 0 || plane.cols % 2 != 0) {
    throw DimensionError("dwt2_level needs positive even dims, got " +
                         std::to_string(plane.rows) + "x" + std::to_string(plane.cols));
  }
  if (plane.data.size() != plane.rows * plane.cols) {
    throw DimensionError("plane buffer size does not match dims");
  }
  check_finite(plane.data);
  const std::size_t hr = plane.rows / 2, hc = plane.cols / 2;
  LevelBands out{Plane(hr, hc), Plane(hr, hc), Plane(hr, hc), Plane(hr, hc)};
  haar_forward(plane.data, plane.rows, plane.cols, out.ll.data, out.h.data, out.v.data,
               out.d.data);
  return out;
}

char orientation_letter(Orientation o) {
  switch (o) {
    case Orientation::H: return 'H';
    case Orientation::V: return 'V';
    case Orientation::D: return 'D';
  }
  return '?';
}

const ImageTensor& DetailLevel::band(Orientation o) const {
  switch (o) {
    case Orientation::H: return h;
    case Orientation::V: return v;
    default: return d;
  }
}

ImageTensor& DetailLevel::band(Orientation o) {
  return const_cast<ImageTensor&>(static_cast<const DetailLevel&>(*this).band(o));
}

std::string plane_record_name(std::size_t level, Orientation o) {
  return "L" + std::to_string(level) + "_" + orientation_letter(o);
}

void check_dyadic(std::size_t rows, std::size_t cols, std::size_t depth) {
  if (depth == 0) throw DimensionError("decomposition depth must be at least 1");
  if (depth >= 32) throw DimensionError("decomposition depth too large");
  const std::size_t step = std::size_t{1} << depth;
  if (rows == 0 || cols == 0 || rows % step != 0 || cols % step != 0) {
    throw DimensionError("dims " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " not divisible by 2^" + std::to_string(depth));
  }
}

void WaveletPyramid::validate() const {
  if (levels.empty()) throw StructureError("pyramid has no levels");
  const std::size_t ch = approx.channels;
  if (ch == 0) throw StructureError("pyramid has no channels");
  std::size_t r = source_rows, c = source_cols;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (r % 2 != 0 || c % 2 != 0) throw StructureError("source dims not dyadic for pyramid depth");
    r /= 2;
    c /= 2;
    for (Orientation o : kOrientations) {
      const ImageTensor& b = levels[l].band(o);
      if (b.channels != ch || b.rows != r || b.cols != c || b.data.size() != ch * r * c) {
        throw StructureError("plane " + plane_record_name(l + 1, o) + " has inconsistent dims");
      }
    }
  }
  if (approx.rows != r || approx.cols != c || approx.data.size() != ch * r * c) {
    throw StructureError("approximation plane has inconsistent dims");
  }
}

double WaveletPyramid::energy() const {
  double e = wamim::energy(approx);
  for (const auto& lv : levels) {
    for (Orientation o : kOrientations) e += wamim::energy(lv.band(o));
  }
  return e;
}

WaveletPyramid WaveletPyramid::zeros(std::size_t channels, std::size_t rows, std::size_t cols,
                                     std::size_t depth) {
  check_dyadic(rows, cols, depth);
  WaveletPyramid p;
  p.source_rows = rows;
  p.source_cols = cols;
  std::size_t r = rows, c = cols;
  for (std::size_t l = 0; l < depth; ++l) {
    r /= 2;
    c /= 2;
    p.levels.push_back({ImageTensor(channels, r, c), ImageTensor(channels, r, c),
                        ImageTensor(channels, r, c)});
  }
  p.approx = ImageTensor(channels, r, c);
  return p;
}

WaveletPyramid dwt2_multi(const ImageTensor& image, std::size_t depth) {
  image.validate();
  check_dyadic(image.rows, image.cols, depth);
  WaveletPyramid p = WaveletPyramid::zeros(image.channels, image.rows, image.cols, depth);

  ImageTensor current = image;
  for (std::size_t l = 0; l < depth; ++l) {
    DetailLevel& lv = p.levels[l];
    ImageTensor next(image.channels, current.rows / 2, current.cols / 2);
    for (std::size_t ch = 0; ch < image.channels; ++ch) {
      haar_forward(current.channel(ch), current.rows, current.cols, next.channel(ch),
                   lv.h.channel(ch), lv.v.channel(ch), lv.d.channel(ch));
    }
    current = std::move(next);
  }
  p.approx = std::move(current);
  return p;
}

ImageTensor idwt2_multi(const WaveletPyramid& pyramid) {
  pyramid.validate();
  ImageTensor current = pyramid.approx;
  for (std::size_t l = pyramid.depth(); l-- > 0;) {
    const DetailLevel& lv = pyramid.levels[l];
    ImageTensor up(current.channels, current.rows * 2, current.cols * 2);
    for (std::size_t ch = 0; ch < current.channels; ++ch) {
      haar_inverse(current.channel(ch), lv.h.channel(ch), lv.v.channel(ch), lv.d.channel(ch),
                   up.rows, up.cols, up.channel(ch));
    }
    current = std::move(up);
  }
  return current;
}

WaveletPyramid dwt2_oracle(const ImageTensor& image, std::size_t depth) {
  image.validate();
  check_dyadic(image.rows, image.cols, depth);
  const std::size_t rows = image.rows, cols = image.cols;
  WaveletPyramid p = WaveletPyramid::zeros(image.channels, rows, cols, depth);

  for (std::size_t l = 1; l <= depth; ++l) {
    DetailLevel& lv = p.levels[l - 1];
    const std::size_t out_rows = rows >> l, out_cols = cols >> l;
    for (std::size_t m = 0; m < out_rows; ++m) {
      const auto row_phi = sample_1d(false, l, m, rows);
      const auto row_psi = sample_1d(true, l, m, rows);
      for (std::size_t n = 0; n < out_cols; ++n) {
        const auto col_phi = sample_1d(false, l, n, cols);
        const auto col_psi = sample_1d(true, l, n, cols);
        for (std::size_t ch = 0; ch < image.channels; ++ch) {
          const auto chan = image.channel(ch);
          lv.h.at(ch, m, n) = basis_inner_product(chan, rows, cols, row_phi, col_psi);
          lv.v.at(ch, m, n) = basis_inner_product(chan, rows, cols, row_psi, col_phi);
          lv.d.at(ch, m, n) = basis_inner_product(chan, rows, cols, row_psi, col_psi);
          if (l == depth) {
            p.approx.at(ch, m, n) = basis_inner_product(chan, rows, cols, row_phi, col_phi);
          }
        }
      }
    }
  }
  return p;
}

double max_abs_diff(const WaveletPyramid& a, const WaveletPyramid& b) {
  if (a.depth() != b.depth()) throw StructureError("pyramid depth mismatch");
  double m = max_abs_diff(a.approx, b.approx);
  for (std::size_t l = 0; l < a.depth(); ++l) {
    for (Orientation o : kOrientations) {
      m = std::max(m, max_abs_diff(a.levels[l].band(o), b.levels[l].band(o)));
    }
  }
  return m;
}

}  // namespace wamim
