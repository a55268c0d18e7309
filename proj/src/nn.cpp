#include "nn.hpp"

#include <algorithm>
#include <cmath>

namespace wamim::nn {

void linear_forward(const Matrix& x, std::span<const double> w, std::span<const double> b,
                    std::size_t out, Matrix& y) {
  const std::size_t in = x.cols;
  y = Matrix(x.rows, out);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double* yr = y.row(i);
    std::copy(b.begin(), b.end(), yr);
    const double* xr = x.row(i);
    for (std::size_t k = 0; k < in; ++k) {
      const double xv = xr[k];
      const double* wr = w.data() + k * out;
      for (std::size_t j = 0; j < out; ++j) yr[j] += xv * wr[j];
    }
  }
}

void linear_backward(const Matrix& dy, const Matrix& x, std::span<const double> w, Matrix* dx,
                     std::span<double> dw, std::span<double> db) {
  const std::size_t in = x.cols, out = dy.cols;
  for (std::size_t i = 0; i < dy.rows; ++i) {
    const double* dyr = dy.row(i);
    const double* xr = x.row(i);
    for (std::size_t j = 0; j < out; ++j) db[j] += dyr[j];
    for (std::size_t k = 0; k < in; ++k) {
      const double xv = xr[k];
      double* dwr = dw.data() + k * out;
      for (std::size_t j = 0; j < out; ++j) dwr[j] += xv * dyr[j];
    }
    if (dx) {
      double* dxr = dx->row(i);
      for (std::size_t k = 0; k < in; ++k) {
        const double* wr = w.data() + k * out;
        double acc = 0.0;
        for (std::size_t j = 0; j < out; ++j) acc += wr[j] * dyr[j];
        dxr[k] += acc;
      }
    }
  }
}

void layernorm_forward(const Matrix& x, std::span<const double> gamma,
                       std::span<const double> beta, Matrix& y, LayerNormCache& cache) {
  const std::size_t d = x.cols;
  y = Matrix(x.rows, d);
  cache.mean.assign(x.rows, 0.0);
  cache.rstd.assign(x.rows, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xr = x.row(i);
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    double* yr = y.row(i);
    for (std::size_t j = 0; j < d; ++j) yr[j] = (xr[j] - mean) * rstd * gamma[j] + beta[j];
    cache.mean[i] = mean;
    cache.rstd[i] = rstd;
  }
}

void layernorm_backward(const Matrix& dy, const Matrix& x, std::span<const double> gamma,
                        const LayerNormCache& cache, Matrix& dx, std::span<double> dgamma,
                        std::span<double> dbeta) {
  const std::size_t d = x.cols;
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xr = x.row(i);
    const double* dyr = dy.row(i);
    const double mean = cache.mean[i], rstd = cache.rstd[i];
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double xhat = (xr[j] - mean) * rstd;
      const double g = dyr[j] * gamma[j];
      dgamma[j] += dyr[j] * xhat;
      dbeta[j] += dyr[j];
      sum_g += g;
      sum_gx += g * xhat;
    }
    double* dxr = dx.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double xhat = (xr[j] - mean) * rstd;
      const double g = dyr[j] * gamma[j];
      dxr[j] += rstd * (g - inv_d * sum_g - xhat * inv_d * sum_gx);
    }
  }
}

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

void gelu_forward(const Matrix& x, Matrix& y) {
  y = Matrix(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double v = x.data[i];
    y.data[i] = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  }
}

void gelu_backward(const Matrix& dy, const Matrix& x, Matrix& dx) {
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double v = x.data[i];
    const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
    dx.data[i] += dy.data[i] * (cdf + v * pdf);
  }
}

void attention_forward(const Matrix& qkv, std::size_t heads, Matrix& out,
                       std::vector<double>& probs) {
  const std::size_t n = qkv.rows, d = qkv.cols / 3, dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  out = Matrix(n, d);
  probs.assign(heads * n * n, 0.0);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t qo = h * dh, ko = d + h * dh, vo = 2 * d + h * dh;
    double* p = probs.data() + h * n * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double* q = qkv.row(i) + qo;
      double* pr = p + i * n;
      double mx = -INFINITY;
      for (std::size_t j = 0; j < n; ++j) {
        const double* k = qkv.row(j) + ko;
        double s = 0.0;
        for (std::size_t t = 0; t < dh; ++t) s += q[t] * k[t];
        pr[j] = s * scale;
        mx = std::max(mx, pr[j]);
      }
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        pr[j] = std::exp(pr[j] - mx);
        sum += pr[j];
      }
      const double inv = 1.0 / sum;
      for (std::size_t j = 0; j < n; ++j) pr[j] *= inv;
      double* o = out.row(i) + h * dh;
      for (std::size_t j = 0; j < n; ++j) {
        const double* v = qkv.row(j) + vo;
        const double pj = pr[j];
        for (std::size_t t = 0; t < dh; ++t) o[t] += pj * v[t];
      }
    }
  }
}

void attention_backward(const Matrix& dout, const Matrix& qkv, std::size_t heads,
                        const std::vector<double>& probs, Matrix& dqkv) {
  const std::size_t n = qkv.rows, d = qkv.cols / 3, dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> dp(n);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t qo = h * dh, ko = d + h * dh, vo = 2 * d + h * dh;
    const double* p = probs.data() + h * n * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double* pr = p + i * n;
      const double* dor = dout.row(i) + h * dh;
      // dV and dP
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double* v = qkv.row(j) + vo;
        double* dv = dqkv.row(j) + vo;
        double s = 0.0;
        for (std::size_t t = 0; t < dh; ++t) {
          dv[t] += pr[j] * dor[t];
          s += dor[t] * v[t];
        }
        dp[j] = s;
        dot += pr[j] * s;
      }
      // softmax backward, then the scaled dot products
      const double* q = qkv.row(i) + qo;
      double* dq = dqkv.row(i) + qo;
      for (std::size_t j = 0; j < n; ++j) {
        const double ds = pr[j] * (dp[j] - dot) * scale;
        const double* k = qkv.row(j) + ko;
        double* dk = dqkv.row(j) + ko;
        for (std::size_t t = 0; t < dh; ++t) {
          dq[t] += ds * k[t];
          dk[t] += ds * q[t];
        }
      }
    }
  }
}

}  // namespace wamim::nn
