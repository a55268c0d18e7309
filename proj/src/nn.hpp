#pragma once

// Dense layer kernels with explicit backward passes. Matrices are row-major,
// one token per row. Linear weights are stored [in x out] so y = x W + b.
// Every backward accumulates (+=) into its gradient outputs.

#include <cstddef>
#include <span>
#include <vector>

namespace wamim::nn {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
};

void linear_forward(const Matrix& x, std::span<const double> w, std::span<const double> b,
                    std::size_t out, Matrix& y);
void linear_backward(const Matrix& dy, const Matrix& x, std::span<const double> w, Matrix* dx,
                     std::span<double> dw, std::span<double> db);

inline constexpr double kLayerNormEps = 1e-6;

struct LayerNormCache {
  std::vector<double> mean;
  std::vector<double> rstd;
};

void layernorm_forward(const Matrix& x, std::span<const double> gamma,
                       std::span<const double> beta, Matrix& y, LayerNormCache& cache);
void layernorm_backward(const Matrix& dy, const Matrix& x, std::span<const double> gamma,
                        const LayerNormCache& cache, Matrix& dx, std::span<double> dgamma,
                        std::span<double> dbeta);

// Exact (erf) GELU.
void gelu_forward(const Matrix& x, Matrix& y);
void gelu_backward(const Matrix& dy, const Matrix& x, Matrix& dx);

// Multi-head self-attention core on a packed [n x 3d] qkv matrix laid out as
// [q | k | v], head h using columns h*dh .. (h+1)*dh of each part. probs
// holds the softmax matrices, heads x n x n.
void attention_forward(const Matrix& qkv, std::size_t heads, Matrix& out,
                       std::vector<double>& probs);
void attention_backward(const Matrix& dout, const Matrix& qkv, std::size_t heads,
                        const std::vector<double>& probs, Matrix& dqkv);

}  // namespace wamim::nn
