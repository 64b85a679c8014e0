#pragma once

#include <vector>

#include "adscreen/nn/matrix.hpp"

// Hot inner loops, OpenMP-parallel over output elements. Every output
// element is owned by exactly one thread and accumulated in a fixed
// order, so results are bitwise identical for any thread count. A naive
// serial implementation of the same contracts lives in
// adscreen/nn/serial_ref.hpp for tests and benchmarks.

namespace adscreen::nn::kernels {

// Y[k][t] = bias[k] + sum_f sum_n W[k][f][n] * X[f][t + n - left_pad],
// out-of-range input columns read as zero.
//   left_pad = 0,   out_len = T-N+1 -> valid convolution
//   left_pad = N-1, out_len = T     -> causal (WaveNet-style) convolution
void conv_forward(const Matrix& X, const Kernel3& W, const std::vector<double>& bias,
                  int left_pad, int out_len, Matrix& Y);

// dW[k][f][n] += sum_t dY[k][t] * X[f][t + n - left_pad]; db[k] += sum_t dY[k][t]
void conv_grad_params(const Matrix& X, const Matrix& dY, int left_pad,
                      const Kernel3& shape, double* dW, double* db);

// dX[f][s] += sum_k sum_n W[k][f][n] * dY[k][s + left_pad - n]
void conv_grad_input(const Matrix& dY, const Kernel3& W, int left_pad, Matrix& dX);

// y = W x + b, W is H x O
void dense_forward(const Matrix& W, const std::vector<double>& bias, const double* x,
                   double* y);

// dW[h][o] += dy[h] * x[o]; db[h] += dy[h]
void dense_grad_params(const double* x, const double* dy, int h_dim, int o_dim,
                       double* dW, double* db);

// dx[o] = sum_h W[h][o] dy[h]  (overwrites dx)
void dense_grad_input(const Matrix& W, const double* dy, double* dx);

}  // namespace adscreen::nn::kernels
