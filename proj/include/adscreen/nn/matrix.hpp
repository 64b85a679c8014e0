#pragma once

#include <cstddef>
#include <vector>

namespace adscreen::nn {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
};

// K x F x N convolution kernel bank (output channels x input rows x taps).
struct Kernel3 {
  int K = 0, F = 0, N = 0;
  std::vector<double> w;

  Kernel3() = default;
  Kernel3(int k, int f, int n)
      : K(k), F(f), N(n), w(static_cast<size_t>(k) * f * n, 0.0) {}

  double& at(int k, int f, int n) {
    return w[(static_cast<size_t>(k) * F + f) * N + n];
  }
  double at(int k, int f, int n) const {
    return w[(static_cast<size_t>(k) * F + f) * N + n];
  }
};

}  // namespace adscreen::nn
