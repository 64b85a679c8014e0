#include "adscreen/nn/serial_ref.hpp"

#include <cmath>

namespace adscreen::nnref {

namespace {

Matrix pad_left(const Matrix& X, int pad) {
  Matrix P(X.rows, X.cols + pad);
  for (int f = 0; f < X.rows; ++f)
    for (int t = 0; t < X.cols; ++t) P.at(f, t + pad) = X.at(f, t);
  return P;
}

Matrix conv_on(const Matrix& X, const Kernel3& W, const std::vector<double>& bias,
               int out_len) {
  Matrix Y(W.K, out_len);
  for (int k = 0; k < W.K; ++k)
    for (int t = 0; t < out_len; ++t) {
      double acc = bias[static_cast<size_t>(k)];
      for (int f = 0; f < W.F; ++f)
        for (int n = 0; n < W.N; ++n) acc += W.at(k, f, n) * X.at(f, t + n);
      Y.at(k, t) = acc;
    }
  return Y;
}

}  // namespace

Matrix conv1d_valid(const Matrix& X, const Kernel3& W, const std::vector<double>& bias) {
  return conv_on(X, W, bias, X.cols - W.N + 1);
}

Matrix conv1d_causal(const Matrix& X, const Kernel3& W, const std::vector<double>& bias) {
  return conv_on(pad_left(X, W.N - 1), W, bias, X.cols);
}

Matrix gated_conv(const Matrix& X, const Kernel3& V, const std::vector<double>& e,
                  const Kernel3& W, const std::vector<double>& b) {
  Matrix lin = conv1d_causal(X, V, e);
  Matrix gate = conv1d_causal(X, W, b);
  Matrix Y(lin.rows, lin.cols);
  for (int k = 0; k < Y.rows; ++k)
    for (int t = 0; t < Y.cols; ++t)
      Y.at(k, t) = lin.at(k, t) * (1.0 / (1.0 + std::exp(-gate.at(k, t))));
  return Y;
}

std::vector<double> dense(const Matrix& W, const std::vector<double>& bias,
                          const std::vector<double>& x) {
  std::vector<double> y(static_cast<size_t>(W.rows), 0.0);
  for (int h = 0; h < W.rows; ++h) {
    double acc = bias[static_cast<size_t>(h)];
    for (int o = 0; o < W.cols; ++o) acc += W.at(h, o) * x[static_cast<size_t>(o)];
    y[static_cast<size_t>(h)] = acc;
  }
  return y;
}

}  // namespace adscreen::nnref
