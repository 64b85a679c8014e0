#include "adscreen/nn/kernels.hpp"

namespace adscreen::nn::kernels {

void conv_forward(const Matrix& X, const Kernel3& W, const std::vector<double>& bias,
                  int left_pad, int out_len, Matrix& Y) {
  int t_in = X.cols;
  Y.rows = W.K;
  Y.cols = out_len;
  Y.data.assign(static_cast<size_t>(W.K) * out_len, 0.0);

#pragma omp parallel for schedule(static) if (static_cast<long>(W.K) * out_len * W.F * W.N > 32768)
  for (int k = 0; k < W.K; ++k) {
    double* yrow = Y.row(k);
    for (int t = 0; t < out_len; ++t) {
      double acc = bias[static_cast<size_t>(k)];
      for (int f = 0; f < W.F; ++f) {
        const double* xrow = X.row(f);
        for (int n = 0; n < W.N; ++n) {
          int s = t + n - left_pad;
          if (s < 0 || s >= t_in) continue;
          acc += W.at(k, f, n) * xrow[s];
        }
      }
      yrow[t] = acc;
    }
  }
}

void conv_grad_params(const Matrix& X, const Matrix& dY, int left_pad,
                      const Kernel3& shape, double* dW, double* db) {
  int t_in = X.cols;
  int out_len = dY.cols;

#pragma omp parallel for schedule(static) if (static_cast<long>(shape.K) * shape.F * shape.N * out_len > 32768)
  for (int k = 0; k < shape.K; ++k) {
    const double* dyrow = dY.row(k);
    double bacc = 0.0;
    for (int t = 0; t < out_len; ++t) bacc += dyrow[t];
    db[k] += bacc;
    for (int f = 0; f < shape.F; ++f) {
      const double* xrow = X.row(f);
      for (int n = 0; n < shape.N; ++n) {
        double acc = 0.0;
        for (int t = 0; t < out_len; ++t) {
          int s = t + n - left_pad;
          if (s < 0 || s >= t_in) continue;
          acc += dyrow[t] * xrow[s];
        }
        dW[(static_cast<size_t>(k) * shape.F + f) * shape.N + n] += acc;
      }
    }
  }
}

void conv_grad_input(const Matrix& dY, const Kernel3& W, int left_pad, Matrix& dX) {
  int out_len = dY.cols;

#pragma omp parallel for schedule(static) if (static_cast<long>(dX.rows) * dX.cols * W.K * W.N > 32768)
  for (int f = 0; f < dX.rows; ++f) {
    double* dxrow = dX.row(f);
    for (int s = 0; s < dX.cols; ++s) {
      double acc = 0.0;
      for (int k = 0; k < W.K; ++k) {
        const double* dyrow = dY.row(k);
        for (int n = 0; n < W.N; ++n) {
          int t = s + left_pad - n;
          if (t < 0 || t >= out_len) continue;
          acc += W.at(k, f, n) * dyrow[t];
        }
      }
      dxrow[s] += acc;
    }
  }
}

void dense_forward(const Matrix& W, const std::vector<double>& bias, const double* x,
                   double* y) {
#pragma omp parallel for schedule(static) if (static_cast<long>(W.rows) * W.cols > 65536)
  for (int h = 0; h < W.rows; ++h) {
    const double* wrow = W.row(h);
    double acc = bias[static_cast<size_t>(h)];
    for (int o = 0; o < W.cols; ++o) acc += wrow[o] * x[o];
    y[h] = acc;
  }
}

void dense_grad_params(const double* x, const double* dy, int h_dim, int o_dim,
                       double* dW, double* db) {
#pragma omp parallel for schedule(static) if (static_cast<long>(h_dim) * o_dim > 65536)
  for (int h = 0; h < h_dim; ++h) {
    double g = dy[h];
    db[h] += g;
    double* wrow = dW + static_cast<size_t>(h) * o_dim;
    for (int o = 0; o < o_dim; ++o) wrow[o] += g * x[o];
  }
}

void dense_grad_input(const Matrix& W, const double* dy, double* dx) {
#pragma omp parallel for schedule(static) if (static_cast<long>(W.rows) * W.cols > 65536)
  for (int o = 0; o < W.cols; ++o) {
    double acc = 0.0;
    for (int h = 0; h < W.rows; ++h) acc += W.at(h, o) * dy[h];
    dx[o] = acc;
  }
}

}  // namespace adscreen::nn::kernels
