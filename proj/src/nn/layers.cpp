#include "adscreen/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "adscreen/error.hpp"
#include "adscreen/nn/kernels.hpp"

namespace adscreen::nn {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix conv1d_forward(const Matrix& X, const ConvLayer& layer) {
  if (X.cols < layer.W.N)
    fail(Errc::InputTooShort, "conv input length " + std::to_string(X.cols) +
                                  " < window " + std::to_string(layer.W.N));
  if (X.rows != layer.W.F) fail(Errc::DimensionMismatch, "conv input rows != kernel rows");
  Matrix Y;
  kernels::conv_forward(X, layer.W, layer.bias, 0, X.cols - layer.W.N + 1, Y);
  if (layer.activation == Activation::Relu)
    for (double& v : Y.data) v = std::max(0.0, v);
  return Y;
}

Matrix gated_conv_forward(const Matrix& X, const GatedConvLayer& layer) {
  if (X.rows != layer.W.F || X.rows != layer.V.F)
    fail(Errc::DimensionMismatch, "gated conv input rows != kernel rows");
  Matrix lin, gate;
  kernels::conv_forward(X, layer.V, layer.e, layer.V.N - 1, X.cols, lin);
  kernels::conv_forward(X, layer.W, layer.b, layer.W.N - 1, X.cols, gate);
  Matrix Y(lin.rows, lin.cols);
  for (size_t i = 0; i < Y.data.size(); ++i)
    Y.data[i] = lin.data[i] * sigmoid(gate.data[i]);
  return Y;
}

PoolResult maxpool_halve(const Matrix& Y) {
  if (Y.cols < 2) fail(Errc::LengthTooShort, "maxpool input length < 2");
  int out_len = Y.cols / 2;
  PoolResult res;
  res.Y = Matrix(Y.rows, out_len);
  res.argmax.assign(static_cast<size_t>(Y.rows) * out_len, 0);
  for (int k = 0; k < Y.rows; ++k) {
    for (int t = 0; t < out_len; ++t) {
      int a = 2 * t, b = 2 * t + 1;
      int pick = Y.at(k, b) > Y.at(k, a) ? b : a;  // tie -> earlier
      res.Y.at(k, t) = Y.at(k, pick);
      res.argmax[static_cast<size_t>(k) * out_len + t] = pick;
    }
  }
  return res;
}

BnForward batchnorm_forward(const std::vector<Matrix>& x, BatchNormLayer& layer, Mode mode) {
  if (x.empty()) fail(Errc::EmptyInput, "batchnorm on empty batch");
  if (mode == Mode::Train && x.size() < 2)
    fail(Errc::BatchTooSmall, "batch normalization needs batch size >= 2 in train mode");
  int channels = layer.channels();
  int len = x[0].cols;
  size_t batch = x.size();

  BnForward fwd;
  fwd.mode = mode;
  fwd.mean.resize(static_cast<size_t>(channels));
  fwd.inv_std.resize(static_cast<size_t>(channels));
  fwd.y.assign(batch, Matrix(channels, len));
  fwd.xhat.assign(batch, Matrix(channels, len));

#pragma omp parallel for schedule(static) if (static_cast<long>(channels) * len * static_cast<long>(batch) > 16384)
  for (int c = 0; c < channels; ++c) {
    double mean, inv;
    if (mode == Mode::Train) {
      double n = static_cast<double>(batch) * len;
      double acc = 0.0;
      for (size_t b = 0; b < batch; ++b) {
        const double* row = x[b].row(c);
        for (int t = 0; t < len; ++t) acc += row[t];
      }
      mean = acc / n;
      double var_acc = 0.0;
      for (size_t b = 0; b < batch; ++b) {
        const double* row = x[b].row(c);
        for (int t = 0; t < len; ++t) {
          double d = row[t] - mean;
          var_acc += d * d;
        }
      }
      double var = var_acc / n;
      inv = 1.0 / std::sqrt(var + layer.epsilon);
      layer.running_mean[static_cast<size_t>(c)] =
          layer.momentum * layer.running_mean[static_cast<size_t>(c)] + (1.0 - layer.momentum) * mean;
      layer.running_var[static_cast<size_t>(c)] =
          layer.momentum * layer.running_var[static_cast<size_t>(c)] + (1.0 - layer.momentum) * var;
    } else {
      mean = layer.running_mean[static_cast<size_t>(c)];
      inv = 1.0 / std::sqrt(layer.running_var[static_cast<size_t>(c)] + layer.epsilon);
    }
    fwd.mean[static_cast<size_t>(c)] = mean;
    fwd.inv_std[static_cast<size_t>(c)] = inv;
    double g = layer.gamma[static_cast<size_t>(c)];
    double be = layer.beta[static_cast<size_t>(c)];
    for (size_t b = 0; b < batch; ++b) {
      const double* row = x[b].row(c);
      double* xh = fwd.xhat[b].row(c);
      double* yr = fwd.y[b].row(c);
      for (int t = 0; t < len; ++t) {
        xh[t] = (row[t] - mean) * inv;
        yr[t] = g * xh[t] + be;
      }
    }
  }
  return fwd;
}

BnGrads batchnorm_backward(const BnForward& fwd, const BatchNormLayer& layer,
                           const std::vector<Matrix>& dy) {
  int channels = layer.channels();
  int len = dy[0].cols;
  size_t batch = dy.size();
  double n = static_cast<double>(batch) * len;

  BnGrads grads;
  grads.dgamma.assign(static_cast<size_t>(channels), 0.0);
  grads.dbeta.assign(static_cast<size_t>(channels), 0.0);
  grads.dx.assign(batch, Matrix(channels, len));

#pragma omp parallel for schedule(static) if (static_cast<long>(channels) * len * static_cast<long>(batch) > 16384)
  for (int c = 0; c < channels; ++c) {
    double g = layer.gamma[static_cast<size_t>(c)];
    double inv = fwd.inv_std[static_cast<size_t>(c)];
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (size_t b = 0; b < batch; ++b) {
      const double* dyr = dy[b].row(c);
      const double* xh = fwd.xhat[b].row(c);
      for (int t = 0; t < len; ++t) {
        sum_dy += dyr[t];
        sum_dy_xhat += dyr[t] * xh[t];
      }
    }
    grads.dbeta[static_cast<size_t>(c)] = sum_dy;
    grads.dgamma[static_cast<size_t>(c)] = sum_dy_xhat;
    for (size_t b = 0; b < batch; ++b) {
      const double* dyr = dy[b].row(c);
      const double* xh = fwd.xhat[b].row(c);
      double* dxr = grads.dx[b].row(c);
      if (fwd.mode == Mode::Train) {
        for (int t = 0; t < len; ++t)
          dxr[t] = g * inv / n * (n * dyr[t] - sum_dy - xh[t] * sum_dy_xhat);
      } else {
        for (int t = 0; t < len; ++t) dxr[t] = g * inv * dyr[t];
      }
    }
  }
  return grads;
}

std::vector<double> dense_forward(const std::vector<double>& z, const DenseLayer& layer) {
  if (static_cast<int>(z.size()) != layer.W.cols)
    fail(Errc::DimensionMismatch, "dense input dim " + std::to_string(z.size()) +
                                      " != " + std::to_string(layer.W.cols));
  std::vector<double> y(static_cast<size_t>(layer.W.rows));
  kernels::dense_forward(layer.W, layer.bias, z.data(), y.data());
  if (layer.activation == Activation::Relu)
    for (double& v : y) v = std::max(0.0, v);
  else if (layer.activation == Activation::Sigmoid)
    for (double& v : y) v = sigmoid(v);
  return y;
}

void dropout_mask(std::vector<double>& mask, double rate, Rng& rng) {
  double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
}

std::vector<double> dropout_apply(const std::vector<double>& v, double rate, Mode mode,
                                  Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) fail(Errc::InvalidConfig, "dropout rate outside [0,1)");
  if (mode == Mode::Infer || rate == 0.0) return v;
  std::vector<double> mask(v.size());
  dropout_mask(mask, rate, rng);
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] * mask[i];
  return out;
}

double output_head(const std::vector<double>& h, const DenseLayer& out_layer) {
  if (static_cast<int>(h.size()) != out_layer.W.cols)
    fail(Errc::DimensionMismatch, "output head input dim mismatch");
  double acc = out_layer.bias[0];
  for (size_t i = 0; i < h.size(); ++i) acc += out_layer.W.data[i] * h[i];
  return sigmoid(acc);
}

double bce_loss(double p, int y) {
  double c = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return -(y * std::log(c) + (1 - y) * std::log(1.0 - c));
}

void adam_update_tensor(std::vector<double>& param, const std::vector<double>& grad,
                        std::vector<double>& m, std::vector<double>& v, int64_t t,
                        double lr, double beta1, double beta2, double eps) {
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < param.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace adscreen::nn
