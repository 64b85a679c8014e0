#pragma once

#include <vector>

#include "adscreen/nn/matrix.hpp"
#include "adscreen/rng.hpp"

namespace adscreen::nn {

enum class Mode { Train, Infer };
enum class Activation { None, Relu, Sigmoid };

double sigmoid(double x);

struct ConvLayer {
  Kernel3 W;
  std::vector<double> bias;
  Activation activation = Activation::None;
};

struct GatedConvLayer {
  Kernel3 V;
  std::vector<double> e;  // linear-path bias
  Kernel3 W;
  std::vector<double> b;  // gate bias
};

struct BatchNormLayer {
  std::vector<double> gamma, beta, running_mean, running_var;
  double epsilon = 1e-5;
  double momentum = 0.9;

  BatchNormLayer() = default;
  explicit BatchNormLayer(int channels)
      : gamma(static_cast<size_t>(channels), 1.0),
        beta(static_cast<size_t>(channels), 0.0),
        running_mean(static_cast<size_t>(channels), 0.0),
        running_var(static_cast<size_t>(channels), 1.0) {}

  int channels() const { return static_cast<int>(gamma.size()); }
};

struct DenseLayer {
  Matrix W;  // H x O
  std::vector<double> bias;
  Activation activation = Activation::None;
};

// Valid convolution over time with full-height kernels; M = T-N+1.
Matrix conv1d_forward(const Matrix& X, const ConvLayer& layer);

// Causal left zero-padding of N-1 frames; output length = T.
// y = (V*X + e) .* sigmoid(W*X + b)
Matrix gated_conv_forward(const Matrix& X, const GatedConvLayer& layer);

struct PoolResult {
  Matrix Y;                 // K x floor(L/2)
  std::vector<int> argmax;  // source column per output element, row-major
};

// Window 2 / stride 2, trailing odd element dropped, ties keep the
// earlier index.
PoolResult maxpool_halve(const Matrix& Y);

struct BnForward {
  std::vector<Matrix> y;
  std::vector<double> mean, inv_std;  // per channel; batch stats in train mode
  std::vector<Matrix> xhat;
  Mode mode = Mode::Train;
};

// x[b] is channels x positions; statistics are taken over batch x positions
// per channel (population variance). Train mode updates running stats as
// running <- momentum*running + (1-momentum)*batch.
BnForward batchnorm_forward(const std::vector<Matrix>& x, BatchNormLayer& layer, Mode mode);

struct BnGrads {
  std::vector<Matrix> dx;
  std::vector<double> dgamma, dbeta;
};

BnGrads batchnorm_backward(const BnForward& fwd, const BatchNormLayer& layer,
                           const std::vector<Matrix>& dy);

std::vector<double> dense_forward(const std::vector<double>& z, const DenseLayer& layer);

// Inverted dropout: kept units scaled by 1/(1-rate) in train mode,
// identity in infer mode.
std::vector<double> dropout_apply(const std::vector<double>& v, double rate, Mode mode,
                                  Rng& rng);

// Fills mask with 0 or 1/(1-rate); consumed by the model's training path.
void dropout_mask(std::vector<double>& mask, double rate, Rng& rng);

// sigmoid(w . h + b), always in (0, 1)
double output_head(const std::vector<double>& h, const DenseLayer& out_layer);

// -(y ln p + (1-y) ln(1-p)) with p clamped to [1e-12, 1-1e-12]
double bce_loss(double p, int y);

// One bias-corrected Adam update of a parameter tensor; t is 1-based.
void adam_update_tensor(std::vector<double>& param, const std::vector<double>& grad,
                        std::vector<double>& m, std::vector<double>& v, int64_t t,
                        double lr, double beta1, double beta2, double eps);

}  // namespace adscreen::nn
