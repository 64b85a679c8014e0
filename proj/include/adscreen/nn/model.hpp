#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adscreen/nn/layers.hpp"
#include "adscreen/rng.hpp"

namespace adscreen::nn {

enum class Arch { CNN = 0, GCNN = 1 };

const char* arch_name(Arch a);
Arch parse_arch(const std::string& s);

struct ModelConfig {
  Arch arch = Arch::GCNN;
  int depth = 1;
  int kernels = 64;
  int window = 0;  // 0 -> architecture default (3 for cnn, 2 for gcnn)
  int hidden = 256;
  double dropout = 0.5;
  int input_rows = 0;  // F
  int input_cols = 0;  // T_max

  int effective_window() const {
    return window > 0 ? window : (arch == Arch::CNN ? 3 : 2);
  }
};

// One convolutional block. CNN: conv -> batch norm -> ReLU -> pool.
// GCNN: (V*x+e) .* sigmoid(batchnorm(W*x+b)) -> pool; batch norm sits on
// the gate pre-activation only. Pooling is skipped once the running
// length drops below 2; a standard-conv block whose input is shorter
// than the window left-pads it to window length (both cases keep deep
// models on short inputs well-formed).
struct Block {
  Kernel3 V;              // gcnn linear path (unused for cnn)
  std::vector<double> e;
  Kernel3 W;              // cnn kernel / gcnn gate kernel
  std::vector<double> b;
  BatchNormLayer bn;
  int left_pad = 0;       // 0 for cnn (unless short input), N-1 for gcnn
  bool has_pool = false;
  int in_len = 0, conv_len = 0, out_len = 0;
};

struct Model {
  ModelConfig cfg;
  std::vector<Block> blocks;
  DenseLayer fc;        // hidden x flat_dim
  BatchNormLayer fc_bn; // over hidden units
  DenseLayer out;       // 1 x hidden
  int flat_dim = 0;

  struct ParamRef {
    std::vector<double>* v;
    std::string name;
  };
  // Trainable parameters in build order.
  std::vector<ParamRef> params();
  // Trainable parameters plus batch-norm running stats (checkpoint layout).
  std::vector<ParamRef> state();
  size_t param_count();
};

// He-uniform kernels, uniform(-0.05, 0.05) dense weights, zero biases.
Model build_model(const ModelConfig& cfg, Rng& rng);

struct BlockCache {
  std::vector<Matrix> in;        // block input per example
  std::vector<Matrix> pre;       // conv pre-activation (cnn) / gate pre-activation (gcnn)
  std::vector<Matrix> lin;       // gcnn linear path
  std::vector<Matrix> gate_sig;  // gcnn sigmoid(bn(gate))
  BnForward bn;
  std::vector<Matrix> act;       // post-activation, pre-pool
  std::vector<std::vector<int>> pool_idx;
  std::vector<Matrix> out;
};

struct ForwardCache {
  Mode mode = Mode::Infer;
  std::vector<BlockCache> blocks;
  std::vector<std::vector<double>> flat, fc_pre, fc_act, drop_mask, head_in;
  BnForward fc_bn;
  std::vector<double> logit, prob;
};

// Batch forward; X entries must already be padded to cfg.input_cols.
// dropout_rng is consumed in train mode only (may be null otherwise).
std::vector<double> model_forward_batch(Model& model, const std::vector<Matrix>& X,
                                        Mode mode, Rng* dropout_rng,
                                        ForwardCache* cache);

// Single-utterance convenience (batch of one; train mode is rejected by
// batch norm).
double model_forward(Model& model, const Matrix& X, Mode mode);

// d(sum of per-example BCE)/d(param) for every trainable parameter, in
// params() order.
std::vector<std::vector<double>> model_backward_batch(Model& model,
                                                      const ForwardCache& cache,
                                                      const std::vector<int>& labels);

struct AdamState {
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int64_t t = 0;
  std::vector<std::vector<double>> m, v;
};

void adam_init(AdamState& state, Model& model);
// One optimizer step over all parameter tensors; increments state.t.
void adam_step(Model& model, const std::vector<std::vector<double>>& grads,
               AdamState& state);

// Binary checkpoint (magic, config block, state tensors as little-endian
// f64) plus a JSON sidecar at path + ".json".
void save_checkpoint(const std::filesystem::path& path, Model& model,
                     const std::string& sidecar_json);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace adscreen::nn
