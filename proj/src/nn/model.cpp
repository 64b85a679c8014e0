#include "adscreen/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "adscreen/csv.hpp"
#include "adscreen/error.hpp"
#include "adscreen/nn/kernels.hpp"

namespace adscreen::nn {

const char* arch_name(Arch a) { return a == Arch::CNN ? "cnn" : "gcnn"; }

Arch parse_arch(const std::string& s) {
  if (s == "cnn") return Arch::CNN;
  if (s == "gcnn") return Arch::GCNN;
  fail(Errc::BadConfig, "unknown arch '" + s + "' (expected cnn or gcnn)");
}

namespace {

void he_uniform(Kernel3& k, Rng& rng) {
  double limit = std::sqrt(6.0 / (static_cast<double>(k.F) * k.N));
  for (double& w : k.w) w = rng.uniform(-limit, limit);
}

Matrix relu(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.data) v = std::max(0.0, v);
  return y;
}

}  // namespace

Model build_model(const ModelConfig& cfg, Rng& rng) {
  if (cfg.depth < 1 || cfg.kernels < 1 || cfg.hidden < 1 || cfg.input_rows < 1 ||
      cfg.input_cols < 1 || cfg.dropout < 0.0 || cfg.dropout >= 1.0 ||
      cfg.effective_window() < 1)
    fail(Errc::InvalidConfig, "bad model configuration");

  Model model;
  model.cfg = cfg;
  int window = cfg.effective_window();
  int len = cfg.input_cols;
  int in_rows = cfg.input_rows;

  for (int d = 0; d < cfg.depth; ++d) {
    Block blk;
    blk.in_len = len;
    if (cfg.arch == Arch::GCNN) {
      blk.V = Kernel3(cfg.kernels, in_rows, window);
      blk.e.assign(static_cast<size_t>(cfg.kernels), 0.0);
      he_uniform(blk.V, rng);
      blk.left_pad = window - 1;
      blk.conv_len = len;
    } else {
      if (len >= window) {
        blk.left_pad = 0;
        blk.conv_len = len - window + 1;
      } else {
        blk.left_pad = window - len;  // short input: pad up to one output frame
        blk.conv_len = 1;
      }
    }
    blk.W = Kernel3(cfg.kernels, in_rows, window);
    blk.b.assign(static_cast<size_t>(cfg.kernels), 0.0);
    he_uniform(blk.W, rng);
    blk.bn = BatchNormLayer(cfg.kernels);
    blk.has_pool = blk.conv_len >= 2;
    blk.out_len = blk.has_pool ? blk.conv_len / 2 : blk.conv_len;
    model.blocks.push_back(std::move(blk));
    len = model.blocks.back().out_len;
    in_rows = cfg.kernels;
  }

  model.flat_dim = cfg.kernels * len;
  model.fc.W = Matrix(cfg.hidden, model.flat_dim);
  for (double& w : model.fc.W.data) w = rng.uniform(-0.05, 0.05);
  model.fc.bias.assign(static_cast<size_t>(cfg.hidden), 0.0);
  model.fc.activation = Activation::None;  // bn + relu applied by the model
  model.fc_bn = BatchNormLayer(cfg.hidden);
  model.out.W = Matrix(1, cfg.hidden);
  for (double& w : model.out.W.data) w = rng.uniform(-0.05, 0.05);
  model.out.bias.assign(1, 0.0);
  return model;
}

std::vector<Model::ParamRef> Model::params() {
  std::vector<ParamRef> refs;
  for (size_t i = 0; i < blocks.size(); ++i) {
    std::string p = "block" + std::to_string(i) + ".";
    if (cfg.arch == Arch::GCNN) {
      refs.push_back({&blocks[i].V.w, p + "V"});
      refs.push_back({&blocks[i].e, p + "e"});
    }
    refs.push_back({&blocks[i].W.w, p + "W"});
    refs.push_back({&blocks[i].b, p + "b"});
    refs.push_back({&blocks[i].bn.gamma, p + "bn.gamma"});
    refs.push_back({&blocks[i].bn.beta, p + "bn.beta"});
  }
  refs.push_back({&fc.W.data, "fc.W"});
  refs.push_back({&fc.bias, "fc.b"});
  refs.push_back({&fc_bn.gamma, "fc_bn.gamma"});
  refs.push_back({&fc_bn.beta, "fc_bn.beta"});
  refs.push_back({&out.W.data, "out.W"});
  refs.push_back({&out.bias, "out.b"});
  return refs;
}

std::vector<Model::ParamRef> Model::state() {
  std::vector<ParamRef> refs;
  for (size_t i = 0; i < blocks.size(); ++i) {
    std::string p = "block" + std::to_string(i) + ".";
    if (cfg.arch == Arch::GCNN) {
      refs.push_back({&blocks[i].V.w, p + "V"});
      refs.push_back({&blocks[i].e, p + "e"});
    }
    refs.push_back({&blocks[i].W.w, p + "W"});
    refs.push_back({&blocks[i].b, p + "b"});
    refs.push_back({&blocks[i].bn.gamma, p + "bn.gamma"});
    refs.push_back({&blocks[i].bn.beta, p + "bn.beta"});
    refs.push_back({&blocks[i].bn.running_mean, p + "bn.rmean"});
    refs.push_back({&blocks[i].bn.running_var, p + "bn.rvar"});
  }
  refs.push_back({&fc.W.data, "fc.W"});
  refs.push_back({&fc.bias, "fc.b"});
  refs.push_back({&fc_bn.gamma, "fc_bn.gamma"});
  refs.push_back({&fc_bn.beta, "fc_bn.beta"});
  refs.push_back({&fc_bn.running_mean, "fc_bn.rmean"});
  refs.push_back({&fc_bn.running_var, "fc_bn.rvar"});
  refs.push_back({&out.W.data, "out.W"});
  refs.push_back({&out.bias, "out.b"});
  return refs;
}

size_t Model::param_count() {
  size_t n = 0;
  for (auto& r : params()) n += r.v->size();
  return n;
}

std::vector<double> model_forward_batch(Model& model, const std::vector<Matrix>& X,
                                        Mode mode, Rng* dropout_rng, ForwardCache* cache) {
  if (X.empty()) fail(Errc::EmptyInput, "empty batch");
  for (const auto& x : X)
    if (x.rows != model.cfg.input_rows || x.cols != model.cfg.input_cols)
      fail(Errc::DimensionMismatch, "batch entry shape mismatch (pad inputs first)");

  size_t batch = X.size();
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c = ForwardCache{};
  c.mode = mode;

  const std::vector<Matrix>* cur = &X;
  c.blocks.resize(model.blocks.size());
  for (size_t bi = 0; bi < model.blocks.size(); ++bi) {
    Block& blk = model.blocks[bi];
    BlockCache& bc = c.blocks[bi];
    bc.in = *cur;
    bc.pre.resize(batch);
    if (model.cfg.arch == Arch::GCNN) {
      bc.lin.resize(batch);
      for (size_t b = 0; b < batch; ++b) {
        kernels::conv_forward(bc.in[b], blk.V, blk.e, blk.left_pad, blk.conv_len, bc.lin[b]);
        kernels::conv_forward(bc.in[b], blk.W, blk.b, blk.left_pad, blk.conv_len, bc.pre[b]);
      }
      bc.bn = batchnorm_forward(bc.pre, blk.bn, mode);
      bc.gate_sig.resize(batch);
      bc.act.resize(batch);
      for (size_t b = 0; b < batch; ++b) {
        bc.gate_sig[b] = bc.bn.y[b];
        for (double& v : bc.gate_sig[b].data) v = sigmoid(v);
        bc.act[b] = Matrix(blk.W.K, blk.conv_len);
        for (size_t i = 0; i < bc.act[b].data.size(); ++i)
          bc.act[b].data[i] = bc.lin[b].data[i] * bc.gate_sig[b].data[i];
      }
    } else {
      for (size_t b = 0; b < batch; ++b)
        kernels::conv_forward(bc.in[b], blk.W, blk.b, blk.left_pad, blk.conv_len, bc.pre[b]);
      bc.bn = batchnorm_forward(bc.pre, blk.bn, mode);
      bc.act.resize(batch);
      for (size_t b = 0; b < batch; ++b) bc.act[b] = relu(bc.bn.y[b]);
    }
    if (blk.has_pool) {
      bc.out.resize(batch);
      bc.pool_idx.resize(batch);
      for (size_t b = 0; b < batch; ++b) {
        PoolResult pr = maxpool_halve(bc.act[b]);
        bc.out[b] = std::move(pr.Y);
        bc.pool_idx[b] = std::move(pr.argmax);
      }
    } else {
      bc.out = bc.act;
    }
    cur = &bc.out;
  }

  // flatten (channel-major) -> dense -> bn -> relu -> dropout -> sigmoid head
  c.flat.resize(batch);
  c.fc_pre.resize(batch);
  for (size_t b = 0; b < batch; ++b) {
    const Matrix& last = (*cur)[b];
    c.flat[b].assign(last.data.begin(), last.data.end());
    c.fc_pre[b].resize(static_cast<size_t>(model.cfg.hidden));
    kernels::dense_forward(model.fc.W, model.fc.bias, c.flat[b].data(), c.fc_pre[b].data());
  }

  std::vector<Matrix> fc_cols(batch, Matrix(model.cfg.hidden, 1));
  for (size_t b = 0; b < batch; ++b)
    for (int h = 0; h < model.cfg.hidden; ++h) fc_cols[b].at(h, 0) = c.fc_pre[b][static_cast<size_t>(h)];
  c.fc_bn = batchnorm_forward(fc_cols, model.fc_bn, mode);

  c.fc_act.resize(batch);
  c.head_in.resize(batch);
  bool use_dropout = mode == Mode::Train && model.cfg.dropout > 0.0;
  if (use_dropout) {
    if (!dropout_rng) fail(Errc::InvalidConfig, "train-mode forward needs a dropout rng");
    c.drop_mask.resize(batch);
  }
  c.logit.resize(batch);
  c.prob.resize(batch);
  for (size_t b = 0; b < batch; ++b) {
    c.fc_act[b].resize(static_cast<size_t>(model.cfg.hidden));
    for (int h = 0; h < model.cfg.hidden; ++h)
      c.fc_act[b][static_cast<size_t>(h)] = std::max(0.0, c.fc_bn.y[b].at(h, 0));
    if (use_dropout) {
      c.drop_mask[b].resize(static_cast<size_t>(model.cfg.hidden));
      dropout_mask(c.drop_mask[b], model.cfg.dropout, *dropout_rng);
      c.head_in[b].resize(static_cast<size_t>(model.cfg.hidden));
      for (int h = 0; h < model.cfg.hidden; ++h)
        c.head_in[b][static_cast<size_t>(h)] =
            c.fc_act[b][static_cast<size_t>(h)] * c.drop_mask[b][static_cast<size_t>(h)];
    } else {
      c.head_in[b] = c.fc_act[b];
    }
    double acc = model.out.bias[0];
    for (int h = 0; h < model.cfg.hidden; ++h)
      acc += model.out.W.data[static_cast<size_t>(h)] * c.head_in[b][static_cast<size_t>(h)];
    c.logit[b] = acc;
    c.prob[b] = sigmoid(acc);
  }
  return c.prob;
}

double model_forward(Model& model, const Matrix& X, Mode mode) {
  std::vector<Matrix> batch{X};
  return model_forward_batch(model, batch, mode, nullptr, nullptr)[0];
}

std::vector<std::vector<double>> model_backward_batch(Model& model,
                                                      const ForwardCache& c,
                                                      const std::vector<int>& labels) {
  size_t batch = c.prob.size();
  if (labels.size() != batch) fail(Errc::DimensionMismatch, "labels/batch size mismatch");

  auto refs = model.params();
  std::vector<std::vector<double>> grads(refs.size());
  for (size_t i = 0; i < refs.size(); ++i) grads[i].assign(refs[i].v->size(), 0.0);
  auto grad_of = [&](const std::string& name) -> std::vector<double>& {
    for (size_t i = 0; i < refs.size(); ++i)
      if (refs[i].name == name) return grads[i];
    fail(Errc::InvalidConfig, "unknown parameter tensor " + name);
  };

  int hidden = model.cfg.hidden;

  // head: d(sum BCE)/dlogit = p - y
  std::vector<double> dlogit(batch);
  for (size_t b = 0; b < batch; ++b) dlogit[b] = c.prob[b] - labels[b];

  auto& d_out_w = grad_of("out.W");
  auto& d_out_b = grad_of("out.b");
  std::vector<std::vector<double>> dhead(batch, std::vector<double>(static_cast<size_t>(hidden)));
  for (size_t b = 0; b < batch; ++b) {
    d_out_b[0] += dlogit[b];
    for (int h = 0; h < hidden; ++h) {
      d_out_w[static_cast<size_t>(h)] += dlogit[b] * c.head_in[b][static_cast<size_t>(h)];
      dhead[b][static_cast<size_t>(h)] = dlogit[b] * model.out.W.data[static_cast<size_t>(h)];
    }
  }

  // dropout and relu
  bool used_dropout = c.mode == Mode::Train && model.cfg.dropout > 0.0;
  std::vector<Matrix> d_fc_bn_out(batch, Matrix(hidden, 1));
  for (size_t b = 0; b < batch; ++b) {
    for (int h = 0; h < hidden; ++h) {
      double g = dhead[b][static_cast<size_t>(h)];
      if (used_dropout) g *= c.drop_mask[b][static_cast<size_t>(h)];
      if (c.fc_act[b][static_cast<size_t>(h)] <= 0.0) g = 0.0;
      d_fc_bn_out[b].at(h, 0) = g;
    }
  }

  BnGrads fc_bn_grads = batchnorm_backward(c.fc_bn, model.fc_bn, d_fc_bn_out);
  grad_of("fc_bn.gamma") = fc_bn_grads.dgamma;
  grad_of("fc_bn.beta") = fc_bn_grads.dbeta;

  auto& d_fc_w = grad_of("fc.W");
  auto& d_fc_b = grad_of("fc.b");
  std::vector<std::vector<double>> dflat(batch, std::vector<double>(static_cast<size_t>(model.flat_dim)));
  for (size_t b = 0; b < batch; ++b) {
    std::vector<double> dpre(static_cast<size_t>(hidden));
    for (int h = 0; h < hidden; ++h) dpre[static_cast<size_t>(h)] = fc_bn_grads.dx[b].at(h, 0);
    kernels::dense_grad_params(c.flat[b].data(), dpre.data(), hidden, model.flat_dim,
                               d_fc_w.data(), d_fc_b.data());
    kernels::dense_grad_input(model.fc.W, dpre.data(), dflat[b].data());
  }

  // unflatten into the last block's output shape
  int last_len = model.blocks.back().out_len;
  std::vector<Matrix> dcur(batch, Matrix(model.cfg.kernels, last_len));
  for (size_t b = 0; b < batch; ++b)
    std::copy(dflat[b].begin(), dflat[b].end(), dcur[b].data.begin());

  for (size_t bi = model.blocks.size(); bi-- > 0;) {
    Block& blk = model.blocks[bi];
    const BlockCache& bc = c.blocks[bi];
    std::string p = "block" + std::to_string(bi) + ".";

    std::vector<Matrix> dact(batch);
    if (blk.has_pool) {
      for (size_t b = 0; b < batch; ++b) {
        dact[b] = Matrix(blk.W.K, blk.conv_len);
        int out_len = blk.out_len;
        for (int k = 0; k < blk.W.K; ++k)
          for (int t = 0; t < out_len; ++t)
            dact[b].at(k, bc.pool_idx[b][static_cast<size_t>(k) * out_len + t]) +=
                dcur[b].at(k, t);
      }
    } else {
      dact = dcur;
    }

    std::vector<Matrix> dpre(batch);
    std::vector<Matrix> din(batch);
    for (size_t b = 0; b < batch; ++b) din[b] = Matrix(bc.in[b].rows, bc.in[b].cols);

    if (model.cfg.arch == Arch::GCNN) {
      std::vector<Matrix> d_bn_out(batch);
      std::vector<Matrix> dlin(batch);
      for (size_t b = 0; b < batch; ++b) {
        dlin[b] = Matrix(blk.W.K, blk.conv_len);
        d_bn_out[b] = Matrix(blk.W.K, blk.conv_len);
        for (size_t i = 0; i < dact[b].data.size(); ++i) {
          double s = bc.gate_sig[b].data[i];
          dlin[b].data[i] = dact[b].data[i] * s;
          d_bn_out[b].data[i] = dact[b].data[i] * bc.lin[b].data[i] * s * (1.0 - s);
        }
      }
      BnGrads bn_grads = batchnorm_backward(bc.bn, blk.bn, d_bn_out);
      grad_of(p + "bn.gamma") = bn_grads.dgamma;
      grad_of(p + "bn.beta") = bn_grads.dbeta;

      auto& dV = grad_of(p + "V");
      auto& de = grad_of(p + "e");
      auto& dW = grad_of(p + "W");
      auto& db = grad_of(p + "b");
      for (size_t b = 0; b < batch; ++b) {
        kernels::conv_grad_params(bc.in[b], dlin[b], blk.left_pad, blk.V, dV.data(), de.data());
        kernels::conv_grad_params(bc.in[b], bn_grads.dx[b], blk.left_pad, blk.W, dW.data(), db.data());
        kernels::conv_grad_input(dlin[b], blk.V, blk.left_pad, din[b]);
        kernels::conv_grad_input(bn_grads.dx[b], blk.W, blk.left_pad, din[b]);
      }
    } else {
      std::vector<Matrix> d_bn_out(batch);
      for (size_t b = 0; b < batch; ++b) {
        d_bn_out[b] = Matrix(blk.W.K, blk.conv_len);
        for (size_t i = 0; i < dact[b].data.size(); ++i)
          d_bn_out[b].data[i] = bc.act[b].data[i] > 0.0 ? dact[b].data[i] : 0.0;
      }
      BnGrads bn_grads = batchnorm_backward(bc.bn, blk.bn, d_bn_out);
      grad_of(p + "bn.gamma") = bn_grads.dgamma;
      grad_of(p + "bn.beta") = bn_grads.dbeta;

      auto& dW = grad_of(p + "W");
      auto& db = grad_of(p + "b");
      for (size_t b = 0; b < batch; ++b) {
        kernels::conv_grad_params(bc.in[b], bn_grads.dx[b], blk.left_pad, blk.W, dW.data(), db.data());
        kernels::conv_grad_input(bn_grads.dx[b], blk.W, blk.left_pad, din[b]);
      }
    }
    dcur = std::move(din);
  }
  return grads;
}

void adam_init(AdamState& state, Model& model) {
  auto refs = model.params();
  state.t = 0;
  state.m.resize(refs.size());
  state.v.resize(refs.size());
  for (size_t i = 0; i < refs.size(); ++i) {
    state.m[i].assign(refs[i].v->size(), 0.0);
    state.v[i].assign(refs[i].v->size(), 0.0);
  }
}

void adam_step(Model& model, const std::vector<std::vector<double>>& grads,
               AdamState& state) {
  auto refs = model.params();
  if (grads.size() != refs.size()) fail(Errc::DimensionMismatch, "gradient layout mismatch");
  ++state.t;
  for (size_t i = 0; i < refs.size(); ++i)
    adam_update_tensor(*refs[i].v, grads[i], state.m[i], state.v[i], state.t, state.lr,
                       state.beta1, state.beta2, state.eps);
}

namespace {
constexpr char kCkptMagic[8] = {'A', 'D', 'S', 'C', 'K', 'P', 'T', '1'};

template <class T>
void wr(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T rd(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model,
                     const std::string& sidecar_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write checkpoint: " + path.string());
  out.write(kCkptMagic, 8);
  wr<uint32_t>(out, static_cast<uint32_t>(model.cfg.arch));
  wr<uint32_t>(out, static_cast<uint32_t>(model.cfg.depth));
  wr<uint32_t>(out, static_cast<uint32_t>(model.cfg.kernels));
  wr<uint32_t>(out, static_cast<uint32_t>(model.cfg.effective_window()));
  wr<uint32_t>(out, static_cast<uint32_t>(model.cfg.hidden));
  wr<uint32_t>(out, static_cast<uint32_t>(model.cfg.input_rows));
  wr<uint32_t>(out, static_cast<uint32_t>(model.cfg.input_cols));
  wr<double>(out, model.cfg.dropout);
  auto refs = model.state();
  wr<uint64_t>(out, static_cast<uint64_t>(refs.size()));
  for (auto& r : refs) wr<uint64_t>(out, static_cast<uint64_t>(r.v->size()));
  for (auto& r : refs)
    out.write(reinterpret_cast<const char*>(r.v->data()),
              static_cast<std::streamsize>(r.v->size() * sizeof(double)));
  if (!sidecar_json.empty())
    csv::write_text(path.string() + ".json", sidecar_json);
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCkptMagic, 8) != 0)
    fail(Errc::BadConfig, "bad checkpoint magic: " + path.string());
  ModelConfig cfg;
  cfg.arch = static_cast<Arch>(rd<uint32_t>(in));
  cfg.depth = static_cast<int>(rd<uint32_t>(in));
  cfg.kernels = static_cast<int>(rd<uint32_t>(in));
  cfg.window = static_cast<int>(rd<uint32_t>(in));
  cfg.hidden = static_cast<int>(rd<uint32_t>(in));
  cfg.input_rows = static_cast<int>(rd<uint32_t>(in));
  cfg.input_cols = static_cast<int>(rd<uint32_t>(in));
  cfg.dropout = rd<double>(in);
  Rng dummy(0);
  Model model = build_model(cfg, dummy);
  auto refs = model.state();
  uint64_t n_tensors = rd<uint64_t>(in);
  if (n_tensors != refs.size())
    fail(Errc::BadConfig, "checkpoint tensor count mismatch: " + path.string());
  std::vector<uint64_t> lens(refs.size());
  for (auto& l : lens) l = rd<uint64_t>(in);
  for (size_t i = 0; i < refs.size(); ++i) {
    if (lens[i] != refs[i].v->size())
      fail(Errc::BadConfig, "checkpoint tensor size mismatch at " + refs[i].name);
    in.read(reinterpret_cast<char*>(refs[i].v->data()),
            static_cast<std::streamsize>(lens[i] * sizeof(double)));
  }
  if (!in) fail(Errc::BadConfig, "checkpoint truncated: " + path.string());
  return model;
}

}  // namespace adscreen::nn
