#include "adscreen/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "adscreen/csv.hpp"
#include "adscreen/error.hpp"

namespace adscreen::train {

nn::Matrix pad_to_length(const lld::LLDMatrix& m, int t_max, int64_t* truncated) {
  nn::Matrix out(m.rows, t_max);
  int copy_cols = std::min(m.cols, t_max);
  if (m.cols > t_max && truncated) ++*truncated;
  for (int f = 0; f < m.rows; ++f)
    for (int t = 0; t < copy_cols; ++t) out.at(f, t) = m.at(f, t);
  return out;
}

int max_frames(const std::vector<const UtteranceExample*>& examples) {
  int t_max = 0;
  for (const auto* ex : examples) t_max = std::max(t_max, ex->features.cols);
  return t_max;
}

namespace {

struct EvalResult {
  double loss = 0.0;
  double acc = 0.0;
};

EvalResult evaluate_infer(nn::Model& model, const std::vector<const UtteranceExample*>& set,
                          int t_max, int64_t* truncated) {
  EvalResult res;
  if (set.empty()) return res;
  constexpr size_t kChunk = 64;
  size_t correct = 0;
  for (size_t start = 0; start < set.size(); start += kChunk) {
    size_t stop = std::min(start + kChunk, set.size());
    std::vector<nn::Matrix> batch;
    batch.reserve(stop - start);
    for (size_t i = start; i < stop; ++i)
      batch.push_back(pad_to_length(set[i]->features, t_max, truncated));
    std::vector<double> probs =
        nn::model_forward_batch(model, batch, nn::Mode::Infer, nullptr, nullptr);
    for (size_t i = start; i < stop; ++i) {
      int y = set[i]->label;
      res.loss += nn::bce_loss(probs[i - start], y);
      correct += (probs[i - start] > 0.5 ? 1 : 0) == y ? 1 : 0;
    }
  }
  res.loss /= static_cast<double>(set.size());
  res.acc = 100.0 * static_cast<double>(correct) / static_cast<double>(set.size());
  return res;
}

}  // namespace

TrainResult train_model(const std::vector<const UtteranceExample*>& examples,
                        nn::ModelConfig model_cfg, const TrainConfig& cfg) {
  if (examples.empty()) fail(Errc::EmptyDataset, "no training examples");
  if (examples.size() < 2) fail(Errc::EmptyDataset, "need at least 2 training examples");
  if (cfg.batch_size < 2) fail(Errc::InvalidConfig, "batch size must be >= 2 (batch norm)");
  if (cfg.validation_fraction < 0.0 || cfg.validation_fraction >= 0.5)
    fail(Errc::InvalidConfig, "validation fraction outside [0, 0.5)");

  bool has_ad = false, has_control = false;
  int feat_rows = examples[0]->features.rows;
  for (const auto* ex : examples) {
    (ex->label == 1 ? has_ad : has_control) = true;
    if (ex->features.rows != feat_rows)
      fail(Errc::DimensionMismatch, "inconsistent feature row counts across utterances");
  }
  if (!has_ad || !has_control)
    fail(Errc::SingleClassData, "training data contains a single class");

  // subject-disjoint validation split, only when early stopping is on
  std::vector<const UtteranceExample*> train_set, val_set;
  if (cfg.early_stop_patience > 0 && cfg.validation_fraction > 0.0) {
    std::vector<std::string> subjects;
    std::unordered_map<std::string, std::vector<const UtteranceExample*>> by_subject;
    for (const auto* ex : examples) {
      if (!by_subject.count(ex->subject_id)) subjects.push_back(ex->subject_id);
      by_subject[ex->subject_id].push_back(ex);
    }
    Rng split_rng(mix_seed(cfg.seed, 2));
    split_rng.shuffle(subjects);
    size_t val_target = static_cast<size_t>(cfg.validation_fraction * examples.size());
    size_t val_count = 0;
    for (const auto& s : subjects) {
      auto& utts = by_subject[s];
      if (val_count < val_target && subjects.size() > 1) {
        val_set.insert(val_set.end(), utts.begin(), utts.end());
        val_count += utts.size();
      } else {
        train_set.insert(train_set.end(), utts.begin(), utts.end());
      }
    }
    bool tr_ad = false, tr_ctl = false;
    for (const auto* ex : train_set) (ex->label == 1 ? tr_ad : tr_ctl) = true;
    if (train_set.size() < 2 || !tr_ad || !tr_ctl)
      fail(Errc::SingleClassData, "validation split left an unusable training set");
  } else {
    train_set = examples;
  }

  TrainResult result;
  model_cfg.input_rows = feat_rows;
  if (model_cfg.input_cols <= 0) model_cfg.input_cols = max_frames(train_set);
  int t_max = model_cfg.input_cols;

  Rng build_rng(mix_seed(cfg.seed, 0));
  result.model = nn::build_model(model_cfg, build_rng);
  nn::Model& model = result.model;

  nn::AdamState adam;
  adam.lr = cfg.learning_rate;
  nn::adam_init(adam, model);

  Rng rng(mix_seed(cfg.seed, 1));
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<std::vector<double>> best_state;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);

    // batch boundaries; a trailing batch of size 1 merges into the previous one
    std::vector<std::pair<size_t, size_t>> batches;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size))
      batches.emplace_back(start, std::min(order.size(), start + static_cast<size_t>(cfg.batch_size)));
    if (batches.size() > 1 && batches.back().second - batches.back().first < 2) {
      batches[batches.size() - 2].second = batches.back().second;
      batches.pop_back();
    }

    for (size_t bi = 0; bi < batches.size(); ++bi) {
      auto [start, stop] = batches[bi];
      std::vector<nn::Matrix> batch;
      std::vector<int> labels;
      batch.reserve(stop - start);
      for (size_t i = start; i < stop; ++i) {
        batch.push_back(pad_to_length(train_set[order[i]]->features, t_max,
                                      &result.truncated_inputs));
        labels.push_back(train_set[order[i]]->label);
      }
      nn::ForwardCache cache;
      std::vector<double> probs =
          nn::model_forward_batch(model, batch, nn::Mode::Train, &rng, &cache);
      double loss = 0.0;
      for (size_t i = 0; i < probs.size(); ++i) loss += nn::bce_loss(probs[i], labels[i]);
      if (!std::isfinite(loss))
        fail(Errc::NumericalFailure, "non-finite loss in epoch " + std::to_string(epoch) +
                                         " batch " + std::to_string(bi));
      auto grads = nn::model_backward_batch(model, cache, labels);
      double scale = 1.0 / static_cast<double>(probs.size());
      for (auto& g : grads)
        for (double& v : g) v *= scale;
      nn::adam_step(model, grads, adam);
    }

    EpochStats stats;
    stats.epoch = epoch;
    EvalResult tr = evaluate_infer(model, train_set, t_max, &result.truncated_inputs);
    stats.train_loss = tr.loss;
    stats.train_acc = tr.acc;
    if (!std::isfinite(tr.loss))
      fail(Errc::NumericalFailure, "non-finite training loss after epoch " + std::to_string(epoch));
    if (!val_set.empty()) {
      EvalResult va = evaluate_infer(model, val_set, t_max, &result.truncated_inputs);
      stats.has_val = true;
      stats.val_loss = va.loss;
      stats.val_acc = va.acc;
      if (cfg.early_stop_patience > 0) {
        if (va.loss < best_val - 1e-12) {
          best_val = va.loss;
          since_best = 0;
          best_state.clear();
          for (auto& r : model.state()) best_state.push_back(*r.v);
        } else if (++since_best >= cfg.early_stop_patience) {
          result.history.push_back(stats);
          break;
        }
      }
    }
    result.history.push_back(stats);
  }

  if (!best_state.empty()) {
    auto refs = model.state();
    for (size_t i = 0; i < refs.size(); ++i) *refs[i].v = best_state[i];
  }
  return result;
}

TrainResult train_model(const std::vector<UtteranceExample>& examples,
                        nn::ModelConfig model_cfg, const TrainConfig& cfg) {
  std::vector<const UtteranceExample*> ptrs;
  ptrs.reserve(examples.size());
  for (const auto& ex : examples) ptrs.push_back(&ex);
  return train_model(ptrs, model_cfg, cfg);
}

double predict_prob(nn::Model& model, const lld::LLDMatrix& features, int64_t* truncated) {
  nn::Matrix x = pad_to_length(features, model.cfg.input_cols, truncated);
  return nn::model_forward(model, x, nn::Mode::Infer);
}

void save_history_csv(const std::filesystem::path& path,
                      const std::vector<EpochStats>& history) {
  std::string s = "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& h : history) {
    s += std::to_string(h.epoch);
    s += ',';
    s += csv::fmt(h.train_loss);
    s += ',';
    s += csv::fmt(h.train_acc);
    s += ',';
    if (h.has_val) {
      s += csv::fmt(h.val_loss);
      s += ',';
      s += csv::fmt(h.val_acc);
    } else {
      s += ',';
    }
    s += '\n';
  }
  csv::write_text(path, s);
}

}  // namespace adscreen::train
