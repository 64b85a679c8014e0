#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adscreen/lld.hpp"
#include "adscreen/nn/model.hpp"

namespace adscreen::train {

struct TrainConfig {
  int max_epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int early_stop_patience = 0;       // 0 = off; the canonical run is exactly max_epochs
  double validation_fraction = 0.1;  // used only when early stopping is on
  uint64_t seed = 1;
};

struct UtteranceExample {
  lld::LLDMatrix features;
  int label = 0;  // AD = 1, control = 0
  std::string subject_id;
  std::string utterance_id;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0, train_acc = 0.0;
  bool has_val = false;
  double val_loss = 0.0, val_acc = 0.0;
};

struct TrainResult {
  nn::Model model;
  std::vector<EpochStats> history;
  int64_t truncated_inputs = 0;
};

// Zero-pads columns T..t_max-1; longer inputs are truncated and counted.
nn::Matrix pad_to_length(const lld::LLDMatrix& m, int t_max, int64_t* truncated = nullptr);

int max_frames(const std::vector<const UtteranceExample*>& examples);

// Seeded shuffling, mini-batch forward/backward/Adam. When early stopping
// is on, a subject-disjoint validation split monitors loss and the best
// parameters are restored. Per-epoch history metrics are evaluated in
// infer mode after the epoch.
TrainResult train_model(const std::vector<const UtteranceExample*>& examples,
                        nn::ModelConfig model_cfg, const TrainConfig& cfg);
TrainResult train_model(const std::vector<UtteranceExample>& examples,
                        nn::ModelConfig model_cfg, const TrainConfig& cfg);

double predict_prob(nn::Model& model, const lld::LLDMatrix& features,
                    int64_t* truncated = nullptr);

// CSV: epoch,train_loss,train_acc,val_loss,val_acc (val columns empty
// when no validation split exists).
void save_history_csv(const std::filesystem::path& path,
                      const std::vector<EpochStats>& history);

}  // namespace adscreen::train
