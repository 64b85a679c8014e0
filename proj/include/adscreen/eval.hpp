#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "adscreen/audio.hpp"
#include "adscreen/lld.hpp"
#include "adscreen/train.hpp"

namespace adscreen::eval {

struct SubjectInfo {
  std::string subject_id;
  audio::Label label = audio::Label::Control;
  int session_count = 1;
};

struct FoldPlan {
  int k = 10;
  uint64_t seed = 0;
  std::vector<std::vector<std::string>> folds;

  // -1 when the subject is not in the plan
  int fold_of(const std::string& subject_id) const;
};

// Label-stratified greedy assignment balancing per-fold session counts;
// deterministic per seed.
FoldPlan make_folds(const std::vector<SubjectInfo>& subjects, int k, uint64_t seed);

struct SubjectPrediction {
  std::string subject_id;
  double ad_fraction = 0.0;
  int predicted = 0;   // AD iff ad_fraction > 0.5 strictly
  int true_label = 0;
};

SubjectPrediction vote_subject(const std::string& subject_id,
                               const std::vector<int>& utterance_predictions,
                               int true_label);

// 100 * correct / total
double accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

// A predictor maps an utterance to its AD probability.
using Predictor = std::function<double(const train::UtteranceExample&)>;
// A trainer builds a predictor from the training-fold utterances.
using TrainerFn =
    std::function<Predictor(const std::vector<const train::UtteranceExample*>&, uint64_t seed)>;

struct FoldResult {
  int fold = 0;
  uint64_t train_seed = 0;
  double utterance_acc = 0.0;
  double subject_acc = 0.0;
  std::vector<SubjectPrediction> subjects;
};

// Train on k-1 folds, score the held-out fold; subject disjointness is
// re-checked at runtime. Training errors are rethrown with the fold index
// attached.
std::vector<FoldResult> cross_validate(const std::vector<train::UtteranceExample>& data,
                                       const FoldPlan& plan, const TrainerFn& trainer,
                                       uint64_t base_seed);

double mean_utterance_acc(const std::vector<FoldResult>& folds);
double mean_subject_acc(const std::vector<FoldResult>& folds);

// Standard pipeline trainers.
TrainerFn nn_trainer(nn::ModelConfig model_cfg, train::TrainConfig train_cfg);
TrainerFn smo_trainer(double C = 1.0, double tol = 1e-3);

struct SweepRow {
  std::string value;  // depth / length / feature set rendered as text
  std::string arch;
  std::vector<FoldResult> folds;
  double mean_utt = 0.0;
  double mean_subj = 0.0;
};

extern const std::vector<int> kDefaultDepths;     // {1,2,3,4,6,8,10}
extern const std::vector<int> kDefaultLengthsMs;  // {500,1000,2000,4000,4295}

std::vector<SweepRow> depth_sweep(const std::vector<train::UtteranceExample>& data,
                                  const std::vector<nn::Arch>& archs,
                                  const std::vector<int>& depths, nn::ModelConfig model_cfg,
                                  const train::TrainConfig& train_cfg, const FoldPlan& plan,
                                  uint64_t base_seed);

struct SessionAudio {
  std::string session_id;
  std::string subject_id;
  audio::Label label = audio::Label::Control;
  audio::AudioClip clip;  // loudness-normalized session audio
};

// Re-segments each session at the fixed lengths, re-extracts features and
// cross-validates per length.
std::vector<SweepRow> length_sweep(const std::vector<SessionAudio>& sessions,
                                   const std::vector<int>& lengths_ms, lld::FeatureSet set,
                                   const lld::FrameConfig& frame_cfg,
                                   nn::ModelConfig model_cfg,
                                   const train::TrainConfig& train_cfg, const FoldPlan& plan,
                                   uint64_t base_seed);

std::vector<train::UtteranceExample> dataset_from_fixed_segments(
    const std::vector<SessionAudio>& sessions, int length_ms, lld::FeatureSet set,
    const lld::FrameConfig& frame_cfg);

// report writers
void write_folds_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_subjects_csv(const std::filesystem::path& path, const std::vector<FoldResult>& folds);
void write_depth_summary_csv(const std::filesystem::path& path,
                             const std::vector<SweepRow>& rows);
void write_generic_summary_csv(const std::filesystem::path& path,
                               const std::vector<SweepRow>& rows,
                               const std::string& value_header,
                               const std::string& footer_comment = "");
void write_series_dat(const std::filesystem::path& path, const std::vector<SweepRow>& rows,
                      const std::string& arch);

}  // namespace adscreen::eval
