#include "adscreen/eval.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>

#include "adscreen/error.hpp"
#include "adscreen/rng.hpp"
#include "adscreen/smo.hpp"

namespace adscreen::eval {

const std::vector<int> kDefaultDepths = {1, 2, 3, 4, 6, 8, 10};
const std::vector<int> kDefaultLengthsMs = {500, 1000, 2000, 4000, 4295};

int FoldPlan::fold_of(const std::string& subject_id) const {
  for (size_t f = 0; f < folds.size(); ++f)
    for (const auto& s : folds[f])
      if (s == subject_id) return static_cast<int>(f);
  return -1;
}

FoldPlan make_folds(const std::vector<SubjectInfo>& subjects, int k, uint64_t seed) {
  if (k < 1) fail(Errc::InvalidConfig, "fold count must be >= 1");
  if (static_cast<int>(subjects.size()) < k)
    fail(Errc::TooFewSubjects, std::to_string(subjects.size()) + " subjects for " +
                                   std::to_string(k) + " folds");
  {
    std::set<std::string> ids;
    for (const auto& s : subjects)
      if (!ids.insert(s.subject_id).second)
        fail(Errc::InvalidConfig, "duplicate subject id " + s.subject_id);
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.assign(static_cast<size_t>(k), {});
  std::vector<int> label_sessions(static_cast<size_t>(2 * k), 0);  // [label * k + fold]
  std::vector<int> total_sessions(static_cast<size_t>(k), 0);
  std::vector<int> fold_sizes(static_cast<size_t>(k), 0);

  Rng rng(seed);
  for (int label = 0; label < 2; ++label) {
    std::vector<SubjectInfo> group;
    for (const auto& s : subjects)
      if (static_cast<int>(s.label) == label) group.push_back(s);
    rng.shuffle(group);
    std::stable_sort(group.begin(), group.end(),
                     [](const SubjectInfo& a, const SubjectInfo& b) {
                       return a.session_count > b.session_count;
                     });
    for (const auto& s : group) {
      int best = 0;
      for (int f = 1; f < k; ++f) {
        int lf = label_sessions[static_cast<size_t>(label * k + f)];
        int lb = label_sessions[static_cast<size_t>(label * k + best)];
        if (lf < lb ||
            (lf == lb && (total_sessions[static_cast<size_t>(f)] < total_sessions[static_cast<size_t>(best)] ||
                          (total_sessions[static_cast<size_t>(f)] == total_sessions[static_cast<size_t>(best)] &&
                           fold_sizes[static_cast<size_t>(f)] < fold_sizes[static_cast<size_t>(best)]))))
          best = f;
      }
      plan.folds[static_cast<size_t>(best)].push_back(s.subject_id);
      label_sessions[static_cast<size_t>(label * k + best)] += s.session_count;
      total_sessions[static_cast<size_t>(best)] += s.session_count;
      fold_sizes[static_cast<size_t>(best)] += 1;
    }
  }
  for (const auto& f : plan.folds)
    if (f.empty()) fail(Errc::TooFewSubjects, "a fold ended up empty");
  return plan;
}

SubjectPrediction vote_subject(const std::string& subject_id,
                               const std::vector<int>& utterance_predictions,
                               int true_label) {
  if (utterance_predictions.empty())
    fail(Errc::NoUtterances, "no utterance predictions for subject " + subject_id);
  size_t ad = 0;
  for (int p : utterance_predictions) ad += p == 1 ? 1 : 0;
  SubjectPrediction sp;
  sp.subject_id = subject_id;
  sp.ad_fraction = static_cast<double>(ad) / static_cast<double>(utterance_predictions.size());
  sp.predicted = sp.ad_fraction > 0.5 ? 1 : 0;  // ties go to control
  sp.true_label = true_label;
  return sp;
}

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.empty()) fail(Errc::EmptyInput, "accuracy of empty prediction list");
  if (preds.size() != labels.size())
    fail(Errc::DimensionMismatch, "accuracy length mismatch");
  size_t correct = 0;
  for (size_t i = 0; i < preds.size(); ++i) correct += preds[i] == labels[i] ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(preds.size());
}

std::vector<FoldResult> cross_validate(const std::vector<train::UtteranceExample>& data,
                                       const FoldPlan& plan, const TrainerFn& trainer,
                                       uint64_t base_seed) {
  if (data.empty()) fail(Errc::EmptyDataset, "cross-validation on an empty dataset");
  std::map<std::string, int> fold_by_subject;
  for (size_t f = 0; f < plan.folds.size(); ++f)
    for (const auto& s : plan.folds[f]) fold_by_subject[s] = static_cast<int>(f);
  for (const auto& ex : data)
    if (!fold_by_subject.count(ex.subject_id))
      fail(Errc::InvalidConfig, "fold plan does not cover subject " + ex.subject_id);

  std::vector<FoldResult> results;
  for (int f = 0; f < plan.k; ++f) {
    std::vector<const train::UtteranceExample*> train_set, test_set;
    for (const auto& ex : data)
      (fold_by_subject[ex.subject_id] == f ? test_set : train_set).push_back(&ex);
    if (test_set.empty()) continue;  // fold holds subjects without utterances

    // runtime guard: no subject on both sides
    {
      std::set<std::string> train_subjects;
      for (const auto* ex : train_set) train_subjects.insert(ex->subject_id);
      for (const auto* ex : test_set)
        if (train_subjects.count(ex->subject_id))
          fail(Errc::InvalidConfig,
               "subject " + ex->subject_id + " appears in both train and test of fold " +
                   std::to_string(f));
    }

    FoldResult fr;
    fr.fold = f;
    fr.train_seed = mix_seed(base_seed, static_cast<uint64_t>(f));
    Predictor predictor;
    try {
      predictor = trainer(train_set, fr.train_seed);
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(f) + ": " + e.what());
    }

    std::vector<int> preds, labels;
    std::map<std::string, std::vector<int>> by_subject;
    std::map<std::string, int> subject_label;
    std::vector<std::string> subject_order;
    for (const auto* ex : test_set) {
      double prob = predictor(*ex);
      int pred = prob > 0.5 ? 1 : 0;
      preds.push_back(pred);
      labels.push_back(ex->label);
      if (!by_subject.count(ex->subject_id)) subject_order.push_back(ex->subject_id);
      by_subject[ex->subject_id].push_back(pred);
      subject_label[ex->subject_id] = ex->label;
    }
    fr.utterance_acc = accuracy(preds, labels);

    std::vector<int> s_pred, s_label;
    for (const auto& s : subject_order) {
      SubjectPrediction sp = vote_subject(s, by_subject[s], subject_label[s]);
      s_pred.push_back(sp.predicted);
      s_label.push_back(sp.true_label);
      fr.subjects.push_back(std::move(sp));
    }
    fr.subject_acc = accuracy(s_pred, s_label);
    results.push_back(std::move(fr));
  }
  if (results.empty()) fail(Errc::EmptyDataset, "no fold produced any test utterances");
  return results;
}

double mean_utterance_acc(const std::vector<FoldResult>& folds) {
  double acc = 0.0;
  for (const auto& f : folds) acc += f.utterance_acc;
  return acc / static_cast<double>(folds.size());
}

double mean_subject_acc(const std::vector<FoldResult>& folds) {
  double acc = 0.0;
  for (const auto& f : folds) acc += f.subject_acc;
  return acc / static_cast<double>(folds.size());
}

TrainerFn nn_trainer(nn::ModelConfig model_cfg, train::TrainConfig train_cfg) {
  return [model_cfg, train_cfg](const std::vector<const train::UtteranceExample*>& train_set,
                                uint64_t seed) -> Predictor {
    train::TrainConfig cfg = train_cfg;
    cfg.seed = seed;
    nn::ModelConfig mc = model_cfg;
    mc.input_cols = 0;  // T_max from the training folds only
    auto result = std::make_shared<train::TrainResult>(train::train_model(train_set, mc, cfg));
    return [result](const train::UtteranceExample& ex) {
      return train::predict_prob(result->model, ex.features, &result->truncated_inputs);
    };
  };
}

TrainerFn smo_trainer(double C, double tol) {
  return [C, tol](const std::vector<const train::UtteranceExample*>& train_set,
                  uint64_t /*seed*/) -> Predictor {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    X.reserve(train_set.size());
    for (const auto* ex : train_set) {
      X.push_back(lld::apply_functionals(ex->features).values);
      y.push_back(ex->label == 1 ? 1 : -1);
    }
    smo::StandardizeStats stats = smo::standardize_fit(X);
    std::vector<std::vector<double>> Xs(X.size());
    for (size_t i = 0; i < X.size(); ++i) Xs[i] = smo::standardize_apply(stats, X[i]);
    auto model = std::make_shared<smo::SvmModel>(smo::smo_train(Xs, y, C, tol));
    model->stats = stats;
    return [model](const train::UtteranceExample& ex) {
      std::vector<double> f = lld::apply_functionals(ex.features).values;
      return nn::sigmoid(smo::decision_value(*model, f));
    };
  };
}

std::vector<SweepRow> depth_sweep(const std::vector<train::UtteranceExample>& data,
                                  const std::vector<nn::Arch>& archs,
                                  const std::vector<int>& depths, nn::ModelConfig model_cfg,
                                  const train::TrainConfig& train_cfg, const FoldPlan& plan,
                                  uint64_t base_seed) {
  if (depths.empty() || archs.empty()) fail(Errc::EmptySweep, "empty depth sweep");
  std::vector<SweepRow> rows;
  for (nn::Arch arch : archs) {
    for (int depth : depths) {
      nn::ModelConfig mc = model_cfg;
      mc.arch = arch;
      mc.depth = depth;
      mc.window = 0;  // architecture default
      SweepRow row;
      row.value = std::to_string(depth);
      row.arch = nn::arch_name(arch);
      uint64_t row_seed =
          mix_seed(base_seed, static_cast<uint64_t>(depth) * 2 + static_cast<uint64_t>(arch));
      row.folds = cross_validate(data, plan, nn_trainer(mc, train_cfg), row_seed);
      row.mean_utt = mean_utterance_acc(row.folds);
      row.mean_subj = mean_subject_acc(row.folds);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<train::UtteranceExample> dataset_from_fixed_segments(
    const std::vector<SessionAudio>& sessions, int length_ms, lld::FeatureSet set,
    const lld::FrameConfig& frame_cfg) {
  std::vector<train::UtteranceExample> data;
  for (const auto& session : sessions) {
    std::vector<audio::AudioClip> pieces = audio::segment_fixed(session.clip, length_ms);
    for (size_t i = 0; i < pieces.size(); ++i) {
      train::UtteranceExample ex;
      ex.features = lld::extract_lld(pieces[i], set, frame_cfg);
      ex.label = session.label == audio::Label::AD ? 1 : 0;
      ex.subject_id = session.subject_id;
      ex.utterance_id = session.session_id + "#L" + std::to_string(i);
      data.push_back(std::move(ex));
    }
  }
  return data;
}

std::vector<SweepRow> length_sweep(const std::vector<SessionAudio>& sessions,
                                   const std::vector<int>& lengths_ms, lld::FeatureSet set,
                                   const lld::FrameConfig& frame_cfg,
                                   nn::ModelConfig model_cfg,
                                   const train::TrainConfig& train_cfg, const FoldPlan& plan,
                                   uint64_t base_seed) {
  if (lengths_ms.empty()) fail(Errc::EmptySweep, "empty length sweep");
  std::vector<SweepRow> rows;
  for (int length : lengths_ms) {
    std::vector<train::UtteranceExample> data =
        dataset_from_fixed_segments(sessions, length, set, frame_cfg);
    SweepRow row;
    row.value = std::to_string(length);
    row.arch = nn::arch_name(model_cfg.arch);
    uint64_t row_seed = mix_seed(base_seed, static_cast<uint64_t>(length));
    row.folds = cross_validate(data, plan, nn_trainer(model_cfg, train_cfg), row_seed);
    row.mean_utt = mean_utterance_acc(row.folds);
    row.mean_subj = mean_subject_acc(row.folds);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace adscreen::eval
