#pragma once

#include <filesystem>
#include <vector>

namespace adscreen::smo {

struct StandardizeStats {
  std::vector<double> mean, std;  // std = 1 for zero-variance dimensions

  bool empty() const { return mean.empty(); }
};

// Per-dimension zero mean / unit variance; zero-variance dimensions are
// centered only.
StandardizeStats standardize_fit(const std::vector<std::vector<double>>& X);
std::vector<double> standardize_apply(const StandardizeStats& stats,
                                      const std::vector<double>& x);

struct SvmModel {
  std::vector<double> w;
  double b = 0.0;
  std::vector<double> alpha;
  double C = 1.0;
  StandardizeStats stats;  // empty -> predictions use x as-is
};

// Platt's sequential minimal optimization, linear kernel. Terminates when
// no KKT violation exceeds tol; throws NoConvergence after 1e6 pair
// updates. No internal standardization: callers standardize first and
// store the stats on the model.
SvmModel smo_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   double C = 1.0, double tol = 1e-3);

// w . standardize(x) + b
double decision_value(const SvmModel& model, const std::vector<double>& x);

// 1 = AD for a strictly positive decision value, else 0 = control.
int svm_predict(const SvmModel& model, const std::vector<double>& x);

// sum(alpha) - 0.5 ||w||^2 for the linear kernel
double dual_objective(const SvmModel& model);

// CSV of (dimension, weight, mean, std) rows plus a bias row.
void save_svm_csv(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_svm_csv(const std::filesystem::path& path);

}  // namespace adscreen::smo
