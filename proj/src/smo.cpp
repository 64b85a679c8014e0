#include "adscreen/smo.hpp"

#include <algorithm>
#include <cmath>

#include "adscreen/csv.hpp"
#include "adscreen/error.hpp"
#include "adscreen/rng.hpp"

namespace adscreen::smo {

StandardizeStats standardize_fit(const std::vector<std::vector<double>>& X) {
  if (X.size() < 2) fail(Errc::EmptyInput, "standardize_fit needs at least 2 rows");
  size_t d = X[0].size();
  StandardizeStats stats;
  stats.mean.assign(d, 0.0);
  std::vector<double> var(d, 0.0);
  double n = static_cast<double>(X.size());
  for (const auto& row : X) {
    if (row.size() != d) fail(Errc::DimensionMismatch, "ragged feature matrix");
    for (size_t j = 0; j < d; ++j) stats.mean[j] += row[j];
  }
  for (size_t j = 0; j < d; ++j) stats.mean[j] /= n;
  for (const auto& row : X)
    for (size_t j = 0; j < d; ++j) {
      double diff = row[j] - stats.mean[j];
      var[j] += diff * diff;
    }
  stats.std.assign(d, 1.0);
  for (size_t j = 0; j < d; ++j) {
    var[j] /= n;
    if (var[j] > 1e-24) stats.std[j] = std::sqrt(var[j]);
  }
  return stats;
}

std::vector<double> standardize_apply(const StandardizeStats& stats,
                                      const std::vector<double>& x) {
  if (x.size() != stats.mean.size())
    fail(Errc::DimensionMismatch, "standardize_apply dimension mismatch");
  std::vector<double> out(x.size());
  for (size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - stats.mean[j]) / stats.std[j];
  return out;
}

namespace {

// Platt SMO with the usual two heuristics. Linear kernel, so w is kept
// incrementally and the error cache is refreshed from w after each step.
struct SmoSolver {
  const std::vector<std::vector<double>>& X;
  const std::vector<int>& y;
  double C, tol;
  size_t n, d;
  std::vector<double> alpha, w, error;  // error[i] = f(x_i) - y_i
  double b = 0.0;
  int64_t pair_updates = 0;
  Rng rng;

  SmoSolver(const std::vector<std::vector<double>>& x_in, const std::vector<int>& y_in,
            double c_in, double tol_in)
      : X(x_in), y(y_in), C(c_in), tol(tol_in), n(x_in.size()), d(x_in[0].size()),
        rng(0x51a7e5u) {
    alpha.assign(n, 0.0);
    w.assign(d, 0.0);
    error.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) error[i] = -static_cast<double>(y[i]);
  }

  double dot(const std::vector<double>& a, const std::vector<double>& c) const {
    double acc = 0.0;
    for (size_t j = 0; j < d; ++j) acc += a[j] * c[j];
    return acc;
  }

  bool take_step(size_t i1, size_t i2) {
    if (i1 == i2) return false;
    double a1 = alpha[i1], a2 = alpha[i2];
    int y1 = y[i1], y2 = y[i2];
    double e1 = error[i1], e2 = error[i2];
    double s = y1 * y2;
    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(C, C + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - C);
      hi = std::min(C, a1 + a2);
    }
    if (lo >= hi) return false;
    double k11 = dot(X[i1], X[i1]);
    double k12 = dot(X[i1], X[i2]);
    double k22 = dot(X[i2], X[i2]);
    double eta = k11 + k22 - 2.0 * k12;
    // eta = |x1-x2|^2 for the linear kernel; zero means duplicates, along
    // which the objective is flat -> nothing to gain.
    if (eta <= 1e-15) return false;
    double a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
    if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;
    double a1_new = a1 + s * (a2 - a2_new);

    double d1 = y1 * (a1_new - a1), d2 = y2 * (a2_new - a2);
    // pick b so an interior multiplier sits exactly on its margin
    double b1 = b - e1 - d1 * k11 - d2 * k12;
    double b2 = b - e2 - d1 * k12 - d2 * k22;
    if (a1_new > 0.0 && a1_new < C)
      b = b1;
    else if (a2_new > 0.0 && a2_new < C)
      b = b2;
    else
      b = 0.5 * (b1 + b2);

    for (size_t j = 0; j < d; ++j) w[j] += d1 * X[i1][j] + d2 * X[i2][j];
    alpha[i1] = a1_new;
    alpha[i2] = a2_new;

#pragma omp parallel for schedule(static) if (static_cast<long>(n) * static_cast<long>(d) > 16384)
    for (long i = 0; i < static_cast<long>(n); ++i) {
      size_t ii = static_cast<size_t>(i);
      error[ii] = dot(w, X[ii]) + b - y[ii];
    }
    ++pair_updates;
    return true;
  }

  bool examine(size_t i2) {
    double r2 = error[i2] * y[i2];
    if (!((r2 < -tol && alpha[i2] < C) || (r2 > tol && alpha[i2] > 0.0))) return false;

    // second-choice heuristic: non-bound point maximizing |e1 - e2|
    size_t best = n;
    double best_gap = -1.0;
    for (size_t i = 0; i < n; ++i) {
      if (alpha[i] <= 0.0 || alpha[i] >= C) continue;
      double gap = std::abs(error[i] - error[i2]);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < n && take_step(best, i2)) return true;

    size_t start = rng.below(n);
    for (size_t k = 0; k < n; ++k) {
      size_t i = (start + k) % n;
      if (alpha[i] <= 0.0 || alpha[i] >= C) continue;
      if (take_step(i, i2)) return true;
    }
    start = rng.below(n);
    for (size_t k = 0; k < n; ++k) {
      size_t i = (start + k) % n;
      if (take_step(i, i2)) return true;
    }
    return false;
  }

  void solve() {
    bool examine_all = true;
    int changed = 0;
    while (changed > 0 || examine_all) {
      changed = 0;
      for (size_t i = 0; i < n; ++i) {
        if (!examine_all && (alpha[i] <= 0.0 || alpha[i] >= C)) continue;
        if (examine(i)) ++changed;
        if (pair_updates > 1000000)
          fail(Errc::NoConvergence, "SMO exceeded 1e6 pair updates");
      }
      if (examine_all) {
        if (changed == 0) break;  // full pass found no violations
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }
};

}  // namespace

SvmModel smo_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   double C, double tol) {
  if (X.empty() || X.size() != y.size()) fail(Errc::EmptyInput, "bad SMO inputs");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1)
      pos = true;
    else if (v == -1)
      neg = true;
    else
      fail(Errc::BadConfig, "labels must be +-1");
  }
  if (!pos || !neg) fail(Errc::SingleClassData, "SMO needs both classes");

  SmoSolver solver(X, y, C, tol);
  solver.solve();

  SvmModel model;
  model.w = solver.w;
  model.b = solver.b;
  model.alpha = solver.alpha;
  model.C = C;
  return model;
}

double decision_value(const SvmModel& model, const std::vector<double>& x) {
  std::vector<double> z = model.stats.empty() ? x : standardize_apply(model.stats, x);
  if (z.size() != model.w.size())
    fail(Errc::DimensionMismatch, "decision_value dimension mismatch");
  double acc = model.b;
  for (size_t j = 0; j < z.size(); ++j) acc += model.w[j] * z[j];
  return acc;
}

int svm_predict(const SvmModel& model, const std::vector<double>& x) {
  return decision_value(model, x) > 0.0 ? 1 : 0;
}

double dual_objective(const SvmModel& model) {
  double sum_alpha = 0.0;
  for (double a : model.alpha) sum_alpha += a;
  double wnorm = 0.0;
  for (double wj : model.w) wnorm += wj * wj;
  return sum_alpha - 0.5 * wnorm;
}

void save_svm_csv(const std::filesystem::path& path, const SvmModel& model) {
  std::string s = "dimension,weight,mean,std\n";
  for (size_t j = 0; j < model.w.size(); ++j) {
    s += std::to_string(j);
    s += ',';
    s += csv::fmt(model.w[j]);
    s += ',';
    s += csv::fmt(model.stats.empty() ? 0.0 : model.stats.mean[j]);
    s += ',';
    s += csv::fmt(model.stats.empty() ? 1.0 : model.stats.std[j]);
    s += '\n';
  }
  s += "bias," + csv::fmt(model.b) + ",,\n";
  s += "C," + csv::fmt(model.C) + ",,\n";
  csv::write_text(path, s);
}

SvmModel load_svm_csv(const std::filesystem::path& path) {
  auto lines = csv::read_lines(path);
  if (lines.empty() || csv::split(lines[0]) !=
                           std::vector<std::string>{"dimension", "weight", "mean", "std"})
    fail(Errc::BadConfig, "bad svm model header: " + path.string());
  SvmModel model;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = csv::split(lines[i]);
    if (f[0] == "bias") {
      model.b = csv::to_double(f[1]);
    } else if (f[0] == "C") {
      model.C = csv::to_double(f[1]);
    } else {
      model.w.push_back(csv::to_double(f[1]));
      model.stats.mean.push_back(csv::to_double(f[2]));
      model.stats.std.push_back(csv::to_double(f[3]));
    }
  }
  return model;
}

}  // namespace adscreen::smo
