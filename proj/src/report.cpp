#include <cstdio>
#include <map>

#include "adscreen/csv.hpp"
#include "adscreen/eval.hpp"

namespace adscreen::eval {

namespace {
std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}
}  // namespace

void write_folds_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::string s = "sweep_value,fold,utterance_acc,subject_acc\n";
  for (const auto& row : rows)
    for (const auto& f : row.folds) {
      s += row.value;
      s += ',';
      s += std::to_string(f.fold);
      s += ',';
      s += csv::fmt(f.utterance_acc);
      s += ',';
      s += csv::fmt(f.subject_acc);
      s += '\n';
    }
  csv::write_text(path, s);
}

void write_subjects_csv(const std::filesystem::path& path,
                        const std::vector<FoldResult>& folds) {
  std::string s = "fold,subject_id,ad_fraction,predicted,true_label\n";
  for (const auto& f : folds)
    for (const auto& sp : f.subjects) {
      s += std::to_string(f.fold);
      s += ',';
      s += sp.subject_id;
      s += ',';
      s += csv::fmt(sp.ad_fraction);
      s += ',';
      s += sp.predicted == 1 ? "AD" : "control";
      s += ',';
      s += sp.true_label == 1 ? "AD" : "control";
      s += '\n';
    }
  csv::write_text(path, s);
}

void write_depth_summary_csv(const std::filesystem::path& path,
                             const std::vector<SweepRow>& rows) {
  // depth-major table with one utterance/subject column pair per architecture
  std::map<int, std::map<std::string, const SweepRow*>> by_depth;
  bool has_cnn = false, has_gcnn = false;
  for (const auto& row : rows) {
    by_depth[static_cast<int>(csv::to_int(row.value))][row.arch] = &row;
    if (row.arch == "cnn") has_cnn = true;
    if (row.arch == "gcnn") has_gcnn = true;
  }
  std::string s = "depth";
  if (has_cnn) s += ",cnn_utterance,cnn_subject";
  if (has_gcnn) s += ",gcnn_utterance,gcnn_subject";
  s += '\n';
  for (const auto& [depth, per_arch] : by_depth) {
    s += std::to_string(depth);
    for (const char* arch : {"cnn", "gcnn"}) {
      if ((arch[0] == 'c' && !has_cnn) || (arch[0] == 'g' && !has_gcnn)) continue;
      auto it = per_arch.find(arch);
      if (it == per_arch.end()) {
        s += ",,";
      } else {
        s += ',' + pct(it->second->mean_utt) + ',' + pct(it->second->mean_subj);
      }
    }
    s += '\n';
  }
  s += "# reference (Pitt Corpus, IS10, 10-fold subject-disjoint CV), subject accuracy by "
       "depth 1/2/3/4/6/8/10:\n";
  s += "#   cnn:  66.0/66.6/69.2/68.7/68.6/69.0/70.4\n";
  s += "#   gcnn: 66.2/68.7/66.4/68.9/72.2/73.6/69.8\n";
  s += "# reference utterance accuracy, same order:\n";
  s += "#   cnn:  64.2/64.2/64.2/64.9/65.5/66.1/65.2\n";
  s += "#   gcnn: 62.2/62.6/61.9/63.3/65.1/66.3/65.2\n";
  csv::write_text(path, s);
}

void write_generic_summary_csv(const std::filesystem::path& path,
                               const std::vector<SweepRow>& rows,
                               const std::string& value_header,
                               const std::string& footer_comment) {
  std::string s = value_header + ",arch,utterance_acc,subject_acc\n";
  for (const auto& row : rows) {
    s += row.value;
    s += ',';
    s += row.arch;
    s += ',';
    s += pct(row.mean_utt);
    s += ',';
    s += pct(row.mean_subj);
    s += '\n';
  }
  if (!footer_comment.empty()) s += footer_comment;
  csv::write_text(path, s);
}

void write_series_dat(const std::filesystem::path& path, const std::vector<SweepRow>& rows,
                      const std::string& arch) {
  std::string s = "# sweep_value utterance_acc subject_acc (" + arch + ")\n";
  for (const auto& row : rows) {
    if (row.arch != arch) continue;
    s += row.value;
    s += ' ';
    s += csv::fmt(row.mean_utt);
    s += ' ';
    s += csv::fmt(row.mean_subj);
    s += '\n';
  }
  csv::write_text(path, s);
}

}  // namespace adscreen::eval
