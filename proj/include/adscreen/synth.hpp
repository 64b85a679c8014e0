#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "adscreen/audio.hpp"

namespace adscreen::synth {

// Two-class synthetic cohort. At effect size 0 both classes draw from
// identical distributions; at 1 the "AD-like" class halves its F0
// excursion, triples inserted pause time, doubles per-period amplitude
// perturbation and slows the syllable-rate modulation by 30%.
struct CohortSpec {
  int subjects_per_class = 60;
  int utterances_min = 4;
  int utterances_max = 6;
  int utterance_ms_min = 1500;
  int utterance_ms_max = 2500;
  double effect_size = 1.0;  // delta in [0, 1]
  uint64_t seed = 1;
  int sample_rate_hz = 16000;
};

CohortSpec load_cohort_spec(const std::filesystem::path& ini_path);

struct CohortOutput {
  std::filesystem::path manifest_csv;
  int sessions = 0;
  int utterances = 0;
};

// Writes one session WAV + segments CSV per subject and a manifest CSV
// binding them; fully deterministic per seed.
CohortOutput generate_cohort(const CohortSpec& spec, const std::filesystem::path& out_dir);

}  // namespace adscreen::synth
