#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "adscreen/audio.hpp"

namespace adscreen::lld {

enum class FeatureSet { IS09 = 0, IS10 = 1 };

const char* feature_set_name(FeatureSet s);
FeatureSet parse_feature_set(const std::string& s);

struct FrameConfig {
  int frame_ms = 25;
  int hop_ms = 10;
  enum class Window { Hamming, Hann } window = Window::Hamming;
  double preemphasis = 0.97;
};

// F x T frame-level feature matrix, row-major.
struct LLDMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  std::vector<std::string> row_names;
  std::vector<double> frame_times_ms;
  FeatureSet set_id = FeatureSet::IS09;

  double& at(int f, int t) { return values[static_cast<size_t>(f) * cols + t]; }
  double at(int f, int t) const { return values[static_cast<size_t>(f) * cols + t]; }
  const double* row(int f) const { return values.data() + static_cast<size_t>(f) * cols; }
};

struct FunctionalVector {
  std::vector<double> values;
  std::vector<std::string> names;
};

// Names of the 12 per-row statistics of apply_functionals, in output order.
extern const std::array<const char*, 12> kFunctionalNames;

// Each frame is preemphasized (within-frame, first sample scaled by
// 1 - preemphasis) and then windowed.
std::vector<std::vector<double>> frame_signal(const audio::AudioClip& clip,
                                              const FrameConfig& cfg);

struct PitchResult {
  double f0_hz = 0.0;
  double voicing = 0.0;  // normalized autocorrelation peak, clipped to [0,1]
  double raw_peak = 0.0; // unclipped peak, input to the HNR mapping
};

// Normalized autocorrelation (NCCF) peak in the 55-500 Hz lag band with
// parabolic lag interpolation; peaks below 0.3 count as unvoiced (f0 = 0).
// Feed raw frame slices: a tapered window skews the normalized peak.
PitchResult f0_and_voicing(const std::vector<double>& frame, int rate);

// Log energies (natural log, floor 1e-10) of 26 triangular mel filters
// spanning 0..rate/2, computed on the power spectrum of the frame
// zero-padded to the next power of two.
std::vector<double> mel_log_energies(const std::vector<double>& frame, int rate);
constexpr int kMelFilters = 26;

// Orthonormal DCT-II coefficients n_low..n_high of the mel log energies.
std::vector<double> mfcc(const std::vector<double>& frame, int rate, int n_low, int n_high);

struct LspResult {
  std::array<double, 8> freqs{};  // radians, strictly increasing in (0, pi)
  bool stable = true;             // false -> uniform fallback pi*k/(order+1)
};

// LPC (Levinson-Durbin on the frame autocorrelation) -> line spectral
// pair roots by grid scan (0.0005 rad) plus bisection refinement.
LspResult lsp_frequencies(const std::vector<double>& frame, int order = 8);

struct JitterShimmer {
  double jitter_local = 0.0;
  double jitter_ddp = 0.0;
  double shimmer_local = 0.0;
};

// Period lengths by waveform peak picking inside voiced frames of the raw
// clip; unvoiced frames yield zeros.
std::vector<JitterShimmer> jitter_shimmer(const audio::AudioClip& clip,
                                          const std::vector<double>& f0_track,
                                          const FrameConfig& cfg = {});

// Regression delta with replicated edges.
std::vector<double> delta(const std::vector<double>& row, int width = 2);

// IS09: ZCR, RMS energy, F0, HNR, MFCC 1-12 and deltas (32 rows).
// IS10: loudness, MFCC 0-14, log-mel 0-7, LSP 0-7, F0, F0 envelope,
// voicing, jitter local/ddp, shimmer local and deltas (76 rows).
LLDMatrix extract_lld(const audio::AudioClip& clip, FeatureSet set,
                      const FrameConfig& cfg = {});

// 12 statistics per row, concatenated row-major (IS09 -> 384 values).
FunctionalVector apply_functionals(const LLDMatrix& lld);

// CSV: metadata line "#set=..;frames=..;utterance=..", a row of feature
// names, then one line per feature with one column per frame.
void save_lld_csv(const std::filesystem::path& path, const LLDMatrix& m,
                  const std::string& utterance_id);
LLDMatrix load_lld_csv(const std::filesystem::path& path,
                       std::string* utterance_id = nullptr);

// 32-byte header (magic, F, T, set id) + row-major little-endian f64.
void save_lld_binary(const std::filesystem::path& path, const LLDMatrix& m);
LLDMatrix load_lld_binary(const std::filesystem::path& path);

}  // namespace adscreen::lld
