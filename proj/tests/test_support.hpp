#pragma once

#include <unistd.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "adscreen/audio.hpp"
#include "adscreen/rng.hpp"

namespace testsupport {

// Unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("adscreen_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline adscreen::audio::AudioClip sine_clip(double freq_hz, double amplitude,
                                            int duration_ms, int rate = 16000) {
  adscreen::audio::AudioClip clip;
  clip.sample_rate_hz = rate;
  int n = duration_ms * rate / 1000;
  clip.samples.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    clip.samples[static_cast<size_t>(i)] =
        amplitude * std::sin(2.0 * M_PI * freq_hz * i / rate);
  return clip;
}

inline adscreen::audio::AudioClip noise_clip(double amplitude, int duration_ms,
                                             uint64_t seed, int rate = 16000) {
  adscreen::audio::AudioClip clip;
  clip.sample_rate_hz = rate;
  int n = duration_ms * rate / 1000;
  clip.samples.resize(static_cast<size_t>(n));
  adscreen::Rng rng(seed);
  for (auto& s : clip.samples) s = amplitude * rng.uniform(-1.0, 1.0);
  return clip;
}

// O(n^2) DFT, the independent reference for the FFT-based feature path.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x, size_t n) {
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t i = 0; i < x.size() && i < n; ++i) {
      double ang = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(i) /
                   static_cast<double>(n);
      acc += x[i] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace testsupport
