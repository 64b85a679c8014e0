#include "adscreen/lld.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "adscreen/error.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace adscreen;
using namespace adscreen::lld;

namespace {

FrameConfig no_preemph() {
  FrameConfig cfg;
  cfg.preemphasis = 0.0;
  return cfg;
}

// ---- independent mel/DCT oracle (naive DFT path) ----

double orc_hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double orc_mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

std::vector<double> oracle_mfcc(const std::vector<double>& frame, int rate, int n_low,
                                int n_high) {
  size_t nfft = 1;
  while (nfft < frame.size()) nfft <<= 1;
  auto spec = testsupport::naive_dft(frame, nfft);
  std::vector<double> power(nfft / 2 + 1);
  for (size_t k = 0; k <= nfft / 2; ++k) power[k] = std::norm(spec[k]);

  const int nfilt = 26;
  double mel_hi = orc_hz_to_mel(rate / 2.0);
  std::vector<double> nodes(nfilt + 2);
  for (int i = 0; i < nfilt + 2; ++i) nodes[i] = orc_mel_to_hz(mel_hi * i / (nfilt + 1));

  std::vector<double> loge(nfilt);
  for (int m = 0; m < nfilt; ++m) {
    double acc = 0.0;
    for (size_t k = 0; k < power.size(); ++k) {
      double f = static_cast<double>(rate) * static_cast<double>(k) / static_cast<double>(nfft);
      double w = 0.0;
      if (f > nodes[m] && f < nodes[m + 1])
        w = (f - nodes[m]) / (nodes[m + 1] - nodes[m]);
      else if (f >= nodes[m + 1] && f < nodes[m + 2])
        w = (nodes[m + 2] - f) / (nodes[m + 2] - nodes[m + 1]);
      acc += w * power[k];
    }
    loge[m] = std::log(std::max(acc, 1e-10));
  }

  std::vector<double> out;
  for (int k = n_low; k <= n_high; ++k) {
    double acc = 0.0;
    for (int i = 0; i < nfilt; ++i)
      acc += loge[i] * std::cos(M_PI * k * (2.0 * i + 1.0) / (2.0 * nfilt));
    acc *= k == 0 ? std::sqrt(1.0 / nfilt) : std::sqrt(2.0 / nfilt);
    out.push_back(acc);
  }
  return out;
}

// ---- independent LSP-from-LPC reference ----
// e^{jmw} P(e^{-jw}) is real for symmetric P of degree 2m:
// h(w) = sum_i p[i] cos((m - i) w)
std::vector<double> oracle_sym_roots(const std::vector<double>& p) {
  int m = (static_cast<int>(p.size()) - 1) / 2;
  auto h = [&](double w) {
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) acc += p[i] * std::cos((m - static_cast<int>(i)) * w);
    return acc;
  };
  std::vector<double> roots;
  double step = 1e-4;
  double prev = h(step);
  for (double w = 2 * step; w < M_PI; w += step) {
    double cur = h(w);
    if ((prev <= 0 && cur > 0) || (prev >= 0 && cur < 0)) {
      double lo = w - step, hi = w, hlo = prev;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi), hm = h(mid);
        if ((hlo <= 0 && hm <= 0) || (hlo >= 0 && hm >= 0)) {
          lo = mid;
          hlo = hm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev = cur;
  }
  return roots;
}

std::vector<double> oracle_lsp_from_lpc(const std::vector<double>& a) {
  int p = static_cast<int>(a.size()) - 1;
  std::vector<double> P(p + 2), Q(p + 2);
  for (int i = 0; i <= p + 1; ++i) {
    double ai = i <= p ? a[i] : 0.0;
    double ar = (p + 1 - i) <= p ? a[p + 1 - i] : 0.0;
    P[i] = ai + ar;
    Q[i] = ai - ar;
  }
  std::vector<double> Pd(p + 1), Qd(p + 1);
  Pd[0] = P[0];
  Qd[0] = Q[0];
  for (int i = 1; i <= p; ++i) {
    Pd[i] = P[i] - Pd[i - 1];
    Qd[i] = Q[i] + Qd[i - 1];
  }
  std::vector<double> all = oracle_sym_roots(Pd);
  std::vector<double> q = oracle_sym_roots(Qd);
  all.insert(all.end(), q.begin(), q.end());
  std::sort(all.begin(), all.end());
  return all;
}

// clip made of raised-cosine bumps at given integer peak positions
audio::AudioClip bump_clip(const std::vector<int>& centers, const std::vector<double>& heights,
                           int total, int half_width = 20, int rate = 16000) {
  audio::AudioClip clip;
  clip.sample_rate_hz = rate;
  clip.samples.assign(static_cast<size_t>(total), 0.0);
  for (size_t c = 0; c < centers.size(); ++c)
    for (int o = -half_width; o <= half_width; ++o) {
      int i = centers[c] + o;
      if (i < 0 || i >= total) continue;
      clip.samples[static_cast<size_t>(i)] +=
          heights[c] * 0.5 * (1.0 + std::cos(M_PI * o / (half_width + 1.0)));
    }
  return clip;
}

}  // namespace

TEST_CASE("frame_signal counts and window identity") {
  audio::AudioClip clip = testsupport::noise_clip(0.2, 1000, 3);
  auto frames = frame_signal(clip, FrameConfig{});
  CHECK(frames.size() == 98);  // floor((16000-400)/160)+1
  CHECK(frames[0].size() == 400);

  audio::AudioClip exact;
  exact.sample_rate_hz = 16000;
  exact.samples.assign(400, 1.0);
  auto one = frame_signal(exact, no_preemph());
  REQUIRE(one.size() == 1);
  // frame of ones with no preemphasis -> the hamming coefficients themselves
  CHECK(one[0][0] == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(one[0][399] == doctest::Approx(0.08).epsilon(1e-12));
  double mid_max = *std::max_element(one[0].begin(), one[0].end());
  CHECK(mid_max == doctest::Approx(1.0).epsilon(1e-4));

  audio::AudioClip tiny;
  tiny.sample_rate_hz = 16000;
  tiny.samples.assign(399, 0.0);
  CHECK_THROWS_AS(frame_signal(tiny, FrameConfig{}), Error);
}

TEST_CASE("f0_and_voicing on a pure tone") {
  audio::AudioClip clip = testsupport::sine_clip(200.0, 0.8, 100);
  std::vector<double> frame(clip.samples.begin(), clip.samples.begin() + 400);
  PitchResult r = f0_and_voicing(frame, 16000);
  CHECK(std::abs(r.f0_hz - 200.0) < 2.0);
  CHECK(r.voicing > 0.9);
}

TEST_CASE("f0_and_voicing on white noise stays unvoiced on average") {
  double mean_voicing = 0.0;
  int voiced = 0;
  for (int seed = 0; seed < 100; ++seed) {
    audio::AudioClip clip = testsupport::noise_clip(0.5, 25, 7000 + static_cast<uint64_t>(seed));
    std::vector<double> frame(clip.samples.begin(), clip.samples.begin() + 400);
    PitchResult r = f0_and_voicing(frame, 16000);
    mean_voicing += r.voicing;
    voiced += r.f0_hz > 0.0 ? 1 : 0;
  }
  mean_voicing /= 100.0;
  CHECK(mean_voicing < 0.3);
  CHECK(voiced <= 50);
}

TEST_CASE("f0_and_voicing on silence") {
  std::vector<double> zeros(400, 0.0);
  PitchResult r = f0_and_voicing(zeros, 16000);
  CHECK(r.f0_hz == 0.0);
  CHECK(r.voicing == 0.0);
}

TEST_CASE("mfcc of a silent frame: constant log energies") {
  std::vector<double> zeros(400, 0.0);
  auto c_1_14 = mfcc(zeros, 16000, 1, 14);
  for (double c : c_1_14) CHECK(c == doctest::Approx(0.0).epsilon(1e-9));
  auto c0 = mfcc(zeros, 16000, 0, 0);
  double expect = std::sqrt(1.0 / 26.0) * 26.0 * std::log(1e-10);
  CHECK(c0[0] == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("mfcc matches the naive DFT oracle on 1000 random frames") {
  Rng rng(42);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> frame(400);
    for (double& v : frame) v = rng.uniform(-1.0, 1.0);
    auto got = mfcc(frame, 16000, 0, 14);
    auto want = oracle_mfcc(frame, 16000, 0, 14);
    for (size_t i = 0; i < got.size(); ++i)
      worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("lsp recovers a known AR(8) filter") {
  // A(z) as a cascade of four damped resonators
  struct Pole {
    double r, theta;
  };
  std::vector<Pole> poles = {{0.92, 0.5}, {0.90, 1.2}, {0.88, 1.9}, {0.85, 2.6}};
  std::vector<double> a = {1.0};
  for (const auto& p : poles) {
    std::vector<double> quad = {1.0, -2.0 * p.r * std::cos(p.theta), p.r * p.r};
    std::vector<double> next(a.size() + 2, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
      for (size_t j = 0; j < 3; ++j) next[i + j] += a[i] * quad[j];
    a = next;
  }
  REQUIRE(a.size() == 9);

  // drive with white noise
  Rng rng(1234);
  int n = 16384, burn = 2000;
  std::vector<double> x(static_cast<size_t>(n + burn), 0.0);
  for (int t = 0; t < n + burn; ++t) {
    double v = rng.normal();
    for (int k = 1; k <= 8; ++k)
      if (t - k >= 0) v -= a[static_cast<size_t>(k)] * x[static_cast<size_t>(t - k)];
    x[static_cast<size_t>(t)] = v;
  }
  std::vector<double> frame(x.begin() + burn, x.end());

  LspResult got = lsp_frequencies(frame, 8);
  REQUIRE(got.stable);
  std::vector<double> want = oracle_lsp_from_lpc(a);
  REQUIRE(want.size() == 8);
  for (int i = 0; i < 8; ++i)
    CHECK(std::abs(got.freqs[static_cast<size_t>(i)] - want[static_cast<size_t>(i)]) < 0.01);
}

TEST_CASE("lsp interlacing and fallback") {
  Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> frame(400);
    for (double& v : frame) v = rng.uniform(-1.0, 1.0);
    LspResult r = lsp_frequencies(frame, 8);
    for (int i = 0; i < 8; ++i) {
      CHECK(r.freqs[static_cast<size_t>(i)] > 0.0);
      CHECK(r.freqs[static_cast<size_t>(i)] < M_PI);
      if (i > 0) CHECK(r.freqs[static_cast<size_t>(i)] > r.freqs[static_cast<size_t>(i - 1)]);
    }
  }

  std::vector<double> silence(400, 0.0);
  LspResult r = lsp_frequencies(silence, 8);
  CHECK_FALSE(r.stable);
  for (int k = 1; k <= 8; ++k)
    CHECK(r.freqs[static_cast<size_t>(k - 1)] == doctest::Approx(M_PI * k / 9.0).epsilon(1e-12));
}

TEST_CASE("jitter and shimmer on a perfectly periodic tone") {
  audio::AudioClip clip = testsupport::sine_clip(200.0, 0.8, 1000);
  auto frames = frame_signal(clip, no_preemph());
  std::vector<double> f0(frames.size(), 200.0);
  auto js = jitter_shimmer(clip, f0, FrameConfig{});
  for (const auto& v : js) {
    CHECK(v.jitter_local < 1e-3);
    CHECK(v.shimmer_local < 1e-3);
  }
}

TEST_CASE("jitter_local on alternating periods P and 1.1P") {
  // peak spacings alternate 80 and 88 samples -> 0.1P / 1.05P = 0.0952
  std::vector<int> centers;
  std::vector<double> heights;
  int pos = 60;
  for (int i = 0; pos < 15800; ++i) {
    centers.push_back(pos);
    heights.push_back(0.8);
    pos += i % 2 == 0 ? 80 : 88;
  }
  audio::AudioClip clip = bump_clip(centers, heights, 16000);
  int t_frames = static_cast<int>(frame_signal(clip, no_preemph()).size());
  std::vector<double> f0(static_cast<size_t>(t_frames), 16000.0 / 84.0);
  auto js = jitter_shimmer(clip, f0, FrameConfig{});
  double mean = 0.0;
  int count = 0;
  for (const auto& v : js)
    if (v.jitter_local > 0.0) {
      mean += v.jitter_local;
      ++count;
    }
  REQUIRE(count > 20);
  mean /= count;
  CHECK(mean == doctest::Approx(0.0952).epsilon(0.05));
  CHECK(std::abs(mean - 0.0952) < 0.004);
}

TEST_CASE("shimmer_local on amplitudes alternating A and 1.2A") {
  std::vector<int> centers;
  std::vector<double> heights;
  int pos = 60;
  for (int i = 0; pos < 15800; ++i) {
    centers.push_back(pos);
    heights.push_back(i % 2 == 0 ? 0.5 : 0.6);
    pos += 80;
  }
  audio::AudioClip clip = bump_clip(centers, heights, 16000);
  int t_frames = static_cast<int>(frame_signal(clip, no_preemph()).size());
  std::vector<double> f0(static_cast<size_t>(t_frames), 200.0);
  auto js = jitter_shimmer(clip, f0, FrameConfig{});
  double mean = 0.0;
  int count = 0;
  for (const auto& v : js)
    if (v.shimmer_local > 0.0) {
      mean += v.shimmer_local;
      ++count;
    }
  REQUIRE(count > 20);
  mean /= count;
  CHECK(std::abs(mean - 0.1818) < 0.005);
}

TEST_CASE("delta rules") {
  std::vector<double> constant(20, 3.7);
  for (double d : delta(constant)) CHECK(d == doctest::Approx(0.0).epsilon(1e-15));

  double s = 0.25;
  std::vector<double> ramp(30);
  for (size_t i = 0; i < ramp.size(); ++i) ramp[i] = s * static_cast<double>(i);
  auto d = delta(ramp);
  for (size_t t = 2; t + 2 < ramp.size(); ++t)
    CHECK(d[t] == doctest::Approx(s).epsilon(1e-12));  // interior: exact regression slope

  std::vector<double> single{5.0};
  CHECK(delta(single)[0] == 0.0);

  // linearity
  Rng rng(8);
  std::vector<double> x(25), y(25);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform(-2.0, 2.0);
    y[i] = rng.uniform(-2.0, 2.0);
  }
  double alpha = 1.7, beta = -0.3;
  std::vector<double> mix(25);
  for (size_t i = 0; i < x.size(); ++i) mix[i] = alpha * x[i] + beta * y[i];
  auto dm = delta(mix);
  auto dx = delta(x);
  auto dy = delta(y);
  for (size_t i = 0; i < x.size(); ++i)
    CHECK(dm[i] == doctest::Approx(alpha * dx[i] + beta * dy[i]).epsilon(1e-12));
}

TEST_CASE("extract_lld dimensional contract") {
  audio::AudioClip clip = testsupport::noise_clip(0.3, 1000, 15);
  LLDMatrix is09 = extract_lld(clip, FeatureSet::IS09);
  CHECK(is09.rows == 32);
  CHECK(is09.cols == 98);
  CHECK(is09.row_names.size() == 32);

  LLDMatrix is10 = extract_lld(clip, FeatureSet::IS10);
  CHECK(is10.rows == 76);
  CHECK(is10.cols == 98);
}

TEST_CASE("extract_lld on silence: floors and zeros") {
  audio::AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.assign(16000, 0.0);
  LLDMatrix m = extract_lld(clip, FeatureSet::IS10);
  for (int t = 0; t < m.cols; ++t) {
    CHECK(m.at(0, t) == doctest::Approx(std::log(1e-10)).epsilon(1e-9));  // loudness floor
    CHECK(m.at(32, t) == 0.0);                                            // f0
    CHECK(m.at(34, t) == 0.0);                                            // voicing
    CHECK(m.at(35, t) == 0.0);                                            // jitter
  }
  LLDMatrix e = extract_lld(clip, FeatureSet::IS09);
  for (int t = 0; t < e.cols; ++t) {
    CHECK(e.at(1, t) == 0.0);  // rms energy
    CHECK(e.at(2, t) == 0.0);  // f0
  }
}

TEST_CASE("extract_lld determinism and finiteness") {
  audio::AudioClip clip = testsupport::noise_clip(0.9, 700, 99);
  clip.samples[0] = 1.0;
  clip.samples[1] = -1.0;
  LLDMatrix a = extract_lld(clip, FeatureSet::IS10);
  LLDMatrix b = extract_lld(clip, FeatureSet::IS10);
  CHECK(a.values == b.values);
  for (double v : a.values) CHECK(std::isfinite(v));

  audio::AudioClip tone = testsupport::sine_clip(180.0, 1.0, 700);
  LLDMatrix c = extract_lld(tone, FeatureSet::IS10);
  for (double v : c.values) CHECK(std::isfinite(v));
}

TEST_CASE("extract_lld is stable under a one-hop shift") {
  // tone + noise, stationary; shifting by one hop only drops an edge frame
  audio::AudioClip clip = testsupport::sine_clip(150.0, 0.5, 5000);
  audio::AudioClip noise = testsupport::noise_clip(0.05, 5000, 123);
  for (size_t i = 0; i < clip.samples.size(); ++i) clip.samples[i] += noise.samples[i];

  audio::AudioClip shifted;
  shifted.sample_rate_hz = clip.sample_rate_hz;
  shifted.samples.assign(clip.samples.begin() + 160, clip.samples.end());

  LLDMatrix a = extract_lld(clip, FeatureSet::IS09);
  LLDMatrix b = extract_lld(shifted, FeatureSet::IS09);
  FunctionalVector fa = apply_functionals(a);
  FunctionalVector fb = apply_functionals(b);
  for (int f = 0; f < a.rows; ++f) {
    double ma = fa.values[static_cast<size_t>(f) * 12];      // mean functional
    double mb = fb.values[static_cast<size_t>(f) * 12];
    double sa = fa.values[static_cast<size_t>(f) * 12 + 1];  // stddev functional
    // near-zero means (delta rows) are measured against the row scale
    double denom = std::max({std::abs(ma), std::abs(mb), sa});
    if (denom < 1e-9) continue;
    CHECK(std::abs(ma - mb) / denom < 0.01);
  }
}

TEST_CASE("apply_functionals contract") {
  audio::AudioClip clip = testsupport::noise_clip(0.3, 1000, 5);
  FunctionalVector fv = apply_functionals(extract_lld(clip, FeatureSet::IS09));
  CHECK(fv.values.size() == 384);
  CHECK(fv.names.size() == 384);

  LLDMatrix manual;
  manual.rows = 2;
  manual.cols = 16;
  manual.row_names = {"const", "ramp"};
  manual.values.resize(32);
  for (int t = 0; t < 16; ++t) {
    manual.at(0, t) = 4.2;
    manual.at(1, t) = static_cast<double>(t);
  }
  FunctionalVector f = apply_functionals(manual);
  // const row: mean, stddev, skew, kurt, min, max, range, minpos, maxpos, slope, offset, qerr
  CHECK(f.values[0] == doctest::Approx(4.2));
  CHECK(f.values[1] == doctest::Approx(0.0));
  CHECK(f.values[2] == 0.0);
  CHECK(f.values[3] == 0.0);
  CHECK(f.values[6] == doctest::Approx(0.0));
  CHECK(f.values[9] == doctest::Approx(0.0));
  CHECK(f.values[11] == doctest::Approx(0.0));
  // ramp row
  CHECK(f.values[12 + 9] == doctest::Approx(1.0).epsilon(1e-12));   // slope
  CHECK(f.values[12 + 10] == doctest::Approx(0.0).epsilon(1e-12));  // offset
  CHECK(f.values[12 + 11] == doctest::Approx(0.0).epsilon(1e-12));  // qerr
  CHECK(f.values[12 + 4] == doctest::Approx(0.0));                  // min
  CHECK(f.values[12 + 5] == doctest::Approx(15.0));                 // max
  CHECK(f.values[12 + 7] == doctest::Approx(0.0));                  // minpos
  CHECK(f.values[12 + 8] == doctest::Approx(1.0));                  // maxpos
}

TEST_CASE("feature csv and binary round trips") {
  testsupport::TempDir dir("feat");
  audio::AudioClip clip = testsupport::noise_clip(0.4, 500, 31);
  LLDMatrix m = extract_lld(clip, FeatureSet::IS09);

  save_lld_csv(dir.path() / "f.csv", m, "utt42");
  std::string id;
  LLDMatrix back = load_lld_csv(dir.path() / "f.csv", &id);
  CHECK(id == "utt42");
  CHECK(back.rows == m.rows);
  CHECK(back.cols == m.cols);
  CHECK(back.set_id == m.set_id);
  double worst = 0.0;
  for (size_t i = 0; i < m.values.size(); ++i)
    worst = std::max(worst, std::abs(m.values[i] - back.values[i]));
  CHECK(worst < 1e-6);  // csv stores %.9g

  save_lld_binary(dir.path() / "f.bin", m);
  LLDMatrix bin = load_lld_binary(dir.path() / "f.bin");
  CHECK(bin.rows == m.rows);
  CHECK(bin.cols == m.cols);
  CHECK(bin.values == m.values);  // binary is bit-exact
}
