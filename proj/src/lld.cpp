#include "adscreen/lld.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "adscreen/csv.hpp"
#include "adscreen/dsp.hpp"
#include "adscreen/error.hpp"

namespace adscreen::lld {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLogFloor = 1e-10;
constexpr double kVoicingThreshold = 0.3;
constexpr double kPitchLoHz = 55.0;
constexpr double kPitchHiHz = 500.0;

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

int frame_len_samples(const FrameConfig& cfg, int rate) {
  return static_cast<int>(static_cast<int64_t>(cfg.frame_ms) * rate / 1000);
}
int hop_samples(const FrameConfig& cfg, int rate) {
  return static_cast<int>(static_cast<int64_t>(cfg.hop_ms) * rate / 1000);
}

// Raw (unwindowed) triangular-filterbank energies of the 26 mel bands.
std::vector<double> mel_energies(const std::vector<double>& frame, int rate) {
  size_t nfft = dsp::next_pow2(frame.size());
  std::vector<double> power = dsp::power_spectrum(frame, nfft);

  double mel_hi = hz_to_mel(rate / 2.0);
  std::vector<double> node(kMelFilters + 2);
  for (int i = 0; i < kMelFilters + 2; ++i)
    node[static_cast<size_t>(i)] = mel_to_hz(mel_hi * i / (kMelFilters + 1));

  std::vector<double> energy(kMelFilters, 0.0);
  double bin_hz = static_cast<double>(rate) / static_cast<double>(nfft);
  for (int m = 0; m < kMelFilters; ++m) {
    double lo = node[static_cast<size_t>(m)];
    double c = node[static_cast<size_t>(m) + 1];
    double hi = node[static_cast<size_t>(m) + 2];
    for (size_t k = 0; k < power.size(); ++k) {
      double f = bin_hz * static_cast<double>(k);
      double w = 0.0;
      if (f > lo && f < c)
        w = (f - lo) / (c - lo);
      else if (f >= c && f < hi)
        w = (hi - f) / (hi - c);
      energy[static_cast<size_t>(m)] += w * power[k];
    }
  }
  return energy;
}

std::vector<double> dct2_ortho(const std::vector<double>& x) {
  int n = static_cast<int>(x.size());
  std::vector<double> y(static_cast<size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += x[static_cast<size_t>(i)] * std::cos(kPi * k * (2.0 * i + 1.0) / (2.0 * n));
    double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    y[static_cast<size_t>(k)] = scale * acc;
  }
  return y;
}

// g(w) for a symmetric coefficient vector c[0..2m]:
// g(w) = c[m] + 2 * sum_k c[m-k] cos(k w)
double sym_poly_eval(const std::vector<double>& c, double w) {
  int m = (static_cast<int>(c.size()) - 1) / 2;
  double acc = c[static_cast<size_t>(m)];
  for (int k = 1; k <= m; ++k)
    acc += 2.0 * c[static_cast<size_t>(m - k)] * std::cos(k * w);
  return acc;
}

std::vector<double> sym_poly_roots(const std::vector<double>& c, int want) {
  constexpr double kGrid = 0.0005;
  std::vector<double> roots;
  double prev_w = kGrid;
  double prev_g = sym_poly_eval(c, prev_w);
  for (double w = 2 * kGrid; w < kPi; w += kGrid) {
    double g = sym_poly_eval(c, w);
    if ((prev_g <= 0.0 && g > 0.0) || (prev_g >= 0.0 && g < 0.0)) {
      double lo = prev_w, hi = w, glo = prev_g;
      for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        double gm = sym_poly_eval(c, mid);
        if ((glo <= 0.0 && gm <= 0.0) || (glo >= 0.0 && gm >= 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
      if (static_cast<int>(roots.size()) == want) break;
    }
    prev_w = w;
    prev_g = g;
  }
  return roots;
}

LspResult lsp_fallback(int order) {
  LspResult r;
  r.stable = false;
  for (int k = 1; k <= order; ++k)
    r.freqs[static_cast<size_t>(k - 1)] = kPi * k / (order + 1);
  return r;
}

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

struct PeakTrack {
  std::vector<int> pos;
  std::vector<double> amp;
};

// Positive-peak picking at roughly period t0 within [begin, end).
PeakTrack pick_peaks(const std::vector<double>& x, int begin, int end, double t0) {
  PeakTrack track;
  if (t0 < 2.0 || begin >= end) return track;
  int first_end = std::min(end, begin + static_cast<int>(std::ceil(t0)));
  int best = begin;
  for (int i = begin; i < first_end; ++i)
    if (x[static_cast<size_t>(i)] > x[static_cast<size_t>(best)]) best = i;
  track.pos.push_back(best);
  track.amp.push_back(x[static_cast<size_t>(best)]);
  while (true) {
    int lo = track.pos.back() + static_cast<int>(std::floor(0.7 * t0));
    int hi = track.pos.back() + static_cast<int>(std::ceil(1.3 * t0));
    if (hi >= end) break;
    int b = lo;
    for (int i = lo; i <= hi; ++i)
      if (x[static_cast<size_t>(i)] > x[static_cast<size_t>(b)]) b = i;
    track.pos.push_back(b);
    track.amp.push_back(x[static_cast<size_t>(b)]);
  }
  return track;
}

}  // namespace

const char* feature_set_name(FeatureSet s) { return s == FeatureSet::IS09 ? "IS09" : "IS10"; }

FeatureSet parse_feature_set(const std::string& s) {
  if (s == "IS09") return FeatureSet::IS09;
  if (s == "IS10") return FeatureSet::IS10;
  fail(Errc::BadConfig, "unknown feature set '" + s + "' (expected IS09 or IS10)");
}

const std::array<const char*, 12> kFunctionalNames = {
    "mean",   "stddev", "skewness", "kurtosis", "min",   "max",
    "range",  "minpos", "maxpos",   "slope",    "offset", "qerr"};

std::vector<std::vector<double>> frame_signal(const audio::AudioClip& clip,
                                              const FrameConfig& cfg) {
  if (cfg.hop_ms <= 0 || cfg.frame_ms < cfg.hop_ms)
    fail(Errc::InvalidConfig, "frame/hop configuration invalid");
  int rate = clip.sample_rate_hz;
  int flen = frame_len_samples(cfg, rate);
  int hop = hop_samples(cfg, rate);
  int64_t n = static_cast<int64_t>(clip.samples.size());
  if (n < flen) fail(Errc::ClipTooShort, "clip shorter than one frame");
  int count = static_cast<int>((n - flen) / hop) + 1;

  std::vector<double> window = cfg.window == FrameConfig::Window::Hamming
                                   ? dsp::hamming(flen)
                                   : dsp::hann(flen);
  std::vector<std::vector<double>> frames(static_cast<size_t>(count));
  for (int t = 0; t < count; ++t) {
    const double* src = clip.samples.data() + static_cast<int64_t>(t) * hop;
    std::vector<double> f(src, src + flen);
    if (cfg.preemphasis > 0.0) {
      for (int i = flen - 1; i > 0; --i) f[static_cast<size_t>(i)] -= cfg.preemphasis * f[static_cast<size_t>(i - 1)];
      f[0] *= 1.0 - cfg.preemphasis;
    }
    for (int i = 0; i < flen; ++i) f[static_cast<size_t>(i)] *= window[static_cast<size_t>(i)];
    frames[static_cast<size_t>(t)] = std::move(f);
  }
  return frames;
}

PitchResult f0_and_voicing(const std::vector<double>& frame, int rate) {
  PitchResult res;
  int n = static_cast<int>(frame.size());
  int lag_lo = static_cast<int>(std::ceil(rate / kPitchHiHz));
  int lag_hi = static_cast<int>(std::floor(rate / kPitchLoHz));
  lag_hi = std::min(lag_hi, n - 2);
  if (lag_lo < 2 || lag_hi <= lag_lo) return res;

  // prefix sums of squares for the NCCF denominators
  std::vector<double> sq(static_cast<size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i)
    sq[static_cast<size_t>(i) + 1] = sq[static_cast<size_t>(i)] + frame[static_cast<size_t>(i)] * frame[static_cast<size_t>(i)];
  if (sq[static_cast<size_t>(n)] <= 0.0) return res;

  std::vector<double> nccf(static_cast<size_t>(lag_hi) + 1, 0.0);
  double best = -2.0;
  int best_lag = 0;
  for (int lag = lag_lo; lag <= lag_hi; ++lag) {
    int m = n - lag;
    double num = 0.0;
    const double* a = frame.data();
    const double* b = frame.data() + lag;
    for (int i = 0; i < m; ++i) num += a[i] * b[i];
    double e0 = sq[static_cast<size_t>(m)];
    double e1 = sq[static_cast<size_t>(n)] - sq[static_cast<size_t>(lag)];
    double den = std::sqrt(e0 * e1);
    double v = den > 0.0 ? num / den : 0.0;
    nccf[static_cast<size_t>(lag)] = v;
    if (v > best) {
      best = v;
      best_lag = lag;
    }
  }

  res.raw_peak = best;
  res.voicing = std::clamp(best, 0.0, 1.0);
  if (best < kVoicingThreshold) return res;

  double lag = best_lag;
  if (best_lag > lag_lo && best_lag < lag_hi) {
    double y0 = nccf[static_cast<size_t>(best_lag) - 1];
    double y1 = nccf[static_cast<size_t>(best_lag)];
    double y2 = nccf[static_cast<size_t>(best_lag) + 1];
    double denom = y0 - 2.0 * y1 + y2;
    if (std::abs(denom) > 1e-12) {
      double shift = 0.5 * (y0 - y2) / denom;
      if (std::abs(shift) <= 1.0) lag += shift;
    }
  }
  res.f0_hz = rate / lag;
  return res;
}

std::vector<double> mel_log_energies(const std::vector<double>& frame, int rate) {
  std::vector<double> e = mel_energies(frame, rate);
  for (double& v : e) v = std::log(std::max(v, kLogFloor));
  return e;
}

std::vector<double> mfcc(const std::vector<double>& frame, int rate, int n_low, int n_high) {
  std::vector<double> loge = mel_log_energies(frame, rate);
  std::vector<double> coeffs = dct2_ortho(loge);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n_high - n_low + 1));
  for (int k = n_low; k <= n_high; ++k) out.push_back(coeffs[static_cast<size_t>(k)]);
  return out;
}

LspResult lsp_frequencies(const std::vector<double>& frame, int order) {
  int n = static_cast<int>(frame.size());
  if (n <= order) return lsp_fallback(order);

  std::vector<double> r(static_cast<size_t>(order) + 1, 0.0);
  for (int k = 0; k <= order; ++k) {
    double acc = 0.0;
    for (int i = 0; i + k < n; ++i) acc += frame[static_cast<size_t>(i)] * frame[static_cast<size_t>(i + k)];
    r[static_cast<size_t>(k)] = acc;
  }
  if (r[0] < 1e-12) return lsp_fallback(order);

  // Levinson-Durbin; a[0] = 1
  std::vector<double> a(static_cast<size_t>(order) + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  for (int i = 1; i <= order; ++i) {
    double acc = r[static_cast<size_t>(i)];
    for (int j = 1; j < i; ++j) acc += a[static_cast<size_t>(j)] * r[static_cast<size_t>(i - j)];
    double k = -acc / err;
    if (!std::isfinite(k)) return lsp_fallback(order);
    std::vector<double> na(a);
    na[static_cast<size_t>(i)] = k;
    for (int j = 1; j < i; ++j) na[static_cast<size_t>(j)] = a[static_cast<size_t>(j)] + k * a[static_cast<size_t>(i - j)];
    a = std::move(na);
    err *= 1.0 - k * k;
    if (err <= 0.0 || !std::isfinite(err)) return lsp_fallback(order);
  }

  // P(z) = A(z) + z^-(p+1) A(1/z), Q(z) = A(z) - z^-(p+1) A(1/z)
  int p = order;
  std::vector<double> P(static_cast<size_t>(p) + 2), Q(static_cast<size_t>(p) + 2);
  for (int i = 0; i <= p + 1; ++i) {
    double ai = i <= p ? a[static_cast<size_t>(i)] : 0.0;
    double ar = (p + 1 - i) <= p ? a[static_cast<size_t>(p + 1 - i)] : 0.0;
    P[static_cast<size_t>(i)] = ai + ar;
    Q[static_cast<size_t>(i)] = ai - ar;
  }
  // deflate the trivial roots: P by (1 + z^-1), Q by (1 - z^-1)
  std::vector<double> Pd(static_cast<size_t>(p) + 1), Qd(static_cast<size_t>(p) + 1);
  Pd[0] = P[0];
  Qd[0] = Q[0];
  for (int i = 1; i <= p; ++i) {
    Pd[static_cast<size_t>(i)] = P[static_cast<size_t>(i)] - Pd[static_cast<size_t>(i - 1)];
    Qd[static_cast<size_t>(i)] = Q[static_cast<size_t>(i)] + Qd[static_cast<size_t>(i - 1)];
  }

  std::vector<double> rp = sym_poly_roots(Pd, p / 2);
  std::vector<double> rq = sym_poly_roots(Qd, p / 2);
  if (static_cast<int>(rp.size()) != p / 2 || static_cast<int>(rq.size()) != p / 2)
    return lsp_fallback(order);

  LspResult res;
  std::vector<double> all;
  all.insert(all.end(), rp.begin(), rp.end());
  all.insert(all.end(), rq.begin(), rq.end());
  std::sort(all.begin(), all.end());
  for (int i = 0; i < order; ++i) res.freqs[static_cast<size_t>(i)] = all[static_cast<size_t>(i)];
  return res;
}

std::vector<JitterShimmer> jitter_shimmer(const audio::AudioClip& clip,
                                          const std::vector<double>& f0_track,
                                          const FrameConfig& cfg) {
  int rate = clip.sample_rate_hz;
  int flen = frame_len_samples(cfg, rate);
  int hop = hop_samples(cfg, rate);
  int64_t n = static_cast<int64_t>(clip.samples.size());

  std::vector<JitterShimmer> out(f0_track.size());
  for (size_t t = 0; t < f0_track.size(); ++t) {
    double f0 = f0_track[t];
    if (f0 <= 0.0) continue;
    int begin = static_cast<int>(static_cast<int64_t>(t) * hop);
    int end = static_cast<int>(std::min<int64_t>(begin + flen, n));
    double t0 = rate / f0;
    PeakTrack track = pick_peaks(clip.samples, begin, end, t0);
    size_t peaks = track.pos.size();
    if (peaks < 3) continue;  // need at least two periods

    std::vector<double> period(peaks - 1);
    for (size_t i = 0; i + 1 < peaks; ++i)
      period[i] = static_cast<double>(track.pos[i + 1] - track.pos[i]);
    double mean_p = 0.0;
    for (double v : period) mean_p += v;
    mean_p /= static_cast<double>(period.size());

    if (period.size() >= 2 && mean_p > 0.0) {
      double acc = 0.0;
      for (size_t i = 1; i < period.size(); ++i) acc += std::abs(period[i] - period[i - 1]);
      out[t].jitter_local = acc / static_cast<double>(period.size() - 1) / mean_p;
    }
    if (period.size() >= 3 && mean_p > 0.0) {
      double acc = 0.0;
      for (size_t i = 1; i + 1 < period.size(); ++i)
        acc += std::abs((period[i + 1] - period[i]) - (period[i] - period[i - 1]));
      out[t].jitter_ddp = acc / static_cast<double>(period.size() - 2) / mean_p;
    }

    double mean_a = 0.0;
    for (double v : track.amp) mean_a += std::abs(v);
    mean_a /= static_cast<double>(peaks);
    if (mean_a > 0.0) {
      double acc = 0.0;
      for (size_t i = 1; i < peaks; ++i) acc += std::abs(track.amp[i] - track.amp[i - 1]);
      out[t].shimmer_local = acc / static_cast<double>(peaks - 1) / mean_a;
    }
  }
  return out;
}

std::vector<double> delta(const std::vector<double>& row, int width) {
  int t_end = static_cast<int>(row.size());
  std::vector<double> out(row.size(), 0.0);
  if (t_end == 0) return out;
  double denom = 0.0;
  for (int k = 1; k <= width; ++k) denom += 2.0 * k * k;
  auto at = [&](int t) {
    return row[static_cast<size_t>(std::clamp(t, 0, t_end - 1))];
  };
  for (int t = 0; t < t_end; ++t) {
    double acc = 0.0;
    for (int k = 1; k <= width; ++k) acc += k * (at(t + k) - at(t - k));
    out[static_cast<size_t>(t)] = acc / denom;
  }
  return out;
}

LLDMatrix extract_lld(const audio::AudioClip& clip, FeatureSet set, const FrameConfig& cfg) {
  int rate = clip.sample_rate_hz;
  int flen = frame_len_samples(cfg, rate);
  int hop = hop_samples(cfg, rate);
  std::vector<std::vector<double>> frames = frame_signal(clip, cfg);  // throws ClipTooShort
  int t_count = static_cast<int>(frames.size());

  std::vector<std::string> base_names;
  if (set == FeatureSet::IS09) {
    base_names = {"zcr", "rms_energy", "f0", "hnr"};
    for (int k = 1; k <= 12; ++k) base_names.push_back("mfcc" + std::to_string(k));
  } else {
    base_names = {"loudness"};
    for (int k = 0; k <= 14; ++k) base_names.push_back("mfcc" + std::to_string(k));
    for (int k = 0; k <= 7; ++k) base_names.push_back("logmel" + std::to_string(k));
    for (int k = 0; k <= 7; ++k) base_names.push_back("lsp" + std::to_string(k));
    base_names.push_back("f0");
    base_names.push_back("f0_env");
    base_names.push_back("voicing_prob");
    base_names.push_back("jitter_local");
    base_names.push_back("jitter_ddp");
    base_names.push_back("shimmer_local");
  }
  int base_rows = static_cast<int>(base_names.size());

  LLDMatrix m;
  m.set_id = set;
  m.rows = base_rows * 2;
  m.cols = t_count;
  m.values.assign(static_cast<size_t>(m.rows) * t_count, 0.0);
  m.row_names = base_names;
  for (const auto& name : base_names) m.row_names.push_back(name + "_de");
  m.frame_times_ms.resize(static_cast<size_t>(t_count));
  for (int t = 0; t < t_count; ++t)
    m.frame_times_ms[static_cast<size_t>(t)] =
        1000.0 * (static_cast<double>(t) * hop + flen / 2.0) / rate;

  std::vector<double> f0_row(static_cast<size_t>(t_count), 0.0);
  std::vector<double> voicing_row(static_cast<size_t>(t_count), 0.0);
  std::vector<double> hnr_row(static_cast<size_t>(t_count), 0.0);

#pragma omp parallel for schedule(static)
  for (int t = 0; t < t_count; ++t) {
    const std::vector<double>& frame = frames[static_cast<size_t>(t)];
    // pitch runs on the raw slice: tapered windows skew the NCCF peak
    const double* raw_begin = clip.samples.data() + static_cast<int64_t>(t) * hop;
    std::vector<double> raw_frame(raw_begin, raw_begin + flen);
    PitchResult pitch = f0_and_voicing(raw_frame, rate);
    f0_row[static_cast<size_t>(t)] = pitch.f0_hz;
    voicing_row[static_cast<size_t>(t)] = pitch.voicing;
    double r = pitch.raw_peak;
    double hnr;
    if (r <= 0.0)
      hnr = -100.0;
    else if (r >= 1.0)
      hnr = 100.0;
    else
      hnr = std::clamp(10.0 * std::log10(r / (1.0 - r)), -100.0, 100.0);
    hnr_row[static_cast<size_t>(t)] = hnr;

    const double* raw = clip.samples.data() + static_cast<int64_t>(t) * hop;
    if (set == FeatureSet::IS09) {
      int crossings = 0;
      for (int i = 1; i < flen; ++i)
        if ((raw[i - 1] >= 0.0) != (raw[i] >= 0.0)) ++crossings;
      m.at(0, t) = static_cast<double>(crossings) / (flen - 1);
      double acc = 0.0;
      for (int i = 0; i < flen; ++i) acc += raw[i] * raw[i];
      m.at(1, t) = std::sqrt(acc / flen);
      std::vector<double> loge = mel_log_energies(frame, rate);
      std::vector<double> coeffs = dct2_ortho(loge);
      for (int k = 1; k <= 12; ++k) m.at(3 + k, t) = coeffs[static_cast<size_t>(k)];
    } else {
      std::vector<double> energies = mel_energies(frame, rate);
      double total = 0.0;
      for (double e : energies) total += e;
      m.at(0, t) = std::log(std::max(total, kLogFloor));
      std::vector<double> loge(energies);
      for (double& v : loge) v = std::log(std::max(v, kLogFloor));
      std::vector<double> coeffs = dct2_ortho(loge);
      for (int k = 0; k <= 14; ++k) m.at(1 + k, t) = coeffs[static_cast<size_t>(k)];
      for (int k = 0; k <= 7; ++k) m.at(16 + k, t) = loge[static_cast<size_t>(k)];
      LspResult lsp = lsp_frequencies(frame, 8);
      for (int k = 0; k <= 7; ++k) m.at(24 + k, t) = lsp.freqs[static_cast<size_t>(k)];
    }
  }

  if (set == FeatureSet::IS09) {
    for (int t = 0; t < t_count; ++t) {
      m.at(2, t) = f0_row[static_cast<size_t>(t)];
      m.at(3, t) = hnr_row[static_cast<size_t>(t)];
    }
  } else {
    std::vector<JitterShimmer> js = jitter_shimmer(clip, f0_row, cfg);
    for (int t = 0; t < t_count; ++t) {
      size_t ti = static_cast<size_t>(t);
      m.at(32, t) = f0_row[ti];
      double a = f0_row[static_cast<size_t>(std::max(t - 1, 0))];
      double b = f0_row[ti];
      double c = f0_row[static_cast<size_t>(std::min(t + 1, t_count - 1))];
      m.at(33, t) = median3(a, b, c);
      m.at(34, t) = voicing_row[ti];
      m.at(35, t) = js[ti].jitter_local;
      m.at(36, t) = js[ti].jitter_ddp;
      m.at(37, t) = js[ti].shimmer_local;
    }
  }

  for (int f = 0; f < base_rows; ++f) {
    std::vector<double> row(m.row(f), m.row(f) + t_count);
    std::vector<double> d = delta(row);
    for (int t = 0; t < t_count; ++t) m.at(base_rows + f, t) = d[static_cast<size_t>(t)];
  }
  return m;
}

FunctionalVector apply_functionals(const LLDMatrix& lld) {
  FunctionalVector out;
  int t_count = lld.cols;
  if (t_count < 1) fail(Errc::EmptyInput, "functionals of an empty matrix");
  out.values.reserve(static_cast<size_t>(lld.rows) * 12);
  out.names.reserve(static_cast<size_t>(lld.rows) * 12);

  double nd = static_cast<double>(t_count);
  for (int f = 0; f < lld.rows; ++f) {
    const double* row = lld.row(f);
    double mean = 0.0;
    for (int t = 0; t < t_count; ++t) mean += row[t];
    mean /= nd;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (int t = 0; t < t_count; ++t) {
      double d = row[t] - mean;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;
    double stddev = std::sqrt(m2);
    double skew = m2 > 1e-24 ? m3 / (stddev * stddev * stddev) : 0.0;
    double kurt = m2 > 1e-24 ? m4 / (m2 * m2) - 3.0 : 0.0;

    int imin = 0, imax = 0;
    for (int t = 1; t < t_count; ++t) {
      if (row[t] < row[imin]) imin = t;
      if (row[t] > row[imax]) imax = t;
    }
    double minpos = t_count > 1 ? static_cast<double>(imin) / (t_count - 1) : 0.0;
    double maxpos = t_count > 1 ? static_cast<double>(imax) / (t_count - 1) : 0.0;

    // least squares of row over t = 0..T-1
    double slope = 0.0, offset = mean, qerr = 0.0;
    if (t_count > 1) {
      double tbar = (nd - 1.0) / 2.0;
      double sxx = 0.0, sxy = 0.0;
      for (int t = 0; t < t_count; ++t) {
        double dt = t - tbar;
        sxx += dt * dt;
        sxy += dt * (row[t] - mean);
      }
      slope = sxy / sxx;
      offset = mean - slope * tbar;
      for (int t = 0; t < t_count; ++t) {
        double e = row[t] - (offset + slope * t);
        qerr += e * e;
      }
      qerr /= nd;
    }

    const double vals[12] = {mean,         stddev,       skew,  kurt,
                             row[imin],    row[imax],    row[imax] - row[imin],
                             minpos,       maxpos,       slope, offset, qerr};
    for (int i = 0; i < 12; ++i) {
      out.values.push_back(vals[i]);
      out.names.push_back(lld.row_names[static_cast<size_t>(f)] + "_" + kFunctionalNames[static_cast<size_t>(i)]);
    }
  }
  return out;
}

void save_lld_csv(const std::filesystem::path& path, const LLDMatrix& m,
                  const std::string& utterance_id) {
  std::string s = "#set=" + std::string(feature_set_name(m.set_id)) +
                  ";frames=" + std::to_string(m.cols) + ";utterance=" + utterance_id + "\n";
  for (int f = 0; f < m.rows; ++f) {
    s += m.row_names[static_cast<size_t>(f)];
    if (f + 1 < m.rows) s += ',';
  }
  s += '\n';
  for (int f = 0; f < m.rows; ++f) {
    for (int t = 0; t < m.cols; ++t) {
      s += csv::fmt(m.at(f, t));
      if (t + 1 < m.cols) s += ',';
    }
    s += '\n';
  }
  csv::write_text(path, s);
}

LLDMatrix load_lld_csv(const std::filesystem::path& path, std::string* utterance_id) {
  auto lines = csv::read_lines(path);
  if (lines.size() < 2 || lines[0].rfind("#set=", 0) != 0)
    fail(Errc::BadConfig, "bad feature csv: " + path.string());
  auto meta = csv::split(lines[0].substr(1), ';');
  LLDMatrix m;
  for (const auto& kv : meta) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "#set" || key == "set") m.set_id = parse_feature_set(val);
    if (key == "frames") m.cols = static_cast<int>(csv::to_int(val));
    if (key == "utterance" && utterance_id) *utterance_id = val;
  }
  auto names = csv::split(lines[1]);
  m.row_names.assign(names.begin(), names.end());
  m.rows = static_cast<int>(names.size());
  m.values.assign(static_cast<size_t>(m.rows) * m.cols, 0.0);
  if (lines.size() < 2 + static_cast<size_t>(m.rows))
    fail(Errc::BadConfig, "feature csv truncated: " + path.string());
  for (int f = 0; f < m.rows; ++f) {
    auto vals = csv::split(lines[2 + static_cast<size_t>(f)]);
    if (static_cast<int>(vals.size()) != m.cols)
      fail(Errc::BadConfig, "feature csv row width mismatch: " + path.string());
    for (int t = 0; t < m.cols; ++t) m.at(f, t) = csv::to_double(vals[static_cast<size_t>(t)]);
  }
  m.frame_times_ms.resize(static_cast<size_t>(m.cols), 0.0);
  return m;
}

namespace {
constexpr char kBinMagic[8] = {'L', 'L', 'D', 'M', 'A', 'T', '0', '1'};
}

void save_lld_binary(const std::filesystem::path& path, const LLDMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write: " + path.string());
  out.write(kBinMagic, 8);
  uint64_t f = static_cast<uint64_t>(m.rows), t = static_cast<uint64_t>(m.cols);
  uint32_t set = static_cast<uint32_t>(m.set_id), reserved = 0;
  out.write(reinterpret_cast<const char*>(&f), 8);
  out.write(reinterpret_cast<const char*>(&t), 8);
  out.write(reinterpret_cast<const char*>(&set), 4);
  out.write(reinterpret_cast<const char*>(&reserved), 4);
  out.write(reinterpret_cast<const char*>(m.values.data()),
            static_cast<std::streamsize>(m.values.size() * sizeof(double)));
}

LLDMatrix load_lld_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kBinMagic, 8) != 0)
    fail(Errc::BadConfig, "bad feature binary magic: " + path.string());
  uint64_t f = 0, t = 0;
  uint32_t set = 0, reserved = 0;
  in.read(reinterpret_cast<char*>(&f), 8);
  in.read(reinterpret_cast<char*>(&t), 8);
  in.read(reinterpret_cast<char*>(&set), 4);
  in.read(reinterpret_cast<char*>(&reserved), 4);
  LLDMatrix m;
  m.rows = static_cast<int>(f);
  m.cols = static_cast<int>(t);
  m.set_id = static_cast<FeatureSet>(set);
  m.values.resize(f * t);
  in.read(reinterpret_cast<char*>(m.values.data()),
          static_cast<std::streamsize>(m.values.size() * sizeof(double)));
  if (!in) fail(Errc::BadConfig, "feature binary truncated: " + path.string());
  m.row_names.resize(f);
  m.frame_times_ms.resize(t, 0.0);
  return m;
}

}  // namespace adscreen::lld
