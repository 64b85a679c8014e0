#include "adscreen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "adscreen/config.hpp"
#include "adscreen/csv.hpp"
#include "adscreen/error.hpp"
#include "adscreen/rng.hpp"

namespace adscreen::synth {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

struct VoiceParams {
  double base_f0;        // Hz
  double f0_sd;          // stationary std of the f0 walk
  double pause_scale;    // multiplies pause durations
  double shimmer_depth;  // per-period amplitude perturbation half-range
  double syllable_hz;    // amplitude-modulation rate inside bursts
};

VoiceParams draw_params(Rng& rng, int cls, double delta) {
  VoiceParams p;
  p.base_f0 = rng.uniform(120.0, 210.0);
  double shrink = cls == 1 ? 1.0 - 0.5 * delta : 1.0;
  p.f0_sd = 15.0 * shrink;
  p.pause_scale = cls == 1 ? 1.0 + 2.0 * delta : 1.0;
  p.shimmer_depth = 0.05 * (cls == 1 ? 1.0 + delta : 1.0);
  p.syllable_hz = 4.0 * (cls == 1 ? 1.0 - 0.3 * delta : 1.0);
  return p;
}

audio::AudioClip synth_utterance(Rng& rng, const VoiceParams& p, int duration_ms, int rate) {
  int total = duration_ms * rate / 1000;
  audio::AudioClip clip;
  clip.sample_rate_hz = rate;
  clip.samples.assign(static_cast<size_t>(total), 0.0);

  // f0 walk sampled every 10 ms, mean-reverting around base_f0
  int step = rate / 100;
  int n_steps = total / step + 2;
  std::vector<double> f0(static_cast<size_t>(n_steps));
  double rho = 0.9;
  double innovation = p.f0_sd * std::sqrt(1.0 - rho * rho);
  f0[0] = p.base_f0 + p.f0_sd * rng.normal();
  for (int i = 1; i < n_steps; ++i)
    f0[static_cast<size_t>(i)] =
        p.base_f0 + rho * (f0[static_cast<size_t>(i) - 1] - p.base_f0) + innovation * rng.normal();

  // burst/pause schedule
  std::vector<std::pair<int, int>> bursts;  // [start, end) samples
  int pos = 0;
  while (pos < total) {
    int burst = static_cast<int>(rng.uniform(250.0, 500.0)) * rate / 1000;
    bursts.emplace_back(pos, std::min(total, pos + burst));
    pos += burst;
    int pause = static_cast<int>(rng.uniform(50.0, 120.0) * p.pause_scale) * rate / 1000;
    pos += pause;
  }

  double phase = 0.0;
  double period_amp = 1.0 + rng.uniform(-p.shimmer_depth, p.shimmer_depth);
  double am_phase = rng.uniform(0.0, kTwoPi);
  for (auto [start, stop] : bursts) {
    for (int i = start; i < stop; ++i) {
      double f = f0[static_cast<size_t>(i / step)];
      phase += kTwoPi * f / rate;
      if (phase >= kTwoPi) {
        phase -= kTwoPi;
        period_amp = 1.0 + rng.uniform(-p.shimmer_depth, p.shimmer_depth);
      }
      double harm = std::sin(phase) + 0.5 * std::sin(2.0 * phase) +
                    0.25 * std::sin(3.0 * phase) + 0.125 * std::sin(4.0 * phase);
      double env = 0.55 + 0.45 * std::sin(kTwoPi * p.syllable_hz * i / rate + am_phase);
      clip.samples[static_cast<size_t>(i)] = period_amp * env * harm;
    }
  }

  for (int i = 0; i < total; ++i)
    clip.samples[static_cast<size_t>(i)] += 0.002 * rng.uniform(-1.0, 1.0);

  // scale to a moderate peak, well under full scale
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::abs(s));
  double target = rng.uniform(0.25, 0.5);
  if (peak > 0.0) {
    double g = target / peak;
    for (double& s : clip.samples) s = std::clamp(s * g, -0.9, 0.9);
  }

  // short linear edge fades against clicks
  int fade = std::min(total / 4, rate / 100);
  for (int i = 0; i < fade; ++i) {
    double g = static_cast<double>(i) / fade;
    clip.samples[static_cast<size_t>(i)] *= g;
    clip.samples[static_cast<size_t>(total - 1 - i)] *= g;
  }
  return clip;
}

}  // namespace

CohortSpec load_cohort_spec(const std::filesystem::path& ini_path) {
  config::IniFile ini = config::IniFile::parse_file(ini_path);
  CohortSpec spec;
  spec.subjects_per_class =
      static_cast<int>(ini.get_int("cohort", "subjects_per_class", spec.subjects_per_class));
  spec.utterances_min =
      static_cast<int>(ini.get_int("cohort", "utterances_min", spec.utterances_min));
  spec.utterances_max =
      static_cast<int>(ini.get_int("cohort", "utterances_max", spec.utterances_max));
  spec.utterance_ms_min =
      static_cast<int>(ini.get_int("cohort", "utterance_ms_min", spec.utterance_ms_min));
  spec.utterance_ms_max =
      static_cast<int>(ini.get_int("cohort", "utterance_ms_max", spec.utterance_ms_max));
  spec.effect_size = ini.get_double("cohort", "effect_size", spec.effect_size);
  spec.seed = static_cast<uint64_t>(ini.get_int("cohort", "seed", static_cast<int64_t>(spec.seed)));
  spec.sample_rate_hz =
      static_cast<int>(ini.get_int("cohort", "sample_rate_hz", spec.sample_rate_hz));
  return spec;
}

CohortOutput generate_cohort(const CohortSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.subjects_per_class < 1 || spec.utterances_min < 1 ||
      spec.utterances_max < spec.utterances_min ||
      spec.utterance_ms_min < 200 || spec.utterance_ms_max < spec.utterance_ms_min ||
      spec.effect_size < 0.0 || spec.effect_size > 1.0 || spec.sample_rate_hz < 8000)
    fail(Errc::InvalidSpec, "invalid cohort spec");

  std::filesystem::create_directories(out_dir);
  std::string manifest = "session_id,subject_id,label,wav_path,segments_path\n";
  CohortOutput result;

  int rate = spec.sample_rate_hz;
  int gap_ms = 200;
  for (int cls = 0; cls < 2; ++cls) {
    for (int si = 0; si < spec.subjects_per_class; ++si) {
      Rng rng(mix_seed(mix_seed(spec.seed, static_cast<uint64_t>(cls) + 1),
                       static_cast<uint64_t>(si)));
      VoiceParams params = draw_params(rng, cls, spec.effect_size);

      char subject[16];
      std::snprintf(subject, sizeof(subject), "%c%03d", cls == 1 ? 'a' : 'c', si);
      std::string session = std::string(subject) + "_s0";

      int n_utt = rng.uniform_int(spec.utterances_min, spec.utterances_max);
      audio::AudioClip session_clip;
      session_clip.sample_rate_hz = rate;
      std::vector<audio::UtteranceSegment> segments;
      int64_t cursor_ms = gap_ms;
      for (int u = 0; u < n_utt; ++u) {
        int dur_ms = rng.uniform_int(spec.utterance_ms_min, spec.utterance_ms_max);
        audio::AudioClip utt = synth_utterance(rng, params, dur_ms, rate);
        session_clip.samples.resize(static_cast<size_t>((cursor_ms + dur_ms + gap_ms) * rate / 1000),
                                    0.0);
        std::copy(utt.samples.begin(), utt.samples.end(),
                  session_clip.samples.begin() + cursor_ms * rate / 1000);
        audio::UtteranceSegment seg;
        char uid[32];
        std::snprintf(uid, sizeof(uid), "%s_u%02d", subject, u);
        seg.utterance_id = uid;
        seg.start_ms = cursor_ms;
        seg.end_ms = cursor_ms + dur_ms;
        seg.speaker = "PAR";
        segments.push_back(std::move(seg));
        cursor_ms += dur_ms + gap_ms;
        ++result.utterances;
      }

      std::string wav_name = session + ".wav";
      std::string seg_name = session + ".segments.csv";
      audio::write_wav_pcm16(out_dir / wav_name, session_clip);
      audio::save_segments_csv(out_dir / seg_name, segments);
      manifest += session + "," + subject + "," +
                  (cls == 1 ? "AD" : "control") + "," + wav_name + "," + seg_name + "\n";
      ++result.sessions;
    }
  }

  result.manifest_csv = out_dir / "manifest.csv";
  csv::write_text(result.manifest_csv, manifest);
  return result;
}

}  // namespace adscreen::synth
