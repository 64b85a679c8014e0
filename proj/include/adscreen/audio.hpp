#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace adscreen::audio {

struct AudioClip {
  std::vector<double> samples;  // mono, clamped to [-1, 1]
  int sample_rate_hz = 16000;

  size_t size() const { return samples.size(); }
  double duration_ms() const {
    return 1000.0 * static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

struct UtteranceSegment {
  std::string utterance_id;
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  std::string speaker;
};

enum class Label { Control = 0, AD = 1 };

const char* label_name(Label l);
Label parse_label(const std::string& s);

struct SessionManifest {
  std::string session_id;
  std::string subject_id;
  Label label = Label::Control;
  std::filesystem::path wav_path;
  std::vector<UtteranceSegment> segments;
};

// RIFF/WAVE reader: PCM 8/16/32-bit int and 32-bit float, any channel
// count (downmixed by channel mean). Rejects compressed codecs.
AudioClip read_wav(const std::filesystem::path& path);

// PCM16 little-endian mono writer; samples are clamped to [-1, 1].
void write_wav_pcm16(const std::filesystem::path& path, const AudioClip& clip);

// 20*log10(rms). Throws SilentSignal on an all-zero clip.
double dbfs(const AudioClip& clip);

// Applies the gain that moves the clip to target_dbfs, then clamps to [-1, 1].
AudioClip normalize_to(const AudioClip& clip, double target_dbfs);

// Cuts [start-context, end+context] per segment (clipped to file bounds)
// and applies linear fade-in/out over fade_ms at the extended edges.
std::vector<AudioClip> segment_utterances(const AudioClip& clip,
                                          const std::vector<UtteranceSegment>& segments,
                                          int context_ms = 10, int fade_ms = 15);

// Consecutive non-overlapping windows of length_ms; the last window is
// zero-padded. Utterance boundaries are ignored on purpose.
std::vector<AudioClip> segment_fixed(const AudioClip& clip, int length_ms);

// Minimal CHAT subset: participant-tier lines "*SPK: ... \x15start_end\x15".
// Lines without a time bullet are skipped; a present but broken bullet
// throws MalformedBullet.
std::vector<UtteranceSegment> parse_chat_timing(const std::string& text);

// Manifest CSV: header session_id,subject_id,label,wav_path,segments_path.
// Relative paths resolve against the manifest's directory.
std::vector<SessionManifest> load_manifest(const std::filesystem::path& manifest_csv);

void save_segments_csv(const std::filesystem::path& path,
                       const std::vector<UtteranceSegment>& segments);
std::vector<UtteranceSegment> load_segments_csv(const std::filesystem::path& path);

}  // namespace adscreen::audio
