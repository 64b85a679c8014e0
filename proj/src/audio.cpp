#include "adscreen/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "adscreen/csv.hpp"
#include "adscreen/error.hpp"

namespace adscreen::audio {

namespace {

uint32_t rd_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t rd_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::string& s, uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void wr_u16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

int64_t ms_to_samples(int64_t ms, int rate) {
  return static_cast<int64_t>(
      std::floor(static_cast<double>(ms) * rate / 1000.0));
}

}  // namespace

const char* label_name(Label l) { return l == Label::AD ? "AD" : "control"; }

Label parse_label(const std::string& s) {
  if (s == "AD") return Label::AD;
  if (s == "control") return Label::Control;
  fail(Errc::BadConfig, "unknown label '" + s + "' (expected AD or control)");
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open wav: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail(Errc::CorruptHeader, "not a RIFF/WAVE file: " + path.string());

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  size_t data_len = 0;

  size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const unsigned char* ch = bytes.data() + off;
    uint32_t chunk_len = rd_u32(ch + 4);
    size_t body = off + 8;
    if (body + chunk_len > bytes.size()) {
      // tolerate a truncated final data chunk length only for "data"
      if (std::memcmp(ch, "data", 4) == 0) chunk_len = static_cast<uint32_t>(bytes.size() - body);
      else fail(Errc::CorruptHeader, "chunk overruns file: " + path.string());
    }
    if (std::memcmp(ch, "fmt ", 4) == 0) {
      if (chunk_len < 16) fail(Errc::CorruptHeader, "fmt chunk too short");
      format = rd_u16(ch + 8);
      channels = rd_u16(ch + 10);
      rate = rd_u32(ch + 12);
      bits = rd_u16(ch + 22);
      if (format == 0xfffe) {
        // WAVE_FORMAT_EXTENSIBLE: actual format is the first word of the GUID
        if (chunk_len < 40) fail(Errc::CorruptHeader, "extensible fmt chunk too short");
        format = rd_u16(ch + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(ch, "data", 4) == 0) {
      data = ch + 8;
      data_len = chunk_len;
    }
    off = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt) fail(Errc::CorruptHeader, "missing fmt chunk: " + path.string());
  if (channels == 0) fail(Errc::CorruptHeader, "zero channels");
  if (format != 1 && format != 3)
    fail(Errc::UnsupportedFormat, "compressed or unknown codec (fmt tag " +
                                      std::to_string(format) + ")");
  if (format == 1 && bits != 8 && bits != 16 && bits != 32)
    fail(Errc::UnsupportedFormat, "PCM bit depth " + std::to_string(bits));
  if (format == 3 && bits != 32)
    fail(Errc::UnsupportedFormat, "float bit depth " + std::to_string(bits));
  if (rate < 8000) fail(Errc::UnsupportedFormat, "sample rate below 8 kHz");
  if (data == nullptr || data_len == 0) fail(Errc::EmptyAudio, "no data chunk: " + path.string());

  size_t bytes_per_sample = bits / 8;
  size_t frame_bytes = bytes_per_sample * channels;
  size_t n_frames = data_len / frame_bytes;
  if (n_frames == 0) fail(Errc::EmptyAudio, "empty data chunk: " + path.string());

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  clip.samples.resize(n_frames);
  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (unsigned c = 0; c < channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
      double v = 0.0;
      if (format == 3) {
        float f;
        std::memcpy(&f, p, 4);
        v = f;
      } else if (bits == 8) {
        v = (static_cast<int>(p[0]) - 128) / 128.0;
      } else if (bits == 16) {
        int16_t s = static_cast<int16_t>(rd_u16(p));
        v = s / 32768.0;
      } else {
        int32_t s = static_cast<int32_t>(rd_u32(p));
        v = s / 2147483648.0;
      }
      acc += v;
    }
    clip.samples[i] = std::clamp(acc / channels, -1.0, 1.0);
  }
  return clip;
}

void write_wav_pcm16(const std::filesystem::path& path, const AudioClip& clip) {
  std::string out;
  uint32_t n = static_cast<uint32_t>(clip.samples.size());
  uint32_t data_bytes = n * 2;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  wr_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  wr_u32(out, 16);
  wr_u16(out, 1);  // PCM
  wr_u16(out, 1);  // mono
  wr_u32(out, static_cast<uint32_t>(clip.sample_rate_hz));
  wr_u32(out, static_cast<uint32_t>(clip.sample_rate_hz) * 2);
  wr_u16(out, 2);
  wr_u16(out, 16);
  out += "data";
  wr_u32(out, data_bytes);
  for (double s : clip.samples) {
    double c = std::clamp(s, -1.0, 1.0);
    int v = static_cast<int>(std::lrint(c * 32767.0));
    wr_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  csv::write_text(path, out);
}

double dbfs(const AudioClip& clip) {
  if (clip.samples.empty()) fail(Errc::EmptyAudio, "dbfs of empty clip");
  double acc = 0.0;
  for (double s : clip.samples) acc += s * s;
  double rms = std::sqrt(acc / static_cast<double>(clip.samples.size()));
  if (rms == 0.0) fail(Errc::SilentSignal, "dbfs of silent clip");
  return 20.0 * std::log10(rms);
}

AudioClip normalize_to(const AudioClip& clip, double target_dbfs) {
  double current = dbfs(clip);  // throws SilentSignal
  double gain = std::pow(10.0, (target_dbfs - current) / 20.0);
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.resize(clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i)
    out.samples[i] = std::clamp(clip.samples[i] * gain, -1.0, 1.0);
  return out;
}

std::vector<AudioClip> segment_utterances(const AudioClip& clip,
                                          const std::vector<UtteranceSegment>& segments,
                                          int context_ms, int fade_ms) {
  int rate = clip.sample_rate_hz;
  int64_t file_len = static_cast<int64_t>(clip.samples.size());
  int64_t fade_samples = ms_to_samples(fade_ms, rate);

  std::vector<AudioClip> out;
  out.reserve(segments.size());
  for (const auto& seg : segments) {
    if (seg.end_ms <= seg.start_ms)
      fail(Errc::SegmentOutOfRange, "segment '" + seg.utterance_id + "' has end <= start");
    if (ms_to_samples(seg.start_ms, rate) >= file_len)
      fail(Errc::SegmentOutOfRange,
           "segment '" + seg.utterance_id + "' starts beyond file end");

    int64_t ext_start_ms = seg.start_ms - context_ms;
    int64_t start = ext_start_ms <= 0 ? 0 : ms_to_samples(ext_start_ms, rate);
    // Length from the extended duration so that it is independent of the
    // absolute position (boundaries excepted).
    int64_t want = ms_to_samples(seg.end_ms - seg.start_ms + 2 * context_ms, rate);
    if (ext_start_ms < 0) want += ms_to_samples(ext_start_ms, rate);  // left context clipped
    int64_t end = std::min(start + want, file_len);

    AudioClip piece;
    piece.sample_rate_hz = rate;
    piece.samples.assign(clip.samples.begin() + start, clip.samples.begin() + end);
    int64_t n = static_cast<int64_t>(piece.samples.size());
    if (fade_samples > 0) {
      for (int64_t i = 0; i < n; ++i) {
        double g = 1.0;
        if (i < fade_samples) g *= static_cast<double>(i) / fade_samples;
        int64_t from_end = n - 1 - i;
        if (from_end < fade_samples) g *= static_cast<double>(from_end) / fade_samples;
        piece.samples[i] *= g;
      }
    }
    out.push_back(std::move(piece));
  }
  return out;
}

std::vector<AudioClip> segment_fixed(const AudioClip& clip, int length_ms) {
  if (length_ms <= 0) fail(Errc::InvalidConfig, "segment length must be positive");
  std::vector<AudioClip> out;
  int64_t window = ms_to_samples(length_ms, clip.sample_rate_hz);
  if (window <= 0) fail(Errc::InvalidConfig, "segment length below one sample");
  int64_t len = static_cast<int64_t>(clip.samples.size());
  for (int64_t start = 0; start < len; start += window) {
    AudioClip piece;
    piece.sample_rate_hz = clip.sample_rate_hz;
    piece.samples.assign(window, 0.0);
    int64_t n = std::min(window, len - start);
    std::copy(clip.samples.begin() + start, clip.samples.begin() + start + n,
              piece.samples.begin());
    out.push_back(std::move(piece));
  }
  return out;
}

std::vector<UtteranceSegment> parse_chat_timing(const std::string& text) {
  constexpr char kBullet = '\x15';
  std::vector<UtteranceSegment> out;
  size_t pos = 0;
  int index = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? text.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    if (line.empty() || line[0] != '*') continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos || colon == 1) continue;  // not a speaker tier
    std::string speaker = line.substr(1, colon - 1);

    // trailing time bullet: \x15start_end\x15 at end of line (allow ws after)
    size_t last = line.find_last_not_of(" \t");
    if (last == std::string::npos || line[last] != kBullet) continue;  // bullet-free: skip
    size_t open = line.rfind(kBullet, last - 1);
    if (open == std::string::npos || open <= colon)
      fail(Errc::MalformedBullet, "unpaired time bullet: " + line);
    std::string body = line.substr(open + 1, last - open - 1);
    size_t us = body.find('_');
    if (us == std::string::npos)
      fail(Errc::MalformedBullet, "time bullet missing '_': " + line);
    std::string a = body.substr(0, us), b = body.substr(us + 1);
    if (a.empty() || b.empty() ||
        a.find_first_not_of("0123456789") != std::string::npos ||
        b.find_first_not_of("0123456789") != std::string::npos)
      fail(Errc::MalformedBullet, "non-numeric time bullet: " + line);
    int64_t start = csv::to_int(a), end = csv::to_int(b);
    if (end <= start) fail(Errc::MalformedBullet, "time bullet end <= start: " + line);

    UtteranceSegment seg;
    char id[32];
    std::snprintf(id, sizeof(id), "%s_%04d", speaker.c_str(), index++);
    seg.utterance_id = id;
    seg.start_ms = start;
    seg.end_ms = end;
    seg.speaker = speaker;
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<SessionManifest> load_manifest(const std::filesystem::path& manifest_csv) {
  auto lines = csv::read_lines(manifest_csv);
  if (lines.empty() || csv::split(lines[0]) !=
          std::vector<std::string>{"session_id", "subject_id", "label", "wav_path", "segments_path"})
    fail(Errc::BadConfig, "bad manifest header: " + manifest_csv.string());
  std::filesystem::path base = manifest_csv.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  std::vector<SessionManifest> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = csv::split(lines[i]);
    if (f.size() != 5) fail(Errc::BadConfig, "bad manifest row: " + lines[i]);
    SessionManifest m;
    m.session_id = f[0];
    m.subject_id = f[1];
    m.label = parse_label(f[2]);
    m.wav_path = resolve(f[3]);
    m.segments = load_segments_csv(resolve(f[4]));
    out.push_back(std::move(m));
  }
  return out;
}

void save_segments_csv(const std::filesystem::path& path,
                       const std::vector<UtteranceSegment>& segments) {
  std::string s = "utterance_id,start_ms,end_ms,speaker\n";
  for (const auto& seg : segments) {
    s += seg.utterance_id;
    s += ',';
    s += std::to_string(seg.start_ms);
    s += ',';
    s += std::to_string(seg.end_ms);
    s += ',';
    s += seg.speaker;
    s += '\n';
  }
  csv::write_text(path, s);
}

std::vector<UtteranceSegment> load_segments_csv(const std::filesystem::path& path) {
  auto lines = csv::read_lines(path);
  if (lines.empty() || csv::split(lines[0]) !=
          std::vector<std::string>{"utterance_id", "start_ms", "end_ms", "speaker"})
    fail(Errc::BadConfig, "bad segments header: " + path.string());
  std::vector<UtteranceSegment> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = csv::split(lines[i]);
    if (f.size() != 4) fail(Errc::BadConfig, "bad segments row: " + lines[i]);
    UtteranceSegment seg;
    seg.utterance_id = f[0];
    seg.start_ms = csv::to_int(f[1]);
    seg.end_ms = csv::to_int(f[2]);
    seg.speaker = f[3];
    if (seg.end_ms <= seg.start_ms)
      fail(Errc::BadConfig, "segment end <= start in " + path.string());
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace adscreen::audio
