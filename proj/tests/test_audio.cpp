#include "adscreen/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "adscreen/csv.hpp"
#include "adscreen/error.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace adscreen;
using namespace adscreen::audio;
using testsupport::TempDir;

namespace {

void wr_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void wr_u16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

// hand-rolled writer so the reader is tested against independent bytes
std::string make_wav(uint16_t fmt, uint16_t channels, uint32_t rate, uint16_t bits,
                     const std::string& payload) {
  std::string s = "RIFF";
  wr_u32(s, 36 + static_cast<uint32_t>(payload.size()));
  s += "WAVEfmt ";
  wr_u32(s, 16);
  wr_u16(s, fmt);
  wr_u16(s, channels);
  wr_u32(s, rate);
  wr_u32(s, rate * channels * bits / 8);
  wr_u16(s, static_cast<uint16_t>(channels * bits / 8));
  wr_u16(s, bits);
  s += "data";
  wr_u32(s, static_cast<uint32_t>(payload.size()));
  s += payload;
  return s;
}

}  // namespace

TEST_CASE("read_wav pcm16 sine length and values") {
  TempDir dir("wav16");
  std::string payload;
  for (int i = 0; i < 16000; ++i) {
    double v = std::sin(2.0 * M_PI * 440.0 * i / 16000.0);
    int16_t q = static_cast<int16_t>(std::lrint(v * 32000.0));
    wr_u16(payload, static_cast<uint16_t>(q));
  }
  auto p = dir.path() / "sine.wav";
  csv::write_text(p, make_wav(1, 1, 16000, 16, payload));
  AudioClip clip = read_wav(p);
  CHECK(clip.samples.size() == 16000);
  CHECK(clip.sample_rate_hz == 16000);
  CHECK(clip.samples[0] == doctest::Approx(0.0).epsilon(1e-9));
  for (double s : clip.samples) CHECK(std::abs(s) <= 1.0);
}

TEST_CASE("read_wav all-zero pcm16 is silence") {
  TempDir dir("wavz");
  std::string payload(2 * 1000, '\0');
  auto p = dir.path() / "zero.wav";
  csv::write_text(p, make_wav(1, 1, 16000, 16, payload));
  AudioClip clip = read_wav(p);
  REQUIRE(clip.samples.size() == 1000);
  for (double s : clip.samples) CHECK(s == 0.0);
}

TEST_CASE("read_wav stereo downmix by channel mean") {
  TempDir dir("wavst");
  std::string payload;
  int16_t l = 16384, r = -16384;  // 0.5, -0.5
  for (int i = 0; i < 100; ++i) {
    wr_u16(payload, static_cast<uint16_t>(l));
    wr_u16(payload, static_cast<uint16_t>(r));
  }
  auto p = dir.path() / "st.wav";
  csv::write_text(p, make_wav(1, 2, 16000, 16, payload));
  AudioClip clip = read_wav(p);
  REQUIRE(clip.samples.size() == 100);
  for (double s : clip.samples) CHECK(s == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("read_wav pcm8, pcm32 and float32") {
  TempDir dir("wavfmt");
  {
    std::string payload;
    payload.push_back(static_cast<char>(128 + 64));  // +0.5
    payload.push_back(static_cast<char>(128));       // 0
    auto p = dir.path() / "u8.wav";
    csv::write_text(p, make_wav(1, 1, 16000, 8, payload));
    AudioClip c = read_wav(p);
    CHECK(c.samples[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(c.samples[1] == doctest::Approx(0.0).epsilon(1e-6));
  }
  {
    std::string payload;
    wr_u32(payload, 0x40000000u);  // 2^30 / 2^31 = 0.5
    wr_u32(payload, 0);
    auto p = dir.path() / "i32.wav";
    csv::write_text(p, make_wav(1, 1, 16000, 32, payload));
    AudioClip c = read_wav(p);
    CHECK(c.samples[0] == doctest::Approx(0.5).epsilon(1e-9));
  }
  {
    std::string payload;
    float f = -0.25f;
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    wr_u32(payload, bits);
    auto p = dir.path() / "f32.wav";
    csv::write_text(p, make_wav(3, 1, 16000, 32, payload));
    AudioClip c = read_wav(p);
    CHECK(c.samples[0] == doctest::Approx(-0.25).epsilon(1e-9));
  }
}

TEST_CASE("read_wav error paths") {
  TempDir dir("waverr");
  auto garbage = dir.path() / "g.wav";
  csv::write_text(garbage, "definitely not a riff file");
  try {
    read_wav(garbage);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CorruptHeader);
  }

  auto mp3ish = dir.path() / "c.wav";
  csv::write_text(mp3ish, make_wav(85, 1, 16000, 16, std::string(32, '\0')));
  try {
    read_wav(mp3ish);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnsupportedFormat);
  }

  auto empty = dir.path() / "e.wav";
  csv::write_text(empty, make_wav(1, 1, 16000, 16, ""));
  try {
    read_wav(empty);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyAudio);
  }
}

TEST_CASE("wav write/read round trip") {
  TempDir dir("wavrt");
  AudioClip clip = testsupport::sine_clip(200.0, 0.7, 250);
  auto p = dir.path() / "rt.wav";
  write_wav_pcm16(p, clip);
  AudioClip back = read_wav(p);
  REQUIRE(back.samples.size() == clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i)
    CHECK(std::abs(back.samples[i] - clip.samples[i]) < 1e-4);
}

TEST_CASE("dbfs closed forms") {
  AudioClip square;
  square.sample_rate_hz = 16000;
  square.samples.assign(1000, 1.0);
  for (size_t i = 0; i < square.samples.size(); i += 2) square.samples[i] = -1.0;
  CHECK(dbfs(square) == doctest::Approx(0.0).epsilon(1e-12));

  AudioClip half = testsupport::sine_clip(440.0, 0.5, 1000);
  CHECK(dbfs(half) == doctest::Approx(-9.0309).epsilon(1e-3));

  AudioClip silent;
  silent.sample_rate_hz = 16000;
  silent.samples.assign(100, 0.0);
  CHECK_THROWS_AS(dbfs(silent), Error);
}

TEST_CASE("normalize_to gain and identity") {
  AudioClip c;
  c.sample_rate_hz = 16000;
  c.samples.assign(512, 0.1);  // rms 0.1 -> -20 dBFS
  CHECK(dbfs(c) == doctest::Approx(-20.0).epsilon(1e-12));
  AudioClip out = normalize_to(c, -30.0);
  double gain = std::pow(10.0, -10.0 / 20.0);
  CHECK(out.samples[0] == doctest::Approx(0.1 * gain).epsilon(1e-12));
  CHECK(dbfs(out) == doctest::Approx(-30.0).epsilon(1e-9));

  AudioClip same = normalize_to(c, dbfs(c));
  for (size_t i = 0; i < c.samples.size(); ++i)
    CHECK(std::abs(same.samples[i] - c.samples[i]) < 1e-12);

  AudioClip silent;
  silent.sample_rate_hz = 16000;
  silent.samples.assign(100, 0.0);
  CHECK_THROWS_AS(normalize_to(silent, -20.0), Error);
}

TEST_CASE("normalize_to hits any target in [-60, 0] without clipping") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    AudioClip c = testsupport::noise_clip(rng.uniform(0.001, 0.05), 200, 1000 + trial);
    double current = dbfs(c);
    double target = rng.uniform(-60.0, std::min(0.0, current));  // attenuation: no clamping
    AudioClip out = normalize_to(c, target);
    CHECK(dbfs(out) == doctest::Approx(target).epsilon(1e-6));
  }
}

TEST_CASE("segment_utterances boundary arithmetic and fades") {
  AudioClip clip;
  clip.sample_rate_hz = 16000;
  clip.samples.resize(16000 * 3);
  for (size_t i = 0; i < clip.samples.size(); ++i) clip.samples[i] = static_cast<double>(i);

  UtteranceSegment seg{"u0", 1000, 2000, "PAR"};
  auto out = segment_utterances(clip, {seg}, 10, 15);
  REQUIRE(out.size() == 1);
  CHECK(out[0].samples.size() == 16320);  // (1000 + 2*10) ms at 16 kHz
  CHECK(out[0].samples[0] == 0.0);        // fade-in starts at factor 0
  int fade = 240;                         // 15 ms at 16 kHz
  CHECK(out[0].samples[static_cast<size_t>(fade)] ==
        doctest::Approx(clip.samples[15840 + fade]).epsilon(1e-12));
  CHECK(out[0].samples[120] == doctest::Approx(0.5 * clip.samples[15960]).epsilon(1e-12));
  CHECK(out[0].samples.back() == 0.0);  // fade-out ends at factor 0

  // left context clipped at file start
  UtteranceSegment first{"u1", 0, 500, "PAR"};
  auto out2 = segment_utterances(clip, {first}, 10, 15);
  CHECK(out2[0].samples.size() == 8160);  // 510 ms

  UtteranceSegment beyond{"u2", 60000, 61000, "PAR"};
  CHECK_THROWS_AS(segment_utterances(clip, {beyond}, 10, 15), Error);
}

TEST_CASE("segment_utterances length rule away from boundaries") {
  AudioClip clip = testsupport::noise_clip(0.1, 5000, 7);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    int64_t start = rng.uniform_int(100, 3000);
    int64_t end = start + rng.uniform_int(50, 1500);
    auto out = segment_utterances(clip, {{"u", start, end, "PAR"}}, 10, 15);
    int64_t expect = (end - start + 20) * 16;
    CHECK(static_cast<int64_t>(out[0].samples.size()) == expect);
  }
}

TEST_CASE("segment_fixed splits and zero-pads") {
  AudioClip clip = testsupport::noise_clip(0.3, 9500, 11);
  auto out = segment_fixed(clip, 4000);
  REQUIRE(out.size() == 3);
  for (const auto& c : out) CHECK(c.samples.size() == 64000);
  size_t audio_in_last = 16000 * 3 / 2;  // 1.5 s
  for (size_t i = audio_in_last; i < out[2].samples.size(); ++i)
    CHECK(out[2].samples[i] == 0.0);

  AudioClip shorty = testsupport::noise_clip(0.3, 700, 12);
  auto single = segment_fixed(shorty, 4000);
  REQUIRE(single.size() == 1);
  CHECK(single[0].samples.size() == 64000);

  AudioClip empty;
  empty.sample_rate_hz = 16000;
  CHECK(segment_fixed(empty, 4000).empty());
}

TEST_CASE("segment_fixed concatenation reproduces the input") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    AudioClip clip = testsupport::noise_clip(0.5, 100 + static_cast<int>(rng.below(3000)),
                                             400 + static_cast<uint64_t>(trial));
    int window_ms = 50 + static_cast<int>(rng.below(500));
    auto parts = segment_fixed(clip, window_ms);
    std::vector<double> glued;
    for (const auto& p : parts) glued.insert(glued.end(), p.samples.begin(), p.samples.end());
    REQUIRE(glued.size() >= clip.samples.size());
    for (size_t i = 0; i < clip.samples.size(); ++i) CHECK(glued[i] == clip.samples[i]);
    for (size_t i = clip.samples.size(); i < glued.size(); ++i) CHECK(glued[i] == 0.0);
  }
}

TEST_CASE("parse_chat_timing extracts participant time bullets") {
  std::string text =
      "@Begin\n"
      "*PAR:\tthe boy . \x15"
      "1200_3400\x15\n"
      "%mor:\tdet:art|the n|boy .\n"
      "*INV:\tmm hm . \x15"
      "3500_3900\x15\n"
      "*PAR:\tno bullet on this line\n"
      "@End\n";
  auto segs = parse_chat_timing(text);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].speaker == "PAR");
  CHECK(segs[0].start_ms == 1200);
  CHECK(segs[0].end_ms == 3400);
  CHECK(segs[1].speaker == "INV");
  CHECK(segs[1].start_ms == 3500);

  CHECK(parse_chat_timing("no bullets anywhere\njust text\n").empty());
  CHECK(parse_chat_timing("").empty());
  CHECK(parse_chat_timing("@UTF8\n%com: comment \n*PAR: hello .\n").empty());

  std::string bad = "*PAR: x \x15" "500_400\x15\n";
  CHECK_THROWS_AS(parse_chat_timing(bad), Error);
  std::string nonnum = "*PAR: x \x15" "a_b\x15\n";
  CHECK_THROWS_AS(parse_chat_timing(nonnum), Error);
}

TEST_CASE("manifest and segments csv round trip") {
  TempDir dir("mani");
  std::vector<UtteranceSegment> segs = {{"u0", 100, 900, "PAR"}, {"u1", 1000, 1800, "PAR"}};
  save_segments_csv(dir.path() / "s.csv", segs);
  auto back = load_segments_csv(dir.path() / "s.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].start_ms == 1000);
  CHECK(back[1].utterance_id == "u1");

  AudioClip clip = testsupport::sine_clip(150.0, 0.4, 2500);
  write_wav_pcm16(dir.path() / "a.wav", clip);
  csv::write_text(dir.path() / "manifest.csv",
                  "session_id,subject_id,label,wav_path,segments_path\n"
                  "s1,subj1,AD,a.wav,s.csv\n");
  auto sessions = load_manifest(dir.path() / "manifest.csv");
  REQUIRE(sessions.size() == 1);
  CHECK(sessions[0].label == Label::AD);
  CHECK(sessions[0].segments.size() == 2);
  CHECK(std::filesystem::exists(sessions[0].wav_path));
}
