#include "adscreen/csv.hpp"
#include "adscreen/error.hpp"
#include "adscreen/hash.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adscreen {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptHeader: return "CorruptHeader";
    case Errc::EmptyAudio: return "EmptyAudio";
    case Errc::SilentSignal: return "SilentSignal";
    case Errc::SegmentOutOfRange: return "SegmentOutOfRange";
    case Errc::MalformedBullet: return "MalformedBullet";
    case Errc::ClipTooShort: return "ClipTooShort";
    case Errc::InputTooShort: return "InputTooShort";
    case Errc::LengthTooShort: return "LengthTooShort";
    case Errc::BatchTooSmall: return "BatchTooSmall";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::SingleClassData: return "SingleClassData";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::TooFewSubjects: return "TooFewSubjects";
    case Errc::NoUtterances: return "NoUtterances";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptySweep: return "EmptySweep";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::BadConfig: return "BadConfig";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open for hashing: " + path.string());
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace adscreen

namespace adscreen::csv {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

double to_double(const std::string& s) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) fail(Errc::BadConfig, "not a number: '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(Errc::BadConfig, "not a number: '" + s + "'");
  }
}

int64_t to_int(const std::string& s) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(Errc::BadConfig, "not an integer: '" + s + "'");
  return v;
}

}  // namespace adscreen::csv
