#pragma once

#include <stdexcept>
#include <string>

namespace adscreen {

enum class Errc {
  // audio
  UnsupportedFormat,
  CorruptHeader,
  EmptyAudio,
  SilentSignal,
  SegmentOutOfRange,
  MalformedBullet,
  // features
  ClipTooShort,
  // network
  InputTooShort,
  LengthTooShort,
  BatchTooSmall,
  DimensionMismatch,
  InvalidConfig,
  // training
  SingleClassData,
  EmptyDataset,
  NumericalFailure,
  // evaluation
  TooFewSubjects,
  NoUtterances,
  EmptyInput,
  EmptySweep,
  // svm
  NoConvergence,
  // generator / tooling
  InvalidSpec,
  BadConfig,
  IoError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc c, const std::string& msg) { throw Error(c, msg); }

}  // namespace adscreen
