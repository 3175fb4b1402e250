#pragma once

#include <stdexcept>
#include <string>

namespace qpcm {

// Every failure mode the toolkit reports. Parsers attach row/byte locations
// to the message; analyses attach the offending quantity.
enum class Errc {
  EmptyInput,
  TooFewSamples,
  NonPositiveMean,
  SchemaMismatch,
  UnitError,
  DuplicateRecord,
  TooFewPoints,
  NonMonotonicAfterDedup,
  MixedLayers,
  MixedGeometry,
  SheetExceedsTotal,
  LayerMismatch,
  InsufficientWidths,
  DegenerateFit,
  AreaExceedsTotal,
  NoOhmicRegion,
  FitDegenerate,
  NonPhysical,
  InsufficientSpread,
  NoConvergence,
  OverlappingBins,
  NoTransition,
  NonDecaying,
  AmbiguousDetuning,
  UnphysicalP,
  InvalidModel,
  InvalidParams,
  EmptyMap,
  ConfigError,
  IoError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}

  Errc code() const { return code_; }

  // Suggested process exit code: 2 for input problems, 3 for configuration,
  // 1 for analysis failures.
  int exit_code() const;

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace qpcm
