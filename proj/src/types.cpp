#include "qpcm/types.hpp"

#include "qpcm/errors.hpp"

namespace qpcm {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NonPositiveMean: return "NonPositiveMean";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::UnitError: return "UnitError";
    case Errc::DuplicateRecord: return "DuplicateRecord";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::NonMonotonicAfterDedup: return "NonMonotonicAfterDedup";
    case Errc::MixedLayers: return "MixedLayers";
    case Errc::MixedGeometry: return "MixedGeometry";
    case Errc::SheetExceedsTotal: return "SheetExceedsTotal";
    case Errc::LayerMismatch: return "LayerMismatch";
    case Errc::InsufficientWidths: return "InsufficientWidths";
    case Errc::DegenerateFit: return "DegenerateFit";
    case Errc::AreaExceedsTotal: return "AreaExceedsTotal";
    case Errc::NoOhmicRegion: return "NoOhmicRegion";
    case Errc::FitDegenerate: return "FitDegenerate";
    case Errc::NonPhysical: return "NonPhysical";
    case Errc::InsufficientSpread: return "InsufficientSpread";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::OverlappingBins: return "OverlappingBins";
    case Errc::NoTransition: return "NoTransition";
    case Errc::NonDecaying: return "NonDecaying";
    case Errc::AmbiguousDetuning: return "AmbiguousDetuning";
    case Errc::UnphysicalP: return "UnphysicalP";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::EmptyMap: return "EmptyMap";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

int Error::exit_code() const {
  switch (code_) {
    case Errc::SchemaMismatch:
    case Errc::UnitError:
    case Errc::DuplicateRecord:
    case Errc::TooFewPoints:
    case Errc::NonMonotonicAfterDedup:
    case Errc::IoError:
      return 2;
    case Errc::ConfigError:
      return 3;
    default:
      return 1;
  }
}

const char* to_string(Layer l) { return l == Layer::BE ? "BE" : "TE"; }

const char* to_string(ShortStatus s) {
  switch (s) {
    case ShortStatus::OK: return "OK";
    case ShortStatus::OPEN: return "OPEN";
    case ShortStatus::SHORTED_FAIL: return "SHORTED_FAIL";
    case ShortStatus::OUT_OF_RANGE: return "OUT_OF_RANGE";
  }
  return "?";
}

const char* to_string(JunctionStatus s) {
  switch (s) {
    case JunctionStatus::OK: return "OK";
    case JunctionStatus::OPEN: return "OPEN";
    case JunctionStatus::SHORTED_FAIL: return "SHORTED_FAIL";
  }
  return "?";
}

const char* to_string(Filter f) {
  return f == Filter::NONE ? "NONE" : "IQR_1_5";
}

DieSite make_die_site(const WaferGeometry& g, int row, int col) {
  DieSite s;
  s.row = row;
  s.col = col;
  s.x_mm = (col - (g.cols - 1) / 2.0) * g.pitch_x_mm;
  s.y_mm = (row - (g.rows - 1) / 2.0) * g.pitch_y_mm;
  if (s.radius_mm() > g.wafer_radius_mm + 1e-9) {
    fail(Errc::UnitError,
         "die (" + std::to_string(row) + "," + std::to_string(col) +
             ") center lies off the wafer (radius " +
             std::to_string(s.radius_mm()) + " mm)");
  }
  const double cx = std::abs(s.x_mm) + g.pitch_x_mm / 2.0;
  const double cy = std::abs(s.y_mm) + g.pitch_y_mm / 2.0;
  s.on_wafer = std::hypot(cx, cy) <= g.wafer_radius_mm + 1e-9;
  return s;
}

}  // namespace qpcm
