#pragma once

#include <optional>
#include <span>
#include <string>

#include "qpcm/types.hpp"

namespace qpcm {

struct MapCell {
  int row = 0;
  int col = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  double value = 0.0;  // scalar, or 0/1 for fail/pass
};

enum class MapMode { SCALAR, PASS_FAIL };

struct WaferMapStyle {
  std::string title;
  std::string legend_label;
  MapMode mode = MapMode::SCALAR;
  // Color-scale bounds; NaN = take the data min/max.
  double scale_min = std::nan("");
  double scale_max = std::nan("");
};

// Deterministic SVG wafer map: fixed canvas, wafer circle, die outlines and a
// legend with explicit bounds. Byte-identical output for identical input.
std::string render_wafer_map(std::span<const MapCell> cells,
                             const WaferGeometry& geometry,
                             const WaferMapStyle& style);

struct GaussianOverlay {
  double mu = 0.0;
  double sigma = 0.0;
};

struct HistogramStyle {
  std::string title;
  std::string x_label;
  std::optional<GaussianOverlay> gaussian;
};

std::string render_histogram(const Histogram& hist,
                             const HistogramStyle& style);

}  // namespace qpcm
