#pragma once

#include <span>
#include <vector>

#include "qpcm/types.hpp"

namespace qpcm {

struct NormalizedSample {
  int site_index = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  double value = 0.0;  // R_sq / mean(R_sq)
};

struct SheetStats {
  Layer layer = Layer::BE;
  StatSummary summary;
  std::vector<NormalizedSample> normalized_map;
};

// Uniformity of a four-point-probe sheet-resistance map (single layer).
SheetStats sheet_stats(std::span<const SheetSample> samples);

// Width variability of one (layer, design width) shorts population: the
// sheet-resistance variance is subtracted from the resistance variance in
// quadrature to isolate the line-width contribution.
struct WidthVariability {
  Layer layer = Layer::BE;
  double design_width_nm = 0.0;
  double rsd_r = 0.0;      // resistance RSD of the shorts (IQR-filtered)
  double rsd_sheet = 0.0;  // sheet-resistance RSD used for the subtraction
  double rsd_w = 0.0;      // sqrt(rsd_r^2 - rsd_sheet^2)
  std::int64_t n_used = 0;
  std::int64_t n_excluded_status = 0;
  std::int64_t n_excluded_iqr = 0;
};

WidthVariability width_rsd(std::span<const ShortRecord> shorts,
                           double rsd_sheet);

// Junction-area RSD from the two electrode width RSDs (quadrature sum).
double area_rsd(const WidthVariability& be, const WidthVariability& te);

// Across-wafer mean resistance of one design-width group, with its standard
// error (inputs to the offset regression).
struct WidthGroupMean {
  double design_width_nm = 0.0;
  double mean_r_ohm = 0.0;
  double se_r_ohm = 0.0;
  std::int64_t n = 0;
};

// Status filtering + 1.5*IQR per design width, then group means.
std::vector<WidthGroupMean> group_width_means(
    std::span<const ShortRecord> shorts, Layer layer);

struct OffsetFit {
  Layer layer = Layer::BE;
  double delta_w_nm = 0.0;     // offset between design and fabricated width
  double delta_w_se_nm = 0.0;  // standard error from the fit covariance
  double slope_ohm_nm = 0.0;   // proportionality of w_D - delta_w to 1/R
  double r_squared = 0.0;
  int n_widths = 0;
};

// Least-squares fit of w_D = delta_w + k * (1/R_mean) across design widths.
// Weighted by 1/SE(1/R_mean)^2 when weighted = true and all SEs are positive;
// falls back to (or is forced to) an unweighted fit otherwise.
OffsetFit width_offset(std::span<const WidthGroupMean> groups, Layer layer,
                       bool weighted = true);

}  // namespace qpcm
