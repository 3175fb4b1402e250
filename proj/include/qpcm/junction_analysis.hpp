#pragma once

#include <span>
#include <vector>

#include "qpcm/types.hpp"

namespace qpcm {

struct JunctionPass {
  int die_row = 0;
  int die_col = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  std::string junction_id;
  bool pass = false;
};

struct YieldReport {
  std::int64_t n_total = 0;
  std::int64_t n_pass = 0;
  double yield_fraction = 0.0;
  SpecLimits spec;
  std::vector<JunctionPass> map;
};

// Working-junction yield: pass iff status OK and r_min < R < r_max (strict).
YieldReport apply_spec(std::span<const JunctionRecord> junctions,
                       const SpecLimits& spec);

struct ResistanceStats {
  StatSummary summary;           // after 1.5*IQR filtering
  double mu = 0.0;               // Gaussian fit (MLE = filtered mean)
  double sigma = 0.0;            // Gaussian fit (filtered sample std)
  Histogram histogram;           // cosmetic, over the filtered values
};

// 1.5*IQR selection + Gaussian fit of spec-passing junction resistances.
ResistanceStats resistance_stats(std::span<const JunctionRecord> passing,
                                 int n_bins = 25);

struct OxideVariability {
  double rsd_jj = 0.0;
  double rsd_a = 0.0;
  double rsd_ra = 0.0;  // sqrt(rsd_jj^2 - rsd_a^2)
};

// Joint RSD of the oxide resistance-area product, by removing the area
// contribution from the junction-resistance RSD in quadrature.
OxideVariability oxide_rsd(double rsd_jj, double rsd_a);

}  // namespace qpcm
