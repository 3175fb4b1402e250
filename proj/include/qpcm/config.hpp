#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpcm/iv_analysis.hpp"
#include "qpcm/types.hpp"

namespace qpcm {

// Every tunable the analyses use, with the shipped defaults. Serialized as a
// versioned key-value JSON document; the report embeds its hash.
struct AnalysisConfig {
  SpecLimits spec;             // junction pass window
  IvConfig iv;                 // power-law and breakthrough analysis
  int histogram_bins = 25;

  // Sheet RSD used in the width decomposition when no sheet map is available
  // for a layer (the deposition-qualification value).
  double assumed_sheet_rsd = 0.016;
  // Force the assumed value even when a map is present.
  bool use_assumed_sheet_rsd = false;
  bool offset_fit_weighted = true;

  double qubit_area_um2 = 0.175;
  double qubit_width_be_nm = 350.0;
  double qubit_width_te_nm = 500.0;
  double cq_f = 86e-15;
  std::optional<double> assumed_tc_k;  // skip fitting, use this Tc
  double target_f01_hz = 4.42e9;
  double target_r_ohm = 7300.0;  // design-targeted RT junction resistance
  // Chip pre-selection bins, [lo, hi) in Hz.
  std::vector<std::pair<double, double>> freq_bins_hz = {
      {4.287e9, 4.376e9}, {4.376e9, 4.464e9}, {4.464e9, 4.553e9}};
  double transition_zero_threshold_ohm = 0.1;

  std::string canonical_json() const;
  // FNV-1a of the canonical serialization.
  std::string hash() const;
};

AnalysisConfig parse_config_json(std::string_view bytes,
                                 const std::string& filename = "config.json");
AnalysisConfig load_config(const std::string& path);

}  // namespace qpcm
