#pragma once

#include <span>
#include <vector>

#include "qpcm/types.hpp"

namespace qpcm {

struct IvConfig {
  // |m - 1| tolerance for calling a window ohmic.
  double m_tol = 0.15;
  // I(k+1)/I(k) ratio that counts as a breakthrough jump.
  double jump_ratio = 5.0;
  // Currents below this are treated as noise and excluded from log-log fits.
  double noise_floor_a = 10e-12;
  // Minimum points per fitted window.
  int min_window = 4;
  // Optional series-resistance correction applied to the voltage axis.
  double r_series_ohm = 0.0;
  // Minimum traces per size for breakthrough statistics.
  int vbt_min_per_size = 10;
};

enum class Regime { DIRECT, TRAP_ASSISTED };
enum class Detection { CURRENT_JUMP, COMPLIANCE_HIT, NONE };

const char* to_string(Regime r);
const char* to_string(Detection d);

struct RegimeFit {
  Regime regime = Regime::DIRECT;
  double v_lo = 0.0;
  double v_hi = 0.0;
  double exponent = 0.0;   // m in I ~ V^m
  double prefactor = 0.0;  // exp(intercept) of the log-log fit
  double r_squared = 0.0;  // in log-log space
  double r_jj_ohm = 0.0;   // DIRECT only; zero-intercept fit of I vs V
  int n_points = 0;
};

struct BreakthroughResult {
  double v_bt = 0.0;  // last voltage before the jump; NaN when NONE
  Detection detection = Detection::NONE;
};

// Slope and intercept of log|I| = m log V + b over a point window; exposed so
// the exactness of the power-law fit is directly testable.
struct PowerLawFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
};
PowerLawFit power_law_fit(std::span<const IVPoint> points);

// Splits the pre-breakthrough trace into a low-voltage ohmic regime and a
// superlinear trap-assisted regime via a two-segment log-log fit with the
// changepoint chosen by least total squared error. A trace that is ohmic
// throughout yields a single DIRECT fit.
std::vector<RegimeFit> segment_and_fit(const IVTrace& trace,
                                       const IvConfig& config);

// First current jump above jump_ratio (device event) or compliance hit
// (instrument limit); jumps take precedence when both occur at one step.
BreakthroughResult detect_breakthrough(const IVTrace& trace,
                                       const IvConfig& config);

struct VbtSample {
  double area_um2 = 0.0;
  double v_bt = 0.0;
};

struct VbtSizeGroup {
  double area_um2 = 0.0;
  StatSummary summary;
};

struct VbtStats {
  std::vector<VbtSizeGroup> per_size;  // ascending area
  StatSummary pooled;
  // Qubit-junction size only, when that size is present.
  bool has_qubit_size = false;
  StatSummary qubit_size;
  // Overlap verdict: means differ significantly iff the largest pairwise
  // mean difference exceeds the pooled standard deviation.
  double max_pairwise_delta_v = 0.0;
  bool area_dependent = false;
};

VbtStats vbt_stats(std::span<const VbtSample> samples, const IvConfig& config,
                   double qubit_area_um2 = 0.175);

}  // namespace qpcm
