#pragma once

#include <cstdint>
#include <vector>

#include "qpcm/rng.hpp"
#include "qpcm/types.hpp"

namespace qpcm {

// Mean value with a deterministic radial gradient (fraction of mean per
// wafer radius) plus independent multiplicative Gaussian noise.
struct QuantityModel {
  double mean = 0.0;
  double radial_gradient = 0.0;
  double rsd = 0.0;
};

// Line-width model per metal layer: fabricated width is the design width
// minus the offset, with gradient and noise on the fabricated value.
struct WidthModel {
  double delta_w_nm = 0.0;
  double radial_gradient = 0.0;
  double rsd = 0.0;
};

struct CryoModel {
  int n_chips = 0;
  int qubits_per_chip = 4;
  double tc_k = 0.71;
  double cq_f = 86e-15;
  double f01_noise_rsd = 0.0;
  double rn_mean_ohm = 0.0;  // 0 = derive from the RA model at 0.175 um^2
  double rn_rsd = 0.0;       // 0 = derive from the RA and width models
};

struct VariationModel {
  QuantityModel sheet_be;      // ohm/sq
  QuantityModel sheet_te;      // ohm/sq
  WidthModel width_be;
  WidthModel width_te;
  QuantityModel ra_ohm_um2;    // oxide resistance-area product
  QuantityModel v_bt;          // breakthrough voltage [V]
  double iv_exponent_mean = 2.75;
  double iv_exponent_sd = 0.0;
  double iv_current_noise_rsd = 0.0;
  double junction_failure_rate = 0.0;
  double short_failure_rate = 0.0;
  CryoModel cryo;
  std::uint64_t seed = 1;
};

struct ShortSpec {
  Layer layer = Layer::BE;
  double width_nm = 0.0;
  double length_um = 0.0;
};

struct JunctionSpec {
  double wbe_nm = 0.0;
  double wte_nm = 0.0;

  double area_um2() const { return wbe_nm * wte_nm * 1e-6; }
};

struct WaferLayout {
  WaferGeometry geometry{10.0, 7.0, 21, 19, 100.0};
  int max_dies = 0;  // 0 = all dies fully on the wafer
  std::vector<ShortSpec> shorts_per_die;
  std::vector<JunctionSpec> junctions_per_die;
  // IV sweeps are generated for these junction indices on every iv_stride-th
  // die (stride 0 disables IV generation).
  std::vector<int> iv_junction_indices;
  int iv_stride = 0;
  double iv_grid_step_v = 0.010;
  double iv_knee_v = 0.30;
  double iv_compliance_a = 0.1;
};

// Standard PCM layout: 8 shorts per layer (0.35-1 um), a 4x4 matrix of test
// junctions (0.1225-1 um^2) including the 0.35x0.5 um qubit size.
WaferLayout standard_layout();

// 49-site sheet-map pattern (center + rings of 8/16/24).
std::vector<std::pair<double, double>> sheet_sites_49(double radius_mm = 95.0);

struct SynthResult {
  WaferDataset dataset;
  std::int64_t resamples = 0;  // negative/zero draws that were redrawn
};

// Deterministic synthetic wafer: identical (model, layout, seed) produce
// byte-identical serialized datasets; streams are keyed per die and
// structure, so generation order cannot matter.
SynthResult generate(const VariationModel& model, const WaferLayout& layout);

// Piecewise IV sweep on a uniform grid: ohmic to knee_v, power law m to v_bt,
// near-short after breakthrough (clamped at compliance).
IVTrace generate_iv(double r_jj_ohm, double m, double v_bt_v,
                    double grid_step_v, double knee_v = 0.30,
                    double compliance_a = 0.1, double current_noise_rsd = 0.0,
                    std::uint64_t noise_seed = 0);

// Cooldown resistance trace with a sharp onset and a tail reaching zero
// resistance at t_zero_k.
TransitionTrace generate_transition(double r_normal_ohm, double t_onset_k,
                                    double t_zero_k, double t_max_k = 1.6,
                                    double t_min_k = 0.4,
                                    double step_k = 0.01);

}  // namespace qpcm
