#pragma once

#include <span>
#include <string>
#include <vector>

#include "qpcm/types.hpp"

namespace qpcm {

// CODATA 2018 (exact SI definitions).
namespace constants {
inline constexpr double k_boltzmann = 1.380649e-23;     // J/K
inline constexpr double h_planck = 6.62607015e-34;      // J s
inline constexpr double e_charge = 1.602176634e-19;     // C
}  // namespace constants

enum class ModelProvenance { FITTED, ASSUMED };

// Calibrated Ambegaokar-Baratoff model mapping normal-state resistance to
// qubit transition frequency:
//   f01 = sqrt((1/Rn) * 0.882 k_B Tc / (h Cq)) - e^2 / (2 h Cq)
struct AbModel {
  double t_c_k = 0.71;
  double c_q_f = 86e-15;
  ModelProvenance provenance = ModelProvenance::ASSUMED;

  bool valid() const { return t_c_k > 0.0 && t_c_k < 2.0 && c_q_f > 0.0; }
  // Charging term e^2 / (2 h Cq) in Hz.
  double charging_term_hz() const;
};

double predict_f01(double rn_ohm, const AbModel& model);

// Exact algebraic inverse of predict_f01.
double target_resistance(double f01_hz, const AbModel& model);

struct TcFitReport {
  AbModel model;
  double rms_residual_hz = 0.0;
  std::vector<double> residuals_hz;  // measured - predicted, input order
  double rn_min_ohm = 0.0;
  double rn_max_ohm = 0.0;
  std::int64_t n = 0;
  // Spread of the measured f01 population: (max-min)/mean and RSD.
  double measured_spread_total = 0.0;
  double measured_spread_rsd = 0.0;
};

// One-parameter least-squares calibration of Tc with Cq fixed, solved by
// bracketed golden-section minimization of the squared frequency residuals.
TcFitReport fit_tc(std::span<const CryoRecord> records, double c_q_f);

struct FreqBin {
  double lo_hz = 0.0;  // inclusive
  double hi_hz = 0.0;  // exclusive
  std::string label;
};

struct QubitPrediction {
  std::string qubit_id;
  double rn_ohm = 0.0;
  double f01_hz = 0.0;
};

struct ChipJunctions {
  std::string chip_id;
  std::vector<std::pair<std::string, double>> qubit_rn_ohm;  // (qubit, Rn)
};

struct ChipBinning {
  std::string chip_id;
  std::vector<QubitPrediction> qubits;
  int bin_index = -1;  // -1 = REJECT
};

struct BinningReport {
  std::vector<FreqBin> bins;
  std::vector<ChipBinning> chips;
  std::vector<std::int64_t> bin_counts;  // per bin
  std::int64_t n_rejected = 0;
  double target_f01_hz = 0.0;
  double predicted_mean_hz = 0.0;
  double predicted_spread_total = 0.0;  // (max-min)/mean over all qubits
  double predicted_spread_rsd = 0.0;
};

// Predicts f01 per qubit and assigns each chip to the bin containing all of
// its qubits' predictions, or REJECT.
BinningReport bin_chips(std::span<const ChipJunctions> chips,
                        const AbModel& model, double target_f01_hz,
                        std::span<const FreqBin> bins);

struct TransitionResult {
  double t_onset_k = 0.0;  // highest T where R < 90 % of the normal plateau
  double t_zero_k = 0.0;   // highest T where R < zero_threshold
  double plateau_ohm = 0.0;
};

TransitionResult transition_temps(const TransitionTrace& trace,
                                  double zero_threshold_ohm);

// Versioned model document, so later wafers can be binned against a frozen
// calibration. Fit statistics are optional (absent for assumed models).
std::string serialize_ab_model(const AbModel& model,
                               const TcFitReport* fit = nullptr);
AbModel parse_ab_model_json(std::string_view bytes,
                            const std::string& filename = "model.json");

}  // namespace qpcm
