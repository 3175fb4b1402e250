#include "qpcm/frequency_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "qpcm/errors.hpp"
#include "qpcm/stats.hpp"

namespace qpcm {

double AbModel::charging_term_hz() const {
  return constants::e_charge * constants::e_charge /
         (2.0 * constants::h_planck * c_q_f);
}

double predict_f01(double rn_ohm, const AbModel& model) {
  if (!model.valid())
    fail(Errc::InvalidModel, "predict_f01: Tc must be in (0,2) K and Cq > 0");
  if (!(rn_ohm > 0.0))
    fail(Errc::NonPhysical, "predict_f01: Rn must be positive");
  const double sq =
      std::sqrt((1.0 / rn_ohm) * 0.882 * constants::k_boltzmann * model.t_c_k /
                (constants::h_planck * model.c_q_f));
  const double f01 = sq - model.charging_term_hz();
  if (!(f01 > 0.0))
    fail(Errc::NonPhysical,
         "predict_f01: Rn = " + std::to_string(rn_ohm) +
             " ohm puts the Josephson term below the charging term");
  return f01;
}

double target_resistance(double f01_hz, const AbModel& model) {
  if (!model.valid())
    fail(Errc::InvalidModel, "target_resistance: invalid model");
  if (!(f01_hz > 0.0))
    fail(Errc::NonPhysical, "target_resistance: f01 must be positive");
  const double s = f01_hz + model.charging_term_hz();
  return 0.882 * constants::k_boltzmann * model.t_c_k /
         (constants::h_planck * model.c_q_f * s * s);
}

namespace {

double tc_objective(std::span<const CryoRecord> records, double c_q_f,
                    double tc) {
  AbModel m{tc, c_q_f, ModelProvenance::FITTED};
  double sse = 0.0;
  for (const auto& r : records) {
    const double sq = std::sqrt((1.0 / r.rn_ohm) * 0.882 *
                                constants::k_boltzmann * tc /
                                (constants::h_planck * c_q_f));
    const double pred = sq - m.charging_term_hz();
    if (!(pred > 0.0)) return std::numeric_limits<double>::infinity();
    const double d = r.f01_hz - pred;
    sse += d * d;
  }
  return sse;
}

}  // namespace

TcFitReport fit_tc(std::span<const CryoRecord> records, double c_q_f) {
  if (records.size() < 5)
    fail(Errc::TooFewSamples, "fit_tc: need >= 5 records");
  if (!(c_q_f > 0.0)) fail(Errc::InvalidParams, "fit_tc: Cq must be positive");

  double rn_min = std::numeric_limits<double>::infinity();
  double rn_max = 0.0;
  for (const auto& r : records) {
    if (!(r.rn_ohm > 0.0) || !(r.f01_hz > 0.0))
      fail(Errc::InvalidParams, "fit_tc: records need positive Rn and f01");
    rn_min = std::min(rn_min, r.rn_ohm);
    rn_max = std::max(rn_max, r.rn_ohm);
  }
  if (rn_max / rn_min < 1.5)
    fail(Errc::InsufficientSpread,
         "fit_tc: Rn range " + std::to_string(rn_max / rn_min) +
             "x is below the required 1.5x span");

  // Golden-section minimization; the objective is smooth and unimodal in Tc
  // (the model is linear in sqrt(Tc)).
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 1e-4;
  double hi = 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = tc_objective(records, c_q_f, a);
  double fb = tc_objective(records, c_q_f, b);
  while (hi - lo > 1e-13 * hi) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = tc_objective(records, c_q_f, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = tc_objective(records, c_q_f, b);
    }
  }
  const double tc = 0.5 * (lo + hi);
  if (tc <= 2e-4 || tc >= 1.999 ||
      !std::isfinite(tc_objective(records, c_q_f, tc)))
    fail(Errc::NoConvergence, "fit_tc: minimum at the bracket edge");

  TcFitReport out;
  out.model = {tc, c_q_f, ModelProvenance::FITTED};
  out.n = static_cast<std::int64_t>(records.size());
  out.rn_min_ohm = rn_min;
  out.rn_max_ohm = rn_max;

  double sse = 0.0;
  std::vector<double> f01s;
  f01s.reserve(records.size());
  for (const auto& r : records) {
    const double resid = r.f01_hz - predict_f01(r.rn_ohm, out.model);
    out.residuals_hz.push_back(resid);
    sse += resid * resid;
    f01s.push_back(r.f01_hz);
  }
  out.rms_residual_hz = std::sqrt(sse / static_cast<double>(records.size()));

  const StatSummary s = summarize(f01s, Filter::NONE);
  const auto [mn, mx] = std::minmax_element(f01s.begin(), f01s.end());
  out.measured_spread_total = (*mx - *mn) / s.mean;
  out.measured_spread_rsd = s.rsd;
  return out;
}

BinningReport bin_chips(std::span<const ChipJunctions> chips,
                        const AbModel& model, double target_f01_hz,
                        std::span<const FreqBin> bins) {
  if (chips.empty()) fail(Errc::EmptyInput, "bin_chips: no chips");
  if (bins.empty()) fail(Errc::InvalidParams, "bin_chips: no bins");

  std::vector<FreqBin> sorted(bins.begin(), bins.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const FreqBin& x, const FreqBin& y) { return x.lo_hz < y.lo_hz; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i].lo_hz < sorted[i].hi_hz))
      fail(Errc::InvalidParams, "bin_chips: bin with lo >= hi");
    if (i > 0 && sorted[i].lo_hz < sorted[i - 1].hi_hz)
      fail(Errc::OverlappingBins,
           "bin_chips: bins [" + std::to_string(sorted[i - 1].lo_hz) + "," +
               std::to_string(sorted[i - 1].hi_hz) + ") and [" +
               std::to_string(sorted[i].lo_hz) + "," +
               std::to_string(sorted[i].hi_hz) + ") overlap");
  }

  BinningReport out;
  out.bins = sorted;
  out.bin_counts.assign(sorted.size(), 0);
  out.target_f01_hz = target_f01_hz;

  std::vector<double> all_f01;
  for (const auto& chip : chips) {
    ChipBinning cb;
    cb.chip_id = chip.chip_id;
    int chip_bin = -2;  // unset
    for (const auto& [qubit, rn] : chip.qubit_rn_ohm) {
      const double f01 = predict_f01(rn, model);
      cb.qubits.push_back({qubit, rn, f01});
      all_f01.push_back(f01);
      int qbin = -1;
      for (std::size_t b = 0; b < sorted.size(); ++b) {
        if (f01 >= sorted[b].lo_hz && f01 < sorted[b].hi_hz) {
          qbin = static_cast<int>(b);
          break;
        }
      }
      if (chip_bin == -2)
        chip_bin = qbin;
      else if (chip_bin != qbin)
        chip_bin = -1;  // qubits straddle bins -> REJECT
    }
    cb.bin_index = (chip_bin == -2) ? -1 : chip_bin;
    if (cb.bin_index >= 0)
      ++out.bin_counts[static_cast<std::size_t>(cb.bin_index)];
    else
      ++out.n_rejected;
    out.chips.push_back(std::move(cb));
  }

  if (all_f01.size() >= 2) {
    const StatSummary s = summarize(all_f01, Filter::NONE);
    const auto [mn, mx] = std::minmax_element(all_f01.begin(), all_f01.end());
    out.predicted_mean_hz = s.mean;
    out.predicted_spread_total = (*mx - *mn) / s.mean;
    out.predicted_spread_rsd = s.rsd;
  } else if (all_f01.size() == 1) {
    out.predicted_mean_hz = all_f01.front();
  }
  return out;
}

TransitionResult transition_temps(const TransitionTrace& trace,
                                  double zero_threshold_ohm) {
  if (trace.points.size() < 4)
    fail(Errc::TooFewPoints, "transition_temps: need >= 4 points");
  if (!(zero_threshold_ohm > 0.0))
    fail(Errc::InvalidParams, "transition_temps: threshold must be positive");

  // Normal plateau: median resistance over the top quarter of the T range.
  const double t_max = trace.points.front().first;
  const double t_min = trace.points.back().first;
  if (!(t_max > t_min))
    fail(Errc::InvalidParams, "transition_temps: points must descend in T");
  const double t_cut = t_max - 0.25 * (t_max - t_min);
  std::vector<double> plateau_r;
  for (const auto& [t, r] : trace.points)
    if (t >= t_cut) plateau_r.push_back(r);
  if (plateau_r.size() < 2)
    fail(Errc::NoTransition, "transition_temps: no normal-state plateau");
  std::sort(plateau_r.begin(), plateau_r.end());
  const double plateau = quantile_sorted(plateau_r, 0.5);
  if (plateau <= zero_threshold_ohm)
    fail(Errc::NoTransition,
         "transition_temps: plateau already below the zero threshold");

  TransitionResult out;
  out.plateau_ohm = plateau;
  bool have_onset = false;
  bool have_zero = false;
  for (const auto& [t, r] : trace.points) {  // descending T
    if (!have_onset && r < 0.9 * plateau) {
      out.t_onset_k = t;
      have_onset = true;
    }
    if (!have_zero && r < zero_threshold_ohm) {
      out.t_zero_k = t;
      have_zero = true;
      break;
    }
  }
  if (!have_onset || !have_zero)
    fail(Errc::NoTransition,
         "transition_temps: trace does not span both the normal and the "
         "superconducting plateau");
  return out;
}

std::string serialize_ab_model(const AbModel& model, const TcFitReport* fit) {
  nlohmann::json j;
  j["schema_version"] = "qpcm-abmodel/1";
  j["t_c_k"] = model.t_c_k;
  j["c_q_f"] = model.c_q_f;
  j["provenance"] =
      model.provenance == ModelProvenance::FITTED ? "FITTED" : "ASSUMED";
  if (fit) {
    j["fit"] = {{"rms_residual_hz", fit->rms_residual_hz},
                {"n", fit->n},
                {"rn_min_ohm", fit->rn_min_ohm},
                {"rn_max_ohm", fit->rn_max_ohm}};
  }
  return j.dump(1) + "\n";
}

AbModel parse_ab_model_json(std::string_view bytes,
                            const std::string& filename) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::SchemaMismatch, filename + ": " + e.what());
  }
  AbModel m;
  try {
    if (j.at("schema_version").get<std::string>() != "qpcm-abmodel/1")
      fail(Errc::SchemaMismatch, filename + ": unsupported schema_version");
    m.t_c_k = j.at("t_c_k").get<double>();
    m.c_q_f = j.at("c_q_f").get<double>();
    const std::string prov = j.at("provenance").get<std::string>();
    if (prov == "FITTED")
      m.provenance = ModelProvenance::FITTED;
    else if (prov == "ASSUMED")
      m.provenance = ModelProvenance::ASSUMED;
    else
      fail(Errc::SchemaMismatch, filename + ": unknown provenance");
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::SchemaMismatch, filename + ": " + e.what());
  }
  if (!m.valid())
    fail(Errc::InvalidModel, filename + ": Tc must be in (0,2) K and Cq > 0");
  return m;
}

}  // namespace qpcm
