#include "qpcm/config.hpp"

#include <json.hpp>
#include <set>

#include "qpcm/errors.hpp"
#include "qpcm/ingest.hpp"

namespace qpcm {

using nlohmann::json;

namespace {

json to_json(const AnalysisConfig& c) {
  json j;
  j["schema_version"] = "qpcm-config/1";
  j["spec_r_min_ohm"] = c.spec.r_min_ohm;
  j["spec_r_max_ohm"] = c.spec.r_max_ohm;
  j["iv_m_tol"] = c.iv.m_tol;
  j["iv_jump_ratio"] = c.iv.jump_ratio;
  j["iv_noise_floor_a"] = c.iv.noise_floor_a;
  j["iv_min_window"] = c.iv.min_window;
  j["iv_r_series_ohm"] = c.iv.r_series_ohm;
  j["iv_vbt_min_per_size"] = c.iv.vbt_min_per_size;
  j["histogram_bins"] = c.histogram_bins;
  j["assumed_sheet_rsd"] = c.assumed_sheet_rsd;
  j["use_assumed_sheet_rsd"] = c.use_assumed_sheet_rsd;
  j["offset_fit_weighted"] = c.offset_fit_weighted;
  j["qubit_area_um2"] = c.qubit_area_um2;
  j["qubit_width_be_nm"] = c.qubit_width_be_nm;
  j["qubit_width_te_nm"] = c.qubit_width_te_nm;
  j["cq_f"] = c.cq_f;
  if (c.assumed_tc_k)
    j["assumed_tc_k"] = *c.assumed_tc_k;
  else
    j["assumed_tc_k"] = nullptr;
  j["target_f01_hz"] = c.target_f01_hz;
  j["target_r_ohm"] = c.target_r_ohm;
  json bins = json::array();
  for (const auto& [lo, hi] : c.freq_bins_hz)
    bins.push_back(json::array({lo, hi}));
  j["freq_bins_hz"] = std::move(bins);
  j["transition_zero_threshold_ohm"] = c.transition_zero_threshold_ohm;
  return j;
}

}  // namespace

std::string AnalysisConfig::canonical_json() const {
  return to_json(*this).dump(1) + "\n";
}

std::string AnalysisConfig::hash() const { return fnv1a64_hex(canonical_json()); }

AnalysisConfig parse_config_json(std::string_view bytes,
                                 const std::string& filename) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    fail(Errc::ConfigError, filename + ": " + e.what());
  }
  if (!j.is_object())
    fail(Errc::ConfigError, filename + ": config must be a JSON object");

  AnalysisConfig c;
  const json defaults = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (key != "schema_version" && !defaults.contains(key))
      fail(Errc::ConfigError, filename + ": unknown key '" + key + "'");
    (void)value;
  }
  try {
    if (j.value("schema_version", std::string("qpcm-config/1")) !=
        "qpcm-config/1")
      fail(Errc::ConfigError, filename + ": unsupported schema_version");
    c.spec.r_min_ohm = j.value("spec_r_min_ohm", c.spec.r_min_ohm);
    c.spec.r_max_ohm = j.value("spec_r_max_ohm", c.spec.r_max_ohm);
    c.iv.m_tol = j.value("iv_m_tol", c.iv.m_tol);
    c.iv.jump_ratio = j.value("iv_jump_ratio", c.iv.jump_ratio);
    c.iv.noise_floor_a = j.value("iv_noise_floor_a", c.iv.noise_floor_a);
    c.iv.min_window = j.value("iv_min_window", c.iv.min_window);
    c.iv.r_series_ohm = j.value("iv_r_series_ohm", c.iv.r_series_ohm);
    c.iv.vbt_min_per_size =
        j.value("iv_vbt_min_per_size", c.iv.vbt_min_per_size);
    c.histogram_bins = j.value("histogram_bins", c.histogram_bins);
    c.assumed_sheet_rsd = j.value("assumed_sheet_rsd", c.assumed_sheet_rsd);
    c.use_assumed_sheet_rsd =
        j.value("use_assumed_sheet_rsd", c.use_assumed_sheet_rsd);
    c.offset_fit_weighted =
        j.value("offset_fit_weighted", c.offset_fit_weighted);
    c.qubit_area_um2 = j.value("qubit_area_um2", c.qubit_area_um2);
    c.qubit_width_be_nm = j.value("qubit_width_be_nm", c.qubit_width_be_nm);
    c.qubit_width_te_nm = j.value("qubit_width_te_nm", c.qubit_width_te_nm);
    c.cq_f = j.value("cq_f", c.cq_f);
    if (j.contains("assumed_tc_k") && !j.at("assumed_tc_k").is_null())
      c.assumed_tc_k = j.at("assumed_tc_k").get<double>();
    c.target_f01_hz = j.value("target_f01_hz", c.target_f01_hz);
    c.target_r_ohm = j.value("target_r_ohm", c.target_r_ohm);
    if (j.contains("freq_bins_hz")) {
      c.freq_bins_hz.clear();
      for (const auto& b : j.at("freq_bins_hz")) {
        if (!b.is_array() || b.size() != 2)
          fail(Errc::ConfigError,
               filename + ": freq_bins_hz entries must be [lo, hi] pairs");
        c.freq_bins_hz.emplace_back(b[0].get<double>(), b[1].get<double>());
      }
    }
    c.transition_zero_threshold_ohm = j.value(
        "transition_zero_threshold_ohm", c.transition_zero_threshold_ohm);
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, filename + ": " + e.what());
  }

  if (!c.spec.valid())
    fail(Errc::ConfigError, filename + ": spec needs 0 < r_min < r_max");
  if (!(c.iv.m_tol > 0.0) || !(c.iv.jump_ratio > 1.0) ||
      !(c.iv.noise_floor_a >= 0.0) || c.iv.min_window < 2)
    fail(Errc::ConfigError, filename + ": invalid IV analysis settings");
  if (c.histogram_bins < 1)
    fail(Errc::ConfigError, filename + ": histogram_bins must be positive");
  if (!(c.cq_f > 0.0))
    fail(Errc::ConfigError, filename + ": cq_f must be positive");
  return c;
}

AnalysisConfig load_config(const std::string& path) {
  return parse_config_json(read_file(path), path);
}

}  // namespace qpcm
