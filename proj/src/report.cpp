#include "qpcm/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "qpcm/errors.hpp"
#include "qpcm/frequency_model.hpp"
#include "qpcm/iv_analysis.hpp"
#include "qpcm/junction_analysis.hpp"
#include "qpcm/shorts_analysis.hpp"
#include "qpcm/stats.hpp"
#include "qpcm/svg_render.hpp"

namespace qpcm {

using nlohmann::json;
namespace fs = std::filesystem;

json stat_summary_json(const StatSummary& s) {
  return {{"n", s.n},          {"mean", s.mean},
          {"std", s.std},      {"rsd", s.rsd},
          {"n_excluded", s.n_excluded}, {"filter", to_string(s.filter)}};
}

namespace {

json skipped(const std::string& reason) {
  return {{"status", "SKIPPED"}, {"reason", reason}};
}

json build_sheet_section(const WaferDataset& ds,
                         std::map<Layer, SheetStats>& sheet_by_layer) {
  if (ds.sheets.empty()) return skipped("no sheet map in the manifest");

  std::map<Layer, std::vector<SheetSample>> by_layer;
  for (const auto& s : ds.sheets) by_layer[s.layer].push_back(s);

  json layers = json::object();
  for (const auto& [layer, samples] : by_layer) {
    const SheetStats st = sheet_stats(samples);
    sheet_by_layer[layer] = st;
    json map_json = json::array();
    for (const auto& m : st.normalized_map)
      map_json.push_back({{"site_index", m.site_index},
                          {"x_mm", m.x_mm},
                          {"y_mm", m.y_mm},
                          {"value", m.value}});
    layers[to_string(layer)] = {{"summary", stat_summary_json(st.summary)},
                                {"normalized_map", std::move(map_json)}};
  }
  return {{"status", "OK"}, {"layers", std::move(layers)}};
}

json offset_fit_json(const OffsetFit& f) {
  return {{"delta_w_nm", f.delta_w_nm},
          {"delta_w_se_nm", f.delta_w_se_nm},
          {"slope_ohm_nm", f.slope_ohm_nm},
          {"r_squared", f.r_squared},
          {"n_widths", f.n_widths}};
}

json build_shorts_section(const WaferDataset& ds, const AnalysisConfig& cfg,
                          const std::map<Layer, SheetStats>& sheet_by_layer,
                          double& area_rsd_out, bool& have_area_rsd) {
  have_area_rsd = false;
  if (ds.shorts.empty()) return skipped("no shorts file in the manifest");

  std::map<Layer, std::map<double, std::vector<ShortRecord>>> grouped;
  for (const auto& r : ds.shorts)
    grouped[r.layer][r.design_width_nm].push_back(r);

  std::map<Layer, WidthVariability> qubit_widths;
  json layers = json::object();
  for (const auto& [layer, by_width] : grouped) {
    double rsd_sheet = cfg.assumed_sheet_rsd;
    bool measured = false;
    if (!cfg.use_assumed_sheet_rsd) {
      const auto it = sheet_by_layer.find(layer);
      if (it != sheet_by_layer.end()) {
        rsd_sheet = it->second.summary.rsd;
        measured = true;
      }
    }

    const double qubit_width = layer == Layer::BE ? cfg.qubit_width_be_nm
                                                  : cfg.qubit_width_te_nm;
    json widths = json::array();
    for (const auto& [w, records] : by_width) {
      const WidthVariability v = width_rsd(records, rsd_sheet);
      widths.push_back({{"design_width_nm", v.design_width_nm},
                        {"rsd_r", v.rsd_r},
                        {"rsd_sheet", v.rsd_sheet},
                        {"rsd_w", v.rsd_w},
                        {"n_used", v.n_used},
                        {"n_excluded_status", v.n_excluded_status},
                        {"n_excluded_iqr", v.n_excluded_iqr}});
      if (w == qubit_width) qubit_widths.emplace(layer, v);
    }

    json layer_json = {{"rsd_sheet_used", rsd_sheet},
                       {"rsd_sheet_source", measured ? "measured" : "assumed"},
                       {"widths", std::move(widths)}};
    const auto means = group_width_means(ds.shorts, layer);
    if (means.size() >= 3) {
      layer_json["offset"] = offset_fit_json(
          width_offset(means, layer, cfg.offset_fit_weighted));
    } else {
      layer_json["offset"] = nullptr;
    }
    layers[to_string(layer)] = std::move(layer_json);
  }

  json out = {{"status", "OK"}, {"layers", std::move(layers)}};
  const auto be = qubit_widths.find(Layer::BE);
  const auto te = qubit_widths.find(Layer::TE);
  if (be != qubit_widths.end() && te != qubit_widths.end()) {
    area_rsd_out = area_rsd(be->second, te->second);
    have_area_rsd = true;
    out["area_rsd"] = area_rsd_out;
    out["qubit_width_be_nm"] = cfg.qubit_width_be_nm;
    out["qubit_width_te_nm"] = cfg.qubit_width_te_nm;
  } else {
    out["area_rsd"] = nullptr;
  }
  return out;
}

json build_junction_section(const WaferDataset& ds, const AnalysisConfig& cfg,
                            bool have_area_rsd, double area_rsd_value,
                            PipelineOutput& bundle) {
  if (ds.junctions.empty()) return skipped("no junctions file in the manifest");

  const YieldReport yield = apply_spec(ds.junctions, cfg.spec);
  json map_json = json::array();
  std::vector<MapCell> cells;
  for (const auto& p : yield.map) {
    map_json.push_back({{"die_row", p.die_row},
                        {"die_col", p.die_col},
                        {"junction_id", p.junction_id},
                        {"pass", p.pass}});
    cells.push_back({p.die_row, p.die_col, p.x_mm, p.y_mm, p.pass ? 1.0 : 0.0});
  }
  bundle.artifacts["wafer_yield_map.svg"] = render_wafer_map(
      cells, ds.geometry,
      {"Junction yield map (" + ds.wafer_id + ")", "", MapMode::PASS_FAIL,
       std::nan(""), std::nan("")});

  json out = {{"status", "OK"},
              {"yield",
               {{"n_total", yield.n_total},
                {"n_pass", yield.n_pass},
                {"yield_fraction", yield.yield_fraction},
                {"spec_r_min_ohm", yield.spec.r_min_ohm},
                {"spec_r_max_ohm", yield.spec.r_max_ohm},
                {"map", std::move(map_json)}}}};

  // Resistance statistics over the qubit-size junctions when that size is
  // present, otherwise over every passing junction.
  std::vector<JunctionRecord> passing;
  bool qubit_size_only = false;
  for (const auto& j : ds.junctions)
    if (j.status == JunctionStatus::OK && cfg.spec.passes(j.resistance_ohm) &&
        j.design_area_um2 == cfg.qubit_area_um2)
      passing.push_back(j);
  if (!passing.empty()) {
    qubit_size_only = true;
  } else {
    for (const auto& j : ds.junctions)
      if (j.status == JunctionStatus::OK && cfg.spec.passes(j.resistance_ohm))
        passing.push_back(j);
  }

  if (passing.size() >= 10) {
    const ResistanceStats st = resistance_stats(passing, cfg.histogram_bins);
    out["stats"] = {{"population", qubit_size_only ? "qubit_size" : "all"},
                    {"summary", stat_summary_json(st.summary)},
                    {"gaussian", {{"mu", st.mu}, {"sigma", st.sigma}}}};
    const double deviation =
        std::abs(st.mu - cfg.target_r_ohm) / cfg.target_r_ohm;
    out["target"] = {{"target_r_ohm", cfg.target_r_ohm},
                     {"deviation_fraction", deviation}};
    bundle.artifacts["rjj_histogram.svg"] = render_histogram(
        st.histogram, {"Junction resistance (" + ds.wafer_id + ")",
                       "resistance [ohm]", GaussianOverlay{st.mu, st.sigma}});
    if (have_area_rsd) {
      const OxideVariability ox = oxide_rsd(st.summary.rsd, area_rsd_value);
      out["oxide"] = {{"rsd_jj", ox.rsd_jj},
                      {"rsd_a", ox.rsd_a},
                      {"rsd_ra", ox.rsd_ra}};
    } else {
      out["oxide"] = nullptr;
    }
  } else {
    out["stats"] = nullptr;
    out["target"] = nullptr;
    out["oxide"] = nullptr;
  }
  return out;
}

json regime_fit_json(const RegimeFit& f) {
  json j = {{"v_lo", f.v_lo},           {"v_hi", f.v_hi},
            {"exponent", f.exponent},   {"prefactor", f.prefactor},
            {"r_squared", f.r_squared}, {"n_points", f.n_points}};
  if (f.regime == Regime::DIRECT) j["r_jj_ohm"] = f.r_jj_ohm;
  return j;
}

json build_iv_section(const WaferDataset& ds, const AnalysisConfig& cfg,
                      PipelineOutput& bundle) {
  if (ds.iv_traces.empty()) return skipped("no IV traces in the manifest");

  json traces = json::array();
  std::vector<VbtSample> vbt_samples;
  for (const auto& t : ds.iv_traces) {
    json tj = {{"junction_id", t.junction_id},
               {"die_row", t.die_row},
               {"die_col", t.die_col},
               {"area_um2", t.area_um2}};
    const BreakthroughResult bt = detect_breakthrough(t, cfg.iv);
    if (bt.detection == Detection::NONE) {
      tj["breakthrough"] = nullptr;
    } else {
      tj["breakthrough"] = {{"v_bt", bt.v_bt},
                            {"detection", to_string(bt.detection)}};
      vbt_samples.push_back({t.area_um2, bt.v_bt});
    }
    // A junction that never shows an ohmic window is a device outcome, not a
    // pipeline failure; record it per trace.
    try {
      const auto fits = segment_and_fit(t, cfg.iv);
      tj["direct"] = nullptr;
      tj["trap_assisted"] = nullptr;
      for (const auto& f : fits) {
        if (f.regime == Regime::DIRECT) tj["direct"] = regime_fit_json(f);
        if (f.regime == Regime::TRAP_ASSISTED)
          tj["trap_assisted"] = regime_fit_json(f);
      }
      tj["error"] = nullptr;
    } catch (const Error& e) {
      tj["direct"] = nullptr;
      tj["trap_assisted"] = nullptr;
      tj["error"] = e.what();
    }
    traces.push_back(std::move(tj));
  }

  json out = {{"status", "OK"},
              {"n_traces", static_cast<std::int64_t>(ds.iv_traces.size())},
              {"traces", std::move(traces)}};

  std::set<double> sizes;
  std::map<double, int> per_size_counts;
  for (const auto& s : vbt_samples) {
    sizes.insert(s.area_um2);
    ++per_size_counts[s.area_um2];
  }
  const bool enough =
      sizes.size() >= 2 &&
      std::all_of(per_size_counts.begin(), per_size_counts.end(),
                  [&](const auto& kv) {
                    return kv.second >= cfg.iv.vbt_min_per_size;
                  });
  if (enough) {
    const VbtStats v = vbt_stats(vbt_samples, cfg.iv, cfg.qubit_area_um2);
    json per_size = json::array();
    for (const auto& g : v.per_size)
      per_size.push_back({{"area_um2", g.area_um2},
                          {"summary", stat_summary_json(g.summary)}});
    out["vbt"] = {{"per_size", std::move(per_size)},
                  {"pooled", stat_summary_json(v.pooled)},
                  {"qubit_size", v.has_qubit_size
                                     ? stat_summary_json(v.qubit_size)
                                     : json(nullptr)},
                  {"max_pairwise_delta_v", v.max_pairwise_delta_v},
                  {"area_dependent", v.area_dependent},
                  {"verdict", v.area_dependent
                                  ? "significant area dependence"
                                  : "no significant area dependence"}};

    // Pooled V_BT histogram.
    std::vector<double> vs;
    for (const auto& s : vbt_samples) vs.push_back(s.v_bt);
    const auto [mn, mx] = std::minmax_element(vs.begin(), vs.end());
    Histogram h;
    const int nb = cfg.histogram_bins;
    double lo = *mn, hi = *mx;
    if (hi <= lo) hi = lo + 1e-3;
    for (int i = 0; i <= nb; ++i)
      h.edges.push_back(lo + (hi - lo) * i / nb);
    h.counts.assign(static_cast<std::size_t>(nb), 0);
    for (double v : vs) {
      auto b = static_cast<std::int64_t>((v - lo) / (hi - lo) * nb);
      b = std::clamp<std::int64_t>(b, 0, nb - 1);
      ++h.counts[static_cast<std::size_t>(b)];
    }
    bundle.artifacts["vbt_histogram.svg"] = render_histogram(
        h, {"Breakthrough voltage (" + ds.wafer_id + ")", "V_BT [V]",
            std::nullopt});
  } else {
    out["vbt"] = nullptr;
  }
  return out;
}

json build_frequency_section(const WaferDataset& ds,
                             const AnalysisConfig& cfg) {
  const bool have_cryo = !ds.cryo.empty();
  const bool have_transition = ds.transition.has_value();
  if (!have_cryo && !have_transition)
    return skipped("no cryo records or transition trace in the manifest");

  json out = {{"status", "OK"}};

  AbModel model{0.71, cfg.cq_f, ModelProvenance::ASSUMED};
  if (cfg.assumed_tc_k) model.t_c_k = *cfg.assumed_tc_k;
  json fit_json = nullptr;
  if (have_cryo && !cfg.assumed_tc_k) {
    double rn_min = ds.cryo.front().rn_ohm, rn_max = rn_min;
    for (const auto& r : ds.cryo) {
      rn_min = std::min(rn_min, r.rn_ohm);
      rn_max = std::max(rn_max, r.rn_ohm);
    }
    if (ds.cryo.size() >= 5 && rn_max / rn_min >= 1.5) {
      const TcFitReport fit = fit_tc(ds.cryo, cfg.cq_f);
      model = fit.model;
      fit_json = {{"t_c_k", fit.model.t_c_k},
                  {"rms_residual_hz", fit.rms_residual_hz},
                  {"n", fit.n},
                  {"rn_min_ohm", fit.rn_min_ohm},
                  {"rn_max_ohm", fit.rn_max_ohm},
                  {"measured_spread_total", fit.measured_spread_total},
                  {"measured_spread_rsd", fit.measured_spread_rsd}};
    } else {
      fit_json = {{"error",
                   "records do not meet the fit preconditions (n >= 5, Rn "
                   "span >= 1.5x); using the assumed model"}};
    }
  }
  out["fit"] = std::move(fit_json);
  out["model"] = {{"t_c_k", model.t_c_k},
                  {"c_q_f", model.c_q_f},
                  {"provenance", model.provenance == ModelProvenance::FITTED
                                     ? "FITTED"
                                     : "ASSUMED"},
                  {"charging_term_hz", model.charging_term_hz()},
                  {"target_f01_hz", cfg.target_f01_hz},
                  {"target_resistance_ohm",
                   target_resistance(cfg.target_f01_hz, model)}};

  if (have_cryo) {
    std::map<std::string, ChipJunctions> chips;
    for (const auto& r : ds.cryo) {
      auto& c = chips[r.chip_id];
      c.chip_id = r.chip_id;
      c.qubit_rn_ohm.emplace_back(r.qubit_id, r.rn_ohm);
    }
    std::vector<ChipJunctions> chip_list;
    chip_list.reserve(chips.size());
    for (auto& [_, c] : chips) chip_list.push_back(std::move(c));
    std::vector<FreqBin> bins;
    for (std::size_t i = 0; i < cfg.freq_bins_hz.size(); ++i)
      bins.push_back({cfg.freq_bins_hz[i].first, cfg.freq_bins_hz[i].second,
                      "bin" + std::to_string(i)});
    const BinningReport br =
        bin_chips(chip_list, model, cfg.target_f01_hz, bins);
    json chips_json = json::array();
    for (const auto& c : br.chips) {
      json qubits = json::array();
      for (const auto& q : c.qubits)
        qubits.push_back({{"qubit_id", q.qubit_id},
                          {"rn_ohm", q.rn_ohm},
                          {"f01_hz", q.f01_hz}});
      chips_json.push_back({{"chip_id", c.chip_id},
                            {"bin", c.bin_index},
                            {"qubits", std::move(qubits)}});
    }
    json bins_json = json::array();
    for (std::size_t i = 0; i < br.bins.size(); ++i)
      bins_json.push_back({{"lo_hz", br.bins[i].lo_hz},
                           {"hi_hz", br.bins[i].hi_hz},
                           {"count", br.bin_counts[i]}});
    out["binning"] = {{"bins", std::move(bins_json)},
                      {"chips", std::move(chips_json)},
                      {"n_rejected", br.n_rejected},
                      {"predicted_mean_hz", br.predicted_mean_hz},
                      {"predicted_spread_total", br.predicted_spread_total},
                      {"predicted_spread_rsd", br.predicted_spread_rsd}};
  } else {
    out["binning"] = nullptr;
  }

  if (have_transition) {
    try {
      const TransitionResult tr =
          transition_temps(*ds.transition, cfg.transition_zero_threshold_ohm);
      out["transition"] = {{"t_onset_k", tr.t_onset_k},
                           {"t_zero_k", tr.t_zero_k},
                           {"plateau_ohm", tr.plateau_ohm}};
    } catch (const Error& e) {
      out["transition"] = {{"error", e.what()}};
    }
  } else {
    out["transition"] = nullptr;
  }
  return out;
}

json build_cryo_section(const WaferDataset& ds) {
  if (ds.cryo.empty()) return skipped("no cryo records in the manifest");
  std::vector<double> t1s, t2s;
  for (const auto& r : ds.cryo) {
    if (r.t1_s) t1s.push_back(*r.t1_s);
    if (r.t2star_s) t2s.push_back(*r.t2star_s);
  }
  json out = {{"status", "OK"},
              {"n_records", static_cast<std::int64_t>(ds.cryo.size())}};
  out["t1"] = t1s.size() >= 2 ? stat_summary_json(summarize(t1s, Filter::NONE))
                              : json(nullptr);
  out["t2star"] = t2s.size() >= 2
                      ? stat_summary_json(summarize(t2s, Filter::NONE))
                      : json(nullptr);
  return out;
}

}  // namespace

PipelineOutput run_pipeline(const WaferDataset& dataset,
                            const AnalysisConfig& config,
                            const std::vector<InputProvenance>& inputs) {
  PipelineOutput out;
  json& r = out.report;
  r["schema_version"] = kReportSchemaVersion;
  r["tool_version"] = kToolVersion;
  r["wafer_id"] = dataset.wafer_id;
  r["config_hash"] = config.hash();
  json inputs_json = json::array();
  for (const auto& in : inputs)
    inputs_json.push_back(
        {{"kind", in.kind}, {"path", in.path}, {"checksum", in.checksum}});
  r["inputs"] = std::move(inputs_json);

  std::map<Layer, SheetStats> sheet_by_layer;
  r["sheet"] = build_sheet_section(dataset, sheet_by_layer);

  double area_rsd_value = 0.0;
  bool have_area_rsd = false;
  r["shorts"] = build_shorts_section(dataset, config, sheet_by_layer,
                                     area_rsd_value, have_area_rsd);

  // Sheet maps as artifacts.
  for (const auto& [layer, st] : sheet_by_layer) {
    std::vector<MapCell> cells;
    for (const auto& m : st.normalized_map)
      cells.push_back({m.site_index, 0, m.x_mm, m.y_mm, m.value});
    WaferGeometry site_geom = dataset.geometry;
    site_geom.pitch_x_mm = 12.0;  // probe sites, not dies
    site_geom.pitch_y_mm = 12.0;
    std::string name = std::string("sheet_map_") +
                       (layer == Layer::BE ? "be" : "te") + ".svg";
    out.artifacts[name] = render_wafer_map(
        cells, site_geom,
        {"Normalized sheet resistance (" + dataset.wafer_id + ", " +
             to_string(layer) + ")",
         "R_sq / mean", MapMode::SCALAR, std::nan(""), std::nan("")});
  }

  r["junctions"] = build_junction_section(dataset, config, have_area_rsd,
                                          area_rsd_value, out);
  r["iv"] = build_iv_section(dataset, config, out);
  r["frequency"] = build_frequency_section(dataset, config);
  r["cryo"] = build_cryo_section(dataset);

  json artifact_names = json::array();
  for (const auto& [name, _] : out.artifacts) artifact_names.push_back(name);
  r["artifacts"] = std::move(artifact_names);

  validate_report(r);
  return out;
}

PipelineOutput run_pipeline(const std::string& manifest_path,
                            const AnalysisConfig& config) {
  const FileManifest manifest = load_manifest(manifest_path);
  std::vector<InputProvenance> inputs;
  for (const auto& f : manifest.files) {
    const std::string bytes =
        read_file((fs::path(manifest.base_dir) / f.path).string());
    inputs.push_back({to_string(f.kind), f.path, fnv1a64_hex(bytes)});
  }
  const WaferDataset ds = load_wafer(manifest);
  return run_pipeline(ds, config, inputs);
}

std::string write_report_bundle(const PipelineOutput& out,
                                const std::string& dir) {
  fs::create_directories(dir);
  const std::string report_path = (fs::path(dir) / "report.json").string();
  write_file(report_path, out.report.dump(1) + "\n");
  for (const auto& [name, content] : out.artifacts)
    write_file((fs::path(dir) / name).string(), content);

  // Detachable envelope; the one place a timestamp lives.
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  json meta = {{"generated_at", stamp},
               {"report", "report.json"},
               {"tool_version", kToolVersion}};
  write_file((fs::path(dir) / "report.meta.json").string(),
             meta.dump(1) + "\n");
  return report_path;
}

// ---------------------------------------------------------------------------
// Report validation: required keys, types, and no unknown fields anywhere.

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(Errc::SchemaMismatch, "report." + where + ": " + what);
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) bad(where, "must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) bad(where, "unknown field '" + key + "'");
}

const json& get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) bad(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

void expect_number(const json& j, const char* key, const std::string& where) {
  if (!get(j, key, where).is_number())
    bad(where, std::string("'") + key + "' must be a number");
}

void expect_string(const json& j, const char* key, const std::string& where) {
  if (!get(j, key, where).is_string())
    bad(where, std::string("'") + key + "' must be a string");
}

bool is_skipped(const json& j, const std::string& where) {
  if (get(j, "status", where).get<std::string>() == "SKIPPED") {
    check_keys(j, {"status", "reason"}, where);
    expect_string(j, "reason", where);
    return true;
  }
  return false;
}

void validate_summary(const json& j, const std::string& where) {
  check_keys(j, {"n", "mean", "std", "rsd", "n_excluded", "filter"}, where);
  for (const char* k : {"n", "mean", "std", "rsd", "n_excluded"})
    expect_number(j, k, where);
  expect_string(j, "filter", where);
}

void validate_offset(const json& j, const std::string& where) {
  check_keys(j,
             {"delta_w_nm", "delta_w_se_nm", "slope_ohm_nm", "r_squared",
              "n_widths"},
             where);
  for (const char* k :
       {"delta_w_nm", "delta_w_se_nm", "slope_ohm_nm", "r_squared", "n_widths"})
    expect_number(j, k, where);
}

void validate_sheet(const json& j) {
  if (is_skipped(j, "sheet")) return;
  check_keys(j, {"status", "layers"}, "sheet");
  for (const auto& [layer, lj] : get(j, "layers", "sheet").items()) {
    const std::string where = "sheet.layers." + layer;
    check_keys(lj, {"summary", "normalized_map"}, where);
    validate_summary(lj.at("summary"), where + ".summary");
    for (const auto& m : get(lj, "normalized_map", where))
      check_keys(m, {"site_index", "x_mm", "y_mm", "value"},
                 where + ".normalized_map[]");
  }
}

void validate_shorts(const json& j) {
  if (is_skipped(j, "shorts")) return;
  check_keys(j,
             {"status", "layers", "area_rsd", "qubit_width_be_nm",
              "qubit_width_te_nm"},
             "shorts");
  for (const auto& [layer, lj] : get(j, "layers", "shorts").items()) {
    const std::string where = "shorts.layers." + layer;
    check_keys(lj, {"rsd_sheet_used", "rsd_sheet_source", "widths", "offset"},
               where);
    expect_number(lj, "rsd_sheet_used", where);
    expect_string(lj, "rsd_sheet_source", where);
    for (const auto& w : get(lj, "widths", where))
      check_keys(w,
                 {"design_width_nm", "rsd_r", "rsd_sheet", "rsd_w", "n_used",
                  "n_excluded_status", "n_excluded_iqr"},
                 where + ".widths[]");
    if (!lj.at("offset").is_null())
      validate_offset(lj.at("offset"), where + ".offset");
  }
}

void validate_junctions(const json& j) {
  if (is_skipped(j, "junctions")) return;
  check_keys(j, {"status", "yield", "stats", "target", "oxide"}, "junctions");
  const json& y = get(j, "yield", "junctions");
  check_keys(y,
             {"n_total", "n_pass", "yield_fraction", "spec_r_min_ohm",
              "spec_r_max_ohm", "map"},
             "junctions.yield");
  for (const auto& m : get(y, "map", "junctions.yield"))
    check_keys(m, {"die_row", "die_col", "junction_id", "pass"},
               "junctions.yield.map[]");
  if (!j.at("stats").is_null()) {
    const json& s = j.at("stats");
    check_keys(s, {"population", "summary", "gaussian"}, "junctions.stats");
    validate_summary(s.at("summary"), "junctions.stats.summary");
    check_keys(s.at("gaussian"), {"mu", "sigma"}, "junctions.stats.gaussian");
  }
  if (!j.at("target").is_null())
    check_keys(j.at("target"), {"target_r_ohm", "deviation_fraction"},
               "junctions.target");
  if (!j.at("oxide").is_null())
    check_keys(j.at("oxide"), {"rsd_jj", "rsd_a", "rsd_ra"},
               "junctions.oxide");
}

void validate_regime(const json& j, const std::string& where) {
  std::set<std::string> allowed = {"v_lo",      "v_hi",      "exponent",
                                   "prefactor", "r_squared", "n_points"};
  if (j.contains("r_jj_ohm")) allowed.insert("r_jj_ohm");
  check_keys(j, allowed, where);
}

void validate_iv(const json& j) {
  if (is_skipped(j, "iv")) return;
  check_keys(j, {"status", "n_traces", "traces", "vbt"}, "iv");
  for (const auto& t : get(j, "traces", "iv")) {
    check_keys(t,
               {"junction_id", "die_row", "die_col", "area_um2",
                "breakthrough", "direct", "trap_assisted", "error"},
               "iv.traces[]");
    if (!t.at("breakthrough").is_null())
      check_keys(t.at("breakthrough"), {"v_bt", "detection"},
                 "iv.traces[].breakthrough");
    if (!t.at("direct").is_null())
      validate_regime(t.at("direct"), "iv.traces[].direct");
    if (!t.at("trap_assisted").is_null())
      validate_regime(t.at("trap_assisted"), "iv.traces[].trap_assisted");
  }
  if (!j.at("vbt").is_null()) {
    const json& v = j.at("vbt");
    check_keys(v,
               {"per_size", "pooled", "qubit_size", "max_pairwise_delta_v",
                "area_dependent", "verdict"},
               "iv.vbt");
    for (const auto& g : get(v, "per_size", "iv.vbt")) {
      check_keys(g, {"area_um2", "summary"}, "iv.vbt.per_size[]");
      validate_summary(g.at("summary"), "iv.vbt.per_size[].summary");
    }
    validate_summary(v.at("pooled"), "iv.vbt.pooled");
    if (!v.at("qubit_size").is_null())
      validate_summary(v.at("qubit_size"), "iv.vbt.qubit_size");
  }
}

void validate_frequency(const json& j) {
  if (is_skipped(j, "frequency")) return;
  check_keys(j, {"status", "model", "fit", "binning", "transition"},
             "frequency");
  check_keys(get(j, "model", "frequency"),
             {"t_c_k", "c_q_f", "provenance", "charging_term_hz",
              "target_f01_hz", "target_resistance_ohm"},
             "frequency.model");
  if (!j.at("fit").is_null()) {
    const json& f = j.at("fit");
    if (f.contains("error")) {
      check_keys(f, {"error"}, "frequency.fit");
    } else {
      check_keys(f,
                 {"t_c_k", "rms_residual_hz", "n", "rn_min_ohm", "rn_max_ohm",
                  "measured_spread_total", "measured_spread_rsd"},
                 "frequency.fit");
    }
  }
  if (!j.at("binning").is_null()) {
    const json& b = j.at("binning");
    check_keys(b,
               {"bins", "chips", "n_rejected", "predicted_mean_hz",
                "predicted_spread_total", "predicted_spread_rsd"},
               "frequency.binning");
    for (const auto& bin : get(b, "bins", "frequency.binning"))
      check_keys(bin, {"lo_hz", "hi_hz", "count"}, "frequency.binning.bins[]");
    for (const auto& c : get(b, "chips", "frequency.binning")) {
      check_keys(c, {"chip_id", "bin", "qubits"}, "frequency.binning.chips[]");
      for (const auto& q : get(c, "qubits", "frequency.binning.chips[]"))
        check_keys(q, {"qubit_id", "rn_ohm", "f01_hz"},
                   "frequency.binning.chips[].qubits[]");
    }
  }
  if (!j.at("transition").is_null()) {
    const json& t = j.at("transition");
    if (t.contains("error"))
      check_keys(t, {"error"}, "frequency.transition");
    else
      check_keys(t, {"t_onset_k", "t_zero_k", "plateau_ohm"},
                 "frequency.transition");
  }
}

void validate_cryo(const json& j) {
  if (is_skipped(j, "cryo")) return;
  check_keys(j, {"status", "n_records", "t1", "t2star"}, "cryo");
  if (!j.at("t1").is_null()) validate_summary(j.at("t1"), "cryo.t1");
  if (!j.at("t2star").is_null())
    validate_summary(j.at("t2star"), "cryo.t2star");
}

}  // namespace

void validate_report(const nlohmann::json& report) {
  check_keys(report,
             {"schema_version", "tool_version", "wafer_id", "config_hash",
              "inputs", "sheet", "shorts", "junctions", "iv", "frequency",
              "cryo", "artifacts"},
             "(root)");
  if (get(report, "schema_version", "(root)").get<std::string>() !=
      kReportSchemaVersion)
    bad("(root)", "unsupported schema_version");
  expect_string(report, "tool_version", "(root)");
  expect_string(report, "wafer_id", "(root)");
  expect_string(report, "config_hash", "(root)");
  for (const auto& in : get(report, "inputs", "(root)"))
    check_keys(in, {"kind", "path", "checksum"}, "inputs[]");
  for (const auto& a : get(report, "artifacts", "(root)"))
    if (!a.is_string()) bad("artifacts", "entries must be strings");
  validate_sheet(report.at("sheet"));
  validate_shorts(report.at("shorts"));
  validate_junctions(report.at("junctions"));
  validate_iv(report.at("iv"));
  validate_frequency(report.at("frequency"));
  validate_cryo(report.at("cryo"));
}

}  // namespace qpcm
