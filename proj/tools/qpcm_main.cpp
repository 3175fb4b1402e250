// qpcm: wafer-level PCM analytics for superconducting-qubit fabrication.
//
// Exit codes: 0 ok, 1 analysis error, 2 input error, 3 configuration error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>

#include "qpcm/config.hpp"
#include "qpcm/cryo_fits.hpp"
#include "qpcm/errors.hpp"
#include "qpcm/frequency_model.hpp"
#include "qpcm/ingest.hpp"
#include "qpcm/report.hpp"
#include "qpcm/svg_render.hpp"
#include "qpcm/synth.hpp"

namespace fs = std::filesystem;
using namespace qpcm;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string manifest_path;
  std::string out_dir;
  double spec_min = -1.0;
  double spec_max = -1.0;
  std::uint64_t seed = 1;
};

AnalysisConfig effective_config(const GlobalOpts& g) {
  AnalysisConfig cfg;
  if (!g.config_path.empty()) cfg = load_config(g.config_path);
  if (g.spec_min > 0.0) cfg.spec.r_min_ohm = g.spec_min;
  if (g.spec_max > 0.0) cfg.spec.r_max_ohm = g.spec_max;
  if (!cfg.spec.valid())
    fail(Errc::ConfigError, "spec limits require 0 < r_min < r_max");
  return cfg;
}

void print_summary_line(const nlohmann::json& j, const char* section) {
  const auto& s = j.at(section);
  if (s.contains("status") && s.at("status") == "SKIPPED") {
    std::printf("  %-10s SKIPPED (%s)\n", section,
                s.at("reason").get<std::string>().c_str());
    return;
  }
  std::printf("  %-10s OK\n", section);
}

void print_report_summary(const nlohmann::json& r) {
  std::printf("wafer %s  (config %s)\n",
              r.at("wafer_id").get<std::string>().c_str(),
              r.at("config_hash").get<std::string>().c_str());
  for (const char* s :
       {"sheet", "shorts", "junctions", "iv", "frequency", "cryo"})
    print_summary_line(r, s);

  const auto& sheet = r.at("sheet");
  if (sheet.at("status") == "OK") {
    for (const auto& [layer, lj] : sheet.at("layers").items())
      std::printf("  sheet %s: rsd = %.4f (n = %lld)\n", layer.c_str(),
                  lj.at("summary").at("rsd").get<double>(),
                  lj.at("summary").at("n").get<long long>());
  }
  const auto& shorts = r.at("shorts");
  if (shorts.at("status") == "OK") {
    for (const auto& [layer, lj] : shorts.at("layers").items()) {
      if (!lj.at("offset").is_null())
        std::printf("  shorts %s: delta_w = %.1f +- %.1f nm\n", layer.c_str(),
                    lj.at("offset").at("delta_w_nm").get<double>(),
                    lj.at("offset").at("delta_w_se_nm").get<double>());
    }
    if (!shorts.at("area_rsd").is_null())
      std::printf("  area rsd = %.4f\n", shorts.at("area_rsd").get<double>());
  }
  const auto& junctions = r.at("junctions");
  if (junctions.at("status") == "OK") {
    const auto& y = junctions.at("yield");
    std::printf("  yield = %.4f (%lld/%lld)\n",
                y.at("yield_fraction").get<double>(),
                y.at("n_pass").get<long long>(),
                y.at("n_total").get<long long>());
    if (!junctions.at("stats").is_null()) {
      const auto& st = junctions.at("stats").at("summary");
      std::printf("  R_JJ: mean = %.1f ohm, rsd = %.4f (n = %lld)\n",
                  st.at("mean").get<double>(), st.at("rsd").get<double>(),
                  st.at("n").get<long long>());
    }
    if (!junctions.at("oxide").is_null())
      std::printf("  oxide rsd_ra = %.4f\n",
                  junctions.at("oxide").at("rsd_ra").get<double>());
  }
  const auto& iv = r.at("iv");
  if (iv.at("status") == "OK" && !iv.at("vbt").is_null()) {
    std::printf("  V_BT pooled: mean = %.3f V, rsd = %.4f (%s)\n",
                iv.at("vbt").at("pooled").at("mean").get<double>(),
                iv.at("vbt").at("pooled").at("rsd").get<double>(),
                iv.at("vbt").at("verdict").get<std::string>().c_str());
  }
  const auto& freq = r.at("frequency");
  if (freq.at("status") == "OK") {
    const auto& m = freq.at("model");
    std::printf("  AB model: Tc = %.4f K (%s), target R = %.0f ohm\n",
                m.at("t_c_k").get<double>(),
                m.at("provenance").get<std::string>().c_str(),
                m.at("target_resistance_ohm").get<double>());
  }
}

int run_report(const GlobalOpts& g, bool validate_only) {
  const AnalysisConfig cfg = effective_config(g);
  if (validate_only) {
    const FileManifest manifest = load_manifest(g.manifest_path);
    const WaferDataset ds = load_wafer(manifest);
    std::printf("manifest OK: wafer %s, %zu shorts, %zu sheet samples, "
                "%zu junctions, %zu IV traces, %zu cryo records%s\n",
                ds.wafer_id.c_str(), ds.shorts.size(), ds.sheets.size(),
                ds.junctions.size(), ds.iv_traces.size(), ds.cryo.size(),
                ds.transition ? ", 1 transition trace" : "");
    return 0;
  }
  const PipelineOutput out = run_pipeline(g.manifest_path, cfg);
  if (!g.out_dir.empty()) {
    const std::string path = write_report_bundle(out, g.out_dir);
    std::printf("report written to %s\n", path.c_str());
  }
  print_report_summary(out.report);
  return 0;
}

int run_section(const GlobalOpts& g, const char* section) {
  const AnalysisConfig cfg = effective_config(g);
  const PipelineOutput out = run_pipeline(g.manifest_path, cfg);
  std::printf("%s\n", out.report.at(section).dump(1).c_str());
  if (!g.out_dir.empty()) write_report_bundle(out, g.out_dir);
  return 0;
}

int run_map(const GlobalOpts& g, const std::string& quantity,
            const std::string& out_path) {
  const AnalysisConfig cfg = effective_config(g);
  const PipelineOutput out = run_pipeline(g.manifest_path, cfg);
  const std::string name = quantity == "yield"      ? "wafer_yield_map.svg"
                           : quantity == "sheet_be" ? "sheet_map_be.svg"
                                                    : "sheet_map_te.svg";
  const auto it = out.artifacts.find(name);
  if (it == out.artifacts.end())
    fail(Errc::EmptyMap, "no data for map '" + quantity + "' in this wafer");
  write_file(out_path, it->second);
  std::printf("map written to %s\n", out_path.c_str());
  return 0;
}

int run_synth(const GlobalOpts& g, const std::string& preset, int dies,
              int n_iv, int n_chips) {
  WaferLayout layout = standard_layout();
  VariationModel m;
  m.sheet_be = {0.202, 0.01, 0.012};
  m.sheet_te = {0.395, 0.01, 0.012};
  m.width_be = {-76.8, 0.0, 0.087};
  m.width_te = {-27.5, 0.0, 0.051};
  m.ra_ohm_um2 = {6890.0 * 0.175, 0.0, 0.072};
  m.v_bt = {1.06, 0.0, 0.077};
  m.iv_exponent_mean = 2.75;
  m.iv_exponent_sd = 0.1;
  m.iv_current_noise_rsd = 0.01;
  m.junction_failure_rate = 0.072;
  m.cryo.n_chips = n_chips;
  m.cryo.f01_noise_rsd = 0.005;
  m.seed = g.seed;
  if (preset == "closure") {
    layout.geometry = WaferGeometry{6.0, 4.0, 41, 27, 100.0};
    layout.junctions_per_die.assign(16, JunctionSpec{350.0, 500.0});
  } else if (preset != "paper") {
    fail(Errc::ConfigError, "unknown synth preset '" + preset + "'");
  }
  if (dies > 0) layout.max_dies = dies;
  if (n_iv > 0) {
    const int base = dies > 0 ? dies : 375;
    layout.iv_stride = std::max(1, 2 * base / n_iv);
    layout.iv_junction_indices = {0, 1};
  }

  SynthResult result = generate(m, layout);
  result.dataset.transition = generate_transition(12.0, 1.2, 0.82);
  const std::string manifest = write_dataset(result.dataset, g.out_dir);
  std::printf("synthetic wafer %s written; manifest %s (%zu junctions, "
              "%zu IV traces, %lld resamples)\n",
              result.dataset.wafer_id.c_str(), manifest.c_str(),
              result.dataset.junctions.size(),
              result.dataset.iv_traces.size(),
              static_cast<long long>(result.resamples));
  return 0;
}

int run_freq_predict(double rn, double f01, const std::string& model_path,
                     double tc, double cq) {
  AbModel model{tc, cq, ModelProvenance::ASSUMED};
  if (!model_path.empty())
    model = parse_ab_model_json(read_file(model_path), model_path);
  if (rn > 0.0) {
    std::printf("f01 = %.6e Hz at Rn = %.1f ohm (Tc = %.4f K, Cq = %.3e F)\n",
                predict_f01(rn, model), rn, model.t_c_k, model.c_q_f);
  } else if (f01 > 0.0) {
    std::printf("Rn = %.2f ohm for f01 = %.6e Hz (Tc = %.4f K, Cq = %.3e F)\n",
                target_resistance(f01, model), f01, model.t_c_k, model.c_q_f);
  } else {
    fail(Errc::ConfigError, "freq predict needs --rn or --f01");
  }
  return 0;
}

int run_freq_fit(const GlobalOpts& g, const std::string& model_out) {
  const AnalysisConfig cfg = effective_config(g);
  const WaferDataset ds = load_wafer(g.manifest_path);
  if (ds.cryo.empty())
    fail(Errc::EmptyInput, "manifest carries no cryo records to fit");
  const TcFitReport fit = fit_tc(ds.cryo, cfg.cq_f);
  std::printf("fitted Tc = %.5f K over %lld records (Rn %.0f-%.0f ohm), "
              "rms residual %.3e Hz\n",
              fit.model.t_c_k, static_cast<long long>(fit.n), fit.rn_min_ohm,
              fit.rn_max_ohm, fit.rms_residual_hz);
  if (!model_out.empty()) {
    write_file(model_out, serialize_ab_model(fit.model, &fit));
    std::printf("model written to %s\n", model_out.c_str());
  }
  return 0;
}

int run_freq_bin(const GlobalOpts& g, const std::string& model_path,
                 double target) {
  const AnalysisConfig cfg = effective_config(g);
  const WaferDataset ds = load_wafer(g.manifest_path);
  if (ds.cryo.empty())
    fail(Errc::EmptyInput, "manifest carries no cryo records to bin");
  AbModel model{0.71, cfg.cq_f, ModelProvenance::ASSUMED};
  if (!model_path.empty())
    model = parse_ab_model_json(read_file(model_path), model_path);
  std::vector<FreqBin> bins;
  for (std::size_t i = 0; i < cfg.freq_bins_hz.size(); ++i)
    bins.push_back({cfg.freq_bins_hz[i].first, cfg.freq_bins_hz[i].second,
                    "bin" + std::to_string(i)});
  std::map<std::string, ChipJunctions> chips;
  for (const auto& r : ds.cryo) {
    auto& c = chips[r.chip_id];
    c.chip_id = r.chip_id;
    c.qubit_rn_ohm.emplace_back(r.qubit_id, r.rn_ohm);
  }
  std::vector<ChipJunctions> list;
  for (auto& [_, c] : chips) list.push_back(std::move(c));
  const double t = target > 0.0 ? target : cfg.target_f01_hz;
  const BinningReport br = bin_chips(list, model, t, bins);
  for (const auto& c : br.chips) {
    if (c.bin_index >= 0)
      std::printf("%-12s -> %s\n", c.chip_id.c_str(),
                  br.bins[static_cast<std::size_t>(c.bin_index)].label.c_str());
    else
      std::printf("%-12s -> REJECT\n", c.chip_id.c_str());
  }
  std::printf("predicted spread: %.4f total, rsd %.4f; %lld rejected\n",
              br.predicted_spread_total, br.predicted_spread_rsd,
              static_cast<long long>(br.n_rejected));
  return 0;
}

int run_cryo(const std::vector<std::string>& files) {
  if (files.empty()) fail(Errc::EmptyInput, "cryo: no trace files given");
  for (const auto& f : files) {
    const DecayTrace t = parse_decay_csv(read_file(f), f);
    CoherenceResult r;
    switch (t.kind) {
      case TraceKind::T1: r = fit_t1(t); break;
      case TraceKind::RAMSEY: r = fit_ramsey(t); break;
      case TraceKind::RB: r = fit_rb(t); break;
    }
    switch (r.kind) {
      case TraceKind::T1:
        std::printf("%s: T1 = %.4g s +- %.2g (r2 = %.6f)\n", f.c_str(),
                    r.value, r.value_se, r.r_squared);
        break;
      case TraceKind::RAMSEY:
        std::printf(
            "%s: T2* = %.4g s +- %.2g, detuning %.4g Hz%s (r2 = %.6f)\n",
            f.c_str(), r.value, r.value_se, r.detuning_hz,
            r.overdamped ? " [overdamped]" : "", r.r_squared);
        break;
      case TraceKind::RB:
        std::printf("%s: F = %.6f +- %.2g (p = %.6f) (r2 = %.6f)\n", f.c_str(),
                    r.fidelity, r.fidelity_se, r.value, r.r_squared);
        break;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Wafer-level PCM analytics for superconducting-qubit fabrication"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "analysis config JSON");

  auto add_manifest = [&](CLI::App* cmd) {
    cmd->add_option("--manifest", g.manifest_path, "wafer manifest JSON")
        ->required();
  };
  auto add_spec = [&](CLI::App* cmd) {
    cmd->add_option("--spec-min", g.spec_min,
                    "junction spec lower bound [ohm]");
    cmd->add_option("--spec-max", g.spec_max,
                    "junction spec upper bound [ohm]");
  };

  auto* validate =
      app.add_subcommand("ingest-validate", "parse and validate a manifest");
  add_manifest(validate);

  auto* report = app.add_subcommand("report", "run the full pipeline");
  add_manifest(report);
  add_spec(report);
  report->add_option("--out-dir", g.out_dir,
                     "write report.json and SVGs here");

  const char* sections[] = {"shorts", "junctions", "iv"};
  for (const char* s : sections) {
    auto* cmd = app.add_subcommand(
        s, std::string("run the pipeline and print the ") + s + " section");
    add_manifest(cmd);
    add_spec(cmd);
  }

  auto* freq = app.add_subcommand("freq", "Ambegaokar-Baratoff model tools");
  freq->require_subcommand(1);
  double rn = -1.0, f01 = -1.0, tc = 0.71, cq = 86e-15, target = -1.0;
  std::string model_path, model_out;
  auto* predict =
      freq->add_subcommand("predict", "predict f01 from Rn (or invert)");
  predict->add_option("--rn", rn, "normal-state resistance [ohm]");
  predict->add_option("--f01", f01, "qubit frequency [Hz] (inverse mode)");
  predict->add_option("--tc", tc, "critical temperature [K]");
  predict->add_option("--cq", cq, "qubit capacitance [F]");
  predict->add_option("--model", model_path, "calibrated model JSON");
  auto* fitcmd = freq->add_subcommand("fit", "fit Tc from cryo records");
  add_manifest(fitcmd);
  fitcmd->add_option("--out", model_out, "write the calibrated model here");
  auto* bincmd =
      freq->add_subcommand("bin", "pre-select chips by predicted f01");
  add_manifest(bincmd);
  bincmd->add_option("--model", model_path, "calibrated model JSON");
  bincmd->add_option("--target", target, "target f01 [Hz]");

  auto* cryo = app.add_subcommand("cryo", "fit time-domain trace files");
  std::vector<std::string> trace_files;
  cryo->add_option("files", trace_files, "trace CSV files");

  auto* synth = app.add_subcommand("synth", "generate a synthetic wafer");
  std::string preset = "paper";
  int dies = 0, n_iv = 100, n_chips = 10;
  synth->add_option("--out-dir", g.out_dir, "output directory")->required();
  synth->add_option("--seed", g.seed, "generator seed");
  synth->add_option("--preset", preset, "paper | closure");
  synth->add_option("--dies", dies, "cap the number of dies");
  synth->add_option("--iv-traces", n_iv, "approximate IV trace count");
  synth->add_option("--chips", n_chips, "cryo-characterized chip count");

  auto* map = app.add_subcommand("map", "render one wafer map SVG");
  add_manifest(map);
  add_spec(map);
  std::string quantity = "yield", map_out = "map.svg";
  map->add_option("--quantity", quantity, "yield | sheet_be | sheet_te");
  map->add_option("--out", map_out, "output SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return run_report(g, true);
    if (report->parsed()) return run_report(g, false);
    for (const char* s : sections)
      if (app.get_subcommand(s)->parsed()) return run_section(g, s);
    if (freq->parsed()) {
      if (predict->parsed())
        return run_freq_predict(rn, f01, model_path, tc, cq);
      if (fitcmd->parsed()) return run_freq_fit(g, model_out);
      if (bincmd->parsed()) return run_freq_bin(g, model_path, target);
    }
    if (cryo->parsed()) return run_cryo(trace_files);
    if (synth->parsed()) return run_synth(g, preset, dies, n_iv, n_chips);
    if (map->parsed()) return run_map(g, quantity, map_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
