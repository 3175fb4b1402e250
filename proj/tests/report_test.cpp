#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <json.hpp>

#include "oracles.hpp"
#include "qpcm/config.hpp"
#include "qpcm/errors.hpp"
#include "qpcm/ingest.hpp"
#include "qpcm/report.hpp"
#include "qpcm/svg_render.hpp"
#include "qpcm/synth.hpp"

using namespace qpcm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

SynthResult small_wafer(std::uint64_t seed) {
  WaferLayout layout = standard_layout();
  layout.max_dies = 60;
  layout.iv_stride = 2;
  layout.iv_junction_indices = {0, 2};
  VariationModel m;
  m.sheet_be = {0.202, 0.01, 0.012};
  m.sheet_te = {0.395, 0.01, 0.012};
  m.width_be = {-76.8, 0.0, 0.087};
  m.width_te = {-27.5, 0.0, 0.051};
  m.ra_ohm_um2 = {6890.0 * 0.175, 0.0, 0.072};
  m.v_bt = {1.06, 0.0, 0.077};
  m.iv_exponent_sd = 0.1;
  m.junction_failure_rate = 0.072;
  m.cryo.n_chips = 10;
  m.cryo.f01_noise_rsd = 0.005;
  m.cryo.rn_rsd = 0.124;
  m.seed = seed;
  return generate(m, layout);
}

std::string run_cli(const std::string& args, int& exit_code) {
  const std::string cmd = std::string(QPCM_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe)) output += buf;
  const int status = pclose(pipe);
  exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return output;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("pipeline covers all sections on a full dataset") {
  SynthResult r = small_wafer(99);
  r.dataset.transition = generate_transition(12.0, 1.2, 0.82);
  const AnalysisConfig cfg;
  const PipelineOutput out = run_pipeline(r.dataset, cfg);

  CHECK(out.report.at("schema_version") == kReportSchemaVersion);
  for (const char* s :
       {"sheet", "shorts", "junctions", "iv", "frequency", "cryo"})
    CHECK(out.report.at(s).at("status") == "OK");
  CHECK(out.report.at("config_hash").get<std::string>().substr(0, 8) ==
        "fnv1a64:");
  CHECK(out.artifacts.count("wafer_yield_map.svg") == 1);
  CHECK(out.artifacts.count("rjj_histogram.svg") == 1);
  CHECK(out.artifacts.count("sheet_map_be.svg") == 1);
  validate_report(out.report);  // must not throw
}

TEST_CASE("absent inputs are reported as SKIPPED") {
  SynthResult r = small_wafer(7);
  WaferDataset only_shorts;
  only_shorts.wafer_id = r.dataset.wafer_id;
  only_shorts.geometry = r.dataset.geometry;
  only_shorts.shorts = r.dataset.shorts;
  const PipelineOutput out = run_pipeline(only_shorts, AnalysisConfig{});
  CHECK(out.report.at("sheet").at("status") == "SKIPPED");
  CHECK(out.report.at("junctions").at("status") == "SKIPPED");
  CHECK(out.report.at("iv").at("status") == "SKIPPED");
  CHECK(out.report.at("frequency").at("status") == "SKIPPED");
  CHECK(out.report.at("shorts").at("status") == "OK");
  // Without a sheet map the assumed deposition value is used.
  CHECK(out.report.at("shorts").at("layers").at("BE").at("rsd_sheet_source") ==
        "assumed");
  validate_report(out.report);
}

TEST_CASE("report body is byte-identical across runs") {
  SynthResult r = small_wafer(13);
  r.dataset.transition = generate_transition(9.0, 1.2, 0.82);
  const AnalysisConfig cfg;
  const PipelineOutput a = run_pipeline(r.dataset, cfg);
  const PipelineOutput b = run_pipeline(r.dataset, cfg);
  CHECK(a.report.dump() == b.report.dump());
  REQUIRE(a.artifacts.size() == b.artifacts.size());
  for (const auto& [name, content] : a.artifacts)
    CHECK(content == b.artifacts.at(name));
}

TEST_CASE("validator rejects unknown fields") {
  SynthResult r = small_wafer(3);
  const PipelineOutput out = run_pipeline(r.dataset, AnalysisConfig{});
  json tampered = out.report;
  tampered["extra_field"] = 1;
  CHECK_THROWS_AS(validate_report(tampered), Error);

  json tampered2 = out.report;
  tampered2["junctions"]["yield"]["bogus"] = true;
  CHECK_THROWS_AS(validate_report(tampered2), Error);

  json missing = out.report;
  missing.erase("wafer_id");
  CHECK_THROWS_AS(validate_report(missing), Error);
}

TEST_CASE("config round trip, hashing, and rejection of unknown keys") {
  AnalysisConfig cfg;
  cfg.spec.r_min_ohm = 120.0;
  cfg.iv.m_tol = 0.2;
  cfg.assumed_tc_k = 0.7;
  const AnalysisConfig back = parse_config_json(cfg.canonical_json());
  CHECK(back.spec.r_min_ohm == 120.0);
  CHECK(back.iv.m_tol == 0.2);
  CHECK(back.assumed_tc_k == 0.7);
  CHECK(back.hash() == cfg.hash());

  CHECK_THROWS_AS(parse_config_json(R"({"nonsense": 1})"), Error);
  try {
    parse_config_json(R"({"spec_r_min_ohm": -5})");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConfigError);
    CHECK(e.exit_code() == 3);
  }
}

TEST_CASE("wafer map rendering") {
  WaferGeometry g{10.0, 7.0, 3, 3, 100.0};
  SUBCASE("empty map is an error") {
    CHECK_THROWS_AS(
        render_wafer_map({}, g, WaferMapStyle{"t", "v", MapMode::SCALAR,
                                              std::nan(""), std::nan("")}),
        Error);
  }
  SUBCASE("single site renders one die") {
    const MapCell cell{1, 1, 0.0, 0.0, 0.5};
    const std::string svg = render_wafer_map(
        {&cell, 1}, g,
        WaferMapStyle{"one", "v", MapMode::SCALAR, std::nan(""),
                      std::nan("")});
    // one background rect + one die rect + 64 legend steps
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("one") != std::string::npos);
  }
  SUBCASE("legend bounds equal the data min/max") {
    std::vector<MapCell> cells = {{0, 0, -10.0, -7.0, 0.91},
                                  {1, 1, 0.0, 0.0, 1.0},
                                  {2, 2, 10.0, 7.0, 1.07}};
    const std::string svg = render_wafer_map(
        cells, g,
        WaferMapStyle{"sheet", "R/mean", MapMode::SCALAR, std::nan(""),
                      std::nan("")});
    CHECK(svg.find(">0.91</text>") != std::string::npos);
    CHECK(svg.find(">1.07</text>") != std::string::npos);
  }
  SUBCASE("deterministic output") {
    std::vector<MapCell> cells = {{0, 0, -10.0, -7.0, 1.0},
                                  {1, 1, 0.0, 0.0, 0.0}};
    const WaferMapStyle style{"t", "", MapMode::PASS_FAIL, std::nan(""),
                              std::nan("")};
    CHECK(render_wafer_map(cells, g, style) ==
          render_wafer_map(cells, g, style));
  }
}

TEST_CASE("CLI: report on a synthetic wafer") {
  const auto dir = fs::temp_directory_path() / "qpcm_cli_wafer";
  fs::remove_all(dir);
  int code = 0;
  run_cli("synth --out-dir " + dir.string() + " --seed 5 --dies 60 "
          "--iv-traces 40 --chips 10",
          code);
  REQUIRE(code == 0);

  const auto out_dir = fs::temp_directory_path() / "qpcm_cli_report";
  fs::remove_all(out_dir);
  const std::string out = run_cli("report --manifest " +
                                      (dir / "manifest.json").string() +
                                      " --out-dir " + out_dir.string(),
                                  code);
  CHECK(code == 0);
  CHECK(out.find("yield") != std::string::npos);
  CHECK(fs::exists(out_dir / "report.json"));
  CHECK(fs::exists(out_dir / "report.meta.json"));
  CHECK(fs::exists(out_dir / "wafer_yield_map.svg"));

  // Re-running must reproduce the report body byte for byte.
  const std::string before = read_file((out_dir / "report.json").string());
  run_cli("report --manifest " + (dir / "manifest.json").string() +
              " --out-dir " + out_dir.string(),
          code);
  CHECK(read_file((out_dir / "report.json").string()) == before);

  const json report = json::parse(before);
  validate_report(report);

  // ingest-validate and map also run against the same manifest.
  const std::string v =
      run_cli("ingest-validate --manifest " + (dir / "manifest.json").string(),
              code);
  CHECK(code == 0);
  CHECK(v.find("manifest OK") != std::string::npos);

  const auto map_path = fs::temp_directory_path() / "qpcm_cli_map.svg";
  run_cli("map --manifest " + (dir / "manifest.json").string() +
              " --quantity yield --out " + map_path.string(),
          code);
  CHECK(code == 0);
  CHECK(fs::exists(map_path));

  fs::remove_all(dir);
  fs::remove_all(out_dir);
  fs::remove(map_path);
}

TEST_CASE("CLI: corrupt CSV exits with an input error naming file and row") {
  const auto dir = fs::temp_directory_path() / "qpcm_cli_corrupt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file((dir / "shorts.csv").string(),
             "wafer_id,die_row,die_col,structure_id,layer,design_width_nm,"
             "design_length_um,resistance_ohm,status\n"
             "W1,0,0,S1,BE,350,200,94.7,OK\n"
             "W1,0,1,S2,BE,350,200,banana,OK\n");
  const json manifest = {
      {"schema_version", "qpcm-manifest/1"},
      {"wafer_id", "W1"},
      {"files", json::array({{{"kind", "SHORTS"}, {"path", "shorts.csv"}}})}};
  write_file((dir / "manifest.json").string(), manifest.dump(1));

  int code = 0;
  const std::string out = run_cli(
      "report --manifest " + (dir / "manifest.json").string(), code);
  CHECK(code == 2);
  CHECK(out.find("shorts.csv") != std::string::npos);
  CHECK(out.find("row 3") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("CLI: freq predict matches the library") {
  int code = 0;
  const std::string out = run_cli("freq predict --rn 7300 --tc 0.71", code);
  CHECK(code == 0);
  CHECK(out.find("4.33") != std::string::npos);

  const std::string inv = run_cli("freq predict --f01 4.42e9 --tc 0.7", code);
  CHECK(code == 0);
  CHECK(inv.find("Rn") != std::string::npos);
}

TEST_CASE("CLI: freq fit writes a model document that bin accepts") {
  const auto dir = fs::temp_directory_path() / "qpcm_cli_fit";
  fs::remove_all(dir);
  int code = 0;
  run_cli("synth --out-dir " + dir.string() + " --seed 8 --dies 50 "
          "--iv-traces 0 --chips 12",
          code);
  REQUIRE(code == 0);
  const auto model_path = dir / "model.json";
  const std::string out =
      run_cli("freq fit --manifest " + (dir / "manifest.json").string() +
                  " --out " + model_path.string(),
              code);
  CHECK(code == 0);
  CHECK(out.find("fitted Tc") != std::string::npos);
  const AbModel m = parse_ab_model_json(read_file(model_path.string()),
                                        model_path.string());
  CHECK(m.provenance == ModelProvenance::FITTED);
  CHECK(m.t_c_k == doctest::Approx(0.71).epsilon(0.05));

  const std::string binned =
      run_cli("freq bin --manifest " + (dir / "manifest.json").string() +
                  " --model " + model_path.string(),
              code);
  CHECK(code == 0);
  CHECK(binned.find("predicted spread") != std::string::npos);
  fs::remove_all(dir);
}

}  // TEST_SUITE
