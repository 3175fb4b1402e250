#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "oracles.hpp"
#include "qpcm/errors.hpp"
#include "qpcm/ingest.hpp"
#include "qpcm/iv_analysis.hpp"
#include "qpcm/junction_analysis.hpp"
#include "qpcm/shorts_analysis.hpp"
#include "qpcm/stats.hpp"
#include "qpcm/synth.hpp"

using namespace qpcm;

namespace {

VariationModel paper_point_model(std::uint64_t seed) {
  VariationModel m;
  m.sheet_be = {0.202, 0.01, 0.012};  // gradient + noise give ~1.6 % total
  m.sheet_te = {0.395, 0.01, 0.012};
  m.width_be = {-76.8, 0.0, 0.087};
  m.width_te = {-27.5, 0.0, 0.051};
  m.ra_ohm_um2 = {6890.0 * 0.175, 0.0, 0.072};
  m.v_bt = {1.06, 0.0, 0.077};
  m.iv_exponent_mean = 2.75;
  m.iv_exponent_sd = 0.1;
  m.junction_failure_rate = 0.072;
  m.seed = seed;
  return m;
}

std::string serialize_all(const WaferDataset& ds) {
  std::string s = serialize_shorts_csv(ds.shorts);
  s += serialize_sheet_csv(ds.sheets);
  s += serialize_junctions_csv(ds.junctions);
  for (const auto& t : ds.iv_traces) s += serialize_iv_json(t);
  s += serialize_cryo_csv(ds.cryo);
  return s;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("identical seeds give byte-identical datasets") {
  WaferLayout layout = standard_layout();
  layout.max_dies = 40;
  layout.iv_stride = 4;
  layout.iv_junction_indices = {1};
  VariationModel m = paper_point_model(1906);
  m.cryo.n_chips = 4;
  m.cryo.f01_noise_rsd = 0.005;
  m.iv_current_noise_rsd = 0.01;

  const SynthResult a = generate(m, layout);
  const SynthResult b = generate(m, layout);
  CHECK(serialize_all(a.dataset) == serialize_all(b.dataset));

  m.seed = 1907;
  const SynthResult c = generate(m, layout);
  CHECK(serialize_all(a.dataset) != serialize_all(c.dataset));
}

TEST_CASE("generated records pass ingest validation and round-trip") {
  WaferLayout layout = standard_layout();
  layout.max_dies = 25;
  layout.iv_stride = 5;
  layout.iv_junction_indices = {1, 5};
  VariationModel m = paper_point_model(7);
  m.cryo.n_chips = 3;
  const SynthResult r = generate(m, layout);
  WaferDataset ds = r.dataset;
  ds.transition = generate_transition(12.0, 1.2, 0.82);

  const auto dir = std::filesystem::temp_directory_path() / "qpcm_synth_rt";
  std::filesystem::remove_all(dir);
  const std::string manifest = write_dataset(ds, dir.string());
  const WaferDataset back = load_wafer(manifest);

  CHECK(back.wafer_id == ds.wafer_id);
  REQUIRE(back.shorts.size() == ds.shorts.size());
  REQUIRE(back.junctions.size() == ds.junctions.size());
  REQUIRE(back.sheets.size() == ds.sheets.size());
  REQUIRE(back.iv_traces.size() == ds.iv_traces.size());
  REQUIRE(back.cryo.size() == ds.cryo.size());
  REQUIRE(back.transition.has_value());

  for (std::size_t i = 0; i < ds.shorts.size(); ++i) {
    CHECK(back.shorts[i].resistance_ohm == ds.shorts[i].resistance_ohm);
    CHECK(back.shorts[i].structure_id == ds.shorts[i].structure_id);
    CHECK(back.shorts[i].site.row == ds.shorts[i].site.row);
    CHECK(back.shorts[i].site.x_mm ==
          doctest::Approx(ds.shorts[i].site.x_mm).epsilon(1e-12));
    CHECK(back.shorts[i].status == ds.shorts[i].status);
  }
  for (std::size_t i = 0; i < ds.junctions.size(); ++i)
    CHECK(back.junctions[i].resistance_ohm == ds.junctions[i].resistance_ohm);
  for (std::size_t i = 0; i < ds.iv_traces.size(); ++i) {
    REQUIRE(back.iv_traces[i].points.size() == ds.iv_traces[i].points.size());
    CHECK(back.iv_traces[i].points[5].current_a ==
          ds.iv_traces[i].points[5].current_a);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("zero-noise model gives zero spreads and exact offsets") {
  WaferLayout layout = standard_layout();
  layout.max_dies = 30;
  VariationModel m;
  m.sheet_be = {0.202, 0.0, 0.0};
  m.sheet_te = {0.395, 0.0, 0.0};
  m.width_be = {-76.8, 0.0, 0.0};
  m.width_te = {-27.5, 0.0, 0.0};
  m.ra_ohm_um2 = {1205.75, 0.0, 0.0};
  m.v_bt = {1.06, 0.0, 0.0};
  m.seed = 3;
  const SynthResult r = generate(m, layout);
  CHECK(r.resamples == 0);

  std::map<double, std::vector<ShortRecord>> by_width;
  for (const auto& s : r.dataset.shorts)
    if (s.layer == Layer::BE) by_width[s.design_width_nm].push_back(s);
  for (const auto& [w, recs] : by_width) {
    const WidthVariability v = width_rsd(recs, 0.0);
    CHECK(v.rsd_w == doctest::Approx(0.0).epsilon(1e-12));
  }

  const auto means = group_width_means(r.dataset.shorts, Layer::BE);
  const OffsetFit fit = width_offset(means, Layer::BE);
  CHECK(fit.delta_w_nm == doctest::Approx(-76.8).epsilon(1e-9));

  const auto jstats = summarize(
      [&] {
        std::vector<double> v;
        for (const auto& j : r.dataset.junctions)
          if (j.design_area_um2 == 0.175) v.push_back(j.resistance_ohm);
        return v;
      }(),
      Filter::NONE);
  CHECK(jstats.rsd == doctest::Approx(0.0).epsilon(1e-12));
  // Fabricated widths are design - delta_w, so the zero-noise resistance is
  // RA over the offset-corrected area.
  const double area = (0.350 + 0.0768) * (0.500 + 0.0275);
  CHECK(jstats.mean == doctest::Approx(1205.75 / area).epsilon(1e-9));
}

TEST_CASE("failure injection hits the configured rate exactly") {
  WaferLayout layout = standard_layout();
  layout.max_dies = 125;  // 125 dies x 16 junctions = 2000 -> 144 failures
  VariationModel m = paper_point_model(11);
  const SynthResult r = generate(m, layout);
  const auto n = static_cast<double>(r.dataset.junctions.size());
  const YieldReport y = apply_spec(r.dataset.junctions, SpecLimits{});
  const double expected_fails = std::round(0.072 * n);
  CHECK(static_cast<double>(y.n_total - y.n_pass) == expected_fails);
  // Binomial 3-sigma window around 92.8 % (trivially satisfied: exact count).
  const double sigma = std::sqrt(0.928 * 0.072 / n);
  CHECK(std::abs(y.yield_fraction - 0.928) <= 3.0 * sigma);
}

TEST_CASE("injected spreads are recovered on a small wafer") {
  WaferLayout layout = standard_layout();
  layout.max_dies = 80;
  VariationModel m = paper_point_model(21);
  m.junction_failure_rate = 0.0;
  m.sheet_be.radial_gradient = 0.0;  // pure iid noise for this check
  m.sheet_te.radial_gradient = 0.0;
  const SynthResult r = generate(m, layout);

  // Width RSD per layer at the qubit widths, via the analysis chain.
  std::vector<ShortRecord> be350, te500;
  for (const auto& s : r.dataset.shorts) {
    if (s.layer == Layer::BE && s.design_width_nm == 350.0)
      be350.push_back(s);
    if (s.layer == Layer::TE && s.design_width_nm == 500.0)
      te500.push_back(s);
  }
  const double sheet_rsd = 0.012;
  const WidthVariability vbe = width_rsd(be350, sheet_rsd);
  const WidthVariability vte = width_rsd(te500, sheet_rsd);
  // 3 standard errors of an RSD estimate ~ rsd * 3/sqrt(2N), plus allowance
  // for the IQR trim bias on a Gaussian (~3 % of the value).
  const auto tol = [](double rsd, std::int64_t n) {
    return rsd * (3.0 / std::sqrt(2.0 * static_cast<double>(n)) + 0.035);
  };
  CHECK(std::abs(vbe.rsd_w - 0.087) < tol(0.087, vbe.n_used));
  CHECK(std::abs(vte.rsd_w - 0.051) < tol(0.051, vte.n_used));
}

TEST_CASE("generate_iv parameter validation and boundary exponent") {
  CHECK_THROWS_AS(generate_iv(-1.0, 2.75, 1.2, 0.01), Error);
  CHECK_THROWS_AS(generate_iv(7100.0, 1.9, 1.2, 0.01), Error);
  CHECK_THROWS_AS(generate_iv(7100.0, 2.75, 0.2, 0.01), Error);

  // m barely above 2 still classifies as trap-assisted.
  const IVTrace t = generate_iv(7100.0, 2.0001, 1.2, 0.010);
  const auto fits = segment_and_fit(t, IvConfig{});
  REQUIRE(fits.size() == 2);
  CHECK(fits[1].regime == Regime::TRAP_ASSISTED);
  CHECK(fits[1].exponent == doctest::Approx(2.0001).epsilon(0.01));
}

TEST_CASE("finer sweep grid tightens the recovered breakthrough") {
  const double vbt = 1.0637;
  const IVTrace t = generate_iv(7100.0, 2.75, vbt, 0.001);
  const BreakthroughResult bt = detect_breakthrough(t, IvConfig{});
  CHECK(bt.detection == Detection::CURRENT_JUMP);
  CHECK(std::abs(bt.v_bt - vbt) <= 0.001 + 1e-12);
}

TEST_CASE("invalid models are rejected") {
  WaferLayout layout = standard_layout();
  VariationModel m = paper_point_model(1);
  m.sheet_be.mean = -1.0;
  CHECK_THROWS_AS(generate(m, layout), Error);
  m = paper_point_model(1);
  m.junction_failure_rate = 1.5;
  CHECK_THROWS_AS(generate(m, layout), Error);
  m = paper_point_model(1);
  WaferLayout empty;
  empty.shorts_per_die.clear();
  empty.junctions_per_die.clear();
  CHECK_THROWS_AS(generate(m, empty), Error);
}

TEST_CASE("standard layout fills a 200 mm wafer plausibly") {
  WaferLayout layout = standard_layout();
  VariationModel m = paper_point_model(2);
  const SynthResult r = generate(m, layout);
  const std::size_t n_dies = r.dataset.junctions.size() / 16;
  CHECK(n_dies > 300);   // the paper-style grid holds a few hundred dies
  CHECK(n_dies < 450);
  for (const auto& j : r.dataset.junctions) CHECK(j.site.on_wafer);
}

}  // TEST_SUITE
