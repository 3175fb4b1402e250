#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qpcm/errors.hpp"
#include "qpcm/iv_analysis.hpp"
#include "qpcm/synth.hpp"

using namespace qpcm;

namespace {

IVTrace ohmic_trace(double r, double v_max = 1.0, double step = 0.01,
                    double compliance = 1.0) {
  IVTrace t;
  t.junction_id = "J";
  t.area_um2 = 0.175;
  t.compliance_a = compliance;
  for (double v = 0.0; v <= v_max + 1e-12; v += step)
    t.points.push_back({v, v / r});
  return t;
}

// Scan for the first jump the way the documentation states it, written
// independently of the implementation.
double brute_vbt(const IVTrace& t, double ratio, double floor) {
  for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
    const double i0 = std::abs(t.points[k].current_a);
    const double i1 = std::abs(t.points[k + 1].current_a);
    if (i0 > floor && i1 / i0 > ratio) return t.points[k].voltage_v;
    if (i1 >= t.compliance_a) return t.points[k].voltage_v;
  }
  return -1.0;
}

}  // namespace

TEST_SUITE("iv") {

TEST_CASE("power-law fit is exact on noiseless data") {
  for (double m : {0.5, 1.0, 1.7, 2.75, 3.2}) {
    for (int n : {4, 7, 30}) {
      std::vector<IVPoint> pts;
      for (int i = 0; i < n; ++i) {
        const double v = 0.05 + 0.03 * i;
        pts.push_back({v, 2.3e-4 * std::pow(v, m)});
      }
      const PowerLawFit f = power_law_fit(pts);
      CHECK(f.exponent == doctest::Approx(m).epsilon(1e-9));
      CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("pure ohmic trace yields a single DIRECT regime") {
  const IVTrace t = ohmic_trace(7100.0);
  const auto fits = segment_and_fit(t, IvConfig{});
  REQUIRE(fits.size() == 1);
  CHECK(fits[0].regime == Regime::DIRECT);
  CHECK(fits[0].exponent == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fits[0].r_jj_ohm == doctest::Approx(7100.0).epsilon(1e-12));
}

TEST_CASE("paper-style piecewise trace is segmented and recovered") {
  const IVTrace t = generate_iv(7100.0, 2.75, 1.2, 0.010);
  const IvConfig cfg;

  const BreakthroughResult bt = detect_breakthrough(t, cfg);
  CHECK(bt.detection == Detection::CURRENT_JUMP);
  CHECK(bt.v_bt == doctest::Approx(1.2).epsilon(1e-12));

  const auto fits = segment_and_fit(t, cfg);
  REQUIRE(fits.size() == 2);
  CHECK(fits[0].regime == Regime::DIRECT);
  CHECK(fits[0].r_jj_ohm == doctest::Approx(7100.0).epsilon(0.01));
  CHECK(fits[1].regime == Regime::TRAP_ASSISTED);
  CHECK(fits[1].exponent == doctest::Approx(2.75).epsilon(0.02));
  CHECK(fits[1].v_hi <= 1.2 + 1e-12);
}

TEST_CASE("knee recovery within tolerances with current noise") {
  // The acceptance suite runs the full 1000-trace sweep; spot-check here.
  oracle::Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const double r = 5000.0 + 5000.0 * rng.uniform();
    const double m = 2.3 + 0.9 * rng.uniform();
    const double vbt = 0.9 + 0.4 * rng.uniform();
    const IVTrace t =
        generate_iv(r, m, vbt, 0.010, 0.30, 0.1, 0.01, 1000 + trial);
    const auto fits = segment_and_fit(t, IvConfig{});
    REQUIRE(fits.size() == 2);
    CHECK(std::abs(fits[0].r_jj_ohm - r) / r < 0.01);
    CHECK(std::abs(fits[1].exponent - m) < 0.05);
    const BreakthroughResult bt = detect_breakthrough(t, IvConfig{});
    CHECK(bt.detection != Detection::NONE);
    CHECK(std::abs(bt.v_bt - vbt) <= 0.010 + 1e-12);
  }
}

TEST_CASE("direct-regime resistance cross-checks against per-point V/I") {
  const IVTrace t = generate_iv(8200.0, 2.75, 1.1, 0.010);
  const auto fits = segment_and_fit(t, IvConfig{});
  REQUIRE(!fits.empty());
  const RegimeFit& d = fits[0];
  double vi_sum = 0.0;
  int n = 0;
  for (const auto& p : t.points) {
    if (p.voltage_v >= d.v_lo && p.voltage_v <= d.v_hi && p.current_a > 0.0) {
      vi_sum += p.voltage_v / p.current_a;
      ++n;
    }
  }
  REQUIRE(n > 0);
  const double vi_mean = vi_sum / n;
  CHECK(std::abs(d.r_jj_ohm - vi_mean) / vi_mean < 0.01);
}

TEST_CASE("no ohmic region flags a broken junction") {
  // Superlinear from the start; begins at 0.2 V so consecutive-point ratios
  // stay below the jump threshold.
  IVTrace t;
  t.compliance_a = 1.0;
  for (double v = 0.2; v <= 1.0 + 1e-12; v += 0.01)
    t.points.push_back({v, 1e-3 * std::pow(v, 2.75)});
  try {
    segment_and_fit(t, IvConfig{});
    FAIL("expected NoOhmicRegion");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoOhmicRegion);
  }
}

TEST_CASE("too few usable points is rejected") {
  IVTrace t = ohmic_trace(7100.0, 0.05);  // 5 nonzero points
  CHECK_THROWS_AS(segment_and_fit(t, IvConfig{}), Error);
}

TEST_CASE("currents below the noise floor are ignored") {
  IVTrace t = ohmic_trace(7100.0);
  for (auto& p : t.points)
    if (p.voltage_v < 0.05) p.current_a = 1e-13;  // drowned in noise
  const auto fits = segment_and_fit(t, IvConfig{});
  REQUIRE(fits.size() == 1);
  CHECK(fits[0].v_lo == doctest::Approx(0.05));
  CHECK(fits[0].r_jj_ohm == doctest::Approx(7100.0).epsilon(1e-9));
}

TEST_CASE("breakthrough detection on constructed jumps") {
  SUBCASE("no jump, sweep ends") {
    const IVTrace t = ohmic_trace(7100.0, 0.5);
    const BreakthroughResult bt = detect_breakthrough(t, IvConfig{});
    CHECK(bt.detection == Detection::NONE);
    CHECK(std::isnan(bt.v_bt));
  }
  SUBCASE("50x jump at 1.05 V on a 10 mV grid") {
    IVTrace t = ohmic_trace(7100.0, 1.2, 0.01, 1.0);
    for (auto& p : t.points)
      if (p.voltage_v >= 1.05 - 1e-12) p.current_a *= 50.0;
    const IvConfig cfg;
    const BreakthroughResult bt = detect_breakthrough(t, cfg);
    CHECK(bt.detection == Detection::CURRENT_JUMP);
    CHECK(bt.v_bt == doctest::Approx(1.04).epsilon(1e-12));
    CHECK(bt.v_bt ==
          doctest::Approx(brute_vbt(t, cfg.jump_ratio, cfg.noise_floor_a)));
  }
  SUBCASE("compliance hit without a jump") {
    IVTrace t = ohmic_trace(100.0, 1.0, 0.01, 5e-3);
    for (auto& p : t.points)
      p.current_a = std::min(p.current_a, t.compliance_a);
    const BreakthroughResult bt = detect_breakthrough(t, IvConfig{});
    CHECK(bt.detection == Detection::COMPLIANCE_HIT);
    CHECK(bt.v_bt == doctest::Approx(0.49).epsilon(1e-9));
  }
}

TEST_CASE("detection is invariant under appending post-jump points") {
  IVTrace t = generate_iv(7100.0, 2.75, 1.2, 0.010);
  const BreakthroughResult before = detect_breakthrough(t, IvConfig{});
  for (int k = 1; k <= 20; ++k)
    t.points.push_back({t.points.back().voltage_v + 0.01, 0.1});
  const BreakthroughResult after = detect_breakthrough(t, IvConfig{});
  CHECK(before.v_bt == after.v_bt);
  CHECK(before.detection == after.detection);
}

TEST_CASE("segmentation is deterministic") {
  const IVTrace t = generate_iv(6400.0, 2.9, 1.05, 0.010, 0.30, 0.1, 0.01, 42);
  const auto a = segment_and_fit(t, IvConfig{});
  const auto b = segment_and_fit(t, IvConfig{});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].exponent == b[i].exponent);
    CHECK(a[i].v_lo == b[i].v_lo);
    CHECK(a[i].v_hi == b[i].v_hi);
    if (a[i].regime == Regime::DIRECT) CHECK(a[i].r_jj_ohm == b[i].r_jj_ohm);
  }
}

TEST_CASE("current scaling scales the direct resistance inversely") {
  const IVTrace t = generate_iv(7100.0, 2.75, 1.2, 0.010);
  const auto base = segment_and_fit(t, IvConfig{});
  for (double c : {10.0, 0.05}) {
    IVTrace scaled = t;
    scaled.compliance_a *= c;
    for (auto& p : scaled.points) p.current_a *= c;
    const auto fits = segment_and_fit(scaled, IvConfig{});
    REQUIRE(fits.size() == base.size());
    CHECK(fits[0].r_jj_ohm ==
          doctest::Approx(base[0].r_jj_ohm / c).epsilon(1e-9));
    CHECK(fits[1].exponent == doctest::Approx(base[1].exponent).epsilon(1e-9));
  }
}

TEST_CASE("vbt statistics") {
  SUBCASE("identical traces give zero spread") {
    std::vector<VbtSample> samples;
    for (int i = 0; i < 15; ++i) {
      samples.push_back({0.175, 1.06});
      samples.push_back({0.49, 1.06});
    }
    const VbtStats v = vbt_stats(samples, IvConfig{});
    REQUIRE(v.per_size.size() == 2);
    CHECK(v.per_size[0].summary.mean == doctest::Approx(1.06));
    CHECK(v.per_size[1].summary.mean == doctest::Approx(1.06));
    CHECK(v.pooled.rsd == doctest::Approx(0.0));
    CHECK(v.max_pairwise_delta_v == doctest::Approx(0.0));
    CHECK_FALSE(v.area_dependent);
    CHECK(v.has_qubit_size);
  }
  SUBCASE("preconditions") {
    std::vector<VbtSample> one_size(20, VbtSample{0.175, 1.0});
    CHECK_THROWS_AS(vbt_stats(one_size, IvConfig{}), Error);
    std::vector<VbtSample> thin = {{0.175, 1.0}, {0.49, 1.0}};
    try {
      vbt_stats(thin, IvConfig{});
      FAIL("expected TooFewSamples");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::TooFewSamples);
    }
  }
  SUBCASE("clearly separated means are flagged as area-dependent") {
    oracle::Rng rng(8);
    std::vector<VbtSample> samples;
    for (int i = 0; i < 40; ++i) {
      samples.push_back({0.175, 1.00 + 0.005 * rng.gaussian()});
      samples.push_back({0.49, 1.30 + 0.005 * rng.gaussian()});
    }
    const VbtStats v = vbt_stats(samples, IvConfig{});
    CHECK(v.area_dependent);
    CHECK(v.max_pairwise_delta_v > v.pooled.std);
  }
}

}  // TEST_SUITE
