#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "oracles.hpp"
#include "qpcm/errors.hpp"
#include "qpcm/stats.hpp"

using namespace qpcm;

TEST_SUITE("stats") {

TEST_CASE("zero-variance population") {
  const std::vector<double> v{100.0, 100.0, 100.0};
  const StatSummary s = summarize(v, Filter::NONE);
  CHECK(s.n == 3);
  CHECK(s.mean == doctest::Approx(100.0));
  CHECK(s.std == doctest::Approx(0.0));
  CHECK(s.rsd == doctest::Approx(0.0));
  CHECK(s.n_excluded == 0);
}

TEST_CASE("IQR filter excludes the documented outlier") {
  // Oracle: quartiles of [1,2,3,4,100] are q1=2, q3=4; fences [-1, 7].
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 100.0};
  const auto kept = oracle::brute_iqr_filter(v);
  REQUIRE(kept.size() == 4);
  CHECK(oracle::mean(kept) == doctest::Approx(2.5));

  const StatSummary s = summarize(v, Filter::IQR_1_5);
  CHECK(s.n == 4);
  CHECK(s.n_excluded == 1);
  CHECK(s.mean == doctest::Approx(2.5));
}

TEST_CASE("quartiles match the brute-force oracle on all short lists") {
  oracle::Rng rng(41);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + trial % 8;
    std::vector<double> v(n);
    for (auto& x : v) x = 10.0 * rng.uniform();
    if (trial % 3 == 0 && n > 2) v[1] = v[0];  // ties
    const Quartiles q = quartiles(v);
    CHECK(q.q1 == doctest::Approx(oracle::brute_quantile(v, 0.25)).epsilon(1e-12));
    CHECK(q.q2 == doctest::Approx(oracle::brute_quantile(v, 0.50)).epsilon(1e-12));
    CHECK(q.q3 == doctest::Approx(oracle::brute_quantile(v, 0.75)).epsilon(1e-12));
  }
}

TEST_CASE("summarize agrees with the oracle on filtered populations") {
  oracle::Rng rng(97);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(30 + trial % 50);
    for (auto& x : v) x = 50.0 + 6.0 * rng.gaussian();
    if (trial % 4 == 0) v[0] = 400.0;  // gross outlier
    const auto kept = oracle::brute_iqr_filter(v);
    const StatSummary s = summarize(v, Filter::IQR_1_5);
    REQUIRE(s.n == static_cast<std::int64_t>(kept.size()));
    CHECK(s.mean == doctest::Approx(oracle::mean(kept)).epsilon(1e-12));
    CHECK(s.std == doctest::Approx(oracle::sample_std(kept)).epsilon(1e-12));
  }
}

TEST_CASE("rsd is scale-equivariant") {
  oracle::Rng rng(7);
  std::vector<double> v(64);
  for (auto& x : v) x = 20.0 + 3.0 * rng.gaussian();
  const double base = summarize(v, Filter::IQR_1_5).rsd;
  for (double c : {2.0, 0.125, 3.7, 1e6, 1e-6, 977.25}) {
    std::vector<double> scaled(v);
    for (auto& x : scaled) x *= c;
    const double rsd = summarize(scaled, Filter::IQR_1_5).rsd;
    CHECK(rsd == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("IQR filtering is idempotent") {
  oracle::Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(10 + trial % 100);
    for (auto& x : v) {
      // Mix of clusters and stray points to stress the fixed point.
      const double u = rng.uniform();
      x = u < 0.8 ? 100.0 + 5.0 * rng.gaussian() : 100.0 * rng.uniform();
    }
    const StatSummary once = summarize(v, Filter::IQR_1_5);
    const std::vector<double> kept = iqr_filtered(v);
    REQUIRE(static_cast<std::int64_t>(kept.size()) == once.n);
    const StatSummary twice = summarize(kept, Filter::IQR_1_5);
    CHECK(twice.n_excluded == 0);
    CHECK(twice.mean == doctest::Approx(once.mean).epsilon(1e-12));
    CHECK(twice.std == doctest::Approx(once.std).epsilon(1e-12));
  }
}

TEST_CASE("Eigen expressions are accepted") {
  Eigen::VectorXd v(5);
  v << 3.0, 1.0, 2.0, 4.0, 5.0;
  const StatSummary s = summarize(2.0 * v.array() + 1.0, Filter::NONE);
  CHECK(s.mean == doctest::Approx(7.0));
}

TEST_CASE("error paths") {
  CHECK_THROWS_AS(summarize(std::vector<double>{}, Filter::NONE), Error);
  CHECK_THROWS_AS(summarize(std::vector<double>{1.0}, Filter::NONE), Error);
  try {
    summarize(std::vector<double>{-5.0, -3.0, 8.0}, Filter::NONE);
    FAIL("expected NonPositiveMean");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonPositiveMean);
  }
  try {
    summarize(std::vector<double>{1.0, std::nan("")}, Filter::NONE);
    FAIL("expected InvalidParams");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidParams);
  }
}

}  // TEST_SUITE
