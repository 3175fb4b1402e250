// Test-side oracles, deliberately independent of the library implementation:
// brute-force quartiles, a portable RNG, and direct formula evaluations.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

// Quartile by sorting and interpolating at rank p*(n-1), written from the
// definition (no shared code with qpcm::quantile_sorted).
inline double brute_quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double rank = p * (static_cast<double>(values.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  if (hi >= values.size()) return values.back();
  const double w = rank - std::floor(rank);
  return (1.0 - w) * values[lo] + w * values[hi];
}

// One pass of the 1.5*IQR rule, from the definition.
inline std::vector<double> brute_iqr_pass(const std::vector<double>& values) {
  const double q1 = brute_quantile(values, 0.25);
  const double q3 = brute_quantile(values, 0.75);
  const double iqr = q3 - q1;
  std::vector<double> kept;
  for (double v : values)
    if (v >= q1 - 1.5 * iqr && v <= q3 + 1.5 * iqr) kept.push_back(v);
  return kept;
}

// Iterated to a fixed point, mirroring the documented filter contract.
inline std::vector<double> brute_iqr_filter(std::vector<double> values) {
  for (;;) {
    if (values.size() < 2) return values;
    std::vector<double> next = brute_iqr_pass(values);
    if (next.size() == values.size()) return values;
    values = std::move(next);
  }
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_std(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(v.size()) - 1.0));
}

// Portable seeded RNG for test data (xorshift + Box-Muller, no <random>
// distributions so results match across standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed * 2654435769ULL + 1) {
    next();
    next();
  }

  std::uint64_t next() {
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return state_;
  }

  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Direct evaluation of the resistance-to-frequency relation with CODATA 2018
// constants, written out independently of the library.
inline double ab_f01(double rn_ohm, double tc_k, double cq_f) {
  const double kb = 1.380649e-23;
  const double h = 6.62607015e-34;
  const double e = 1.602176634e-19;
  return std::sqrt(0.882 * kb * tc_k / (h * cq_f * rn_ohm)) -
         e * e / (2.0 * h * cq_f);
}

}  // namespace oracle
