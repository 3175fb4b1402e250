#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "qpcm/errors.hpp"
#include "qpcm/types.hpp"

namespace qpcm {

struct Quartiles {
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;

  double iqr() const { return q3 - q1; }
  double lower_fence() const { return q1 - 1.5 * iqr(); }
  double upper_fence() const { return q3 + 1.5 * iqr(); }
};

// Quantile of an ascending-sorted range via linear interpolation between the
// closest ranks: position p * (n - 1).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) fail(Errc::EmptyInput, "quantile of empty range");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline Quartiles quartiles_sorted(std::span<const double> sorted) {
  return {quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.50),
          quantile_sorted(sorted, 0.75)};
}

inline Quartiles quartiles(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quartiles_sorted(sorted);
}

namespace detail {

// 1.5*IQR trim on a sorted vector, iterated to a fixed point so that
// re-filtering an already-filtered population excludes nothing. Survivors of
// a fence trim are a contiguous run of the sorted data.
inline std::pair<std::size_t, std::size_t> iqr_keep_range(
    std::span<const double> sorted) {
  std::size_t lo = 0;
  std::size_t hi = sorted.size();
  for (;;) {
    if (hi - lo < 2) return {lo, hi};
    const Quartiles q = quartiles_sorted(sorted.subspan(lo, hi - lo));
    const double lf = q.lower_fence();
    const double uf = q.upper_fence();
    std::size_t nlo = lo;
    std::size_t nhi = hi;
    while (nlo < nhi && sorted[nlo] < lf) ++nlo;
    while (nhi > nlo && sorted[nhi - 1] > uf) --nhi;
    if (nlo == lo && nhi == hi) return {lo, hi};
    lo = nlo;
    hi = nhi;
  }
}

inline StatSummary summarize_sorted(std::vector<double>& sorted, Filter filter) {
  if (sorted.empty()) fail(Errc::EmptyInput, "summarize of empty population");
  for (double v : sorted) {
    if (!std::isfinite(v))
      fail(Errc::InvalidParams, "summarize requires finite values");
  }

  std::size_t lo = 0;
  std::size_t hi = sorted.size();
  if (filter == Filter::IQR_1_5) {
    auto [l, h] = iqr_keep_range(sorted);
    lo = l;
    hi = h;
  }
  const std::size_t n = hi - lo;
  if (n < 2)
    fail(Errc::TooFewSamples,
         "need at least 2 values after filtering, have " + std::to_string(n));

  Eigen::Map<const Eigen::VectorXd> v(sorted.data() + lo,
                                      static_cast<Eigen::Index>(n));
  StatSummary s;
  s.n = static_cast<std::int64_t>(n);
  s.n_excluded = static_cast<std::int64_t>(sorted.size() - n);
  s.filter = filter;
  s.mean = v.mean();
  s.std = std::sqrt((v.array() - s.mean).square().sum() /
                    static_cast<double>(n - 1));
  if (s.mean <= 0.0)
    fail(Errc::NonPositiveMean, "rsd undefined for mean " +
                                    std::to_string(s.mean) +
                                    "; corrupt data?");
  s.rsd = s.std / s.mean;
  return s;
}

}  // namespace detail

// Sample mean / std (n-1) / RSD of a scalar population, optionally after
// 1.5*IQR outlier exclusion (quartiles by sorted-rank interpolation).
inline StatSummary summarize(std::span<const double> values, Filter filter) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return detail::summarize_sorted(sorted, filter);
}

template <typename Derived>
StatSummary summarize(const Eigen::DenseBase<Derived>& values, Filter filter) {
  std::vector<double> sorted(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i)
    sorted[static_cast<std::size_t>(i)] =
        static_cast<double>(values.derived()(i));
  std::sort(sorted.begin(), sorted.end());
  return detail::summarize_sorted(sorted, filter);
}

// Values surviving the 1.5*IQR filter, in input order.
inline std::vector<double> iqr_filtered(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto [lo, hi] = detail::iqr_keep_range(sorted);
  const double lov = sorted[lo];
  const double hiv = sorted[hi - 1];
  std::vector<double> kept;
  kept.reserve(hi - lo);
  for (double v : values)
    if (v >= lov && v <= hiv) kept.push_back(v);
  return kept;
}

}  // namespace qpcm
