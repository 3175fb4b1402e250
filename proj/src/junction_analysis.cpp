#include "qpcm/junction_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "qpcm/errors.hpp"
#include "qpcm/stats.hpp"

namespace qpcm {

YieldReport apply_spec(std::span<const JunctionRecord> junctions,
                       const SpecLimits& spec) {
  if (!spec.valid())
    fail(Errc::InvalidParams, "apply_spec: spec requires 0 < r_min < r_max");
  if (junctions.empty()) fail(Errc::EmptyInput, "apply_spec: no junctions");

  YieldReport out;
  out.spec = spec;
  out.n_total = static_cast<std::int64_t>(junctions.size());
  out.map.reserve(junctions.size());
  for (const auto& j : junctions) {
    const bool pass =
        j.status == JunctionStatus::OK && spec.passes(j.resistance_ohm);
    if (pass) ++out.n_pass;
    out.map.push_back({j.site.row, j.site.col, j.site.x_mm, j.site.y_mm,
                       j.junction_id, pass});
  }
  out.yield_fraction =
      static_cast<double>(out.n_pass) / static_cast<double>(out.n_total);
  return out;
}

ResistanceStats resistance_stats(std::span<const JunctionRecord> passing,
                                 int n_bins) {
  if (passing.size() < 10)
    fail(Errc::TooFewSamples, "resistance_stats: need >= 10 passing junctions");
  if (n_bins < 1)
    fail(Errc::InvalidParams, "resistance_stats: n_bins must be positive");

  std::vector<double> values;
  values.reserve(passing.size());
  for (const auto& j : passing) {
    if (j.status != JunctionStatus::OK)
      fail(Errc::InvalidParams,
           "resistance_stats: input must be spec-passing (status OK)");
    values.push_back(j.resistance_ohm);
  }

  ResistanceStats out;
  out.summary = summarize(values, Filter::IQR_1_5);
  // Gaussian MLE on the filtered population coincides with its sample moments.
  out.mu = out.summary.mean;
  out.sigma = out.summary.std;

  const std::vector<double> kept = iqr_filtered(values);
  const auto [mn_it, mx_it] = std::minmax_element(kept.begin(), kept.end());
  double lo = *mn_it;
  double hi = *mx_it;
  if (hi <= lo) hi = lo + 1.0;
  out.histogram.edges.resize(static_cast<std::size_t>(n_bins) + 1);
  out.histogram.counts.assign(static_cast<std::size_t>(n_bins), 0);
  const double bw = (hi - lo) / n_bins;
  for (int i = 0; i <= n_bins; ++i)
    out.histogram.edges[static_cast<std::size_t>(i)] = lo + bw * i;
  for (double v : kept) {
    auto bin = static_cast<std::int64_t>((v - lo) / bw);
    bin = std::clamp<std::int64_t>(bin, 0, n_bins - 1);
    ++out.histogram.counts[static_cast<std::size_t>(bin)];
  }
  return out;
}

OxideVariability oxide_rsd(double rsd_jj, double rsd_a) {
  if (!(rsd_jj >= 0.0 && rsd_jj < 1.0 && rsd_a >= 0.0 && rsd_a < 1.0))
    fail(Errc::InvalidParams, "oxide_rsd: RSDs must lie in [0, 1)");
  if (rsd_a > rsd_jj)
    fail(Errc::AreaExceedsTotal,
         "oxide_rsd: area RSD " + std::to_string(rsd_a) +
             " exceeds junction RSD " + std::to_string(rsd_jj) +
             "; inconsistent upstream estimates");
  return {rsd_jj, rsd_a, std::sqrt(rsd_jj * rsd_jj - rsd_a * rsd_a)};
}

}  // namespace qpcm
