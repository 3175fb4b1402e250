#include "qpcm/shorts_analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "qpcm/errors.hpp"
#include "qpcm/linfit.hpp"
#include "qpcm/stats.hpp"

namespace qpcm {

SheetStats sheet_stats(std::span<const SheetSample> samples) {
  if (samples.empty()) fail(Errc::EmptyInput, "sheet_stats: no samples");
  const Layer layer = samples.front().layer;
  for (const auto& s : samples) {
    if (s.layer != layer)
      fail(Errc::MixedLayers, "sheet_stats: samples mix BE and TE");
  }

  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back(s.sheet_resistance_ohm_sq);

  SheetStats out;
  out.layer = layer;
  out.summary = summarize(values, Filter::NONE);
  out.normalized_map.reserve(samples.size());
  for (const auto& s : samples) {
    out.normalized_map.push_back({s.site_index, s.x_mm, s.y_mm,
                                  s.sheet_resistance_ohm_sq / out.summary.mean});
  }
  return out;
}

WidthVariability width_rsd(std::span<const ShortRecord> shorts,
                           double rsd_sheet) {
  if (shorts.empty()) fail(Errc::EmptyInput, "width_rsd: no shorts");
  if (!(rsd_sheet >= 0.0))
    fail(Errc::InvalidParams, "width_rsd: rsd_sheet must be >= 0");

  const Layer layer = shorts.front().layer;
  const double width = shorts.front().design_width_nm;
  std::vector<double> ok_values;
  std::int64_t n_status = 0;
  for (const auto& r : shorts) {
    if (r.layer != layer || r.design_width_nm != width)
      fail(Errc::MixedGeometry,
           "width_rsd: shorts must share one layer and design width");
    if (r.status == ShortStatus::OK)
      ok_values.push_back(r.resistance_ohm);
    else
      ++n_status;
  }
  if (ok_values.size() < 2)
    fail(Errc::TooFewSamples, "width_rsd: fewer than 2 OK shorts");

  const StatSummary s = summarize(ok_values, Filter::IQR_1_5);
  if (rsd_sheet > s.rsd)
    fail(Errc::SheetExceedsTotal,
         "width_rsd: sheet RSD " + std::to_string(rsd_sheet) +
             " exceeds resistance RSD " + std::to_string(s.rsd) +
             "; inconsistent inputs");

  WidthVariability out;
  out.layer = layer;
  out.design_width_nm = width;
  out.rsd_r = s.rsd;
  out.rsd_sheet = rsd_sheet;
  out.rsd_w = std::sqrt(s.rsd * s.rsd - rsd_sheet * rsd_sheet);
  out.n_used = s.n;
  out.n_excluded_status = n_status;
  out.n_excluded_iqr = s.n_excluded;
  return out;
}

double area_rsd(const WidthVariability& be, const WidthVariability& te) {
  if (be.layer != Layer::BE || te.layer != Layer::TE)
    fail(Errc::LayerMismatch, "area_rsd: expects (BE, TE) inputs");
  return std::hypot(be.rsd_w, te.rsd_w);
}

std::vector<WidthGroupMean> group_width_means(
    std::span<const ShortRecord> shorts, Layer layer) {
  std::map<double, std::vector<double>> by_width;
  for (const auto& r : shorts) {
    if (r.layer != layer || r.status != ShortStatus::OK) continue;
    by_width[r.design_width_nm].push_back(r.resistance_ohm);
  }

  std::vector<WidthGroupMean> out;
  out.reserve(by_width.size());
  for (auto& [w, values] : by_width) {
    if (values.size() < 2) continue;
    const StatSummary s = summarize(values, Filter::IQR_1_5);
    WidthGroupMean g;
    g.design_width_nm = w;
    g.mean_r_ohm = s.mean;
    g.se_r_ohm = s.std / std::sqrt(static_cast<double>(s.n));
    g.n = s.n;
    out.push_back(g);
  }
  return out;
}

OffsetFit width_offset(std::span<const WidthGroupMean> groups, Layer layer,
                       bool weighted) {
  if (groups.size() < 3)
    fail(Errc::InsufficientWidths,
         "width_offset: need >= 3 design widths, have " +
             std::to_string(groups.size()));

  const auto n = static_cast<Eigen::Index>(groups.size());
  Eigen::VectorXd x(n), y(n), sigma_x(n);
  bool have_se = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& g = groups[static_cast<std::size_t>(i)];
    if (!(g.mean_r_ohm > 0.0))
      fail(Errc::InvalidParams, "width_offset: nonpositive group mean");
    x(i) = 1.0 / g.mean_r_ohm;
    y(i) = g.design_width_nm;
    // SE(1/R) = SE(R)/R^2 by linear error propagation.
    sigma_x(i) = g.se_r_ohm / (g.mean_r_ohm * g.mean_r_ohm);
    if (!(sigma_x(i) > 0.0)) have_se = false;
  }
  if ((x.array() == x(0)).all())
    fail(Errc::DegenerateFit, "width_offset: all group means identical");

  LineFit<double> fit;
  if (weighted && have_se) {
    const Eigen::VectorXd w = sigma_x.array().square().inverse();
    fit = fit_line_weighted(x, y, w);
  } else {
    fit = fit_line(x, y);
  }

  OffsetFit out;
  out.layer = layer;
  out.delta_w_nm = fit.intercept;
  out.delta_w_se_nm = fit.intercept_se;
  out.slope_ohm_nm = fit.slope;
  out.r_squared = fit.r_squared;
  out.n_widths = static_cast<int>(n);
  return out;
}

}  // namespace qpcm
