#include "qpcm/iv_analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qpcm/errors.hpp"
#include "qpcm/linfit.hpp"
#include "qpcm/stats.hpp"

namespace qpcm {

const char* to_string(Regime r) {
  return r == Regime::DIRECT ? "DIRECT" : "TRAP_ASSISTED";
}

const char* to_string(Detection d) {
  switch (d) {
    case Detection::CURRENT_JUMP: return "CURRENT_JUMP";
    case Detection::COMPLIANCE_HIT: return "COMPLIANCE_HIT";
    case Detection::NONE: return "NONE";
  }
  return "?";
}

PowerLawFit power_law_fit(std::span<const IVPoint> points) {
  if (points.size() < 2)
    fail(Errc::FitDegenerate, "power_law_fit: need >= 2 points");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd lx(n), ly(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    if (!(p.voltage_v > 0.0) || !(std::abs(p.current_a) > 0.0))
      fail(Errc::FitDegenerate, "power_law_fit: nonpositive voltage/current");
    lx(i) = std::log(p.voltage_v);
    ly(i) = std::log(std::abs(p.current_a));
  }
  const LineFit<double> f = fit_line(lx, ly);
  return {f.slope, f.intercept, f.r_squared};
}

BreakthroughResult detect_breakthrough(const IVTrace& trace,
                                       const IvConfig& config) {
  const auto& pts = trace.points;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double i0 = std::abs(pts[k].current_a);
    const double i1 = std::abs(pts[k + 1].current_a);
    if (i0 > config.noise_floor_a && i1 / i0 > config.jump_ratio)
      return {pts[k].voltage_v, Detection::CURRENT_JUMP};
    if (trace.compliance_a > 0.0 &&
        i1 >= trace.compliance_a * (1.0 - 1e-9))
      return {pts[k].voltage_v, Detection::COMPLIANCE_HIT};
  }
  return {std::numeric_limits<double>::quiet_NaN(), Detection::NONE};
}

namespace {

struct PrefixSums {
  std::vector<double> sx, sy, sxx, sxy, syy;

  explicit PrefixSums(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const auto n = static_cast<std::size_t>(x.size());
    sx.assign(n + 1, 0.0);
    sy.assign(n + 1, 0.0);
    sxx.assign(n + 1, 0.0);
    sxy.assign(n + 1, 0.0);
    syy.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x(static_cast<Eigen::Index>(i));
      const double yi = y(static_cast<Eigen::Index>(i));
      sx[i + 1] = sx[i] + xi;
      sy[i + 1] = sy[i] + yi;
      sxx[i + 1] = sxx[i] + xi * xi;
      sxy[i + 1] = sxy[i] + xi * yi;
      syy[i + 1] = syy[i] + yi * yi;
    }
  }

  // Slope and SSE of the OLS line over [lo, hi).
  void line(std::size_t lo, std::size_t hi, double& slope, double& sse) const {
    const double n = static_cast<double>(hi - lo);
    const double sx_ = sx[hi] - sx[lo];
    const double sy_ = sy[hi] - sy[lo];
    const double sxx_ = sxx[hi] - sxx[lo];
    const double sxy_ = sxy[hi] - sxy[lo];
    const double syy_ = syy[hi] - syy[lo];
    const double vxx = sxx_ - sx_ * sx_ / n;
    const double vxy = sxy_ - sx_ * sy_ / n;
    const double vyy = syy_ - sy_ * sy_ / n;
    if (vxx <= 0.0) {
      slope = 0.0;
      sse = std::numeric_limits<double>::infinity();
      return;
    }
    slope = vxy / vxx;
    sse = std::max(0.0, vyy - slope * vxy);
  }
};

RegimeFit make_fit(std::span<const IVPoint> pts, Regime regime) {
  const PowerLawFit pf = power_law_fit(pts);
  RegimeFit f;
  f.regime = regime;
  f.v_lo = pts.front().voltage_v;
  f.v_hi = pts.back().voltage_v;
  f.exponent = pf.exponent;
  f.prefactor = std::exp(pf.log_prefactor);
  f.r_squared = pf.r_squared;
  f.n_points = static_cast<int>(pts.size());
  f.r_jj_ohm = std::numeric_limits<double>::quiet_NaN();
  if (regime == Regime::DIRECT) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::VectorXd v(n), i(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      v(k) = pts[static_cast<std::size_t>(k)].voltage_v;
      i(k) = pts[static_cast<std::size_t>(k)].current_a;
    }
    const double g = zero_intercept_slope(v, i);
    if (!(g > 0.0))
      fail(Errc::FitDegenerate, "direct regime has nonpositive conductance");
    f.r_jj_ohm = 1.0 / g;
  }
  return f;
}

}  // namespace

std::vector<RegimeFit> segment_and_fit(const IVTrace& trace,
                                       const IvConfig& config) {
  const BreakthroughResult bt = detect_breakthrough(trace, config);

  // Usable points: pre-breakthrough, positive voltage, above the noise floor.
  std::vector<IVPoint> pts;
  pts.reserve(trace.points.size());
  for (const auto& p : trace.points) {
    if (bt.detection != Detection::NONE && p.voltage_v > bt.v_bt) break;
    if (!(p.voltage_v > 0.0)) continue;
    if (std::abs(p.current_a) <= config.noise_floor_a) continue;
    IVPoint q = p;
    if (config.r_series_ohm > 0.0) {
      q.voltage_v -= q.current_a * config.r_series_ohm;
      if (!(q.voltage_v > 0.0)) continue;
    }
    pts.push_back(q);
  }
  const std::size_t n = pts.size();
  if (n < 8)
    fail(Errc::TooFewPoints,
         "segment_and_fit: " + std::to_string(n) +
             " usable points below breakthrough (need >= 8)");

  Eigen::VectorXd lx(static_cast<Eigen::Index>(n)),
      ly(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    lx(static_cast<Eigen::Index>(i)) = std::log(pts[i].voltage_v);
    ly(static_cast<Eigen::Index>(i)) = std::log(std::abs(pts[i].current_a));
  }
  const PrefixSums ps(lx, ly);

  double m_all, sse_all;
  ps.line(0, n, m_all, sse_all);
  if (!std::isfinite(sse_all))
    fail(Errc::FitDegenerate, "segment_and_fit: degenerate voltage axis");

  std::vector<RegimeFit> out;
  if (std::abs(m_all - 1.0) <= config.m_tol) {
    out.push_back(make_fit(pts, Regime::DIRECT));
    return out;
  }

  // Two-segment changepoint by least total squared error in log-log space.
  const auto w = static_cast<std::size_t>(config.min_window);
  if (n < 2 * w)
    fail(Errc::TooFewPoints, "segment_and_fit: too few points to segment");
  std::size_t best_split = w;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t s = w; s + w <= n; ++s) {
    double ma, sa, mb, sb;
    ps.line(0, s, ma, sa);
    ps.line(s, n, mb, sb);
    const double total = sa + sb;
    if (total < best_sse) {
      best_sse = total;
      best_split = s;
    }
  }

  const std::span<const IVPoint> low(pts.data(), best_split);
  const std::span<const IVPoint> high(pts.data() + best_split,
                                      n - best_split);
  double m_low, sse_low;
  ps.line(0, best_split, m_low, sse_low);
  if (std::abs(m_low - 1.0) > config.m_tol)
    fail(Errc::NoOhmicRegion,
         "segment_and_fit: no low-voltage window with |m-1| <= " +
             std::to_string(config.m_tol) + " (got m = " +
             std::to_string(m_low) + "); shorted or broken junction?");
  out.push_back(make_fit(low, Regime::DIRECT));

  double m_high, sse_high;
  ps.line(best_split, n, m_high, sse_high);
  if (m_high > 2.0) out.push_back(make_fit(high, Regime::TRAP_ASSISTED));
  return out;
}

VbtStats vbt_stats(std::span<const VbtSample> samples, const IvConfig& config,
                   double qubit_area_um2) {
  if (samples.empty()) fail(Errc::EmptyInput, "vbt_stats: no samples");

  std::map<double, std::vector<double>> by_size;
  std::vector<double> all;
  all.reserve(samples.size());
  for (const auto& s : samples) {
    by_size[s.area_um2].push_back(s.v_bt);
    all.push_back(s.v_bt);
  }
  if (by_size.size() < 2)
    fail(Errc::TooFewSamples, "vbt_stats: need >= 2 junction sizes");
  for (const auto& [area, vs] : by_size) {
    if (vs.size() < static_cast<std::size_t>(config.vbt_min_per_size))
      fail(Errc::TooFewSamples,
           "vbt_stats: size " + std::to_string(area) + " um^2 has " +
               std::to_string(vs.size()) + " traces (need >= " +
               std::to_string(config.vbt_min_per_size) + ")");
  }

  VbtStats out;
  out.pooled = summarize(all, Filter::NONE);
  for (const auto& [area, vs] : by_size) {
    out.per_size.push_back({area, summarize(vs, Filter::NONE)});
    if (area == qubit_area_um2) {
      out.has_qubit_size = true;
      out.qubit_size = out.per_size.back().summary;
    }
  }

  double max_delta = 0.0;
  for (std::size_t i = 0; i < out.per_size.size(); ++i)
    for (std::size_t j = i + 1; j < out.per_size.size(); ++j)
      max_delta = std::max(max_delta,
                           std::abs(out.per_size[i].summary.mean -
                                    out.per_size[j].summary.mean));
  out.max_pairwise_delta_v = max_delta;
  out.area_dependent = max_delta > out.pooled.std;
  return out;
}

}  // namespace qpcm
