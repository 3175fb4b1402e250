#include "qpcm/cryo_fits.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "qpcm/errors.hpp"
#include "qpcm/levmar.hpp"
#include "qpcm/linfit.hpp"

namespace qpcm {

const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::T1: return "T1";
    case TraceKind::RAMSEY: return "RAMSEY";
    case TraceKind::RB: return "RB";
  }
  return "?";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void validate_trace(const DecayTrace& t, TraceKind kind,
                    Eigen::Index min_points) {
  if (t.kind != kind)
    fail(Errc::InvalidParams, std::string("expected a ") + to_string(kind) +
                                  " trace, got " + to_string(t.kind));
  if (t.x.size() != t.y.size() || t.x.size() < min_points)
    fail(Errc::TooFewPoints, std::string(to_string(kind)) + " fit needs >= " +
                                 std::to_string(min_points) +
                                 " matched points");
  for (Eigen::Index i = 0; i < t.x.size(); ++i) {
    if (!std::isfinite(t.x(i)) || !std::isfinite(t.y(i)))
      fail(Errc::InvalidParams, "trace contains non-finite values");
    if (i > 0 && !(t.x(i) > t.x(i - 1)))
      fail(Errc::InvalidParams, "trace x must be strictly increasing");
  }
}

double r_squared(const VectorXd& y, double sse) {
  const double syy = (y.array() - y.mean()).square().sum();
  if (syy <= 0.0) return sse <= 0.0 ? 1.0 : 0.0;
  return std::max(0.0, 1.0 - sse / syy);
}

// Exponential-decay model y = a exp(-x/tau) + c; rejects tau <= 0.
struct ExpModel {
  const VectorXd& x;

  bool operator()(const VectorXd& p, VectorXd& yhat, MatrixXd* jac) const {
    const double a = p(0), tau = p(1), c = p(2);
    if (!(tau > 0.0)) return false;
    const auto e = (-x.array() / tau).exp();
    yhat = (a * e + c).matrix();
    if (jac) {
      jac->col(0) = e.matrix();
      jac->col(1) = (a * e * x.array() / (tau * tau)).matrix();
      jac->col(2).setOnes();
    }
    return true;
  }
};

// Damped cosine y = a exp(-x/tau) cos(2 pi f x + phi) + c.
struct RamseyModel {
  const VectorXd& x;

  bool operator()(const VectorXd& p, VectorXd& yhat, MatrixXd* jac) const {
    const double a = p(0), tau = p(1), f = p(2), phi = p(3), c = p(4);
    if (!(tau > 0.0) || !(f >= 0.0)) return false;
    const auto e = (-x.array() / tau).exp();
    const auto th = (2.0 * M_PI * f * x.array() + phi).eval();
    yhat = (a * e * th.cos() + c).matrix();
    if (jac) {
      jac->col(0) = (e * th.cos()).matrix();
      jac->col(1) = (a * e * th.cos() * x.array() / (tau * tau)).matrix();
      jac->col(2) = (-a * e * th.sin() * 2.0 * M_PI * x.array()).matrix();
      jac->col(3) = (-a * e * th.sin()).matrix();
      jac->col(4).setOnes();
    }
    return true;
  }
};

// RB decay y = a p^m + c with p constrained to (0, 1).
struct RbModel {
  const VectorXd& x;

  bool operator()(const VectorXd& par, VectorXd& yhat, MatrixXd* jac) const {
    const double a = par(0), p = par(1), c = par(2);
    if (!(p > 1e-12) || !(p < 1.0 - 1e-12)) return false;
    const auto pm = (x.array() * std::log(p)).exp();
    yhat = (a * pm + c).matrix();
    if (jac) {
      jac->col(0) = pm.matrix();
      jac->col(1) = (a * x.array() * pm / p).matrix();
      jac->col(2).setOnes();
    }
    return true;
  }
};

// Decay-time initial guess from a log-linear fit of the baseline-subtracted
// signal; returns 0 when too few points carry usable signal.
double decay_guess(const VectorXd& x, const VectorXd& y, double a0, double c0) {
  std::vector<double> lx, ly;
  const double floor = std::abs(a0) * 0.02;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double z = (y(i) - c0) * (a0 < 0 ? -1.0 : 1.0);
    if (z > floor) {
      lx.push_back(x(i));
      ly.push_back(std::log(z));
    }
  }
  if (lx.size() < 3) return 0.0;
  const Eigen::Map<const VectorXd> mx(lx.data(),
                                      static_cast<Eigen::Index>(lx.size()));
  const Eigen::Map<const VectorXd> my(ly.data(),
                                      static_cast<Eigen::Index>(ly.size()));
  const LineFit<double> f = fit_line(mx, my);
  if (!(f.slope < 0.0)) return 0.0;
  return -1.0 / f.slope;
}

// Dominant frequency of the detrended signal on a uniformized grid, via a
// plain DFT with parabolic peak refinement. Returns (freq, phase).
std::pair<double, double> dominant_frequency(const VectorXd& x,
                                             const VectorXd& y) {
  const Eigen::Index n = x.size();
  const double span = x(n - 1) - x(0);
  const double dt = span / static_cast<double>(n - 1);
  const double mean = y.mean();

  std::vector<double> mag(static_cast<std::size_t>(n / 2 + 1), 0.0);
  std::vector<std::complex<double>> coef(mag.size());
  for (std::size_t k = 1; k < mag.size(); ++k) {
    std::complex<double> s(0.0, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double ang = -2.0 * M_PI * static_cast<double>(k) *
                         (x(j) - x(0)) / (dt * static_cast<double>(n));
      s += (y(j) - mean) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    coef[k] = s;
    mag[k] = std::abs(s);
  }
  std::size_t kpk = 1;
  for (std::size_t k = 2; k < mag.size(); ++k)
    if (mag[k] > mag[kpk]) kpk = k;

  double kref = static_cast<double>(kpk);
  if (kpk + 1 < mag.size() && kpk >= 2) {
    const double d1 = mag[kpk - 1], d2 = mag[kpk], d3 = mag[kpk + 1];
    const double denom = d1 - 2.0 * d2 + d3;
    if (std::abs(denom) > 0.0) kref += 0.5 * (d1 - d3) / denom;
  }
  const double freq = kref / (dt * static_cast<double>(n));
  const double phase = std::atan2(-coef[kpk].imag(), coef[kpk].real());
  return {freq, phase};
}

}  // namespace

CoherenceResult fit_t1(const DecayTrace& trace) {
  validate_trace(trace, TraceKind::T1, 6);
  const VectorXd& x = trace.x;
  const VectorXd& y = trace.y;
  const Eigen::Index n = x.size();

  // Baseline from the trace tail, amplitude from the head.
  const Eigen::Index tail = std::max<Eigen::Index>(2, n / 10);
  const double c0 = y.tail(tail).mean();
  const double a0 = y(0) - c0;
  if (std::abs(a0) <= 1e-12 * (1.0 + std::abs(c0)))
    fail(Errc::NonDecaying, "fit_t1: trace carries no decay signal");
  double tau0 = decay_guess(x, y, a0, c0);
  if (tau0 <= 0.0) tau0 = (x(n - 1) - x(0)) / 3.0;

  VectorXd p0(3);
  p0 << a0, tau0, c0;
  const auto res = lm_fit<double>(ExpModel{x}, p0, y);
  if (!res.converged)
    fail(Errc::NoConvergence, "fit_t1: minimization did not converge");
  if (!(res.params(1) > 0.0))
    fail(Errc::NonDecaying, "fit_t1: fitted T1 <= 0");

  CoherenceResult out;
  out.kind = TraceKind::T1;
  out.amplitude = res.params(0);
  out.value = res.params(1);
  out.offset = res.params(2);
  out.value_se = res.standard_errors()(1);
  out.r_squared = r_squared(y, res.sse);
  return out;
}

CoherenceResult fit_ramsey(const DecayTrace& trace) {
  validate_trace(trace, TraceKind::RAMSEY, 10);
  const VectorXd& x = trace.x;
  const VectorXd& y = trace.y;
  const Eigen::Index n = x.size();
  const double span = x(n - 1) - x(0);

  const double ymin = y.minCoeff();
  const double ymax = y.maxCoeff();
  if (ymax - ymin <= 0.0)
    fail(Errc::NoConvergence, "fit_ramsey: zero-amplitude trace");

  const auto [f0, ph0] = dominant_frequency(x, y);
  if (f0 < 1.0 / span) {
    // No full oscillation in the record: overdamped path, detuning fixed 0.
    const double c0 = y.tail(std::max<Eigen::Index>(2, n / 10)).mean();
    const double a0 = y(0) - c0;
    double tau0 = decay_guess(x, y, a0, c0);
    if (tau0 <= 0.0) tau0 = span / 3.0;
    VectorXd p0(3);
    p0 << a0, tau0, c0;
    const auto res = lm_fit<double>(ExpModel{x}, p0, y);
    if (!res.converged || !(res.params(1) > 0.0))
      fail(Errc::NoConvergence, "fit_ramsey: overdamped fit failed");
    CoherenceResult out;
    out.kind = TraceKind::RAMSEY;
    out.amplitude = res.params(0);
    out.value = res.params(1);
    out.offset = res.params(2);
    out.value_se = res.standard_errors()(1);
    out.overdamped = true;
    out.r_squared = r_squared(y, res.sse);
    return out;
  }

  const double c0 = y.mean();
  const double a0 = 0.5 * (ymax - ymin);
  const double tau0 = span / 2.0;

  // The DFT phase can be off by the damping skew; try four phase starts and
  // keep the best minimum. Deterministic.
  LmResult<double> best;
  best.sse = std::numeric_limits<double>::infinity();
  best.converged = false;
  for (int k = 0; k < 4; ++k) {
    VectorXd p0(5);
    p0 << a0, tau0, f0, ph0 + k * M_PI_2, c0;
    const auto res = lm_fit<double>(RamseyModel{x}, p0, y);
    if (res.converged && res.sse < best.sse) best = res;
  }
  if (!best.converged)
    fail(Errc::NoConvergence, "fit_ramsey: minimization did not converge");
  if (!(best.params(1) > 0.0))
    fail(Errc::NoConvergence, "fit_ramsey: fitted T2* <= 0");
  if (best.params(2) < 1.0 / (2.0 * span))
    fail(Errc::AmbiguousDetuning,
         "fit_ramsey: fitted detuning below the 1/(2 span) resolution limit");

  CoherenceResult out;
  out.kind = TraceKind::RAMSEY;
  out.amplitude = best.params(0);
  out.value = best.params(1);
  out.detuning_hz = best.params(2);
  out.phase_rad = best.params(3);
  out.offset = best.params(4);
  out.value_se = best.standard_errors()(1);
  out.r_squared = r_squared(y, best.sse);
  return out;
}

CoherenceResult fit_rb(const DecayTrace& trace) {
  validate_trace(trace, TraceKind::RB, 4);
  const VectorXd& x = trace.x;
  const VectorXd& y = trace.y;
  const Eigen::Index n = x.size();

  std::vector<double> distinct(x.data(), x.data() + n);
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  if (distinct.size() < 4)
    fail(Errc::InvalidParams, "fit_rb: need >= 4 distinct sequence lengths");

  const Eigen::Index tail = std::max<Eigen::Index>(2, n / 10);
  const double c0 = y.tail(tail).mean();
  const double a0 = y(0) - c0;
  const double scale = std::max(std::abs(y.maxCoeff()), std::abs(y.minCoeff()));
  if (std::abs(a0) <= 1e-9 * (1.0 + scale))
    fail(Errc::UnphysicalP,
         "fit_rb: no decay over sequence length; p at or above 1");

  // log(y - c0) vs m gives log p as the slope.
  std::vector<double> lx, ly;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = (y(i) - c0) * (a0 < 0 ? -1.0 : 1.0);
    if (z > std::abs(a0) * 0.02) {
      lx.push_back(x(i));
      ly.push_back(std::log(z));
    }
  }
  double p0v = 0.99;
  if (lx.size() >= 3) {
    const Eigen::Map<const VectorXd> mx(lx.data(),
                                        static_cast<Eigen::Index>(lx.size()));
    const Eigen::Map<const VectorXd> my(ly.data(),
                                        static_cast<Eigen::Index>(ly.size()));
    const LineFit<double> f = fit_line(mx, my);
    if (f.slope < 0.0) p0v = std::exp(f.slope);
  }
  p0v = std::clamp(p0v, 1e-6, 1.0 - 1e-9);

  VectorXd p0(3);
  p0 << a0, p0v, c0;
  const auto res = lm_fit<double>(RbModel{x}, p0, y);
  if (!res.converged)
    fail(Errc::NoConvergence, "fit_rb: minimization did not converge");
  const double p = res.params(1);
  if (!(p > 1e-9) || !(p < 1.0 - 1e-9))
    fail(Errc::UnphysicalP,
         "fit_rb: fitted p = " + std::to_string(p) + " outside (0, 1)");

  CoherenceResult out;
  out.kind = TraceKind::RB;
  out.amplitude = res.params(0);
  out.value = p;
  out.offset = res.params(2);
  out.value_se = res.standard_errors()(1);
  out.fidelity = 1.0 - (1.0 - p) / 2.0;
  out.fidelity_se = out.value_se / 2.0;
  out.r_squared = r_squared(y, res.sse);
  return out;
}

}  // namespace qpcm
