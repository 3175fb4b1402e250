#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "qpcm/errors.hpp"

namespace qpcm {

template <typename Scalar>
struct LineFit {
  Scalar slope = 0;
  Scalar intercept = 0;
  Scalar slope_se = 0;
  Scalar intercept_se = 0;
  Scalar r_squared = 0;
  Scalar chi2 = 0;  // weighted SSE
  Eigen::Index n = 0;
};

// Ordinary least squares y = intercept + slope * x. Standard errors use the
// residual variance estimate SSE / (n - 2).
template <typename DX, typename DY>
LineFit<typename DX::Scalar> fit_line(const Eigen::MatrixBase<DX>& x,
                                      const Eigen::MatrixBase<DY>& y) {
  using S = typename DX::Scalar;
  const Eigen::Index n = x.size();
  if (n != y.size() || n < 2)
    fail(Errc::InvalidParams, "fit_line needs matching x/y with n >= 2");

  const S xm = x.mean();
  const S ym = y.mean();
  const auto dx = (x.derived().array() - xm).eval();
  const auto dy = (y.derived().array() - ym).eval();
  const S sxx = dx.square().sum();
  if (sxx <= S(0)) fail(Errc::DegenerateFit, "fit_line: all x equal");
  const S sxy = (dx * dy).sum();
  const S syy = dy.square().sum();

  LineFit<S> f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  const S sse = (dy - f.slope * dx).square().sum();
  f.chi2 = sse;
  f.r_squared = syy > S(0) ? S(1) - sse / syy : S(1);
  if (f.r_squared < S(0)) f.r_squared = S(0);
  const S sigma2 = n > 2 ? sse / S(n - 2) : S(0);
  f.slope_se = std::sqrt(sigma2 / sxx);
  f.intercept_se = std::sqrt(sigma2 * (S(1) / S(n) + xm * xm / sxx));
  return f;
}

// Weighted least squares with weights w_i = 1 / sigma_i^2. Parameter
// covariance is scaled by the reduced chi-square so that standard errors stay
// meaningful when the sigmas are only relative.
template <typename DX, typename DY, typename DW>
LineFit<typename DX::Scalar> fit_line_weighted(const Eigen::MatrixBase<DX>& x,
                                               const Eigen::MatrixBase<DY>& y,
                                               const Eigen::MatrixBase<DW>& w) {
  using S = typename DX::Scalar;
  const Eigen::Index n = x.size();
  if (n != y.size() || n != w.size() || n < 2)
    fail(Errc::InvalidParams, "fit_line_weighted needs matching x/y/w, n >= 2");
  if ((w.derived().array() <= S(0)).any())
    fail(Errc::InvalidParams, "fit_line_weighted needs positive weights");

  const S sw = w.sum();
  const S xm = (w.derived().array() * x.derived().array()).sum() / sw;
  const S ym = (w.derived().array() * y.derived().array()).sum() / sw;
  const auto dx = (x.derived().array() - xm).eval();
  const auto dy = (y.derived().array() - ym).eval();
  const S sxx = (w.derived().array() * dx.square()).sum();
  if (sxx <= S(0)) fail(Errc::DegenerateFit, "fit_line_weighted: all x equal");
  const S sxy = (w.derived().array() * dx * dy).sum();
  const S syy = (w.derived().array() * dy.square()).sum();

  LineFit<S> f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  f.chi2 = (w.derived().array() * (dy - f.slope * dx).square()).sum();
  f.r_squared = syy > S(0) ? S(1) - f.chi2 / syy : S(1);
  if (f.r_squared < S(0)) f.r_squared = S(0);
  const S scale = n > 2 ? f.chi2 / S(n - 2) : S(0);
  f.slope_se = std::sqrt(scale / sxx);
  f.intercept_se = std::sqrt(scale * (S(1) / sw + xm * xm / sxx));
  return f;
}

// Zero-intercept slope of y on x (y = slope * x), i.e. sum(xy)/sum(x^2).
template <typename DX, typename DY>
typename DX::Scalar zero_intercept_slope(const Eigen::MatrixBase<DX>& x,
                                         const Eigen::MatrixBase<DY>& y) {
  using S = typename DX::Scalar;
  const S sxx = x.derived().array().square().sum();
  if (sxx <= S(0)) fail(Errc::DegenerateFit, "zero_intercept_slope: sum x^2 = 0");
  return (x.derived().array() * y.derived().array()).sum() / sxx;
}

}  // namespace qpcm
