#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace qpcm {

template <typename Scalar>
struct LmOptions {
  int max_iterations = 400;
  Scalar step_tolerance = Scalar(1e-13);  // relative parameter step
  Scalar lambda0 = Scalar(1e-3);
};

template <typename Scalar>
struct LmResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> params;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> covariance;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> residuals;  // y - yhat
  Scalar sse = 0;
  int iterations = 0;
  bool converged = false;

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> standard_errors() const {
    return covariance.diagonal().array().max(Scalar(0)).sqrt();
  }
};

// Dense Levenberg-Marquardt for small parameter counts. `model` must provide
//   bool operator()(const VectorX& p, VectorX& yhat, MatrixX* jac) const
// returning false for parameter values outside the feasible region (the trial
// step is then rejected and the damping increased). Covariance is
// sse/(n-p) * (J^T J)^-1 at the solution.
template <typename Scalar, typename Model>
LmResult<Scalar> lm_fit(const Model& model,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& p0,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                        const LmOptions<Scalar>& opts = {}) {
  using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const Eigen::Index n = y.size();
  const Eigen::Index np = p0.size();

  LmResult<Scalar> out;
  out.params = p0;

  VecX yhat(n);
  MatX jac(n, np);
  if (!model(out.params, yhat, &jac)) {
    out.converged = false;
    out.sse = std::numeric_limits<Scalar>::infinity();
    return out;
  }
  VecX r = y - yhat;
  Scalar sse = r.squaredNorm();
  Scalar lambda = opts.lambda0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    out.iterations = iter + 1;
    const MatX jtj = jac.transpose() * jac;
    const VecX g = jac.transpose() * r;

    bool accepted = false;
    VecX p_try, yhat_try;
    for (int k = 0; k < 40; ++k) {
      MatX a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(
                                   Scalar(1e-30) * jtj.diagonal().maxCoeff());
      const VecX step = a.ldlt().solve(g);
      if (!step.allFinite()) {
        lambda *= Scalar(10);
        continue;
      }
      p_try = out.params + step;
      yhat_try.resize(n);
      if (!model(p_try, yhat_try, nullptr)) {
        lambda *= Scalar(10);
        continue;
      }
      const Scalar sse_try = (y - yhat_try).squaredNorm();
      if (sse_try <= sse) {
        const Scalar rel_step =
            (step.array().abs() /
             (p_try.array().abs() + Scalar(1e-300)))
                .maxCoeff();
        out.params = p_try;
        r = y - yhat_try;
        const Scalar improvement = sse - sse_try;
        sse = sse_try;
        lambda = std::max(lambda * Scalar(0.25), Scalar(1e-15));
        accepted = true;
        if (rel_step < opts.step_tolerance ||
            improvement <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() *
                               (sse + Scalar(1e-300))) {
          out.converged = true;
        }
        break;
      }
      lambda *= Scalar(10);
    }
    if (!accepted) {
      // No downhill step found; the current point is (numerically) a minimum.
      out.converged = true;
      break;
    }
    if (out.converged) break;
    if (!model(out.params, yhat, &jac)) break;
  }

  if (!model(out.params, yhat, &jac)) {
    out.converged = false;
  }
  out.residuals = y - yhat;
  out.sse = out.residuals.squaredNorm();

  const MatX jtj = jac.transpose() * jac;
  const Scalar dof = Scalar(std::max<Eigen::Index>(n - np, 1));
  MatX inv = jtj.completeOrthogonalDecomposition().pseudoInverse();
  out.covariance = (out.sse / dof) * inv;
  return out;
}

}  // namespace qpcm
