#include "nvespin/lsq.hpp"

#include <cmath>

namespace nvespin::lsq {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residuals, const RealVector& x,
                                 const RealVector& steps) {
  const RealVector r0 = residuals(x);
  Eigen::MatrixXd j(r0.size(), x.size());
  for (Eigen::Index p = 0; p < x.size(); ++p) {
    const double h = (steps.size() == x.size() && steps[p] > 0)
                         ? steps[p]
                         : 1e-6 * std::max(1.0, std::abs(x[p]));
    RealVector xp = x, xm = x;
    xp[p] += h;
    xm[p] -= h;
    j.col(p) = (residuals(xp) - residuals(xm)) / (2.0 * h);
  }
  return j;
}

namespace {

RealVector project(const RealVector& x, const Options& opt) {
  RealVector out = x;
  if (opt.lower)
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = std::max(out[i], (*opt.lower)[i]);
  if (opt.upper)
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = std::min(out[i], (*opt.upper)[i]);
  return out;
}

}  // namespace

Result levenberg_marquardt(const ResidualFn& residuals, const JacobianFn& jac,
                           const RealVector& x0, const Options& opt) {
  Result res;
  RealVector x = project(x0, opt);
  RealVector r = residuals(x);
  double ssr = r.squaredNorm();
  double lambda = opt.lambda0;

  auto jacobian_at = [&](const RealVector& p) {
    return jac ? jac(p) : numeric_jacobian(residuals, p, opt.fd_steps);
  };

  Eigen::MatrixXd j = jacobian_at(x);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const RealVector jtr = j.transpose() * r;

    bool accepted = false;
    for (int tries = 0; tries < 25 && !accepted; ++tries) {
      Eigen::MatrixXd aug = jtj;
      for (Eigen::Index d = 0; d < aug.rows(); ++d)
        aug(d, d) += lambda * std::max(jtj(d, d), 1e-12);
      const RealVector step = aug.ldlt().solve(-jtr);
      const RealVector x_try = project(x + step, opt);
      const RealVector r_try = residuals(x_try);
      const double ssr_try = r_try.squaredNorm();
      if (ssr_try < ssr) {
        const double rel_drop = (ssr - ssr_try) / std::max(ssr, 1e-300);
        const double step_norm = (x_try - x).norm();
        x = x_try;
        r = r_try;
        ssr = ssr_try;
        lambda = std::max(lambda / 3.0, 1e-14);
        accepted = true;
        if (step_norm < opt.step_tol * (x.norm() + opt.step_tol) ||
            rel_drop < opt.ssr_rel_tol) {
          res.converged = true;
        }
      } else {
        lambda *= 5.0;
        if (lambda > 1e14) break;
      }
    }
    if (!accepted) {
      // No downhill step available: treat the current point as the optimum.
      res.converged = true;
    }
    if (res.converged) break;
    j = jacobian_at(x);
  }

  j = jacobian_at(x);
  const Eigen::MatrixXd jtj = j.transpose() * j;
  const Eigen::Index np = x.size();
  const Eigen::Index m = r.size();
  const double dof = std::max<double>(1.0, static_cast<double>(m - np));
  const double s2 = ssr / dof;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(np, np);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (lu.isInvertible()) cov = s2 * lu.inverse();

  res.params = x;
  res.residual_norm = std::sqrt(ssr);
  res.covariance = cov;
  res.sigma.resize(np);
  for (Eigen::Index i = 0; i < np; ++i) res.sigma[i] = std::sqrt(std::max(0.0, cov(i, i)));
  res.iterations = it + 1;
  return res;
}

}  // namespace nvespin::lsq
