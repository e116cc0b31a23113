#pragma once

#include <functional>
#include <optional>

#include "nvespin/types.hpp"

namespace nvespin::lsq {

using ResidualFn = std::function<RealVector(const RealVector&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const RealVector&)>;

struct Options {
  int max_iterations = 500;
  double lambda0 = 1e-3;
  double step_tol = 1e-12;
  double ssr_rel_tol = 1e-14;
  // Per-parameter steps for the numeric Jacobian (central differences);
  // empty means 1e-6 * max(1, |x|).
  RealVector fd_steps;
  std::optional<RealVector> lower, upper;  // box projected after each step
};

struct Result {
  RealVector params;
  double residual_norm = 0.0;  // sqrt(SSR)
  RealVector sigma;            // 1-sigma from the Jacobian at the optimum
  Eigen::MatrixXd covariance;
  int iterations = 0;
  bool converged = false;
};

// Damped Gauss-Newton (Levenberg style). `jac` may be empty, in which case a
// central-difference Jacobian is used.
Result levenberg_marquardt(const ResidualFn& residuals, const JacobianFn& jac,
                           const RealVector& x0, const Options& opt = {});

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residuals, const RealVector& x,
                                 const RealVector& steps);

}  // namespace nvespin::lsq
