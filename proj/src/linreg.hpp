#pragma once

#include <Eigen/Dense>

namespace capekit {

/// Ordinary least squares result.
struct OLSFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  double residual_variance = 0.0;  // RSS / (n - k)
  Eigen::VectorXd standard_errors;
  double r_squared = 0.0;
  int n_observations = 0;
};

/// Least squares of y on the columns of X (caller supplies the intercept
/// column when wanted). Throws a numeric error when X is rank deficient.
OLSFit ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

}  // namespace capekit
