#pragma once

#include <Eigen/Dense>

#include "linreg.hpp"

namespace capekit {

// Low-bias estimation of the predictive system
//   y_t = alpha + beta x_{t-1} + u_t
//   x_t = theta + rho  x_{t-1} + v_t
// where x is persistent and innovations of x anticorrelate with u. Plain OLS
// on such data inherits the downward small-sample bias of the AR(1)
// coefficient and pushes beta upward; the augmented regression removes most
// of it by adding a bias-corrected innovation proxy as a regressor.

struct AR1Fit {
  double theta_ar = 0.0;  // intercept
  double rho = 0.0;
  Eigen::VectorXd residuals;  // v_t, one per transition
  double innovation_variance = 0.0;
  double rho_standard_error = 0.0;
};

struct BiasCorrectedAR1 {
  double rho_c = 0.0;
  double theta_c = 0.0;
  Eigen::VectorXd proxy_residuals;  // v^c_t = x_t - theta_c - rho_c x_{t-1}
  int n = 0;                        // observation count used by the correction
};

struct AugmentedFit {
  double alpha_c = 0.0;
  double beta_c = 0.0;
  double phi_c = 0.0;
  double beta_c_standard_error = 0.0;  // includes the rho_c variability term
  double t_statistic = 0.0;
  Eigen::VectorXd residuals;           // e_t of the augmented regression
  Eigen::Matrix2d error_covariance;    // sample covariance of (u_t, v_t), unaugmented system
  int n_rows = 0;

  // Plain components, kept for reporting and for the bootstrap null step.
  double alpha_ols = 0.0;
  double beta_ols = 0.0;
  double beta_ols_standard_error = 0.0;
  double rho_ols = 0.0;
  double rho_c = 0.0;
  double theta_c = 0.0;
};

/// OLS of x_t on (1, x_{t-1}); needs at least 3 points and a non-constant
/// series.
AR1Fit fit_ar1(const Eigen::VectorXd& x);
/// Same on explicit transition pairs x_prev[i] -> x_next[i].
AR1Fit fit_ar1_pairs(const Eigen::VectorXd& x_prev, const Eigen::VectorXd& x_next);

/// Second-order bias correction
///   rho_c = rho + (1+3 rho)/n + 3 (1+3 rho)/n^2,
/// with theta_c = (1-rho_c) * mean(x). n is the number of available x
/// observations and must be at least 10 for the expansion to make sense.
BiasCorrectedAR1 bias_correct(const AR1Fit& ar1, const Eigen::VectorXd& x);
BiasCorrectedAR1 bias_correct_pairs(const AR1Fit& ar1, const Eigen::VectorXd& x_prev,
                                    const Eigen::VectorXd& x_next, int n_observations);

/// Augmented regression of y_t on (1, x_{t-1}, v^c_t). The alignment is
/// len(y) = len(x) - 1: y[i] is the outcome of the transition x[i] -> x[i+1].
AugmentedFit augmented_regression(const Eigen::VectorXd& y, const Eigen::VectorXd& x);

/// Generalized form on explicit transitions: y[i] is produced over the span
/// x_prev[i] -> x_next[i]; n_observations feeds the bias correction.
AugmentedFit augmented_regression_pairs(const Eigen::VectorXd& y, const Eigen::VectorXd& x_prev,
                                        const Eigen::VectorXd& x_next, int n_observations);

}  // namespace capekit
