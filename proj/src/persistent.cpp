#include "persistent.hpp"

#include <cmath>

#include "errors.hpp"

namespace capekit {

AR1Fit fit_ar1_pairs(const Eigen::VectorXd& x_prev, const Eigen::VectorXd& x_next) {
  const int m = static_cast<int>(x_prev.size());
  if (x_next.size() != m) throw data_error("ar1: transition vectors differ in length");
  if (m < 2) throw data_error("ar1: need at least 2 transitions");

  Eigen::MatrixXd X(m, 2);
  X.col(0).setOnes();
  X.col(1) = x_prev;
  OLSFit f = ols(x_next, X);

  AR1Fit out;
  out.theta_ar = f.coefficients(0);
  out.rho = f.coefficients(1);
  out.residuals = f.residuals;
  out.innovation_variance = f.residual_variance;
  out.rho_standard_error = f.standard_errors(1);
  return out;
}

AR1Fit fit_ar1(const Eigen::VectorXd& x) {
  if (x.size() < 3) throw data_error("ar1: need at least 3 observations");
  const int m = static_cast<int>(x.size()) - 1;
  return fit_ar1_pairs(x.head(m), x.tail(m));
}

BiasCorrectedAR1 bias_correct_pairs(const AR1Fit& ar1, const Eigen::VectorXd& x_prev,
                                    const Eigen::VectorXd& x_next, int n_observations) {
  if (n_observations < 10)
    throw data_error("bias correction needs at least 10 observations");
  const double n = n_observations;
  BiasCorrectedAR1 out;
  out.n = n_observations;
  out.rho_c = ar1.rho + (1.0 + 3.0 * ar1.rho) / n + 3.0 * (1.0 + 3.0 * ar1.rho) / (n * n);

  // Mean over the distinct x observations (first transition start plus every
  // transition end; identical to the plain series mean in the consecutive
  // case).
  double mean = x_prev(0);
  for (int i = 0; i < x_next.size(); ++i) mean += x_next(i);
  mean /= (x_next.size() + 1);

  out.theta_c = (1.0 - out.rho_c) * mean;
  out.proxy_residuals =
      x_next.array() - out.theta_c - out.rho_c * x_prev.array();
  return out;
}

BiasCorrectedAR1 bias_correct(const AR1Fit& ar1, const Eigen::VectorXd& x) {
  const int m = static_cast<int>(x.size()) - 1;
  return bias_correct_pairs(ar1, x.head(m), x.tail(m), static_cast<int>(x.size()));
}

AugmentedFit augmented_regression_pairs(const Eigen::VectorXd& y, const Eigen::VectorXd& x_prev,
                                        const Eigen::VectorXd& x_next, int n_observations) {
  const int m = static_cast<int>(y.size());
  if (x_prev.size() != m || x_next.size() != m)
    throw data_error("augmented regression: misaligned series lengths");

  AR1Fit ar1 = fit_ar1_pairs(x_prev, x_next);
  BiasCorrectedAR1 corrected = bias_correct_pairs(ar1, x_prev, x_next, n_observations);

  Eigen::MatrixXd X(m, 3);
  X.col(0).setOnes();
  X.col(1) = x_prev;
  X.col(2) = corrected.proxy_residuals;

  // Plain (unaugmented) predictive regression, for the residual covariance
  // and for reference estimates.
  OLSFit plain = ols(y, X.leftCols(2));

  // A noiseless autoregression leaves the proxy collinear with (1, x); the
  // augmentation then carries no information and is dropped.
  bool augmented_ok = true;
  OLSFit aug;
  try {
    aug = ols(y, X);
  } catch (const Error&) {
    augmented_ok = false;
  }
  if (!augmented_ok) {
    aug = plain;
    aug.coefficients.conservativeResize(3);
    aug.coefficients(2) = 0.0;
    aug.standard_errors.conservativeResize(3);
    aug.standard_errors(2) = 0.0;
  }

  AugmentedFit out;
  out.n_rows = m;
  out.alpha_c = aug.coefficients(0);
  out.beta_c = aug.coefficients(1);
  out.phi_c = aug.coefficients(2);
  out.residuals = aug.residuals;
  out.alpha_ols = plain.coefficients(0);
  out.beta_ols = plain.coefficients(1);
  out.beta_ols_standard_error = plain.standard_errors(1);
  out.rho_ols = ar1.rho;
  out.rho_c = corrected.rho_c;
  out.theta_c = corrected.theta_c;

  // The OLS error of beta_c understates its sampling variability because the
  // proxy regressor itself depends on the estimated rho_c. Propagate that
  // variance: Var(rho_c) = (1 + 3/n + 9/n^2)^2 Var(rho_ols).
  const double n = n_observations;
  const double jac = 1.0 + 3.0 / n + 9.0 / (n * n);
  const double var_rho_c = jac * jac * ar1.rho_standard_error * ar1.rho_standard_error;
  const double se2 = aug.standard_errors(1) * aug.standard_errors(1) +
                     out.phi_c * out.phi_c * var_rho_c;
  out.beta_c_standard_error = std::sqrt(se2);
  out.t_statistic = out.beta_c_standard_error > 0.0
                        ? out.beta_c / out.beta_c_standard_error
                        : 0.0;

  // Sample covariance of the paired residuals (u_t, v_t).
  const Eigen::VectorXd& u = plain.residuals;
  const Eigen::VectorXd& v = ar1.residuals;
  const double um = u.mean(), vm = v.mean();
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
  for (int i = 0; i < m; ++i) {
    const double du = u(i) - um, dv = v(i) - vm;
    sigma(0, 0) += du * du;
    sigma(0, 1) += du * dv;
    sigma(1, 1) += dv * dv;
  }
  sigma(1, 0) = sigma(0, 1);
  out.error_covariance = sigma / std::max(1, m - 1);
  return out;
}

AugmentedFit augmented_regression(const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  if (y.size() != x.size() - 1)
    throw data_error("augmented regression: expected len(y) = len(x) - 1");
  const int m = static_cast<int>(y.size());
  return augmented_regression_pairs(y, x.head(m), x.tail(m), static_cast<int>(x.size()));
}

}  // namespace capekit
