#include "linreg.hpp"

#include "errors.hpp"

namespace capekit {

OLSFit ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  const int k = static_cast<int>(X.cols());
  if (y.size() != n) throw data_error("ols: regressand length does not match design rows");
  if (n <= k) throw data_error("ols: need more observations than regressors");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-12);
  if (qr.rank() < k) throw numeric_error("ols: rank-deficient design matrix");

  OLSFit fit;
  fit.n_observations = n;
  fit.coefficients = qr.solve(y);
  fit.residuals = y - X * fit.coefficients;

  const double rss = fit.residuals.squaredNorm();
  fit.residual_variance = rss / (n - k);

  const Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  fit.standard_errors = (fit.residual_variance * xtx_inv.diagonal()).array().sqrt();

  const double tss = (y.array() - y.mean()).square().sum();
  fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 0.0;
  return fit;
}

}  // namespace capekit
