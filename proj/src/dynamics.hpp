#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "kv.hpp"
#include "rng.hpp"

namespace capekit {

/// Affine function of the initial log EP ratio.
struct Affine {
  double alpha = 0.0;
  double beta = 0.0;
  double operator()(double log_ep0) const { return alpha + beta * log_ep0; }
};

/// Coefficients of the monthly stochastic difference system
///   p_{t+1}  = p_t + mu_t + xi_t
///   mu_{t+1} = gamma mu_t + kappa (log<e>_t - p_t + H + gF t) + sigma_mu W^mu
///   xi_{t+1} = xi_t + kappa/(1-gamma) sigma_p W^p
/// plus the mean-reverting log dividend-price ratio
///   logdp_{t+1} = logdp_t - theta_div (logdp_t - logG) + sigma_d W^d.
/// The drift anchors gF1 = g(1+F), G and H are affine in the log EP ratio at
/// the start of a scenario and stay frozen along a path. All rates are per
/// month; sigmas are standard deviations per square-root month.
struct ModelParams {
  double gamma = 0.0;     // momentum sensitivity, dimensionless, in (0,1)
  double kappa = 0.0;     // mean-reversion rate, constrained by 4 kappa <= (1-gamma)^2
  double sigma_mu = 0.0;  // growth shock volatility
  double sigma_p = 0.0;   // long-run return volatility
  double g = 0.0;         // smoothed-earnings growth rate
  Affine f_linear;        // g(1+F) as a function of logEP0
  Affine g_linear;        // G as a function of logEP0
  Affine h_linear;        // H as a function of logEP0
  double theta_div = 0.0;  // dividend ratio mean reversion, in (0,2)
  double sigma_d = 0.0;

  /// log G(logEP0); throws when the affine dividend level is non-positive.
  double log_g_of(double log_ep0) const;

  /// Enforces the stability restrictions; throws a numeric error otherwise.
  void validate() const;

  /// Key-value round trip. `units` is "month" (natural units, the stored
  /// form) or "table" (1e-4/month rates and variances, 1e-4/year affine
  /// coefficients, as printed in the reference tables).
  static ModelParams from_kv(const KeyValueFile& kv);
  KeyValueFile to_kv() const;
};

/// Per-scenario frozen drift functions.
struct ScenarioAnchors {
  double log_ep0 = 0.0;
  double g_f1 = 0.0;   // g(1+F)
  double g_div = 0.0;  // G
  double log_g = 0.0;
  double h = 0.0;      // H
};
ScenarioAnchors resolve_anchors(const ModelParams& params, double log_ep0);

/// State of one simulated path. y = p_t - log<e>_0^10, t counts months from
/// the scenario start; xi starts at zero.
struct ModelState {
  double y = 0.0;
  double mu = 0.0;
  double xi = 0.0;
  double log_dp = 0.0;
  long t = 0;
};

/// Gaussian draws feeding one step. The source is abstracted behind Rng so
/// non-Gaussian increments can be injected in tests.
struct StepNoise {
  double w_mu = 0.0;
  double w_p = 0.0;
  double w_d = 0.0;
};

ModelState step(const ModelState& state, const ModelParams& params,
                const ScenarioAnchors& anchors, const StepNoise& noise);

/// Eigen-structure of the 3x3 one-step matrix J of the (Y, mu, xi) system.
struct SystemSpectrum {
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  bool degenerate = false;  // repeated eigenvalue, Q singular
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d Q = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d Lambda = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d Q_inverse = Eigen::Matrix3d::Zero();
};

/// Closed-form eigendecomposition
///   lambda_pm = (gamma+1)/2 +- sqrt((1-gamma)^2 - 4 kappa)/2,
/// valid under 0 < gamma < 1, 0 < kappa <= (1-gamma)^2/4. Throws when the
/// discriminant is negative.
SystemSpectrum spectrum(const ModelParams& params);

/// E[Y_h] of the noiseless recursion, in closed form (transient terms in
/// lambda_pm^h, secular drift, and the two kappa-weighted corrections).
double expected_y(int h, const ModelParams& params, const ScenarioAnchors& anchors, double y0,
                  double mu0);

/// Var[Y_h]; exact finite sum over the k-step impulse responses.
double variance_y(int h, const ModelParams& params);

/// E[logdp_t] = (1-theta)^t logdp_0 + logG (1 - (1-theta)^t).
double expected_log_dp(long t, const ModelParams& params, double log_g, double log_dp0);

struct DividendMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Moments of the averaged dividend accrual (1/h) sum log(1+D/P) under the
/// first-order expansion around logG. The mean matches
///   G + G (1-theta)/theta (logdp0 - logG) (1-(1-theta)^h)/h
/// and the variance is the exact finite-h sum
///   G^2 sigma_d^2 / h^2 * sum_{m=1..h} ((1-(1-theta)^m)/theta)^2,
/// which keeps the serial correlation of the ratio. Its large-h limit is
/// G^2 sigma_d^2/(theta^2 h); treating the monthly ratios as independent
/// would give the smaller G^2 sigma_d^2/(theta(2-theta) h).
DividendMoments dividend_contribution_moments(int h, const ModelParams& params,
                                              const ScenarioAnchors& anchors, double log_dp0);

/// Long-run expected gross yield g(1+F) + G; affine in logEP0.
double asymptotic_yield(const ModelParams& params, double log_ep0);

/// Coefficient of the 1/h term in the expected yield,
///   H - g(1+F) [1 + kappa (1-l-l+)/((1-l-)^2 (1-l+)^2)] + logEP0
///     + G (1-theta)/theta (logdp0 - logG).
double leading_correction(const ModelParams& params, double log_ep0, double log_dp0);

/// Characteristic decay horizon of the transient terms, -1/log(lambda_plus).
double damping_scale(const ModelParams& params);

/// Expected yield at a finite horizon: price drift from expected_y plus the
/// dividend accrual mean.
double expected_yield(int h, const ModelParams& params, double log_ep0, double log_dp0,
                      double mu0);

/// Yield variance at a finite horizon: variance_y/h^2 plus the dividend
/// accrual variance (independent noise sources).
double yield_variance(int h, const ModelParams& params, double log_ep0, double log_dp0);

}  // namespace capekit
