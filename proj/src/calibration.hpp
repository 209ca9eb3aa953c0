#pragma once

#include <string>
#include <vector>

#include "dynamics.hpp"
#include "market_data.hpp"
#include "persistent.hpp"

namespace capekit {

/// Sample of window-wise estimates with its empirical 68% band
/// (16th and 84th percentiles).
struct RollingEstimate {
  std::vector<double> values;
  double mean = 0.0;
  double ci68_low = 0.0;
  double ci68_high = 0.0;
  int window_length = 0;
  int step = 1;
  int skipped_windows = 0;

  static RollingEstimate from_values(std::vector<double> values, int window, int step,
                                     int skipped);
  bool contains(double v) const { return ci68_low <= v && v <= ci68_high; }
};

/// The three horizon-h predictive regressions on the lagged log EP ratio:
/// gross yield, price-only part, dividend part. Affine coefficients are in
/// monthly units (multiply by 12 for the yearly convention).
struct PredictiveCoefficients {
  AugmentedFit gross;
  AugmentedFit price_part;
  AugmentedFit dividend_part;
  Affine gross_linear;  // alpha, beta of the gross fit
  Affine f_linear;      // price-part fit = g(1+F)
  Affine g_linear;      // dividend-part fit = G
  int horizon = 12;
  bool overlapping = true;
  int n_samples = 0;
};

struct MomentumFit {
  RollingEstimate gamma;
  RollingEstimate kappa;
  RollingEstimate sigma_mu2;
  Affine h_linear;
  int iterations = 0;
  bool converged = false;
  bool projected = false;  // mean estimate pulled back into the stability region
};

struct SigmaPFit {
  double sigma_p2 = 0.0;
  std::vector<int> horizons;
  std::vector<double> variances;       // Var[(p_{t+h}-p_t)/h] per horizon
  std::vector<double> loo_values;      // leave-one-horizon-out refits
  double ci68_low = 0.0, ci68_high = 0.0;
};

struct CalibrationOptions {
  int horizon = 12;           // predictive regression span, months
  bool overlapping = true;    // monthly overlapping windows vs strided
  int window = 192;           // rolling window length, months
  int step = 1;               // rolling step, months
  Affine h_init{0.85, -0.85};
  std::vector<int> sigma_p_horizons;  // default 24..192 step 12
  int max_iterations = 50;
  double tolerance = 1e-6;
  double damping = 0.5;       // drift-offset update damping
};

struct CalibrationReport {
  PredictiveCoefficients predictive;
  RollingEstimate g;
  RollingEstimate theta_div;
  RollingEstimate sigma_d2;
  MomentumFit momentum;
  SigmaPFit sigma_p;
  ModelParams params;  // assembled, constraint-satisfying parameter set
  double log_ep_anchor = 0.0;  // logEP at the first admissible month
  double log_g_anchor = 0.0;

  KeyValueFile to_kv() const;
};

/// Builds the (yield, x_t, x_{t+h}) regression triples and runs the three
/// augmented regressions. Throws when fewer than 24 samples remain.
PredictiveCoefficients estimate_predictive_coefficients(const MarketSeries& series,
                                                        int horizon = 12,
                                                        bool overlapping = true);

/// Rolling trend of the log smoothed earnings: per-window OLS slope of
/// log cape on the month index. Windows containing non-positive smoothed
/// earnings are skipped and counted.
RollingEstimate estimate_g(const MarketSeries& series, int window = 192, int step = 1);

struct DividendProcessFit {
  RollingEstimate theta_div;
  RollingEstimate sigma_d2;
};

/// Rolling no-intercept regression of the ratio increment on the anchored
/// deviation: d(logdp) on (logdp - log_g). The anchor is fixed once for the
/// whole sample (the ratio level implied by the dividend regression at the
/// series start).
DividendProcessFit estimate_dividend_process(const MarketSeries& series, double log_g,
                                             int window = 192, int step = 1);

/// Momentum/reversion regression with the drift-offset fixed point: rolling
/// no-intercept fits of mu_{t+1} on (mu_t, x_t + H + (g(1+F)-g) t) alternate
/// with a golden-section update of the affine H that shrinks the leading
/// finite-horizon yield correction at the sample mean.
MomentumFit estimate_momentum(const MarketSeries& series, double g, const Affine& f_linear,
                              const Affine& g_linear, double theta_div, const Affine& h_init,
                              const CalibrationOptions& options);

/// Fit of Var[(p_h - p_0)/h] against 1/h through the origin.
SigmaPFit estimate_sigma_p(const MarketSeries& series, const std::vector<int>& horizons,
                           bool overlapping = true);

/// Full pipeline in the order predictive -> g -> dividend -> momentum ->
/// sigma_p, assembling a valid ModelParams.
CalibrationReport calibrate(const MarketSeries& series, const CalibrationOptions& options);

/// Empirical quantile with linear interpolation on the sorted sample.
double quantile(std::vector<double> values, double q);

}  // namespace capekit
