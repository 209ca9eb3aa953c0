#include "support.hpp"

#include <cmath>
#include <limits>

#include "rng.hpp"

namespace capekit::testing {

ModelParams sp_params() {
  ModelParams p;
  p.gamma = 0.25;
  p.kappa = 0.03;
  p.sigma_mu = std::sqrt(12e-4);
  p.sigma_p = std::sqrt(18.2e-4);
  p.g = 12e-4;
  p.f_linear = Affine{2531e-4 / 12.0, 767e-4 / 12.0};
  p.g_linear = Affine{1527e-4 / 12.0, 393e-4 / 12.0};
  p.h_linear = Affine{0.85, -0.85};
  p.theta_div = 0.0271;
  p.sigma_d = std::sqrt(13e-4);
  return p;
}

double drift_balanced_log_ep(const ModelParams& p) {
  return (p.g - p.f_linear.alpha) / p.f_linear.beta;
}

double stationary_drift_offset(const ModelParams& p, double x0) {
  // Zero of the price part of the leading correction: the ratio then mean
  // reverts around x0 instead of drifting to another level.
  SystemSpectrum s = spectrum(p);
  const double lp = s.lambda_plus, lm = s.lambda_minus;
  const double shape =
      1.0 + p.kappa * (1.0 - lm * lp) / ((1.0 - lm) * (1.0 - lm) * (1.0 - lp) * (1.0 - lp));
  return p.f_linear(x0) * shape - x0;
}

std::vector<RawMonthlyRecord> synthesize_records(const SyntheticSpec& spec) {
  const ModelParams& p = spec.params;
  const int warmup = spec.warmup_months;
  const int total = warmup + spec.months + 1;  // one extra month closes the last dividend flow

  // Smoothed earnings follow an exact exponential, so the trailing mean is
  // proportional to the spot level and the log mean grows at rate g.
  std::vector<double> earnings(total);
  for (int i = 0; i < total; ++i) earnings[i] = 10.0 * std::exp(p.g * (i - warmup));

  double cape0 = 0.0;
  for (int i = 0; i < 120; ++i) cape0 += earnings[warmup - i];
  cape0 /= 120.0;
  const double log_e0 = std::log(cape0);

  const ScenarioAnchors anchors = resolve_anchors(p, spec.x0);
  const double z_init = anchors.log_g + spec.z0_offset;

  Rng rng(spec.seed);
  std::vector<double> log_price(total), log_dp(total);
  ModelState state;
  state.y = -spec.x0;
  state.mu = spec.mu0;
  state.xi = 0.0;
  state.log_dp = z_init;
  state.t = 0;
  log_price[warmup] = log_e0 + state.y;
  log_dp[warmup] = z_init;
  for (int i = warmup + 1; i < total; ++i) {
    state = step(state, p, anchors, StepNoise{rng.normal(), rng.normal(), rng.normal()});
    log_price[i] = log_e0 + state.y;
    log_dp[i] = state.log_dp;
  }
  // Deterministic backfill keeps warmup prices and dividends positive and
  // continuous with the simulated stretch.
  for (int i = warmup - 1; i >= 0; --i) {
    log_price[i] = log_price[i + 1] - anchors.g_f1;
    log_dp[i] = z_init;
  }

  std::vector<RawMonthlyRecord> records(total - 1);
  YearMonth ym = spec.start;
  for (int i = 0; i + 1 < total; ++i) {
    RawMonthlyRecord& r = records[i];
    r.date = ym;
    r.cpi = 10.0;
    r.nominal_price = std::exp(log_price[i]);
    r.nominal_earnings = earnings[i];
    // log_dp[i+1] = d_i - p_{i+1}: the monthly flow paid during month i,
    // reported at the annualized rate like the public files.
    r.nominal_dividend = 12.0 * std::exp(log_dp[i + 1] + log_price[i + 1]);
    r.secondary_ep = std::numeric_limits<double>::quiet_NaN();
    ym = ym.plus_months(1);
  }
  return records;
}

MarketSeries synthesize_series(const SyntheticSpec& spec) {
  auto records = synthesize_records(spec);
  return deflate(records, records.back().date);
}

}  // namespace capekit::testing
