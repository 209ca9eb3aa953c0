#pragma once

#include <cstdint>
#include <vector>

#include "dynamics.hpp"
#include "market_data.hpp"

namespace capekit::testing {

/// Reference parameter set (stock index, table values): gamma 0.25,
/// kappa 0.03, g 12e-4, theta 0.0271, monthly variances 12/18.2/13 x 1e-4,
/// drift affines from the yearly 1e-4 coefficients.
ModelParams sp_params();

/// The log EP level where the price drift matches the earnings trend
/// (g(1+F)(x) = g), so simulated ratios stay range-bound.
double drift_balanced_log_ep(const ModelParams& p);

/// Drift offset value that makes the balanced level stationary and zeroes
/// the leading finite-horizon correction there.
double stationary_drift_offset(const ModelParams& p, double x0);

struct SyntheticSpec {
  ModelParams params;
  double x0 = -3.0;        // log EP at the simulation start
  double mu0 = 3e-4;
  double z0_offset = 0.0;  // initial log DP relative to log G(x0)
  int warmup_months = 120;
  int months = 1584;       // simulated span after the warmup
  uint64_t seed = 1;
  YearMonth start{1871, 1};
};

/// Raw monthly records whose derived series follow the dynamical system with
/// the given parameters: exponential smoothed earnings, prices from the
/// (Y, mu, xi) recursion, dividends from the mean-reverting ratio, constant
/// CPI. The drift offset used for generation is the stationary one (H is
/// evaluated at x0 through params.h_linear when its value there differs, the
/// series drifts; callers choose).
std::vector<RawMonthlyRecord> synthesize_records(const SyntheticSpec& spec);

/// Convenience: synthesize + deflate with the last month as base.
MarketSeries synthesize_series(const SyntheticSpec& spec);

}  // namespace capekit::testing
