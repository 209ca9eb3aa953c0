#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "market_data.hpp"

namespace capekit {

/// Starting point of one simulated path. y0 is fixed by the ratio
/// (y0 = -log_ep0); mu0 and log_dp0 come from data or are chosen explicitly.
struct InitialCondition {
  double log_ep0 = 0.0;
  double log_dp0 = 0.0;
  double mu0 = 0.0;
};

struct ScenarioSet {
  std::vector<int> horizons;
  std::vector<InitialCondition> initial_conditions;  // one per path
  std::vector<double> yields;                        // paths x horizons, row major
  uint64_t master_seed = 0;
  ModelParams params;

  double yield_at(size_t path, size_t horizon_index) const {
    return yields[path * horizons.size() + horizon_index];
  }
  size_t paths() const { return initial_conditions.size(); }
};

struct ConfidenceBand {
  std::vector<int> horizons;
  std::vector<double> center;
  std::vector<double> half_width;
  double z = 1.96;
};

/// Per-path initial conditions read off the historical series: every month
/// with a defined log EP, a defined log DP and a previous price gives
/// (logEP_t, logDP_t, p_t - p_{t-1}).
std::vector<InitialCondition> initial_conditions_from_series(const MarketSeries& series);

/// Monte Carlo yields over the horizon grid. Paths cycle through the supplied
/// initial conditions; path i uses the noise stream derived from
/// (master_seed, i), so the set is reproducible for any thread count. Yields
/// assemble the price change plus the exact log(1 + D/P) accrual.
ScenarioSet simulate(const ModelParams& params, const std::vector<InitialCondition>& initial,
                     const std::vector<int>& horizons, long n_paths, uint64_t master_seed,
                     int threads = 0);

/// Analytical band around the expected yield. center_finite_h selects the
/// finite-horizon expectation (transients included); otherwise the long-run
/// asymptote is used.
ConfidenceBand band(const ModelParams& params, const std::vector<int>& horizons, double log_ep0,
                    double log_dp0, double z, bool center_finite_h = true, double mu0 = 0.0);

struct CoverageRow {
  int horizon = 0;
  long points = 0;
  double fraction_inside = 0.0;
  double mean_residual = 0.0;  // signed distance of the yield from the band center
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  long total_points = 0;
  double overall_fraction = 0.0;
  std::vector<int> dropped_horizons;  // beyond the data span
};

/// Fraction of historical (logEP_t, y_{t,h}) points inside the per-point
/// analytical band.
CoverageReport compare_to_history(const MarketSeries& series, const ModelParams& params,
                                  const std::vector<int>& horizons, double z = 1.96);

void write_scenarios_csv(const ScenarioSet& set, const std::string& path);
void write_band_csv(const ConfidenceBand& band, const std::string& path);
/// gnuplot helper script for the scatter + band figure.
void write_plot_script(const std::string& scenarios_csv, const std::string& band_csv,
                       const std::string& path);

/// Horizon grid parser: "24:192:12" (start:stop:step), "24:192" (step 1) or a
/// single value.
std::vector<int> parse_horizon_spec(const std::string& spec);

}  // namespace capekit
