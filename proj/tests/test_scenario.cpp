#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "csv.hpp"
#include "errors.hpp"
#include "scenario.hpp"
#include "support.hpp"

using namespace capekit;
using namespace capekit::testing;

TEST_CASE("noiseless paths land on the closed forms") {
  ModelParams p = sp_params();
  p.sigma_mu = p.sigma_p = p.sigma_d = 0.0;
  const double x0 = -3.0;
  const ScenarioAnchors a = resolve_anchors(p, x0);
  std::vector<InitialCondition> ics{{x0, a.log_g, 0.0}};
  std::vector<int> horizons{1, 12, 60, 192};
  ScenarioSet set = simulate(p, ics, horizons, 1, 1);

  for (size_t j = 0; j < horizons.size(); ++j) {
    const int h = horizons[j];
    // The price leg matches the expectation recursion to round-off.
    const double price_leg = (expected_y(h, p, a, -x0, 0.0) - (-x0)) / h;
    // The dividend leg of the engine accrues the exact log(1 + D/P) while
    // the closed form uses the first-order expansion around the level: the
    // gap per month is bounded by the square of the monthly ratio.
    const double exact_div = std::log1p(std::exp(a.log_g));
    const double sim_div = set.yield_at(0, j) - price_leg;
    CHECK(sim_div == doctest::Approx(exact_div).epsilon(1e-9));
    const double m = dividend_contribution_moments(h, p, a, a.log_g).mean;
    CHECK(std::abs(sim_div - m) < a.g_div * a.g_div);
    const double closed = expected_yield(h, p, x0, a.log_g, 0.0);
    CHECK(set.yield_at(0, j) == doctest::Approx(closed).epsilon(2.0 * a.g_div * a.g_div));
  }
}

TEST_CASE("same master seed reproduces the set for any thread count") {
  ModelParams p = sp_params();
  std::vector<InitialCondition> ics{{-3.2, -5.4, 0.002}, {-2.6, -5.8, -0.004}};
  std::vector<int> horizons{24, 48, 96};
  ScenarioSet a = simulate(p, ics, horizons, 500, 99, 1);
  ScenarioSet b = simulate(p, ics, horizons, 500, 99, 2);
  ScenarioSet c = simulate(p, ics, horizons, 500, 100, 2);
  CHECK(a.yields == b.yields);
  CHECK(a.yields != c.yields);
}

TEST_CASE("monte carlo moments match the closed forms at the reference point") {
  ModelParams p = sp_params();
  const double x0 = drift_balanced_log_ep(p);
  p.h_linear = Affine{stationary_drift_offset(p, x0), 0.0};
  const ScenarioAnchors a = resolve_anchors(p, x0);
  const int h = 120;
  const int paths = 20000;
  std::vector<InitialCondition> ics{{x0, a.log_g, 0.0}};
  ScenarioSet set = simulate(p, ics, {h}, paths, 2718);
  double sum = 0.0, sum2 = 0.0;
  for (size_t i = 0; i < set.paths(); ++i) {
    sum += set.yield_at(i, 0);
    sum2 += set.yield_at(i, 0) * set.yield_at(i, 0);
  }
  const double mc_mean = sum / paths;
  const double mc_var = (sum2 - paths * mc_mean * mc_mean) / (paths - 1);
  const double closed_mean = expected_yield(h, p, x0, a.log_g, 0.0);
  const double closed_var = yield_variance(h, p, x0, a.log_g);
  CHECK(std::abs(mc_mean - closed_mean) < 5.0 * std::sqrt(closed_var / paths));
  CHECK(mc_var == doctest::Approx(closed_var).epsilon(5.0 * std::sqrt(2.0 / paths)));
}

TEST_CASE("monte carlo error shrinks like the square root of the path count") {
  ModelParams p = sp_params();
  const double x0 = drift_balanced_log_ep(p);
  p.h_linear = Affine{stationary_drift_offset(p, x0), 0.0};
  const ScenarioAnchors a = resolve_anchors(p, x0);
  const int h = 60;
  const double closed = expected_yield(h, p, x0, a.log_g, 0.0);
  const double sd = std::sqrt(yield_variance(h, p, x0, a.log_g));
  std::vector<InitialCondition> ics{{x0, a.log_g, 0.0}};
  for (long n : {2000L, 8000L}) {
    ScenarioSet set = simulate(p, ics, {h}, n, 31415);
    double sum = 0.0;
    for (size_t i = 0; i < set.paths(); ++i) sum += set.yield_at(i, 0);
    const double standardized = (sum / n - closed) / (sd / std::sqrt(double(n)));
    CHECK(std::abs(standardized) < 4.0);
  }
}

TEST_CASE("band behavior") {
  ModelParams p = sp_params();
  const double x0 = -3.0;
  const double z0 = p.log_g_of(x0);
  SUBCASE("zero z collapses the band onto the center") {
    ConfidenceBand cb = band(p, {24, 120}, x0, z0, 0.0);
    CHECK(cb.half_width[0] == 0.0);
    CHECK(cb.half_width[1] == 0.0);
  }
  SUBCASE("asymptotic width is the long-run volatility over root h") {
    ConfidenceBand cb = band(p, {10000}, x0, z0, 1.96);
    const double limit = 1.96 * p.sigma_p;
    CHECK(cb.half_width[0] * std::sqrt(10000.0) == doctest::Approx(limit).epsilon(0.01));
  }
  SUBCASE("width ratio over the grid follows the square-root law") {
    ConfidenceBand cb = band(p, {24, 192}, x0, z0, 1.96);
    const double ratio = cb.half_width[1] / cb.half_width[0];
    CHECK(ratio == doctest::Approx(std::sqrt(24.0 / 192.0)).epsilon(0.10));
  }
  SUBCASE("width decreases beyond the transient scale") {
    const int start = static_cast<int>(std::ceil(damping_scale(p)));
    std::vector<int> horizons;
    for (int h = start; h <= start + 150; h += 3) horizons.push_back(h);
    ConfidenceBand cb = band(p, horizons, x0, z0, 1.96);
    for (size_t i = 1; i < cb.half_width.size(); ++i)
      CHECK(cb.half_width[i] < cb.half_width[i - 1]);
  }
  SUBCASE("asymptotic center mode is the affine long-run yield") {
    ConfidenceBand cb = band(p, {24, 120}, x0, z0, 1.0, false);
    CHECK(cb.center[0] == doctest::Approx(asymptotic_yield(p, x0)));
    CHECK(cb.center[0] == doctest::Approx(cb.center[1]));
  }
}

TEST_CASE("pooled scenario regression recovers the model-implied finite-horizon slope") {
  // Independent starts across a ratio grid; the fitted slope must match the
  // two-point slope of the closed-form expected yield.
  ModelParams p = sp_params();
  const int h = 12;
  std::vector<InitialCondition> ics;
  for (int i = 0; i < 16; ++i) {
    const double x = -3.5 + i * (1.1 / 15.0);
    ics.push_back({x, p.log_g_of(x), 0.0});
  }
  const long paths = 16000;
  ScenarioSet set = simulate(p, ics, {h}, paths, 1618);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < set.paths(); ++i) {
    const double x = set.initial_conditions[i].log_ep0;
    const double y = set.yield_at(i, 0);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(paths);
  const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
  const double y_hi = expected_yield(h, p, -2.4, p.log_g_of(-2.4), 0.0);
  const double y_lo = expected_yield(h, p, -3.5, p.log_g_of(-3.5), 0.0);
  const double implied = (y_hi - y_lo) / 1.1;
  // Standard error of the pooled slope.
  const double var_x = sxx / n - (sx / n) * (sx / n);
  const double resid_sd = std::sqrt(yield_variance(h, p, -3.0, p.log_g_of(-3.0)));
  const double se = resid_sd / std::sqrt(n * var_x);
  CHECK(std::abs(slope - implied) < 3.0 * se);
}

TEST_CASE("self-coverage of the analytical band") {
  ModelParams p = sp_params();
  std::vector<InitialCondition> ics;
  for (int i = 0; i < 10; ++i) {
    const double x = -3.6 + i * 0.12;
    ics.push_back({x, p.log_g_of(x) + (i % 3 - 1) * 0.2, (i % 5 - 2) * 0.005});
  }
  std::vector<int> horizons{24, 60, 120, 192};
  const long paths = 4000;
  ScenarioSet set = simulate(p, ics, horizons, paths, 5150);
  long inside = 0, total = 0;
  for (size_t i = 0; i < set.paths(); ++i) {
    const InitialCondition& ic = set.initial_conditions[i];
    const size_t j = i % horizons.size();  // one point per path
    const int h = horizons[j];
    const double center = expected_yield(h, p, ic.log_ep0, ic.log_dp0, ic.mu0);
    const double width = 1.96 * std::sqrt(yield_variance(h, p, ic.log_ep0, ic.log_dp0));
    ++total;
    if (std::abs(set.yield_at(i, j) - center) <= width) ++inside;
  }
  const double fraction = static_cast<double>(inside) / total;
  CHECK(fraction > 0.92);
  CHECK(fraction < 0.98);
}

TEST_CASE("historical comparison on model-generated data") {
  SyntheticSpec spec;
  spec.params = sp_params();
  spec.x0 = drift_balanced_log_ep(spec.params);
  spec.params.h_linear = Affine{stationary_drift_offset(spec.params, spec.x0), 0.0};
  spec.months = 1200;
  spec.seed = 23;
  MarketSeries s = synthesize_series(spec);
  SUBCASE("coverage near nominal, everything inside at huge z") {
    CoverageReport rep = compare_to_history(s, spec.params, {24, 60, 120}, 1.96);
    CHECK(rep.total_points > 1000);
    CHECK(rep.overall_fraction > 0.85);  // overlapping windows correlate points
    CoverageReport wide = compare_to_history(s, spec.params, {24, 60, 120}, 100.0);
    CHECK(wide.overall_fraction == doctest::Approx(1.0));
  }
  SUBCASE("horizons beyond the span are dropped with a note") {
    CoverageReport rep = compare_to_history(s, spec.params, {24, 5000}, 1.96);
    REQUIRE(rep.dropped_horizons.size() == 1);
    CHECK(rep.dropped_horizons[0] == 5000);
  }
}

TEST_CASE("csv outputs") {
  ModelParams p = sp_params();
  std::vector<InitialCondition> ics{{-3.0, p.log_g_of(-3.0), 0.0}};
  ScenarioSet set = simulate(p, ics, {24, 48}, 10, 7);
  const auto dir = std::filesystem::temp_directory_path();
  const std::string scen = (dir / "ck_scen.csv").string();
  const std::string bandf = (dir / "ck_band.csv").string();
  write_scenarios_csv(set, scen);
  ConfidenceBand cb = band(p, {24, 48}, -3.0, p.log_g_of(-3.0), 1.96);
  write_band_csv(cb, bandf);
  CsvTable ts = read_csv(scen);
  CHECK(ts.rows.size() == 20);
  CHECK(ts.header == std::vector<std::string>{"path", "horizon", "logEP0", "yield"});
  CsvTable tb = read_csv(bandf);
  CHECK(tb.rows.size() == 2);
  CHECK(parse_cell(tb.rows[0][2], 0, "low") < parse_cell(tb.rows[0][3], 0, "high"));
}

TEST_CASE("horizon spec parsing") {
  CHECK(parse_horizon_spec("24") == std::vector<int>{24});
  CHECK(parse_horizon_spec("24:26") == std::vector<int>{24, 25, 26});
  CHECK(parse_horizon_spec("24:48:12") == std::vector<int>{24, 36, 48});
  CHECK_THROWS_AS(parse_horizon_spec("0:10"), Error);
  CHECK_THROWS_AS(parse_horizon_spec("abc"), Error);
}
