#include "capekit/capekit.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>

#include "bootstrap.hpp"
#include "calibration.hpp"
#include "csv.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "market_data.hpp"
#include "scenario.hpp"
#include "selfcheck.hpp"

using namespace capekit;

namespace {

thread_local std::string g_last_error;

ck_status fail(ck_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
ck_status guarded(Fn&& fn) {
  try {
    fn();
    return CK_OK;
  } catch (const Error& e) {
    return fail(static_cast<ck_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::exception& e) {
    return fail(CK_ERROR_NUMERIC, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

struct ck_series {
  MarketSeries series;
};
struct ck_params {
  ModelParams params;
};
struct ck_regression {
  PredictiveCoefficients fit;
};
struct ck_bootstrap {
  BootstrapResult result;
  int horizon = 1;
};
struct ck_calibration {
  CalibrationReport report;
};
struct ck_scenarios {
  ScenarioSet set;
};

extern "C" {

const char* ck_last_error(void) { return g_last_error.c_str(); }

const char* ck_version(void) { return "0.1.0"; }

void ck_string_free(char* s) { delete[] s; }

/* ---- market data ---- */

ck_status ck_series_load_csv(const char* csv_path, const char* column_map_path,
                             const char* base_month, ck_series** out) {
  if (!csv_path || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    ColumnMap map = column_map_path
                        ? ColumnMap::from_kv(KeyValueFile::parse_file(column_map_path))
                        : autodetect_columns(csv_path);
    auto records = parse_market_csv(csv_path, map);
    YearMonth base = base_month ? parse_year_month(base_month) : records.back().date;
    auto holder = new ck_series{deflate(records, base)};
    *out = holder;
  });
}

void ck_series_free(ck_series* s) { delete s; }

int64_t ck_series_length(const ck_series* s) {
  return s ? static_cast<int64_t>(s->series.size()) : 0;
}

ck_status ck_series_month_at(const ck_series* s, int64_t index, int* year, int* month) {
  if (!s) return fail(CK_ERROR_CONFIG, "null series");
  if (index < 0 || index >= static_cast<int64_t>(s->series.size()))
    return fail(CK_ERROR_DATA, "index outside the sample");
  if (year) *year = s->series.dates[index].year;
  if (month) *month = s->series.dates[index].month;
  return CK_OK;
}

double ck_series_value(const ck_series* s, const char* field, int64_t index) {
  if (!s || !field) return kNaN;
  if (index < 0 || index >= static_cast<int64_t>(s->series.size())) return kNaN;
  const MarketSeries& m = s->series;
  const std::string f = field;
  if (f == "P") return m.real_price[index];
  if (f == "D") return m.real_dividend[index];
  if (f == "E") return m.real_earnings[index];
  if (f == "CAPE") return m.cape[index];
  if (f == "logEP") return m.log_ep[index];
  if (f == "logDP") return m.log_dp[index];
  if (f == "H") return m.log_gross_return[index];
  if (f == "logP") return m.log_price[index];
  return kNaN;
}

ck_status ck_series_write_derived_csv(const ck_series* s, const char* path) {
  if (!s || !path) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] { write_derived_csv(s->series, path); });
}

ck_status ck_series_yield(const ck_series* s, int64_t t, int horizon, double* yield,
                          double* price_part, double* dividend_part) {
  if (!s) return fail(CK_ERROR_CONFIG, "null series");
  return guarded([&] {
    double pp = 0.0, dp = 0.0;
    s->series.yield_decomposition(static_cast<int>(t), horizon, pp, dp);
    if (yield) *yield = s->series.gross_yield(static_cast<int>(t), horizon);
    if (price_part) *price_part = pp;
    if (dividend_part) *dividend_part = dp;
  });
}

/* ---- regression ---- */

ck_status ck_regress(const ck_series* s, int horizon, int overlapping, ck_regression** out) {
  if (!s || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    *out = new ck_regression{
        estimate_predictive_coefficients(s->series, horizon, overlapping != 0)};
  });
}

void ck_regression_free(ck_regression* r) { delete r; }

double ck_regression_stat(const ck_regression* r, const char* name) {
  if (!r || !name) return kNaN;
  const AugmentedFit& f = r->fit.gross;
  const std::string k = name;
  if (k == "alpha_c") return f.alpha_c;
  if (k == "beta_c") return f.beta_c;
  if (k == "phi_c") return f.phi_c;
  if (k == "se_beta_c") return f.beta_c_standard_error;
  if (k == "t_stat") return f.t_statistic;
  if (k == "n") return f.n_rows;
  if (k == "rho_ols") return f.rho_ols;
  if (k == "rho_c") return f.rho_c;
  if (k == "alpha_ols") return f.alpha_ols;
  if (k == "beta_ols") return f.beta_ols;
  if (k == "cov_uu") return f.error_covariance(0, 0);
  if (k == "cov_uv") return f.error_covariance(0, 1);
  if (k == "cov_vv") return f.error_covariance(1, 1);
  if (k == "alpha_f") return r->fit.f_linear.alpha;
  if (k == "beta_f") return r->fit.f_linear.beta;
  if (k == "alpha_g") return r->fit.g_linear.alpha;
  if (k == "beta_g") return r->fit.g_linear.beta;
  if (k == "se_beta_f") return r->fit.price_part.beta_c_standard_error;
  if (k == "se_beta_g") return r->fit.dividend_part.beta_c_standard_error;
  return kNaN;
}

ck_status ck_regression_to_kv(const ck_regression* r, char** out_text) {
  if (!r || !out_text) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    KeyValueFile kv;
    const PredictiveCoefficients& pc = r->fit;
    kv.set("horizon", std::to_string(pc.horizon));
    kv.set("overlapping", pc.overlapping ? "1" : "0");
    kv.set("samples", std::to_string(pc.n_samples));
    kv.set_double("alpha_c", pc.gross.alpha_c);
    kv.set_double("beta_c", pc.gross.beta_c);
    kv.set_double("phi_c", pc.gross.phi_c);
    kv.set_double("se_beta_c", pc.gross.beta_c_standard_error);
    kv.set_double("t_stat", pc.gross.t_statistic);
    kv.set_double("rho_ols", pc.gross.rho_ols);
    kv.set_double("rho_c", pc.gross.rho_c);
    kv.set_double("alpha_f", pc.f_linear.alpha);
    kv.set_double("beta_f", pc.f_linear.beta);
    kv.set_double("se_beta_f", pc.price_part.beta_c_standard_error);
    kv.set_double("alpha_g", pc.g_linear.alpha);
    kv.set_double("beta_g", pc.g_linear.beta);
    kv.set_double("se_beta_g", pc.dividend_part.beta_c_standard_error);
    *out_text = dup_string(kv.to_text());
  });
}

/* ---- bootstrap ---- */

ck_status ck_bootstrap_run(const ck_series* s, int horizon, long replications, uint64_t seed,
                           ck_bootstrap** out) {
  if (!s || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    // The rebuild recursion needs consecutive transitions, so the test always
    // runs on the non-overlapping strided sample.
    const MarketSeries& m = s->series;
    const int n = static_cast<int>(m.size());
    if (horizon < 1) throw config_error("bootstrap: horizon must be positive");
    std::vector<double> xs, ys;
    int t = m.first_log_ep_index();
    if (t < 0) throw data_error("bootstrap: log EP never defined");
    for (; t + horizon < n; t += horizon) {
      if (!std::isfinite(m.log_ep[t])) break;
      bool ok = true;
      for (int i = 0; i < horizon; ++i)
        if (!std::isfinite(m.log_gross_return[t + i])) {
          ok = false;
          break;
        }
      if (!ok) break;
      xs.push_back(m.log_ep[t]);
      ys.push_back(m.gross_yield(t, horizon));
    }
    if (t < n && std::isfinite(m.log_ep[t])) xs.push_back(m.log_ep[t]);
    if (xs.size() < 12 || ys.size() + 1 != xs.size())
      throw data_error("bootstrap: too few aligned samples");
    Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
    Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), ys.size());
    BootstrapConfig cfg;
    cfg.replications = replications;
    cfg.master_seed = seed;
    *out = new ck_bootstrap{run_bootstrap(y, x, cfg), horizon};
  });
}

void ck_bootstrap_free(ck_bootstrap* b) { delete b; }

double ck_bootstrap_p_value(const ck_bootstrap* b) { return b ? b->result.p_value : kNaN; }
int ck_bootstrap_degenerate(const ck_bootstrap* b) { return b && b->result.degenerate ? 1 : 0; }
int ck_bootstrap_mirrored(const ck_bootstrap* b) { return b && b->result.mirrored ? 1 : 0; }
int64_t ck_bootstrap_count(const ck_bootstrap* b) {
  return b ? static_cast<int64_t>(b->result.beta_c_samples.size()) : 0;
}
double ck_bootstrap_sample(const ck_bootstrap* b, int64_t index) {
  if (!b || index < 0 || index >= ck_bootstrap_count(b)) return kNaN;
  return b->result.beta_c_samples[index];
}
double ck_bootstrap_observed(const ck_bootstrap* b) {
  return b ? b->result.observed_beta_c : kNaN;
}

ck_status ck_bootstrap_write_samples_csv(const ck_bootstrap* b, const char* path) {
  if (!b || !path) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(b->result.beta_c_samples.size());
    for (size_t i = 0; i < b->result.beta_c_samples.size(); ++i)
      rows.push_back({std::to_string(i), format_double(b->result.beta_c_samples[i])});
    write_csv(path, {"replication", "beta_c"}, rows);
  });
}

ck_status ck_bootstrap_to_kv(const ck_bootstrap* b, char** out_text) {
  if (!b || !out_text) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    KeyValueFile kv;
    kv.set("horizon", std::to_string(b->horizon));
    kv.set("replications", std::to_string(b->result.beta_c_samples.size()));
    kv.set_double("observed_beta_c", b->result.observed_beta_c);
    kv.set_double("p_value", b->result.p_value);
    kv.set("degenerate", b->result.degenerate ? "1" : "0");
    kv.set("mirrored", b->result.mirrored ? "1" : "0");
    kv.set_double("null_alpha", b->result.null_fit.alpha);
    kv.set_double("null_theta", b->result.null_fit.theta);
    kv.set_double("null_rho", b->result.null_fit.rho);
    *out_text = dup_string(kv.to_text());
  });
}

/* ---- params ---- */

ck_status ck_params_load(const char* path, ck_params** out) {
  if (!path || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded(
      [&] { *out = new ck_params{ModelParams::from_kv(KeyValueFile::parse_file(path))}; });
}

ck_status ck_params_from_text(const char* text, ck_params** out) {
  if (!text || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded(
      [&] { *out = new ck_params{ModelParams::from_kv(KeyValueFile::parse_text(text))}; });
}

ck_status ck_params_save(const ck_params* p, const char* path) {
  if (!p || !path) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] { p->params.to_kv().write_file(path); });
}

ck_status ck_params_get(const ck_params* p, const char* key, double* out_value) {
  if (!p || !key || !out_value) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] { *out_value = p->params.to_kv().get_double(key); });
}

void ck_params_free(ck_params* p) { delete p; }

/* ---- closed forms ---- */

ck_status ck_asymptotic_yield(const ck_params* p, double log_ep0, double* out) {
  if (!p || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] { *out = asymptotic_yield(p->params, log_ep0); });
}

ck_status ck_expected_yield(const ck_params* p, int horizon, double log_ep0, double log_dp0,
                            double mu0, double* out) {
  if (!p || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] { *out = expected_yield(horizon, p->params, log_ep0, log_dp0, mu0); });
}

ck_status ck_yield_variance(const ck_params* p, int horizon, double log_ep0, double log_dp0,
                            double* out) {
  if (!p || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] { *out = yield_variance(horizon, p->params, log_ep0, log_dp0); });
}

ck_status ck_leading_correction(const ck_params* p, double log_ep0, double log_dp0, double* out) {
  if (!p || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] { *out = leading_correction(p->params, log_ep0, log_dp0); });
}

ck_status ck_damping_scale(const ck_params* p, double* out) {
  if (!p || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] { *out = damping_scale(p->params); });
}

ck_status ck_eigenvalues(const ck_params* p, double* lambda_plus, double* lambda_minus) {
  if (!p) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    SystemSpectrum s = spectrum(p->params);
    if (lambda_plus) *lambda_plus = s.lambda_plus;
    if (lambda_minus) *lambda_minus = s.lambda_minus;
  });
}

/* ---- calibration ---- */

ck_status ck_calibrate(const ck_series* s, const char* options_text, ck_calibration** out) {
  if (!s || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    CalibrationOptions opt;
    if (options_text) {
      KeyValueFile kv = KeyValueFile::parse_text(options_text, "<options>");
      opt.horizon = static_cast<int>(kv.get_double_or("horizon", opt.horizon));
      opt.overlapping = kv.get_double_or("overlapping", 1.0) != 0.0;
      opt.window = static_cast<int>(kv.get_double_or("window", opt.window));
      opt.step = static_cast<int>(kv.get_double_or("step", opt.step));
      opt.h_init.alpha = kv.get_double_or("alpha_h", opt.h_init.alpha);
      opt.h_init.beta = kv.get_double_or("beta_h", opt.h_init.beta);
      if (kv.has("sigma_p_horizons"))
        opt.sigma_p_horizons = parse_horizon_spec(kv.get("sigma_p_horizons"));
    }
    *out = new ck_calibration{calibrate(s->series, opt)};
  });
}

void ck_calibration_free(ck_calibration* c) { delete c; }

ck_status ck_calibration_params(const ck_calibration* c, ck_params** out) {
  if (!c || !out) return fail(CK_ERROR_CONFIG, "null argument");
  *out = new ck_params{c->report.params};
  return CK_OK;
}

ck_status ck_calibration_to_kv(const ck_calibration* c, char** out_text) {
  if (!c || !out_text) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] { *out_text = dup_string(c->report.to_kv().to_text()); });
}

/* ---- scenarios ---- */

ck_status ck_simulate_series(const ck_params* p, const ck_series* s, const char* horizons,
                             long n_paths, uint64_t seed, ck_scenarios** out) {
  if (!p || !s || !horizons || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    auto ics = initial_conditions_from_series(s->series);
    const long paths = n_paths > 0 ? n_paths : static_cast<long>(ics.size());
    *out = new ck_scenarios{
        simulate(p->params, ics, parse_horizon_spec(horizons), paths, seed)};
  });
}

ck_status ck_simulate_point(const ck_params* p, double log_ep0, double log_dp0, double mu0,
                            const char* horizons, long n_paths, uint64_t seed,
                            ck_scenarios** out) {
  if (!p || !horizons || !out) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    std::vector<InitialCondition> ics{{log_ep0, log_dp0, mu0}};
    *out = new ck_scenarios{
        simulate(p->params, ics, parse_horizon_spec(horizons), n_paths, seed)};
  });
}

void ck_scenarios_free(ck_scenarios* sc) { delete sc; }

int64_t ck_scenarios_paths(const ck_scenarios* sc) {
  return sc ? static_cast<int64_t>(sc->set.paths()) : 0;
}

int64_t ck_scenarios_horizons(const ck_scenarios* sc) {
  return sc ? static_cast<int64_t>(sc->set.horizons.size()) : 0;
}

ck_status ck_scenarios_point(const ck_scenarios* sc, int64_t path, int64_t horizon_index,
                             int* horizon, double* log_ep0, double* yield) {
  if (!sc) return fail(CK_ERROR_CONFIG, "null scenarios");
  if (path < 0 || path >= ck_scenarios_paths(sc) || horizon_index < 0 ||
      horizon_index >= ck_scenarios_horizons(sc))
    return fail(CK_ERROR_DATA, "scenario index outside the set");
  if (horizon) *horizon = sc->set.horizons[horizon_index];
  if (log_ep0) *log_ep0 = sc->set.initial_conditions[path].log_ep0;
  if (yield) *yield = sc->set.yield_at(path, horizon_index);
  return CK_OK;
}

ck_status ck_scenarios_write_csv(const ck_scenarios* sc, const char* path) {
  if (!sc || !path) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] { write_scenarios_csv(sc->set, path); });
}

ck_status ck_band_write_csv(const ck_params* p, const char* horizons, double log_ep0,
                            double log_dp0, double z, int finite_center, const char* path) {
  if (!p || !horizons || !path) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    ConfidenceBand cb =
        band(p->params, parse_horizon_spec(horizons), log_ep0, log_dp0, z, finite_center != 0);
    write_band_csv(cb, path);
  });
}

ck_status ck_compare_history(const ck_series* s, const ck_params* p, const char* horizons,
                             double z, char** out_text, double* overall_fraction) {
  if (!s || !p || !horizons) return fail(CK_ERROR_CONFIG, "null argument");
  return guarded([&] {
    CoverageReport rep = compare_to_history(s->series, p->params, parse_horizon_spec(horizons), z);
    if (overall_fraction) *overall_fraction = rep.overall_fraction;
    if (out_text) {
      std::ostringstream os;
      os << "horizon points inside_fraction mean_residual\n";
      char line[128];
      for (const auto& row : rep.rows) {
        std::snprintf(line, sizeof(line), "%7d %6ld %15.4f %13.6g\n", row.horizon, row.points,
                      row.fraction_inside, row.mean_residual);
        os << line;
      }
      for (int h : rep.dropped_horizons) os << "# horizon " << h << " dropped (beyond data)\n";
      std::snprintf(line, sizeof(line), "overall  %6ld %15.4f\n", rep.total_points,
                    rep.overall_fraction);
      os << line;
      *out_text = dup_string(os.str());
    }
  });
}

/* ---- validation ---- */

ck_status ck_validate(int quick, uint64_t seed, char** out_report, int* out_failures) {
  return guarded([&] {
    auto checks = run_selfchecks(quick != 0, seed);
    int failures = 0;
    std::ostringstream os;
    for (const auto& c : checks) {
      if (!c.passed) ++failures;
      os << (c.passed ? "[PASS] " : "[FAIL] ") << c.name;
      if (!c.detail.empty()) os << " — " << c.detail;
      os << '\n';
    }
    if (out_failures) *out_failures = failures;
    if (out_report) *out_report = dup_string(os.str());
  });
}

}  // extern "C"
