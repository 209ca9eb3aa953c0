// capekit command line front end. Talks to the engine exclusively through
// the public C API so it doubles as a smoke test of the shared library.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capekit/capekit.h"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string input;
  std::string colmap;
  std::string base;
  std::string output = ".";
};

[[noreturn]] void die(ck_status status) {
  std::cerr << "error: " << ck_last_error() << "\n";
  std::exit(status == CK_OK ? 4 : static_cast<int>(status));
}

void require_ok(ck_status status) {
  if (status != CK_OK) die(status);
}

ck_series* load_series(const CommonOpts& opts) {
  ck_series* s = nullptr;
  require_ok(ck_series_load_csv(opts.input.c_str(),
                                opts.colmap.empty() ? nullptr : opts.colmap.c_str(),
                                opts.base.empty() ? nullptr : opts.base.c_str(), &s));
  return s;
}

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) {
    std::cerr << "error: output directory '" << dir << "' is not writable\n";
    std::exit(2);
  }
}

std::string joined(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    std::exit(2);
  }
  out << text;
}

double yearly(double monthly) { return monthly * 12.0 * 1e4; }  // table convention

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_output = true) {
  cmd->add_option("--input", opts.input, "monthly market CSV file")->required();
  cmd->add_option("--colmap", opts.colmap,
                  "column map key-value file (default: auto-detect Date/P/D/E/CPI)");
  cmd->add_option("--base", opts.base, "CPI base month YYYY.MM (default: last month)");
  if (with_output) cmd->add_option("--output", opts.output, "output directory (default: .)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CAPE-based return predictability pipeline"};
  app.require_subcommand(1);

  // ---- ingest ----
  CommonOpts ingest_opts;
  auto* ingest = app.add_subcommand("ingest", "parse and validate a raw monthly file");
  add_common(ingest, ingest_opts);

  // ---- derive ----
  CommonOpts derive_opts;
  auto* derive = app.add_subcommand("derive", "write the derived real series CSV");
  add_common(derive, derive_opts);

  // ---- regress ----
  CommonOpts regress_opts;
  int regress_horizon = 12;
  std::string regress_mode = "overlapping";
  auto* regress = app.add_subcommand("regress", "augmented predictive regression on log EP");
  add_common(regress, regress_opts);
  regress->add_option("--horizon", regress_horizon, "yield horizon in months (default 12)");
  regress->add_option("--mode", regress_mode, "overlapping|nonoverlapping (default overlapping)")
      ->check(CLI::IsMember({"overlapping", "nonoverlapping"}));

  // ---- bootstrap ----
  CommonOpts boot_opts;
  int boot_horizon = 12;
  long boot_replications = 10000;
  uint64_t boot_seed = 0;
  std::string boot_summary;
  auto* boot = app.add_subcommand("bootstrap", "residual bootstrap test of the null beta = 0");
  add_common(boot, boot_opts);
  boot->add_option("--horizon", boot_horizon, "yield horizon in months (default 12)");
  boot->add_option("--replications", boot_replications, "bootstrap sample count (default 10000)");
  boot->add_option("--seed", boot_seed, "master seed (required)")->required();
  boot->add_option("--summary", boot_summary, "summary key-value file path");

  // ---- calibrate ----
  CommonOpts cal_opts;
  std::string cal_market = "sp";
  int cal_window = 192;
  int cal_horizon = 12;
  std::string cal_mode = "overlapping";
  std::string cal_horizons;
  double cal_alpha_h = std::nan(""), cal_beta_h = std::nan("");
  auto* cal = app.add_subcommand("calibrate", "estimate every model parameter from a series");
  add_common(cal, cal_opts);
  cal->add_option("--market", cal_market, "sp|nyse drift-offset presets (default sp)")
      ->check(CLI::IsMember({"sp", "nyse"}));
  cal->add_option("--windows", cal_window, "rolling window length in months (default 192)");
  cal->add_option("--horizon", cal_horizon, "predictive horizon in months (default 12)");
  cal->add_option("--mode", cal_mode, "overlapping|nonoverlapping")
      ->check(CLI::IsMember({"overlapping", "nonoverlapping"}));
  cal->add_option("--horizons", cal_horizons, "sigma_p fit grid start:stop:step (default 24:192:12)");
  cal->add_option("--alpha-h", cal_alpha_h, "override the drift offset intercept");
  cal->add_option("--beta-h", cal_beta_h, "override the drift offset slope");

  // ---- simulate ----
  CommonOpts sim_opts;
  std::string sim_params;
  std::string sim_horizons = "24:192:1";
  long sim_paths = 0;
  uint64_t sim_seed = 0;
  double sim_logep0 = std::nan(""), sim_logdp0 = std::nan(""), sim_mu0 = 0.0;
  double sim_z = 1.96;
  bool sim_compare = false;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo yield scenarios with analytical bands");
  sim->add_option("--params", sim_params, "model parameter key-value file")->required();
  sim->add_option("--input", sim_opts.input, "series CSV providing initial conditions");
  sim->add_option("--colmap", sim_opts.colmap, "column map for --input");
  sim->add_option("--base", sim_opts.base, "CPI base month for --input");
  sim->add_option("--output", sim_opts.output, "output directory (default: .)");
  sim->add_option("--horizons", sim_horizons, "horizon grid start:stop:step (default 24:192:1)");
  sim->add_option("--paths", sim_paths, "path count (default: one per admissible start month)");
  sim->add_option("--seed", sim_seed, "master seed (required)")->required();
  sim->add_option("--logep0", sim_logep0, "explicit initial log EP (point mode)");
  sim->add_option("--logdp0", sim_logdp0, "explicit initial log DP (point mode)");
  sim->add_option("--mu0", sim_mu0, "explicit initial growth rate (point mode, default 0)");
  sim->add_option("--z", sim_z, "band z-score (default 1.96)");
  sim->add_flag("--compare", sim_compare, "also write historical band coverage for --input");

  // ---- validate ----
  bool val_quick = false;
  uint64_t val_seed = 0;
  auto* val = app.add_subcommand("validate", "run the internal consistency battery");
  val->add_flag("--quick", val_quick, "smaller Monte Carlo sizes, runs in seconds");
  val->add_option("--seed", val_seed, "master seed (required)")->required();

  // ---- report ----
  CommonOpts rep_opts;
  std::string rep_market = "sp";
  long rep_replications = 10000;
  uint64_t rep_seed = 0;
  std::string rep_mode = "overlapping";
  auto* rep = app.add_subcommand("report", "regression, bootstrap and calibration tables");
  add_common(rep, rep_opts);
  rep->add_option("--market", rep_market, "sp|nyse presets (default sp)")
      ->check(CLI::IsMember({"sp", "nyse"}));
  rep->add_option("--mode", rep_mode, "overlapping|nonoverlapping")
      ->check(CLI::IsMember({"overlapping", "nonoverlapping"}));
  rep->add_option("--replications", rep_replications, "bootstrap sample count (default 10000)");
  rep->add_option("--seed", rep_seed, "master seed (required)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (ingest->parsed()) {
    ensure_output_dir(ingest_opts.output);
    ck_series* s = load_series(ingest_opts);
    const int64_t n = ck_series_length(s);
    int y0, m0, y1, m1;
    require_ok(ck_series_month_at(s, 0, &y0, &m0));
    require_ok(ck_series_month_at(s, n - 1, &y1, &m1));
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "records = %" PRId64 "\nfirst = %04d.%02d\nlast = %04d.%02d\n", n, y0, m0, y1,
                  m1);
    write_text(joined(ingest_opts.output, "ingest_summary.kv"), buf);
    std::cout << buf << "ingest: OK\n";
    ck_series_free(s);
    return 0;
  }

  if (derive->parsed()) {
    ensure_output_dir(derive_opts.output);
    ck_series* s = load_series(derive_opts);
    const std::string path = joined(derive_opts.output, "derived.csv");
    require_ok(ck_series_write_derived_csv(s, path.c_str()));
    std::cout << "wrote " << path << " (" << ck_series_length(s) << " months)\n";
    ck_series_free(s);
    return 0;
  }

  if (regress->parsed()) {
    ensure_output_dir(regress_opts.output);
    ck_series* s = load_series(regress_opts);
    ck_regression* r = nullptr;
    require_ok(ck_regress(s, regress_horizon, regress_mode == "overlapping", &r));
    char* kv = nullptr;
    require_ok(ck_regression_to_kv(r, &kv));
    write_text(joined(regress_opts.output, "regression.kv"), kv);
    std::printf("horizon %d months, %s windows, n = %.0f\n", regress_horizon,
                regress_mode.c_str(), ck_regression_stat(r, "n"));
    std::printf("  beta_c  = %8.1f (x1e-4/yr)  se = %6.1f  t = %.2f\n",
                yearly(ck_regression_stat(r, "beta_c")), yearly(ck_regression_stat(r, "se_beta_c")),
                ck_regression_stat(r, "t_stat"));
    std::printf("  alpha_c = %8.1f (x1e-4/yr)\n", yearly(ck_regression_stat(r, "alpha_c")));
    std::printf("  rho_ols = %.5f  rho_c = %.5f\n", ck_regression_stat(r, "rho_ols"),
                ck_regression_stat(r, "rho_c"));
    ck_string_free(kv);
    ck_regression_free(r);
    ck_series_free(s);
    return 0;
  }

  if (boot->parsed()) {
    ensure_output_dir(boot_opts.output);
    ck_series* s = load_series(boot_opts);
    ck_bootstrap* b = nullptr;
    require_ok(ck_bootstrap_run(s, boot_horizon, boot_replications, boot_seed, &b));
    const std::string samples = joined(boot_opts.output, "bootstrap_samples.csv");
    require_ok(ck_bootstrap_write_samples_csv(b, samples.c_str()));
    char* kv = nullptr;
    require_ok(ck_bootstrap_to_kv(b, &kv));
    const std::string summary =
        boot_summary.empty() ? joined(boot_opts.output, "bootstrap_summary.kv") : boot_summary;
    write_text(summary, kv);
    std::printf("observed beta_c = %.1f (x1e-4/yr), p = %.4f%s%s\n",
                yearly(ck_bootstrap_observed(b)), ck_bootstrap_p_value(b),
                ck_bootstrap_degenerate(b) ? " [degenerate]" : "",
                ck_bootstrap_mirrored(b) ? " [mirrored tail]" : "");
    std::cout << "wrote " << samples << " and " << summary << "\n";
    ck_string_free(kv);
    ck_bootstrap_free(b);
    ck_series_free(s);
    return 0;
  }

  if (cal->parsed()) {
    ensure_output_dir(cal_opts.output);
    ck_series* s = load_series(cal_opts);
    double ah = cal_market == "nyse" ? 2.62 : 0.85;
    double bh = cal_market == "nyse" ? -0.52 : -0.85;
    if (!std::isnan(cal_alpha_h)) ah = cal_alpha_h;
    if (!std::isnan(cal_beta_h)) bh = cal_beta_h;
    char opts[256];
    std::snprintf(opts, sizeof(opts),
                  "horizon = %d\noverlapping = %d\nwindow = %d\nalpha_h = %.10g\nbeta_h = %.10g\n%s%s\n",
                  cal_horizon, cal_mode == "overlapping" ? 1 : 0, cal_window, ah, bh,
                  cal_horizons.empty() ? "" : "sigma_p_horizons = ",
                  cal_horizons.empty() ? "" : cal_horizons.c_str());
    ck_calibration* c = nullptr;
    require_ok(ck_calibrate(s, opts, &c));
    ck_params* p = nullptr;
    require_ok(ck_calibration_params(c, &p));
    const std::string params_path = joined(cal_opts.output, "params.kv");
    require_ok(ck_params_save(p, params_path.c_str()));
    char* kv = nullptr;
    require_ok(ck_calibration_to_kv(c, &kv));
    write_text(joined(cal_opts.output, "calibration.kv"), kv);
    double gamma, kappa, g, theta;
    require_ok(ck_params_get(p, "gamma", &gamma));
    require_ok(ck_params_get(p, "kappa", &kappa));
    require_ok(ck_params_get(p, "g", &g));
    require_ok(ck_params_get(p, "theta_div", &theta));
    std::printf("gamma = %.4f  kappa = %.1f (x1e-4)  g = %.1f (x1e-4)  theta = %.1f (x1e-4)\n",
                gamma, kappa * 1e4, g * 1e4, theta * 1e4);
    std::cout << "wrote " << params_path << " and calibration.kv\n";
    ck_string_free(kv);
    ck_params_free(p);
    ck_calibration_free(c);
    ck_series_free(s);
    return 0;
  }

  if (sim->parsed()) {
    ensure_output_dir(sim_opts.output);
    ck_params* p = nullptr;
    require_ok(ck_params_load(sim_params.c_str(), &p));
    ck_scenarios* sc = nullptr;
    ck_series* s = nullptr;
    double band_logep0 = sim_logep0, band_logdp0 = sim_logdp0, band_mu0 = sim_mu0;
    if (!sim_opts.input.empty()) {
      s = load_series(sim_opts);
      require_ok(ck_simulate_series(p, s, sim_horizons.c_str(), sim_paths, sim_seed, &sc));
      // Anchor the band at the mean admissible initial condition.
      double xs = 0.0, ds = 0.0;
      long count = 0;
      for (int64_t t = 0; t < ck_series_length(s); ++t) {
        const double x = ck_series_value(s, "logEP", t);
        const double d = ck_series_value(s, "logDP", t);
        if (std::isfinite(x) && std::isfinite(d)) {
          xs += x;
          ds += d;
          ++count;
        }
      }
      if (count > 0 && std::isnan(band_logep0)) band_logep0 = xs / count;
      if (count > 0 && std::isnan(band_logdp0)) band_logdp0 = ds / count;
      band_mu0 = 0.0;
    } else {
      if (std::isnan(sim_logep0) || std::isnan(sim_logdp0)) {
        std::cerr << "error: simulate needs --input or both --logep0 and --logdp0\n";
        return 2;
      }
      if (sim_paths <= 0) sim_paths = 1000;
      require_ok(ck_simulate_point(p, sim_logep0, sim_logdp0, sim_mu0, sim_horizons.c_str(),
                                   sim_paths, sim_seed, &sc));
    }
    const std::string scen_path = joined(sim_opts.output, "scenarios.csv");
    require_ok(ck_scenarios_write_csv(sc, scen_path.c_str()));
    const std::string band_path = joined(sim_opts.output, "band.csv");
    require_ok(ck_band_write_csv(p, sim_horizons.c_str(), band_logep0, band_logdp0, sim_z, 1,
                                 band_path.c_str()));
    write_text(joined(sim_opts.output, "scenarios.gp"),
               "set datafile separator ','\nplot 'scenarios.csv' every ::1 using 2:4 w points "
               "pt 7 ps 0.3, 'band.csv' every ::1 using 1:2 w lines lw 2, 'band.csv' every ::1 "
               "using 1:3 w lines dt 2, 'band.csv' every ::1 using 1:4 w lines dt 2\n");
    std::cout << "wrote " << scen_path << " (" << ck_scenarios_paths(sc) << " paths) and "
              << band_path << "\n";
    if (sim_compare) {
      if (!s) {
        std::cerr << "error: --compare needs --input\n";
        return 2;
      }
      char* text = nullptr;
      double fraction = 0.0;
      require_ok(ck_compare_history(s, p, sim_horizons.c_str(), sim_z, &text, &fraction));
      write_text(joined(sim_opts.output, "coverage.txt"), text);
      std::printf("historical coverage: %.1f%%\n", 100.0 * fraction);
      ck_string_free(text);
    }
    ck_scenarios_free(sc);
    if (s) ck_series_free(s);
    ck_params_free(p);
    return 0;
  }

  if (val->parsed()) {
    char* report = nullptr;
    int failures = 0;
    require_ok(ck_validate(val_quick ? 1 : 0, val_seed, &report, &failures));
    std::cout << report;
    ck_string_free(report);
    if (failures > 0) {
      std::cerr << failures << " check(s) failed\n";
      return 4;
    }
    std::cout << "all checks passed\n";
    return 0;
  }

  if (rep->parsed()) {
    ensure_output_dir(rep_opts.output);
    ck_series* s = load_series(rep_opts);
    ck_regression* r = nullptr;
    require_ok(ck_regress(s, 12, rep_mode == "overlapping", &r));
    ck_bootstrap* b = nullptr;
    require_ok(ck_bootstrap_run(s, 12, rep_replications, rep_seed, &b));
    const double ah = rep_market == "nyse" ? 2.62 : 0.85;
    const double bh = rep_market == "nyse" ? -0.52 : -0.85;
    char opts[128];
    std::snprintf(opts, sizeof(opts), "alpha_h = %.4f\nbeta_h = %.4f\noverlapping = %d\n", ah, bh,
                  rep_mode == "overlapping" ? 1 : 0);
    ck_calibration* c = nullptr;
    require_ok(ck_calibrate(s, opts, &c));
    ck_params* p = nullptr;
    require_ok(ck_calibration_params(c, &p));

    std::ostringstream os;
    char line[256];
    os << "Predictive regressions at 12 months (coefficients x1e-4 per year, " << rep_mode
       << " windows)\n";
    std::snprintf(line, sizeof(line), "  %-10s alpha = %8.1f  beta = %8.1f +- %6.1f  t = %5.2f\n",
                  "gross", yearly(ck_regression_stat(r, "alpha_c")),
                  yearly(ck_regression_stat(r, "beta_c")),
                  yearly(ck_regression_stat(r, "se_beta_c")), ck_regression_stat(r, "t_stat"));
    os << line;
    std::snprintf(line, sizeof(line), "  %-10s alpha = %8.1f  beta = %8.1f +- %6.1f\n", "price",
                  yearly(ck_regression_stat(r, "alpha_f")), yearly(ck_regression_stat(r, "beta_f")),
                  yearly(ck_regression_stat(r, "se_beta_f")));
    os << line;
    std::snprintf(line, sizeof(line), "  %-10s alpha = %8.1f  beta = %8.1f +- %6.1f\n", "dividend",
                  yearly(ck_regression_stat(r, "alpha_g")), yearly(ck_regression_stat(r, "beta_g")),
                  yearly(ck_regression_stat(r, "se_beta_g")));
    os << line;
    std::snprintf(line, sizeof(line),
                  "  (disaggregated sums: alpha_f+alpha_g = %8.1f, beta_f+beta_g = %8.1f)\n",
                  yearly(ck_regression_stat(r, "alpha_f") + ck_regression_stat(r, "alpha_g")),
                  yearly(ck_regression_stat(r, "beta_f") + ck_regression_stat(r, "beta_g")));
    os << line;
    std::snprintf(line, sizeof(line), "  bootstrap p-value (gross, B = %" PRId64 "): %.4f\n",
                  ck_bootstrap_count(b), ck_bootstrap_p_value(b));
    os << line;

    os << "\nModel parameters (x1e-4 per month where dimensionful)\n";
    auto param_line = [&](const char* key, double scale) {
      double v;
      require_ok(ck_params_get(p, key, &v));
      std::snprintf(line, sizeof(line), "  %-10s = %10.2f\n", key, v * scale);
      os << line;
    };
    param_line("g", 1e4);
    param_line("theta_div", 1e4);
    param_line("gamma", 1.0);
    param_line("kappa", 1e4);
    double sm, sp2, sd;
    require_ok(ck_params_get(p, "sigma_mu", &sm));
    require_ok(ck_params_get(p, "sigma_d", &sd));
    require_ok(ck_params_get(p, "sigma_p", &sp2));
    std::snprintf(line, sizeof(line), "  %-10s = %10.2f\n", "sigma_mu2", sm * sm * 1e4);
    os << line;
    std::snprintf(line, sizeof(line), "  %-10s = %10.2f\n", "sigma_d2", sd * sd * 1e4);
    os << line;
    std::snprintf(line, sizeof(line), "  %-10s = %10.2f\n", "sigma_p2", sp2 * sp2 * 1e4);
    os << line;

    double lam_p, lam_m, scale;
    require_ok(ck_eigenvalues(p, &lam_p, &lam_m));
    require_ok(ck_damping_scale(p, &scale));
    std::snprintf(line, sizeof(line),
                  "\nTransients: lambda+ = %.5f, lambda- = %.5f, damping scale = %.1f months\n",
                  lam_p, lam_m, scale);
    os << line;

    write_text(joined(rep_opts.output, "report.txt"), os.str());
    std::cout << os.str();
    std::cout << "wrote " << joined(rep_opts.output, "report.txt") << "\n";
    ck_params_free(p);
    ck_calibration_free(c);
    ck_bootstrap_free(b);
    ck_regression_free(r);
    ck_series_free(s);
    return 0;
  }

  return 0;
}
