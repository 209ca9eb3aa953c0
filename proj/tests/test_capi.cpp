#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "capekit/capekit.h"

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_temp(const std::string& name, const std::string& content) {
  auto path = temp_path(name);
  std::ofstream out(path);
  out << content;
  return path;
}

// Deterministic synthetic market file, long enough for the smoothing window.
std::string write_market_csv(const std::string& name, int months) {
  std::string text = "Date,P,D,E,CPI\n";
  uint64_t state = 88172645463325252ULL;
  auto next_u = [&]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  double price = 100.0;
  int year = 1900, month = 1;
  char line[160];
  for (int i = 0; i < months; ++i) {
    price *= std::exp(0.012 * (next_u() - 0.5));
    std::snprintf(line, sizeof(line), "%04d.%02d,%.6f,%.6f,%.6f,%.4f\n", year, month, price,
                  0.045 * price, 0.08 * price, 10.0 + 0.01 * i);
    text += line;
    if (++month > 12) {
      month = 1;
      ++year;
    }
  }
  return write_temp(name, text);
}

const char* kTableParams =
    "units = table\ngamma = 0.25\nkappa = 323\ng = 12\ntheta_div = 271\n"
    "sigma_mu2 = 12\nsigma_p2 = 18.2\nsigma_d2 = 13\n"
    "alpha_f = 2531\nbeta_f = 767\nalpha_g = 1527\nbeta_g = 393\n"
    "alpha_h = 0.85\nbeta_h = -0.85\n";

}  // namespace

TEST_CASE("series lifecycle and derived values through the C surface") {
  const std::string csv = write_market_csv("ck_capi_market.csv", 400);
  ck_series* s = nullptr;
  REQUIRE(ck_series_load_csv(csv.c_str(), nullptr, nullptr, &s) == CK_OK);
  CHECK(ck_series_length(s) == 400);
  int year = 0, month = 0;
  CHECK(ck_series_month_at(s, 0, &year, &month) == CK_OK);
  CHECK(year == 1900);
  CHECK(month == 1);
  CHECK(ck_series_month_at(s, 400, &year, &month) == CK_ERROR_DATA);
  CHECK(std::isfinite(ck_series_value(s, "P", 10)));
  CHECK(std::isnan(ck_series_value(s, "CAPE", 10)));   // before the window fills
  CHECK(std::isfinite(ck_series_value(s, "CAPE", 150)));
  CHECK(std::isnan(ck_series_value(s, "nope", 0)));

  double y = 0, pp = 0, dp = 0;
  REQUIRE(ck_series_yield(s, 130, 12, &y, &pp, &dp) == CK_OK);
  CHECK(y == doctest::Approx(pp + dp).epsilon(1e-12));
  CHECK(ck_series_yield(s, 398, 12, &y, nullptr, nullptr) == CK_ERROR_DATA);

  const std::string derived = temp_path("ck_capi_derived.csv");
  CHECK(ck_series_write_derived_csv(s, derived.c_str()) == CK_OK);
  CHECK(std::filesystem::file_size(derived) > 1000);
  ck_series_free(s);
}

TEST_CASE("load failures set an error message and a data status") {
  ck_series* s = nullptr;
  CHECK(ck_series_load_csv("/nonexistent/file.csv", nullptr, nullptr, &s) == CK_ERROR_DATA);
  CHECK(std::string(ck_last_error()).size() > 0);
  CHECK(ck_series_load_csv(nullptr, nullptr, nullptr, &s) == CK_ERROR_CONFIG);

  const std::string gap = write_temp("ck_capi_gap.csv",
                                     "Date,P,D,E,CPI\n1871.01,4,0.2,0.4,12\n1871.03,4,0.2,0.4,12\n");
  CHECK(ck_series_load_csv(gap.c_str(), nullptr, nullptr, &s) == CK_ERROR_DATA);
  CHECK(std::string(ck_last_error()).find("1871.02") != std::string::npos);
}

TEST_CASE("regression and bootstrap through the C surface") {
  const std::string csv = write_market_csv("ck_capi_market2.csv", 520);
  ck_series* s = nullptr;
  REQUIRE(ck_series_load_csv(csv.c_str(), nullptr, nullptr, &s) == CK_OK);

  ck_regression* r = nullptr;
  REQUIRE(ck_regress(s, 12, 1, &r) == CK_OK);
  CHECK(std::isfinite(ck_regression_stat(r, "beta_c")));
  CHECK(ck_regression_stat(r, "t_stat") ==
        doctest::Approx(ck_regression_stat(r, "beta_c") / ck_regression_stat(r, "se_beta_c")));
  char* kv = nullptr;
  REQUIRE(ck_regression_to_kv(r, &kv) == CK_OK);
  CHECK(std::string(kv).find("beta_c") != std::string::npos);
  ck_string_free(kv);
  ck_regression_free(r);

  ck_bootstrap* b = nullptr;
  REQUIRE(ck_bootstrap_run(s, 12, 300, 9, &b) == CK_OK);
  CHECK(ck_bootstrap_count(b) == 300);
  CHECK(ck_bootstrap_p_value(b) >= 0.0);
  CHECK(ck_bootstrap_p_value(b) <= 1.0);
  CHECK(std::isfinite(ck_bootstrap_sample(b, 0)));
  CHECK(std::isnan(ck_bootstrap_sample(b, 300)));
  const std::string samples = temp_path("ck_capi_samples.csv");
  CHECK(ck_bootstrap_write_samples_csv(b, samples.c_str()) == CK_OK);

  ck_bootstrap* b2 = nullptr;
  REQUIRE(ck_bootstrap_run(s, 12, 300, 9, &b2) == CK_OK);
  for (int i = 0; i < 300; ++i) CHECK(ck_bootstrap_sample(b, i) == ck_bootstrap_sample(b2, i));
  ck_bootstrap_free(b2);
  ck_bootstrap_free(b);
  ck_series_free(s);
}

TEST_CASE("parameters and closed forms through the C surface") {
  ck_params* p = nullptr;
  REQUIRE(ck_params_from_text(kTableParams, &p) == CK_OK);

  double kappa = 0.0;
  REQUIRE(ck_params_get(p, "kappa", &kappa) == CK_OK);
  CHECK(kappa == doctest::Approx(0.0323));

  double lam_p = 0, lam_m = 0;
  REQUIRE(ck_eigenvalues(p, &lam_p, &lam_m) == CK_OK);
  CHECK(lam_p < 1.0);
  CHECK(lam_m > 0.0);

  double scale = 0;
  REQUIRE(ck_damping_scale(p, &scale) == CK_OK);
  CHECK(scale > 1.0);

  double asym = 0, fin = 0, var = 0, corr = 0;
  REQUIRE(ck_asymptotic_yield(p, -3.0, &asym) == CK_OK);
  CHECK(asym * 12.0 == doctest::Approx((2531 + 1527 + (767 + 393) * -3.0) * 1e-4).epsilon(1e-10));
  REQUIRE(ck_expected_yield(p, 20000, -3.0, -5.6, 0.0, &fin) == CK_OK);
  CHECK(fin == doctest::Approx(asym).epsilon(5e-3));
  REQUIRE(ck_yield_variance(p, 120, -3.0, -5.6, &var) == CK_OK);
  CHECK(var > 0.0);
  REQUIRE(ck_leading_correction(p, -3.0, -5.6, &corr) == CK_OK);
  CHECK(std::isfinite(corr));

  const std::string path = temp_path("ck_capi_params.kv");
  REQUIRE(ck_params_save(p, path.c_str()) == CK_OK);
  ck_params* q = nullptr;
  REQUIRE(ck_params_load(path.c_str(), &q) == CK_OK);
  double kappa2 = 0.0;
  REQUIRE(ck_params_get(q, "kappa", &kappa2) == CK_OK);
  CHECK(kappa2 == doctest::Approx(kappa));
  ck_params_free(q);

  ck_params* bad = nullptr;
  CHECK(ck_params_from_text("units = month\ngamma = 2.0\n", &bad) != CK_OK);
  CHECK(std::string(ck_last_error()).size() > 0);
  ck_params_free(p);
}

TEST_CASE("scenarios, bands and validation through the C surface") {
  ck_params* p = nullptr;
  REQUIRE(ck_params_from_text(kTableParams, &p) == CK_OK);

  ck_scenarios* sc = nullptr;
  REQUIRE(ck_simulate_point(p, -3.0, -5.66, 0.0, "24:48:24", 50, 123, &sc) == CK_OK);
  CHECK(ck_scenarios_paths(sc) == 50);
  CHECK(ck_scenarios_horizons(sc) == 2);
  int h = 0;
  double x0 = 0, yield = 0;
  REQUIRE(ck_scenarios_point(sc, 0, 1, &h, &x0, &yield) == CK_OK);
  CHECK(h == 48);
  CHECK(x0 == doctest::Approx(-3.0));
  CHECK(std::isfinite(yield));
  CHECK(ck_scenarios_point(sc, 50, 0, &h, &x0, &yield) == CK_ERROR_DATA);
  const std::string path = temp_path("ck_capi_scen.csv");
  CHECK(ck_scenarios_write_csv(sc, path.c_str()) == CK_OK);
  ck_scenarios_free(sc);

  const std::string band_path = temp_path("ck_capi_band.csv");
  REQUIRE(ck_band_write_csv(p, "24:96:24", -3.0, -5.66, 1.96, 1, band_path.c_str()) == CK_OK);
  CHECK(std::filesystem::file_size(band_path) > 50);

  char* report = nullptr;
  int failures = -1;
  REQUIRE(ck_validate(1, 7, &report, &failures) == CK_OK);
  CHECK(failures == 0);
  CHECK(std::string(report).find("[PASS]") != std::string::npos);
  ck_string_free(report);
  ck_params_free(p);
}
