#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "bootstrap.hpp"
#include "errors.hpp"
#include "persistent.hpp"
#include "rng.hpp"

using namespace capekit;

namespace {

struct Sample {
  Eigen::VectorXd y, x;
};

Sample endogenous_sample(int n, double beta, double rho, uint64_t seed) {
  Rng rng(seed);
  Sample s;
  s.x.resize(n + 1);
  s.y.resize(n);
  s.x(0) = rng.normal() * std::sqrt(1.0 / (1.0 - rho * rho));
  for (int t = 0; t < n; ++t) {
    const double u = rng.normal();
    const double v = -0.9 * u + std::sqrt(1.0 - 0.81) * rng.normal();
    s.x(t + 1) = rho * s.x(t) + v;
    s.y(t) = 0.001 + beta * s.x(t) + u * 0.04;
  }
  return s;
}

}  // namespace

TEST_CASE("identical seeds give bit-identical samples; seeds matter") {
  Sample s = endogenous_sample(120, 0.02, 0.95, 9001);
  BootstrapConfig cfg;
  cfg.replications = 500;
  cfg.master_seed = 42;
  BootstrapResult a = run_bootstrap(s.y, s.x, cfg);
  BootstrapResult b = run_bootstrap(s.y, s.x, cfg);
  CHECK(a.beta_c_samples == b.beta_c_samples);
  CHECK(a.p_value == b.p_value);
  cfg.master_seed = 43;
  BootstrapResult c = run_bootstrap(s.y, s.x, cfg);
  CHECK(a.beta_c_samples != c.beta_c_samples);
}

TEST_CASE("constant returns are degenerate with p = 1") {
  Rng rng(3);
  Eigen::VectorXd x(61), y(60);
  x(0) = -2.0;
  for (int t = 1; t <= 60; ++t) x(t) = 0.97 * x(t - 1) + 0.05 * rng.normal();
  y.setConstant(0.004);
  BootstrapConfig cfg;
  cfg.replications = 200;
  cfg.master_seed = 7;
  BootstrapResult r = run_bootstrap(y, x, cfg);
  CHECK(r.degenerate);
  CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("non-positive observed slope flips the tail and flags it") {
  Rng rng(19);
  Eigen::VectorXd x(121), y(120);
  x(0) = 1.0;
  for (int t = 1; t <= 120; ++t) x(t) = 0.9 * x(t - 1) + 0.2 * rng.normal();
  for (int t = 0; t < 120; ++t) y(t) = -0.2 * x(t) + 0.05 * rng.normal();
  BootstrapConfig cfg;
  cfg.replications = 400;
  cfg.master_seed = 11;
  BootstrapResult r = run_bootstrap(y, x, cfg);
  CHECK(r.mirrored);
  CHECK(r.observed_beta_c < 0.0);
  long count = 0;
  for (double b : r.beta_c_samples)
    if (b <= r.observed_beta_c) ++count;
  CHECK(r.p_value == doctest::Approx(double(count) / 400.0));
}

TEST_CASE("joint resampling preserves the residual anti-correlation") {
  Sample s = endogenous_sample(200, 0.0, 0.95, 303);
  BootstrapConfig cfg;
  cfg.replications = 50;
  cfg.master_seed = 77;
  cfg.keep_index_log = true;
  BootstrapResult r = run_bootstrap(s.y, s.x, cfg);

  // Reconstruct the null residual rows exactly as the engine does.
  const double alpha0 = s.y.mean();
  Eigen::VectorXd u = s.y.array() - alpha0;
  AR1Fit ar1 = fit_ar1(s.x);
  const Eigen::VectorXd& v = ar1.residuals;
  auto corr = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double ma = a.mean(), mb = b.mean();
    double cab = 0.0, ca = 0.0, cb = 0.0;
    for (int i = 0; i < a.size(); ++i) {
      cab += (a(i) - ma) * (b(i) - mb);
      ca += (a(i) - ma) * (a(i) - ma);
      cb += (b(i) - mb) * (b(i) - mb);
    }
    return cab / std::sqrt(ca * cb);
  };
  const double original = corr(u, v);
  const int n = static_cast<int>(u.size());
  Eigen::VectorXd ub(n * 50), vb(n * 50);
  for (int b = 0; b < 50; ++b)
    for (int i = 0; i < n; ++i) {
      const uint32_t idx = r.index_log[static_cast<size_t>(b) * n + i];
      ub(b * n + i) = u(idx);
      vb(b * n + i) = v(idx);
    }
  CHECK(corr(ub, vb) == doctest::Approx(original).epsilon(0.05));
  CHECK(original < -0.5);
}

TEST_CASE("null p-values are close to uniform (small nested run)") {
  const int outer = 100, inner = 400, n = 120;
  std::vector<double> pvals;
  for (int o = 0; o < outer; ++o) {
    Sample s = endogenous_sample(n, 0.0, 0.95, 40000 + o);
    BootstrapConfig cfg;
    cfg.replications = inner;
    cfg.master_seed = 90000 + o;
    pvals.push_back(run_bootstrap(s.y, s.x, cfg).p_value);
  }
  std::sort(pvals.begin(), pvals.end());
  double ks = 0.0;
  for (int i = 0; i < outer; ++i) {
    const double f = double(i + 1) / outer;
    ks = std::max(ks, std::max(std::abs(f - pvals[i]), std::abs(pvals[i] - double(i) / outer)));
  }
  CHECK(ks < 1.358 / std::sqrt(double(outer)));  // 5% critical value
}

TEST_CASE("configuration guards") {
  Sample s = endogenous_sample(40, 0.0, 0.9, 1);
  BootstrapConfig cfg;
  cfg.replications = 0;
  CHECK_THROWS_AS(run_bootstrap(s.y, s.x, cfg), Error);
  cfg.replications = 10;
  Eigen::VectorXd bad = s.y;
  bad(3) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(run_bootstrap(bad, s.x, cfg), Error);
}
