#include "selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "bootstrap.hpp"
#include "dynamics.hpp"
#include "market_data.hpp"
#include "persistent.hpp"
#include "rng.hpp"
#include "scenario.hpp"

namespace capekit {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

ModelParams reference_params() {
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

// Plain (Y, mu, xi) recursion, written independently of step().
double iterate_noiseless_y(int h, const ModelParams& p, const ScenarioAnchors& a, double y0,
                           double mu0) {
  double y = y0, mu = mu0;
  for (int t = 0; t < h; ++t) {
    const double bracket = -y + a.h + a.g_f1 * t;
    const double y_next = y + mu;
    mu = p.gamma * mu + p.kappa * bracket;
    y = y_next;
  }
  return y;
}

}  // namespace

std::vector<CheckResult> run_selfchecks(bool quick, uint64_t seed) {
  std::vector<CheckResult> results;
  auto check = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& f) {
    CheckResult r;
    r.name = name;
    try {
      auto [ok, detail] = f();
      r.passed = ok;
      r.detail = detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  };

  const ModelParams ref = reference_params();

  check("spectral reconstruction over random stable pairs", [&] {
    Rng rng(seed ^ 0x51);
    double worst = 0.0;
    const int trials = quick ? 200 : 1000;
    for (int i = 0; i < trials; ++i) {
      ModelParams p = ref;
      p.gamma = 0.01 + 0.97 * rng.uniform01();
      p.kappa = (0.02 + 0.96 * rng.uniform01()) * (1.0 - p.gamma) * (1.0 - p.gamma) / 4.0;
      SystemSpectrum s = spectrum(p);
      if (!(s.lambda_minus > 0.0 && s.lambda_plus < 1.0 && s.lambda_minus <= s.lambda_plus))
        return std::make_pair(false, std::string("eigenvalues outside (0,1)"));
      const double err = ((s.Q * s.Lambda * s.Q_inverse) - s.J).cwiseAbs().maxCoeff();
      worst = std::max(worst, err);
    }
    return std::make_pair(worst <= 1e-12, fmt("max |Q L Q^-1 - J| = %.2e", worst));
  });

  check("closed-form expectation equals noiseless recursion", [&] {
    double worst = 0.0;
    for (double gamma : {0.1, 0.25, 0.4, 0.6, 0.8}) {
      for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        ModelParams p = ref;
        p.gamma = gamma;
        p.kappa = frac * (1.0 - gamma) * (1.0 - gamma) / 4.0;
        const ScenarioAnchors a = resolve_anchors(p, -3.0);
        const int hmax = quick ? 120 : 240;
        for (int h = 1; h <= hmax; ++h) {
          const double closed = expected_y(h, p, a, 3.0, 0.013);
          const double iterated = iterate_noiseless_y(h, p, a, 3.0, 0.013);
          worst = std::max(worst, std::abs(closed - iterated));
        }
      }
    }
    return std::make_pair(worst <= 1e-10, fmt("max |closed - iterated| = %.2e", worst));
  });

  check("driving-noise accumulator is a variance-t martingale", [&] {
    const int paths = quick ? 4000 : 20000;
    const int horizon = 48;
    Rng rng(seed ^ 0x7u);
    const ScenarioAnchors a = resolve_anchors(ref, -3.0);
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < paths; ++i) {
      ModelState s;
      s.y = -a.log_ep0;
      s.log_dp = a.log_g;
      for (int t = 0; t < horizon; ++t)
        s = step(s, ref, a, StepNoise{rng.normal(), rng.normal(), rng.normal()});
      mean += s.xi;
      var += s.xi * s.xi;
    }
    mean /= paths;
    var = var / paths - mean * mean;
    const double expect =
        horizon * std::pow(ref.kappa / (1.0 - ref.gamma) * ref.sigma_p, 2);
    const double tol = 6.0 * expect / std::sqrt(static_cast<double>(paths));
    const bool ok = std::abs(mean) < 6.0 * std::sqrt(expect / paths) &&
                    std::abs(var - expect) < tol;
    return std::make_pair(ok, fmt("E[xi]=%.2e, Var[xi]/expected=%.4f", mean, var / expect));
  });

  check("ratio variance converges to its stationary level", [&] {
    // Var of logdp_t: geometric sum -> sigma_d^2/(theta(2-theta)).
    const double phi = 1.0 - ref.theta_div;
    const int t = 600;
    double acc = 0.0, f = 1.0;
    for (int k = 0; k < t; ++k) {
      acc += f;
      f *= phi * phi;
    }
    const double finite = ref.sigma_d * ref.sigma_d * acc;
    const double limit = ref.sigma_d * ref.sigma_d / (ref.theta_div * (2.0 - ref.theta_div));
    const double rel = std::abs(finite - limit) / limit;
    return std::make_pair(rel < 1e-6, fmt("relative gap at t=600: %.2e", rel));
  });

  check("long-run yield is affine in the ratio", [&] {
    const double y1 = asymptotic_yield(ref, -3.5);
    const double y2 = asymptotic_yield(ref, -2.5);
    const double y3 = asymptotic_yield(ref, -3.0);
    const double err = std::abs(y3 - 0.5 * (y1 + y2));
    return std::make_pair(err < 1e-15, fmt("midpoint collinearity gap = %.2e", err));
  });

  check("yield decomposition identity on random series", [&] {
    Rng rng(seed ^ 0x99);
    std::vector<RawMonthlyRecord> raw;
    YearMonth ym{1950, 1};
    double price = 100.0;
    for (int i = 0; i < 200; ++i) {
      RawMonthlyRecord r;
      r.date = ym;
      price *= std::exp(0.01 * rng.normal());
      r.nominal_price = price;
      r.nominal_dividend = 0.04 * price * std::exp(0.1 * rng.normal());
      r.nominal_earnings = 0.07 * price * std::exp(0.1 * rng.normal());
      r.cpi = 10.0 * std::exp(0.002 * i);
      raw.push_back(r);
      ym = ym.plus_months(1);
    }
    MarketSeries s = deflate(raw, raw.back().date, 24);
    double worst = 0.0;
    for (int t = 0; t < 60; t += 7) {
      for (int h : {1, 6, 24}) {
        double pp, dp;
        s.yield_decomposition(t, h, pp, dp);
        worst = std::max(worst, std::abs(pp + dp - s.gross_yield(t, h)));
      }
    }
    return std::make_pair(worst <= 1e-12, fmt("max identity gap = %.2e", worst));
  });

  check("ratio series invariant under CPI rescaling", [&] {
    Rng rng(seed ^ 0xAB);
    std::vector<RawMonthlyRecord> raw1, raw2;
    YearMonth ym{1960, 1};
    double price = 50.0;
    for (int i = 0; i < 180; ++i) {
      RawMonthlyRecord r;
      r.date = ym;
      price *= std::exp(0.01 * rng.normal());
      r.nominal_price = price;
      r.nominal_dividend = 2.0 + 0.2 * rng.uniform01();
      r.nominal_earnings = 4.0 + 0.3 * rng.uniform01();
      r.cpi = 8.0 * std::exp(0.0025 * i);
      raw1.push_back(r);
      r.cpi *= 7.3;  // common rescaling of the deflator
      raw2.push_back(r);
      ym = ym.plus_months(1);
    }
    MarketSeries a = deflate(raw1, raw1[10].date, 120);
    MarketSeries b = deflate(raw2, raw2[10].date, 120);
    double worst = 0.0;
    for (size_t t = 0; t < a.size(); ++t) {
      if (std::isfinite(a.log_ep[t]))
        worst = std::max(worst, std::abs(a.log_ep[t] - b.log_ep[t]));
      if (std::isfinite(a.log_dp[t]))
        worst = std::max(worst, std::abs(a.log_dp[t] - b.log_dp[t]));
    }
    return std::make_pair(worst <= 1e-12, fmt("max log-ratio shift = %.2e", worst));
  });

  check("autoregression recombination identity", [&] {
    Rng rng(seed ^ 0xC4);
    const int n = 240;
    Eigen::VectorXd x(n);
    x(0) = -3.0;
    for (int t = 1; t < n; ++t) x(t) = -0.05 + 0.97 * x(t - 1) + 0.1 * rng.normal();
    AR1Fit ar1 = fit_ar1(x);
    BiasCorrectedAR1 c = bias_correct(ar1, x);
    double worst = 0.0;
    for (int t = 1; t < n; ++t)
      worst = std::max(worst,
                       std::abs(c.theta_c + c.rho_c * x(t - 1) + c.proxy_residuals(t - 1) - x(t)));
    return std::make_pair(worst <= 1e-12, fmt("max recombination gap = %.2e", worst));
  });

  check("bootstrap determinism across thread counts", [&] {
    Rng rng(seed ^ 0xD5);
    const int n = 80;
    Eigen::VectorXd x(n + 1), y(n);
    x(0) = -3.0;
    for (int t = 1; t <= n; ++t) x(t) = -0.06 + 0.98 * x(t - 1) + 0.08 * rng.normal();
    for (int t = 0; t < n; ++t) y(t) = 0.002 + 0.01 * x(t) + 0.02 * rng.normal();
    BootstrapConfig cfg;
    cfg.replications = quick ? 200 : 1000;
    cfg.master_seed = seed ^ 0xE6;
    cfg.threads = 1;
    BootstrapResult a = run_bootstrap(y, x, cfg);
    cfg.threads = 4;
    BootstrapResult b = run_bootstrap(y, x, cfg);
    const bool identical = a.beta_c_samples == b.beta_c_samples && a.p_value == b.p_value;
    return std::make_pair(identical, fmt("p = %.4f", a.p_value));
  });

  check("scenario engine reproducibility", [&] {
    std::vector<InitialCondition> ics{{-3.0, -5.5, 0.001}};
    std::vector<int> horizons{24, 48};
    ScenarioSet s1 = simulate(ref, ics, horizons, 64, seed ^ 0xF7, 1);
    ScenarioSet s2 = simulate(ref, ics, horizons, 64, seed ^ 0xF7, 2);
    return std::make_pair(s1.yields == s2.yields, std::string("64 paths, 2 horizons"));
  });

  check("band width decays beyond the transient scale", [&] {
    const int start = static_cast<int>(std::ceil(damping_scale(ref)));
    std::vector<int> horizons;
    for (int h = start; h <= start + 120; h += 6) horizons.push_back(h);
    ConfidenceBand cb = band(ref, horizons, -3.0, -5.66, 1.96);
    for (size_t i = 1; i < cb.half_width.size(); ++i)
      if (cb.half_width[i] >= cb.half_width[i - 1])
        return std::make_pair(false, fmt("width rises at h=%g", double(cb.horizons[i])));
    return std::make_pair(true, fmt("checked %g horizons from h=%g", double(horizons.size()),
                                    double(start)));
  });

  if (!quick) {
    check("diffusive scaling of long-horizon price variance", [&] {
      const int h = 2000;
      const int paths = 20000;
      const ScenarioAnchors a = resolve_anchors(ref, -3.0);
      double sum = 0.0, sum2 = 0.0;
      for (int i = 0; i < paths; ++i) {
        Rng rng = Rng::stream(seed ^ 0x1234, i);
        ModelState s;
        s.y = 3.0;
        s.log_dp = a.log_g;
        for (int t = 0; t < h; ++t)
          s = step(s, ref, a, StepNoise{rng.normal(), rng.normal(), 0.0});
        const double r = (s.y - 3.0) / h;
        sum += r;
        sum2 += r * r;
      }
      const double mean = sum / paths;
      const double var = sum2 / paths - mean * mean;
      const double scaled = var * h / (ref.sigma_p * ref.sigma_p);
      return std::make_pair(std::abs(scaled - 1.0) < 0.05, fmt("h Var/sigma_p^2 = %.4f", scaled));
    });
  }

  return results;
}

}  // namespace capekit
