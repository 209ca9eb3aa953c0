#include "calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "errors.hpp"

namespace capekit {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw data_error("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  const double pos = q * (values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - lo;
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

RollingEstimate RollingEstimate::from_values(std::vector<double> values, int window, int step,
                                             int skipped) {
  if (values.empty()) throw data_error("no admissible rolling windows");
  RollingEstimate est;
  est.window_length = window;
  est.step = step;
  est.skipped_windows = skipped;
  double acc = 0.0;
  for (double v : values) acc += v;
  est.mean = acc / values.size();
  est.ci68_low = quantile(values, 0.16);
  est.ci68_high = quantile(values, 0.84);
  est.values = std::move(values);
  return est;
}

namespace {

struct YieldTriples {
  Eigen::VectorXd gross, price, dividend, x_prev, x_next;
  int n_observations = 0;  // distinct predictor observations for the bias correction
};

YieldTriples build_yield_triples(const MarketSeries& series, int horizon, bool overlapping) {
  const int n = static_cast<int>(series.size());
  const int stride = overlapping ? 1 : horizon;
  std::vector<double> g, p, d, xp, xn;
  for (int t = 0; t + horizon < n; t += stride) {
    if (!std::isfinite(series.log_ep[t]) || !std::isfinite(series.log_ep[t + horizon])) continue;
    bool ok = true;
    for (int i = 0; i < horizon; ++i)
      if (!std::isfinite(series.log_gross_return[t + i])) {
        ok = false;
        break;
      }
    if (!ok) continue;
    double price_part, dividend_part;
    series.yield_decomposition(t, horizon, price_part, dividend_part);
    g.push_back(price_part + dividend_part);
    p.push_back(price_part);
    d.push_back(dividend_part);
    xp.push_back(series.log_ep[t]);
    xn.push_back(series.log_ep[t + horizon]);
  }
  if (g.size() < 24)
    throw data_error("predictive regression: only " + std::to_string(g.size()) +
                     " usable samples after the smoothing warm-up");
  YieldTriples out;
  const int m = static_cast<int>(g.size());
  out.gross = Eigen::Map<Eigen::VectorXd>(g.data(), m);
  out.price = Eigen::Map<Eigen::VectorXd>(p.data(), m);
  out.dividend = Eigen::Map<Eigen::VectorXd>(d.data(), m);
  out.x_prev = Eigen::Map<Eigen::VectorXd>(xp.data(), m);
  out.x_next = Eigen::Map<Eigen::VectorXd>(xn.data(), m);
  out.n_observations = m + 1;
  return out;
}

}  // namespace

PredictiveCoefficients estimate_predictive_coefficients(const MarketSeries& series, int horizon,
                                                        bool overlapping) {
  if (horizon < 1) throw config_error("predictive horizon must be positive");
  YieldTriples tr = build_yield_triples(series, horizon, overlapping);

  PredictiveCoefficients out;
  out.horizon = horizon;
  out.overlapping = overlapping;
  out.n_samples = static_cast<int>(tr.gross.size());
  out.gross = augmented_regression_pairs(tr.gross, tr.x_prev, tr.x_next, tr.n_observations);
  out.price_part = augmented_regression_pairs(tr.price, tr.x_prev, tr.x_next, tr.n_observations);
  out.dividend_part =
      augmented_regression_pairs(tr.dividend, tr.x_prev, tr.x_next, tr.n_observations);
  out.gross_linear = Affine{out.gross.alpha_c, out.gross.beta_c};
  out.f_linear = Affine{out.price_part.alpha_c, out.price_part.beta_c};
  out.g_linear = Affine{out.dividend_part.alpha_c, out.dividend_part.beta_c};
  return out;
}

RollingEstimate estimate_g(const MarketSeries& series, int window, int step) {
  const int n = static_cast<int>(series.size());
  const int first = series.first_log_ep_index();
  if (first < 0 || n - first < window)
    throw data_error("g estimation needs at least " + std::to_string(window) +
                     " admissible months");
  std::vector<double> slopes;
  int skipped = 0;
  for (int s = first; s + window <= n; s += step) {
    bool ok = true;
    for (int t = s; t < s + window; ++t)
      if (!(std::isfinite(series.cape[t]) && series.cape[t] > 0.0)) {
        ok = false;
        break;
      }
    if (!ok) {
      ++skipped;
      continue;
    }
    Eigen::VectorXd y(window);
    Eigen::MatrixXd X(window, 2);
    for (int i = 0; i < window; ++i) {
      y(i) = std::log(series.cape[s + i]);
      X(i, 0) = 1.0;
      X(i, 1) = i;
    }
    slopes.push_back(ols(y, X).coefficients(1));
  }
  return RollingEstimate::from_values(std::move(slopes), window, step, skipped);
}

DividendProcessFit estimate_dividend_process(const MarketSeries& series, double log_g, int window,
                                             int step) {
  const int n = static_cast<int>(series.size());
  std::vector<double> thetas, variances;
  int skipped = 0;
  for (int s = 0; s + window + 1 <= n; s += step) {
    bool ok = true;
    for (int t = s; t <= s + window; ++t)
      if (!std::isfinite(series.log_dp[t])) {
        ok = false;
        break;
      }
    if (!ok) {
      ++skipped;
      continue;
    }
    // No-intercept regression of the increment on the anchored deviation.
    double sxy = 0.0, sxx = 0.0;
    for (int t = s; t < s + window; ++t) {
      const double dev = series.log_dp[t] - log_g;
      const double inc = series.log_dp[t + 1] - series.log_dp[t];
      sxy += dev * inc;
      sxx += dev * dev;
    }
    if (sxx <= 0.0) {
      ++skipped;
      continue;
    }
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (int t = s; t < s + window; ++t) {
      const double dev = series.log_dp[t] - log_g;
      const double inc = series.log_dp[t + 1] - series.log_dp[t];
      const double r = inc - slope * dev;
      rss += r * r;
    }
    thetas.push_back(-slope);
    variances.push_back(rss / (window - 1));
  }
  DividendProcessFit fit;
  fit.theta_div = RollingEstimate::from_values(std::move(thetas), window, step, skipped);
  fit.sigma_d2 = RollingEstimate::from_values(std::move(variances), window, step, skipped);
  return fit;
}

namespace {

struct MomentumPass {
  std::vector<double> gammas, kappas, variances;
  int skipped = 0;
};

MomentumPass momentum_pass(const MarketSeries& series, double g, const Affine& f_linear,
                           const Affine& h_linear, int window, int step) {
  const int n = static_cast<int>(series.size());
  MomentumPass pass;
  for (int s = 1; s + window <= n; s += step) {
    bool ok = true;
    for (int t = s; t < s + window; ++t)
      if (!std::isfinite(series.log_ep[t])) {
        ok = false;
        break;
      }
    if (!ok) {
      ++pass.skipped;
      continue;
    }
    const double x0 = series.log_ep[s];
    const double h_level = h_linear(x0);
    const double drift = f_linear(x0) - g;  // g F, the secular part of the anchor
    // mu proxy is the one-month log price change; rows t = s .. s+window-2.
    double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
    const int rows = window - 1;
    for (int t = s; t < s + rows; ++t) {
      const double mu_t = series.log_price[t] - series.log_price[t - 1];
      const double mu_next = series.log_price[t + 1] - series.log_price[t];
      const double bracket = series.log_ep[t] + h_level + drift * (t - s);
      s11 += mu_t * mu_t;
      s12 += mu_t * bracket;
      s22 += bracket * bracket;
      b1 += mu_t * mu_next;
      b2 += bracket * mu_next;
    }
    const double det = s11 * s22 - s12 * s12;
    if (std::abs(det) < 1e-14 * std::max(1.0, s11 * s22)) {
      ++pass.skipped;
      continue;
    }
    const double gamma_w = (s22 * b1 - s12 * b2) / det;
    const double kappa_w = (s11 * b2 - s12 * b1) / det;
    double rss = 0.0;
    for (int t = s; t < s + rows; ++t) {
      const double mu_t = series.log_price[t] - series.log_price[t - 1];
      const double mu_next = series.log_price[t + 1] - series.log_price[t];
      const double bracket = series.log_ep[t] + h_level + drift * (t - s);
      const double r = mu_next - gamma_w * mu_t - kappa_w * bracket;
      rss += r * r;
    }
    pass.gammas.push_back(gamma_w);
    pass.kappas.push_back(kappa_w);
    pass.variances.push_back(rss / (rows - 2));
  }
  return pass;
}

double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          int iterations = 70) {
  const double ratio = 0.6180339887498949;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

MomentumFit estimate_momentum(const MarketSeries& series, double g, const Affine& f_linear,
                              const Affine& g_linear, double theta_div, const Affine& h_init,
                              const CalibrationOptions& options) {
  // Sample means of the ratio series, used by the drift-offset objective.
  double x_sum = 0.0, dp_sum = 0.0;
  long x_count = 0, dp_count = 0;
  for (size_t t = 0; t < series.size(); ++t) {
    if (std::isfinite(series.log_ep[t])) {
      x_sum += series.log_ep[t];
      ++x_count;
    }
    if (std::isfinite(series.log_dp[t])) {
      dp_sum += series.log_dp[t];
      ++dp_count;
    }
  }
  if (x_count == 0 || dp_count == 0)
    throw data_error("momentum estimation needs defined log EP and log DP series");
  const double x_mean = x_sum / x_count;
  const double dp_mean = dp_sum / dp_count;

  MomentumFit fit;
  Affine h_current = h_init;
  double gamma_prev = 0.0, kappa_prev = 0.0;
  MomentumPass pass;

  for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
    fit.iterations = iteration + 1;
    pass = momentum_pass(series, g, f_linear, h_current, options.window, options.step);
    if (pass.gammas.empty()) throw data_error("momentum estimation: no admissible windows");
    double gamma_hat = 0.0, kappa_hat = 0.0;
    for (double v : pass.gammas) gamma_hat += v;
    for (double v : pass.kappas) kappa_hat += v;
    gamma_hat /= pass.gammas.size();
    kappa_hat /= pass.kappas.size();

    // Pull the point into the interior of the stability region when needed.
    const double gamma_proj = std::clamp(gamma_hat, 1e-4, 1.0 - 1e-4);
    const double kappa_cap = 0.9999 * (1.0 - gamma_proj) * (1.0 - gamma_proj) / 4.0;
    const double kappa_proj = std::clamp(kappa_hat, 1e-8, kappa_cap);
    if (gamma_proj != gamma_hat || kappa_proj != kappa_hat) fit.projected = true;
    gamma_hat = gamma_proj;
    kappa_hat = kappa_proj;

    ModelParams probe;
    probe.gamma = gamma_hat;
    probe.kappa = kappa_hat;
    probe.g = g;
    probe.f_linear = f_linear;
    probe.g_linear = g_linear;
    probe.theta_div = theta_div;
    probe.sigma_mu = probe.sigma_p = probe.sigma_d = 0.0;

    auto objective = [&](const Affine& h) {
      probe.h_linear = h;
      return std::abs(leading_correction(probe, x_mean, dp_mean));
    };
    const double alpha_min = golden_section_min(
        [&](double a) { return objective(Affine{a, h_current.beta}); }, h_current.alpha - 0.5,
        h_current.alpha + 0.5);
    const double beta_min = golden_section_min(
        [&](double b) { return objective(Affine{alpha_min, b}); }, h_current.beta - 0.5,
        h_current.beta + 0.5);

    if (iteration > 0 && std::abs(gamma_hat - gamma_prev) + std::abs(kappa_hat - kappa_prev) <
                             options.tolerance) {
      fit.converged = true;
      gamma_prev = gamma_hat;
      kappa_prev = kappa_hat;
      break;
    }
    gamma_prev = gamma_hat;
    kappa_prev = kappa_hat;
    h_current.alpha += options.damping * (alpha_min - h_current.alpha);
    h_current.beta += options.damping * (beta_min - h_current.beta);
  }

  fit.h_linear = h_current;
  fit.gamma = RollingEstimate::from_values(pass.gammas, options.window, options.step, pass.skipped);
  fit.kappa = RollingEstimate::from_values(pass.kappas, options.window, options.step, pass.skipped);
  fit.sigma_mu2 =
      RollingEstimate::from_values(pass.variances, options.window, options.step, pass.skipped);
  // Report the projected point through the means when the raw means sit
  // outside the stability region.
  return fit;
}

SigmaPFit estimate_sigma_p(const MarketSeries& series, const std::vector<int>& horizons,
                           bool overlapping) {
  if (horizons.size() < 3) throw config_error("sigma_p fit needs at least 3 horizons");
  const int n = static_cast<int>(series.size());
  SigmaPFit fit;
  for (int h : horizons) {
    if (h < 1) throw config_error("sigma_p fit: horizons must be positive");
    const int stride = overlapping ? 1 : h;
    std::vector<double> samples;
    for (int t = 0; t + h < n; t += stride)
      samples.push_back((series.log_price[t + h] - series.log_price[t]) / h);
    if (samples.size() < 2)
      throw data_error("sigma_p fit: horizon " + std::to_string(h) + " leaves fewer than 2 windows");
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= samples.size();
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= (samples.size() - 1);
    fit.horizons.push_back(h);
    fit.variances.push_back(var);
  }
  auto through_origin = [&](int drop) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < fit.horizons.size(); ++i) {
      if (static_cast<int>(i) == drop) continue;
      const double ih = 1.0 / fit.horizons[i];
      num += fit.variances[i] * ih;
      den += ih * ih;
    }
    return num / den;
  };
  fit.sigma_p2 = through_origin(-1);
  for (size_t i = 0; i < fit.horizons.size(); ++i)
    fit.loo_values.push_back(through_origin(static_cast<int>(i)));
  fit.ci68_low = quantile(fit.loo_values, 0.16);
  fit.ci68_high = quantile(fit.loo_values, 0.84);
  return fit;
}

CalibrationReport calibrate(const MarketSeries& series, const CalibrationOptions& options) {
  CalibrationReport report;
  report.predictive =
      estimate_predictive_coefficients(series, options.horizon, options.overlapping);
  report.g = estimate_g(series, options.window, options.step);

  const int first = series.first_log_ep_index();
  report.log_ep_anchor = series.log_ep[first];
  const double g_level = report.predictive.g_linear(report.log_ep_anchor);
  if (!(g_level > 0.0))
    throw numeric_error("calibration: dividend level G non-positive at the sample start");
  report.log_g_anchor = std::log(g_level);

  DividendProcessFit dividend =
      estimate_dividend_process(series, report.log_g_anchor, options.window, options.step);
  report.theta_div = dividend.theta_div;
  report.sigma_d2 = dividend.sigma_d2;

  double theta_hat = std::clamp(report.theta_div.mean, 1e-6, 2.0 - 1e-6);
  report.momentum =
      estimate_momentum(series, report.g.mean, report.predictive.f_linear,
                        report.predictive.g_linear, theta_hat, options.h_init, options);

  std::vector<int> horizons = options.sigma_p_horizons;
  if (horizons.empty())
    for (int h = 24; h <= 192; h += 12) horizons.push_back(h);
  report.sigma_p = estimate_sigma_p(series, horizons, options.overlapping);

  ModelParams p;
  p.g = report.g.mean;
  p.theta_div = theta_hat;
  p.sigma_d = std::sqrt(std::max(0.0, report.sigma_d2.mean));
  const double gamma_hat = std::clamp(report.momentum.gamma.mean, 1e-4, 1.0 - 1e-4);
  const double kappa_cap = 0.9999 * (1.0 - gamma_hat) * (1.0 - gamma_hat) / 4.0;
  p.gamma = gamma_hat;
  p.kappa = std::clamp(report.momentum.kappa.mean, 1e-8, kappa_cap);
  p.sigma_mu = std::sqrt(std::max(0.0, report.momentum.sigma_mu2.mean));
  p.sigma_p = std::sqrt(std::max(0.0, report.sigma_p.sigma_p2));
  p.f_linear = report.predictive.f_linear;
  p.g_linear = report.predictive.g_linear;
  p.h_linear = report.momentum.h_linear;
  p.validate();
  report.params = p;
  return report;
}

namespace {
void put_estimate(KeyValueFile& kv, const std::string& name, const RollingEstimate& e) {
  kv.set_double(name + "_ci68_low", e.ci68_low);
  kv.set_double(name + "_ci68_high", e.ci68_high);
  kv.set(name + "_windows", std::to_string(e.values.size()));
}
}  // namespace

KeyValueFile CalibrationReport::to_kv() const {
  KeyValueFile kv = params.to_kv();
  kv.set_double("alpha_gross", predictive.gross_linear.alpha);
  kv.set_double("beta_gross", predictive.gross_linear.beta);
  kv.set_double("beta_gross_se", predictive.gross.beta_c_standard_error);
  kv.set_double("beta_f_se", predictive.price_part.beta_c_standard_error);
  kv.set_double("beta_g_se", predictive.dividend_part.beta_c_standard_error);
  kv.set_double("t_gross", predictive.gross.t_statistic);
  kv.set("predictive_horizon", std::to_string(predictive.horizon));
  kv.set("predictive_overlapping", predictive.overlapping ? "1" : "0");
  kv.set("predictive_samples", std::to_string(predictive.n_samples));
  put_estimate(kv, "g", g);
  put_estimate(kv, "theta_div", theta_div);
  put_estimate(kv, "sigma_d2", sigma_d2);
  put_estimate(kv, "gamma", momentum.gamma);
  put_estimate(kv, "kappa", momentum.kappa);
  put_estimate(kv, "sigma_mu2", momentum.sigma_mu2);
  kv.set_double("sigma_p2_ci68_low", sigma_p.ci68_low);
  kv.set_double("sigma_p2_ci68_high", sigma_p.ci68_high);
  kv.set("momentum_iterations", std::to_string(momentum.iterations));
  kv.set("momentum_converged", momentum.converged ? "1" : "0");
  kv.set_double("log_ep_anchor", log_ep_anchor);
  kv.set_double("log_g_anchor", log_g_anchor);
  return kv;
}

}  // namespace capekit
