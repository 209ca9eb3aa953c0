#include "dynamics.hpp"

#include <cmath>

#include "errors.hpp"

namespace capekit {

double ModelParams::log_g_of(double log_ep0) const {
  const double level = g_linear(log_ep0);
  if (!(level > 0.0))
    throw numeric_error("dividend level G is non-positive at logEP0 = " +
                        std::to_string(log_ep0));
  return std::log(level);
}

void ModelParams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw numeric_error("constraint violation: gamma must lie in (0,1)");
  if (!(kappa > 0.0 && 4.0 * kappa <= (1.0 - gamma) * (1.0 - gamma)))
    throw numeric_error("constraint violation: need 0 < kappa <= (1-gamma)^2/4");
  if (!(theta_div > 0.0 && theta_div < 2.0))
    throw numeric_error("constraint violation: theta_div must lie in (0,2)");
  if (sigma_mu < 0.0 || sigma_p < 0.0 || sigma_d < 0.0)
    throw numeric_error("constraint violation: volatilities must be non-negative");
}

namespace {
// "table" units: rates and variances in 1e-4 per month, affine drift
// coefficients in 1e-4 per year.
constexpr double kRate = 1e-4;
constexpr double kYearly = 1e-4 / 12.0;

double variance_in(const KeyValueFile& kv, const std::string& sigma_key,
                   const std::string& var_key, double scale) {
  if (kv.has(var_key)) {
    double v = kv.get_double(var_key) * scale;
    if (v < 0.0) throw config_error("negative variance for " + var_key);
    return std::sqrt(v);
  }
  return kv.get_double(sigma_key);  // natural units, standard deviation
}
}  // namespace

ModelParams ModelParams::from_kv(const KeyValueFile& kv) {
  const std::string units = kv.get_or("units", "month");
  const bool table = units == "table";
  if (!table && units != "month")
    throw config_error("unknown units '" + units + "' (expected 'month' or 'table')");
  const double rate = table ? kRate : 1.0;
  const double yearly = table ? kYearly : 1.0;

  ModelParams p;
  p.gamma = kv.get_double("gamma");
  p.kappa = kv.get_double("kappa") * rate;
  p.g = kv.get_double("g") * rate;
  p.theta_div = kv.get_double("theta_div") * rate;
  p.sigma_mu = variance_in(kv, "sigma_mu", "sigma_mu2", rate);
  p.sigma_p = variance_in(kv, "sigma_p", "sigma_p2", rate);
  p.sigma_d = variance_in(kv, "sigma_d", "sigma_d2", rate);
  p.f_linear = Affine{kv.get_double("alpha_f") * yearly, kv.get_double("beta_f") * yearly};
  p.g_linear = Affine{kv.get_double("alpha_g") * yearly, kv.get_double("beta_g") * yearly};
  p.h_linear = Affine{kv.get_double("alpha_h"), kv.get_double("beta_h")};
  p.validate();
  return p;
}

KeyValueFile ModelParams::to_kv() const {
  KeyValueFile kv;
  kv.set("units", "month");
  kv.set_double("gamma", gamma);
  kv.set_double("kappa", kappa);
  kv.set_double("g", g);
  kv.set_double("theta_div", theta_div);
  kv.set_double("sigma_mu", sigma_mu);
  kv.set_double("sigma_p", sigma_p);
  kv.set_double("sigma_d", sigma_d);
  kv.set_double("alpha_f", f_linear.alpha);
  kv.set_double("beta_f", f_linear.beta);
  kv.set_double("alpha_g", g_linear.alpha);
  kv.set_double("beta_g", g_linear.beta);
  kv.set_double("alpha_h", h_linear.alpha);
  kv.set_double("beta_h", h_linear.beta);
  return kv;
}

ScenarioAnchors resolve_anchors(const ModelParams& params, double log_ep0) {
  ScenarioAnchors a;
  a.log_ep0 = log_ep0;
  a.g_f1 = params.f_linear(log_ep0);
  a.g_div = params.g_linear(log_ep0);
  a.log_g = params.log_g_of(log_ep0);
  a.h = params.h_linear(log_ep0);
  return a;
}

ModelState step(const ModelState& state, const ModelParams& params,
                const ScenarioAnchors& anchors, const StepNoise& noise) {
  ModelState next;
  // log<e>_t - p_t = g t - Y_t along the deterministic earnings path.
  const double bracket = -state.y + anchors.h + anchors.g_f1 * static_cast<double>(state.t);
  next.y = state.y + state.mu + state.xi;
  next.mu = params.gamma * state.mu + params.kappa * bracket + params.sigma_mu * noise.w_mu;
  next.xi = state.xi + params.kappa / (1.0 - params.gamma) * params.sigma_p * noise.w_p;
  next.log_dp =
      state.log_dp - params.theta_div * (state.log_dp - anchors.log_g) + params.sigma_d * noise.w_d;
  next.t = state.t + 1;
  return next;
}

SystemSpectrum spectrum(const ModelParams& params) {
  params.validate();
  const double gamma = params.gamma, kappa = params.kappa;
  const double disc = (1.0 - gamma) * (1.0 - gamma) - 4.0 * kappa;
  if (disc < 0.0)
    throw numeric_error("constraint violation: 4 kappa > (1-gamma)^2 gives complex eigenvalues");

  SystemSpectrum s;
  const double root = std::sqrt(disc);
  s.lambda_plus = (gamma + 1.0) / 2.0 + root / 2.0;
  s.lambda_minus = (gamma + 1.0) / 2.0 - root / 2.0;
  s.degenerate = disc == 0.0;

  s.J << 1.0, 1.0, 1.0, -kappa, gamma, 0.0, 0.0, 0.0, 1.0;
  s.Lambda = Eigen::Vector3d(1.0, s.lambda_plus, s.lambda_minus).asDiagonal();
  if (s.degenerate) return s;  // Q is singular; only the eigenvalues are usable

  const double lp = s.lambda_plus, lm = s.lambda_minus;
  s.Q << 1.0 - gamma, 1.0, 1.0, -kappa, lp - 1.0, lm - 1.0, kappa, 0.0, 0.0;
  const double det = kappa * (lm - lp);
  s.Q_inverse << 0.0, 0.0, lm - lp,
      kappa * (lm - 1.0), -kappa, (1.0 - gamma) * (1.0 - lm) - kappa,
      kappa * (1.0 - lp), kappa, kappa - (1.0 - gamma) * (1.0 - lp);
  s.Q_inverse /= det;
  return s;
}

namespace {
SystemSpectrum nondegenerate_spectrum(const ModelParams& params) {
  SystemSpectrum s = spectrum(params);
  if (s.degenerate)
    throw numeric_error(
        "degenerate spectrum (4 kappa = (1-gamma)^2); perturb kappa below the boundary");
  return s;
}
}  // namespace

double expected_y(int h, const ModelParams& params, const ScenarioAnchors& anchors, double y0,
                  double mu0) {
  if (h < 0) throw data_error("horizon must be non-negative");
  if (h == 0) return y0;
  const SystemSpectrum s = nondegenerate_spectrum(params);
  const double lp = s.lambda_plus, lm = s.lambda_minus;
  const double gf1 = anchors.g_f1, hh = anchors.h, kappa = params.kappa;
  const double lph = std::pow(lp, h), lmh = std::pow(lm, h);
  const double gap = lm - lp;

  double value = -lph / gap * ((1.0 - lm) * y0 + mu0) + lmh / gap * ((1.0 - lp) * y0 + mu0);
  value += gf1 * (h - 1.0) + hh;
  value -= (gf1 - hh) * (kappa / gap) * (lph / (1.0 - lp) - lmh / (1.0 - lm));
  value -= gf1 * (kappa / gap) *
           (lm * (1.0 - lmh) / ((1.0 - lm) * (1.0 - lm)) -
            lp * (1.0 - lph) / ((1.0 - lp) * (1.0 - lp)));
  return value;
}

double variance_y(int h, const ModelParams& params) {
  if (h < 0) throw data_error("horizon must be non-negative");
  const SystemSpectrum s = nondegenerate_spectrum(params);
  const double lp = s.lambda_plus, lm = s.lambda_minus;
  const double gap = lm - lp;
  const double gamma = params.gamma, kappa = params.kappa;
  const double cp = kappa / (1.0 - gamma) * params.sigma_p;
  const double s2mu = params.sigma_mu * params.sigma_mu;
  const double s2p = cp * cp;
  // Impulse responses of Y to the two shocks after k steps:
  //   a_k = e1' J^k e2,  b_k = e1' J^k e3.
  double total = 0.0;
  double lpk = 1.0, lmk = 1.0;
  const double cb1 = (1.0 - gamma) * gap;
  const double cb2 = (1.0 - gamma) * (1.0 - lm) - kappa;
  const double cb3 = kappa - (1.0 - gamma) * (1.0 - lp);
  for (int k = 0; k < h; ++k) {
    const double a = (lmk - lpk) / gap;
    const double b = (cb1 + lpk * cb2 + lmk * cb3) / (kappa * gap);
    total += s2mu * a * a + s2p * b * b;
    lpk *= lp;
    lmk *= lm;
  }
  return total;
}

double expected_log_dp(long t, const ModelParams& params, double log_g, double log_dp0) {
  if (!(params.theta_div > 0.0 && params.theta_div < 2.0))
    throw numeric_error("constraint violation: theta_div must lie in (0,2)");
  if (t < 0) throw data_error("time must be non-negative");
  const double decay = std::pow(1.0 - params.theta_div, static_cast<double>(t));
  return decay * log_dp0 + log_g * (1.0 - decay);
}

DividendMoments dividend_contribution_moments(int h, const ModelParams& params,
                                              const ScenarioAnchors& anchors, double log_dp0) {
  if (h < 1) throw data_error("horizon must be positive");
  if (!(params.theta_div > 0.0 && params.theta_div < 2.0))
    throw numeric_error("constraint violation: theta_div must lie in (0,2)");
  const double theta = params.theta_div;
  const double phi = 1.0 - theta;
  const double level = anchors.g_div;

  DividendMoments m;
  m.mean = level + level * (phi / theta) * (log_dp0 - anchors.log_g) *
                       (1.0 - std::pow(phi, h)) / h;
  double sum = 0.0;
  double phim = 1.0;
  for (int k = 1; k <= h; ++k) {
    phim *= phi;
    const double w = (1.0 - phim) / theta;
    sum += w * w;
  }
  m.variance = level * level * params.sigma_d * params.sigma_d * sum / (static_cast<double>(h) * h);
  return m;
}

double asymptotic_yield(const ModelParams& params, double log_ep0) {
  return params.f_linear(log_ep0) + params.g_linear(log_ep0);
}

double leading_correction(const ModelParams& params, double log_ep0, double log_dp0) {
  const SystemSpectrum s = nondegenerate_spectrum(params);
  const double lp = s.lambda_plus, lm = s.lambda_minus;
  if (lp >= 1.0 || lm >= 1.0)
    throw numeric_error("transient eigenvalue at or above one");
  const ScenarioAnchors a = resolve_anchors(params, log_ep0);
  const double shape =
      1.0 + params.kappa * (1.0 - lm * lp) / ((1.0 - lm) * (1.0 - lm) * (1.0 - lp) * (1.0 - lp));
  const double theta = params.theta_div;
  return a.h - a.g_f1 * shape + log_ep0 +
         a.g_div * ((1.0 - theta) / theta) * (log_dp0 - a.log_g);
}

double damping_scale(const ModelParams& params) {
  const SystemSpectrum s = spectrum(params);
  return -1.0 / std::log(s.lambda_plus);
}

double expected_yield(int h, const ModelParams& params, double log_ep0, double log_dp0,
                      double mu0) {
  const ScenarioAnchors a = resolve_anchors(params, log_ep0);
  const double y0 = -log_ep0;
  const double price = (expected_y(h, params, a, y0, mu0) - y0) / h;
  return price + dividend_contribution_moments(h, params, a, log_dp0).mean;
}

double yield_variance(int h, const ModelParams& params, double log_ep0, double log_dp0) {
  const ScenarioAnchors a = resolve_anchors(params, log_ep0);
  const double hv = static_cast<double>(h);
  return variance_y(h, params) / (hv * hv) +
         dividend_contribution_moments(h, params, a, log_dp0).variance;
}

}  // namespace capekit
