#include "bootstrap.hpp"

#include <cmath>
#include <thread>

#include "errors.hpp"
#include "persistent.hpp"
#include "rng.hpp"

namespace capekit {

namespace {

int pick_threads(int requested, long work_items) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  int t = hw == 0 ? 1 : static_cast<int>(hw);
  if (work_items < 256) t = 1;
  return t;
}

}  // namespace

BootstrapResult run_bootstrap(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                              const BootstrapConfig& config) {
  if (config.replications < 1) throw config_error("bootstrap: replications must be >= 1");
  if (y.size() != x.size() - 1)
    throw data_error("bootstrap: expected len(y) = len(x) - 1");
  const int m = static_cast<int>(y.size());       // residual rows
  const int n_obs = static_cast<int>(x.size());   // predictor observations
  if (!y.allFinite() || !x.allFinite()) throw data_error("bootstrap: non-finite input values");
  const double index_space = static_cast<double>(config.replications) * m;
  if (index_space > 9e15) throw config_error("bootstrap: replications x n exceeds index space");

  // Observed statistic.
  AugmentedFit observed = augmented_regression(y, x);

  // Null fits: returns collapse to their mean, the predictor keeps its OLS
  // autoregression. Residual rows are stored paired.
  const double alpha0 = y.mean();
  Eigen::VectorXd u = y.array() - alpha0;
  AR1Fit ar1 = fit_ar1(x);
  const Eigen::VectorXd& v = ar1.residuals;
  if (!u.allFinite() || !v.allFinite()) throw data_error("bootstrap: non-finite residuals");

  BootstrapResult result;
  result.observed_beta_c = observed.beta_c;
  result.null_fit.alpha = alpha0;
  result.null_fit.theta = ar1.theta_ar;
  result.null_fit.rho = ar1.rho;
  result.mirrored = observed.beta_c <= 0.0;
  result.degenerate = u.squaredNorm() <= 1e-24 * std::max(1.0, y.squaredNorm());
  result.beta_c_samples.assign(config.replications, 0.0);
  if (config.keep_index_log)
    result.index_log.assign(static_cast<size_t>(config.replications) * m, 0);

  const long B = config.replications;
  const int threads = pick_threads(config.threads, B);

  auto worker = [&](long b_begin, long b_end) {
    Eigen::VectorXd yb(m), xb(n_obs);
    std::vector<uint32_t> idx(m);
    for (long b = b_begin; b < b_end; ++b) {
      Rng rng = Rng::stream(config.master_seed, static_cast<uint64_t>(b));
      for (int i = 0; i < m; ++i) idx[i] = static_cast<uint32_t>(rng.uniform_index(m));
      // Rebuild under the null, pairing preserved through the shared index.
      xb(0) = x(static_cast<int>(rng.uniform_index(n_obs)));
      for (int i = 0; i < m; ++i) {
        yb(i) = alpha0 + u(idx[i]);
        xb(i + 1) = ar1.theta_ar + ar1.rho * xb(i) + v(idx[i]);
      }
      double beta_b;
      try {
        beta_b = augmented_regression(yb, xb).beta_c;
      } catch (const Error&) {
        // Degenerate replica (constant rebuilt predictor); no predictability.
        beta_b = 0.0;
      }
      result.beta_c_samples[static_cast<size_t>(b)] = beta_b;
      if (config.keep_index_log)
        for (int i = 0; i < m; ++i)
          result.index_log[static_cast<size_t>(b) * m + i] = idx[i];
    }
  };

  if (threads <= 1) {
    worker(0, B);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (B + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const long lo = t * chunk;
      const long hi = std::min(B, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  if (result.degenerate) {
    // No return variation: every replica reproduces the observed slope.
    result.p_value = 1.0;
    return result;
  }
  long count = 0;
  if (result.mirrored) {
    for (double b : result.beta_c_samples)
      if (b <= result.observed_beta_c) ++count;
  } else {
    for (double b : result.beta_c_samples)
      if (b >= result.observed_beta_c) ++count;
  }
  result.p_value = static_cast<double>(count) / static_cast<double>(B);
  return result;
}

}  // namespace capekit
