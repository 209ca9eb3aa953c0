#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace capekit {

struct BootstrapConfig {
  long replications = 10000;
  uint64_t master_seed = 0;
  bool keep_index_log = false;  // audit trail of resampled row indices
  int threads = 0;              // 0 = hardware default
};

struct BootstrapResult {
  std::vector<double> beta_c_samples;  // one bias-corrected slope per replication
  double observed_beta_c = 0.0;
  double p_value = 1.0;  // one sided: fraction of replicated slopes at or above the observed
  struct {
    double alpha = 0.0;
    double theta = 0.0;
    double rho = 0.0;
  } null_fit;
  bool degenerate = false;  // return residuals carry no variance
  bool mirrored = false;    // observed slope was non-positive; tail flipped
  std::vector<uint32_t> index_log;  // replications x n rows, flattened (optional)
};

/// Residual resampling test of "no predictability". The series follow the
/// augmented-regression alignment: len(y) = len(x) - 1. Residual rows
/// (u_t, v_t) from the null fits are resampled jointly so their
/// cross-correlation survives, the predictor is rebuilt recursively from a
/// uniformly drawn starting value, and the bias-corrected slope is
/// re-estimated on every replica. Identical seeds give identical samples
/// regardless of thread count.
BootstrapResult run_bootstrap(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                              const BootstrapConfig& config);

}  // namespace capekit
