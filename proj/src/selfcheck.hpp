#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace capekit {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Consistency battery: closed forms against brute-force recursions,
/// constraint properties over parameter grids, identity checks on synthetic
/// data, determinism of the seeded engines. quick mode keeps the Monte Carlo
/// sizes small enough for interactive use.
std::vector<CheckResult> run_selfchecks(bool quick, uint64_t seed);

}  // namespace capekit
