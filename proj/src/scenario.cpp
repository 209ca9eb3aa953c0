#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "csv.hpp"
#include "errors.hpp"

namespace capekit {

std::vector<InitialCondition> initial_conditions_from_series(const MarketSeries& series) {
  std::vector<InitialCondition> out;
  for (size_t t = 1; t < series.size(); ++t) {
    if (!std::isfinite(series.log_ep[t]) || !std::isfinite(series.log_dp[t])) continue;
    InitialCondition ic;
    ic.log_ep0 = series.log_ep[t];
    ic.log_dp0 = series.log_dp[t];
    ic.mu0 = series.log_price[t] - series.log_price[t - 1];
    out.push_back(ic);
  }
  if (out.empty()) throw data_error("no admissible initial conditions in the series");
  return out;
}

ScenarioSet simulate(const ModelParams& params, const std::vector<InitialCondition>& initial,
                     const std::vector<int>& horizons, long n_paths, uint64_t master_seed,
                     int threads) {
  params.validate();
  if (horizons.empty()) throw config_error("simulate: empty horizon grid");
  if (n_paths < 1) throw config_error("simulate: need at least one path");
  if (initial.empty()) throw config_error("simulate: no initial conditions");
  for (int h : horizons)
    if (h < 1) throw config_error("simulate: horizons must be positive");

  std::vector<int> sorted_h = horizons;
  std::sort(sorted_h.begin(), sorted_h.end());
  const int h_max = sorted_h.back();

  ScenarioSet set;
  set.horizons = horizons;
  set.master_seed = master_seed;
  set.params = params;
  set.initial_conditions.resize(n_paths);
  set.yields.assign(static_cast<size_t>(n_paths) * horizons.size(), 0.0);

  auto run_path = [&](long path) {
    const InitialCondition& ic = initial[path % initial.size()];
    set.initial_conditions[path] = ic;
    const ScenarioAnchors anchors = resolve_anchors(params, ic.log_ep0);
    Rng rng = Rng::stream(master_seed, static_cast<uint64_t>(path));

    ModelState state;
    state.y = -ic.log_ep0;
    state.mu = ic.mu0;
    state.xi = 0.0;
    state.log_dp = ic.log_dp0;
    state.t = 0;

    const double y0 = state.y;
    double dividend_acc = 0.0;
    size_t next_h = 0;
    std::vector<double> row(horizons.size(), 0.0);
    for (int t = 1; t <= h_max; ++t) {
      StepNoise noise{rng.normal(), rng.normal(), rng.normal()};
      state = step(state, params, anchors, noise);
      // After the step, state.log_dp = d_{t-1} - p_t: the accrual of month t-1.
      dividend_acc += std::log1p(std::exp(state.log_dp));
      while (next_h < sorted_h.size() && sorted_h[next_h] == t) {
        const double yield = (state.y - y0) / t + dividend_acc / t;
        // Map back to the caller's horizon order.
        for (size_t j = 0; j < horizons.size(); ++j)
          if (horizons[j] == t) row[j] = yield;
        ++next_h;
      }
    }
    for (size_t j = 0; j < horizons.size(); ++j)
      set.yields[static_cast<size_t>(path) * horizons.size() + j] = row[j];
  };

  int t_count = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (t_count < 1) t_count = 1;
  if (n_paths < 64) t_count = 1;
  if (t_count <= 1) {
    for (long i = 0; i < n_paths; ++i) run_path(i);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (n_paths + t_count - 1) / t_count;
    for (int w = 0; w < t_count; ++w) {
      const long lo = w * chunk, hi = std::min<long>(n_paths, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (long i = lo; i < hi; ++i) run_path(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (double v : set.yields)
    if (!std::isfinite(v)) throw numeric_error("simulate: non-finite yield produced");
  return set;
}

ConfidenceBand band(const ModelParams& params, const std::vector<int>& horizons, double log_ep0,
                    double log_dp0, double z, bool center_finite_h, double mu0) {
  params.validate();
  if (z < 0.0) throw config_error("band: z must be non-negative");
  ConfidenceBand out;
  out.z = z;
  out.horizons = horizons;
  const double asym = asymptotic_yield(params, log_ep0);
  for (int h : horizons) {
    if (h < 1) throw config_error("band: horizons must be positive");
    const double center =
        center_finite_h ? expected_yield(h, params, log_ep0, log_dp0, mu0) : asym;
    const double var = yield_variance(h, params, log_ep0, log_dp0);
    out.center.push_back(center);
    out.half_width.push_back(z * std::sqrt(var));
  }
  return out;
}

CoverageReport compare_to_history(const MarketSeries& series, const ModelParams& params,
                                  const std::vector<int>& horizons, double z) {
  CoverageReport report;
  const int n = static_cast<int>(series.size());
  long inside_total = 0;
  for (int h : horizons) {
    CoverageRow row;
    row.horizon = h;
    long inside = 0;
    double residual_acc = 0.0;
    for (int t = 1; t + h < n; ++t) {
      if (!std::isfinite(series.log_ep[t]) || !std::isfinite(series.log_dp[t])) continue;
      bool ok = true;
      for (int i = 0; i < h; ++i)
        if (!std::isfinite(series.log_gross_return[t + i])) {
          ok = false;
          break;
        }
      if (!ok) continue;
      const double y = series.gross_yield(t, h);
      const double mu0 = series.log_price[t] - series.log_price[t - 1];
      const double center = expected_yield(h, params, series.log_ep[t], series.log_dp[t], mu0);
      const double width =
          z * std::sqrt(yield_variance(h, params, series.log_ep[t], series.log_dp[t]));
      ++row.points;
      residual_acc += y - center;
      if (std::abs(y - center) <= width) ++inside;
    }
    if (row.points == 0) {
      report.dropped_horizons.push_back(h);
      continue;
    }
    row.fraction_inside = static_cast<double>(inside) / row.points;
    row.mean_residual = residual_acc / row.points;
    inside_total += inside;
    report.total_points += row.points;
    report.rows.push_back(row);
  }
  report.overall_fraction =
      report.total_points > 0 ? static_cast<double>(inside_total) / report.total_points : 0.0;
  return report;
}

void write_scenarios_csv(const ScenarioSet& set, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(set.paths() * set.horizons.size());
  for (size_t p = 0; p < set.paths(); ++p) {
    for (size_t j = 0; j < set.horizons.size(); ++j) {
      rows.push_back({std::to_string(p), std::to_string(set.horizons[j]),
                      format_double(set.initial_conditions[p].log_ep0),
                      format_double(set.yield_at(p, j))});
    }
  }
  write_csv(path, {"path", "horizon", "logEP0", "yield"}, rows);
}

void write_band_csv(const ConfidenceBand& band, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < band.horizons.size(); ++i) {
    rows.push_back({std::to_string(band.horizons[i]), format_double(band.center[i]),
                    format_double(band.center[i] - band.half_width[i]),
                    format_double(band.center[i] + band.half_width[i])});
  }
  write_csv(path, {"horizon", "center", "low", "high"}, rows);
}

void write_plot_script(const std::string& scenarios_csv, const std::string& band_csv,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write plot script '" + path + "'");
  out << "set datafile separator ','\n"
      << "set xlabel 'horizon (months)'\n"
      << "set ylabel 'gross yield (monthly)'\n"
      << "set key off\n"
      << "plot '" << scenarios_csv << "' every ::1 using 2:4 with points pt 7 ps 0.3 lc rgb '#4060c0', \\\n"
      << "     '" << band_csv << "' every ::1 using 1:2 with lines lw 2 lc rgb 'black', \\\n"
      << "     '" << band_csv << "' every ::1 using 1:3 with lines dt 2 lc rgb 'black', \\\n"
      << "     '" << band_csv << "' every ::1 using 1:4 with lines dt 2 lc rgb 'black'\n";
}

std::vector<int> parse_horizon_spec(const std::string& spec) {
  std::vector<int> out;
  int start = 0, stop = 0, step = 1;
  const size_t c1 = spec.find(':');
  try {
    if (c1 == std::string::npos) {
      start = stop = std::stoi(spec);
    } else {
      start = std::stoi(spec.substr(0, c1));
      const size_t c2 = spec.find(':', c1 + 1);
      if (c2 == std::string::npos) {
        stop = std::stoi(spec.substr(c1 + 1));
      } else {
        stop = std::stoi(spec.substr(c1 + 1, c2 - c1 - 1));
        step = std::stoi(spec.substr(c2 + 1));
      }
    }
  } catch (const std::exception&) {
    throw config_error("bad horizon spec '" + spec + "' (expected start:stop:step)");
  }
  if (start < 1 || stop < start || step < 1)
    throw config_error("bad horizon spec '" + spec + "'");
  for (int h = start; h <= stop; h += step) out.push_back(h);
  return out;
}

}  // namespace capekit
