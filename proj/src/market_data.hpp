#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dates.hpp"
#include "kv.hpp"

namespace capekit {

/// One month of raw input as it appears in the source file. Dividend and
/// earnings are annualized rates, prices and CPI are index levels.
struct RawMonthlyRecord {
  YearMonth date;
  double nominal_price = 0.0;
  double nominal_dividend = 0.0;   // NaN = missing
  double nominal_earnings = 0.0;   // NaN = missing
  double cpi = 0.0;
  double secondary_ep = 0.0;       // optional smoothed earnings/price splice, NaN = absent
};

/// Monthly real-valued series with every derived ratio. Immutable after
/// construction; NaN marks months where a series is undefined.
struct MarketSeries {
  std::vector<YearMonth> dates;
  std::vector<double> real_price;        // P_t
  std::vector<double> real_dividend;     // D_t, monthly flow paid between t and t+1
  std::vector<double> real_earnings;     // annualized real earnings rate
  std::vector<double> cape;              // trailing arithmetic mean of real_earnings
  std::vector<double> log_price;         // p_t
  std::vector<double> log_ep;            // x_t = log(cape_t) - p_t
  std::vector<double> log_dp;            // d_{t-1} - p_t
  std::vector<double> log_gross_return;  // H_t = log(P_{t+1}+D_t) - p_t
  YearMonth base_month;                  // CPI normalization anchor
  int cape_window = 120;

  size_t size() const { return dates.size(); }
  int index_of(const YearMonth& ym) const;  // -1 when outside the sample

  /// First index with a defined log EP value, -1 when none exists.
  int first_log_ep_index() const;

  /// y_{t,h}: average monthly log gross return over [t, t+h).
  double gross_yield(int t, int h) const;
  /// Same split into (p_{t+h}-p_t)/h and the dividend accrual average.
  void yield_decomposition(int t, int h, double& price_part, double& dividend_part) const;
};

/// Resolves source column names. Recognized keys: date, price, dividend,
/// earnings, cpi, and the optional ep splice column. Values name CSV headers.
struct ColumnMap {
  std::string date = "date";
  std::string price = "price";
  std::string dividend = "dividend";
  std::string earnings = "earnings";
  std::string cpi = "cpi";
  std::string ep;  // empty = no secondary source

  static ColumnMap from_kv(const KeyValueFile& kv);
};

/// Parses and validates the raw monthly file: mandatory columns present,
/// dates strictly increasing with no month gaps, prices and CPI positive.
std::vector<RawMonthlyRecord> parse_market_csv(const std::string& path, const ColumnMap& columns);

/// Same, with the header resolved case-insensitively against common aliases
/// (Date/P/D/E/CPI) when no explicit map is given.
ColumnMap autodetect_columns(const std::string& path);

/// CPI deflation to base_month units. Dividends are converted from the
/// annualized rate to the monthly flow; earnings stay annualized so the
/// smoothed earnings yield keeps its conventional scale.
MarketSeries deflate(const std::vector<RawMonthlyRecord>& raw, const YearMonth& base_month,
                     int cape_window = 120);

/// Trailing arithmetic mean over `window` months ending at t (inclusive).
/// NaN before the window fills up; non-positive averages are legal values
/// and simply leave log EP undefined at those months.
std::vector<double> compute_cape(const std::vector<double>& earnings, int window);

void write_derived_csv(const MarketSeries& series, const std::string& path);

}  // namespace capekit
