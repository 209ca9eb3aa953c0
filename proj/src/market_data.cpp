#include "market_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csv.hpp"
#include "errors.hpp"

namespace capekit {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}
}  // namespace

int MarketSeries::index_of(const YearMonth& ym) const {
  if (dates.empty()) return -1;
  int idx = ym.months_since(dates.front());
  if (idx < 0 || idx >= static_cast<int>(dates.size())) return -1;
  return idx;
}

int MarketSeries::first_log_ep_index() const {
  for (size_t t = 0; t < log_ep.size(); ++t)
    if (std::isfinite(log_ep[t])) return static_cast<int>(t);
  return -1;
}

double MarketSeries::gross_yield(int t, int h) const {
  if (h < 1) throw data_error("yield horizon must be positive");
  if (t < 0 || t + h >= static_cast<int>(size()))
    throw data_error("yield window [" + std::to_string(t) + ", " + std::to_string(t + h) +
                     "] outside the sample");
  double acc = 0.0;
  for (int i = 0; i < h; ++i) acc += log_gross_return[t + i];
  return acc / h;
}

void MarketSeries::yield_decomposition(int t, int h, double& price_part,
                                       double& dividend_part) const {
  if (h < 1) throw data_error("yield horizon must be positive");
  if (t < 0 || t + h >= static_cast<int>(size()))
    throw data_error("yield window [" + std::to_string(t) + ", " + std::to_string(t + h) +
                     "] outside the sample");
  price_part = (log_price[t + h] - log_price[t]) / h;
  double acc = 0.0;
  for (int i = 0; i < h; ++i)
    acc += std::log1p(real_dividend[t + i] / real_price[t + i + 1]);
  dividend_part = acc / h;
}

ColumnMap ColumnMap::from_kv(const KeyValueFile& kv) {
  ColumnMap map;
  map.date = kv.get_or("date", map.date);
  map.price = kv.get_or("price", map.price);
  map.dividend = kv.get_or("dividend", map.dividend);
  map.earnings = kv.get_or("earnings", map.earnings);
  map.cpi = kv.get_or("cpi", map.cpi);
  map.ep = kv.get_or("ep", "");
  return map;
}

ColumnMap autodetect_columns(const std::string& path) {
  CsvTable table = read_csv(path);
  auto find = [&](std::initializer_list<const char*> names) -> std::string {
    for (const char* n : names)
      for (const auto& h : table.header)
        if (lower(h) == lower(n)) return h;
    return "";
  };
  ColumnMap map;
  map.date = find({"date"});
  map.price = find({"price", "p"});
  map.dividend = find({"dividend", "d"});
  map.earnings = find({"earnings", "e"});
  map.cpi = find({"cpi"});
  map.ep = find({"ep", "e/p", "e10/p"});
  if (map.date.empty() || map.price.empty() || map.dividend.empty() ||
      map.earnings.empty() || map.cpi.empty())
    throw config_error("cannot auto-detect columns in '" + path +
                       "'; provide a column map file");
  return map;
}

std::vector<RawMonthlyRecord> parse_market_csv(const std::string& path,
                                               const ColumnMap& columns) {
  CsvTable table = read_csv(path);

  auto need = [&](const std::string& name, const char* role) -> int {
    int c = table.column(name);
    if (c < 0)
      throw config_error("schema error: " + std::string(role) + " column '" + name +
                         "' not found in '" + path + "'");
    return c;
  };
  const int c_date = need(columns.date, "date");
  const int c_price = need(columns.price, "price");
  const int c_div = need(columns.dividend, "dividend");
  const int c_earn = need(columns.earnings, "earnings");
  const int c_cpi = need(columns.cpi, "cpi");
  const int c_ep = columns.ep.empty() ? -1 : need(columns.ep, "ep");

  std::vector<RawMonthlyRecord> records;
  records.reserve(table.rows.size());
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[c_date].empty()) continue;  // trailing footnote rows in public files
    RawMonthlyRecord rec;
    rec.date = parse_year_month(row[c_date]);
    rec.nominal_price = parse_cell(row[c_price], r, columns.price);
    rec.nominal_dividend = parse_cell(row[c_div], r, columns.dividend);
    rec.nominal_earnings = parse_cell(row[c_earn], r, columns.earnings);
    rec.cpi = parse_cell(row[c_cpi], r, columns.cpi);
    rec.secondary_ep = c_ep >= 0 ? parse_cell(row[c_ep], r, columns.ep) : kNaN;
    if (!(rec.nominal_price > 0.0))
      throw data_error("non-positive or missing price at " + rec.date.str());
    if (!(rec.cpi > 0.0))
      throw data_error("non-positive or missing CPI at " + rec.date.str());
    records.push_back(rec);
  }
  if (records.empty()) throw data_error("no data rows in '" + path + "'");

  std::sort(records.begin(), records.end(),
            [](const RawMonthlyRecord& a, const RawMonthlyRecord& b) { return a.date < b.date; });
  for (size_t i = 1; i < records.size(); ++i) {
    int gap = records[i].date.months_since(records[i - 1].date);
    if (gap == 0)
      throw data_error("duplicate month " + records[i].date.str());
    if (gap != 1)
      throw data_error("month continuity error: missing " +
                       records[i - 1].date.plus_months(1).str());
  }
  return records;
}

std::vector<double> compute_cape(const std::vector<double>& earnings, int window) {
  if (window < 1) throw config_error("cape window must be positive");
  const size_t n = earnings.size();
  std::vector<double> out(n, kNaN);
  for (size_t t = window - 1; t < n; ++t) {
    double acc = 0.0;
    bool ok = true;
    for (int i = 0; i < window; ++i) {
      double e = earnings[t - i];
      if (!std::isfinite(e)) {
        ok = false;
        break;
      }
      acc += e;
    }
    if (ok) out[t] = acc / window;
  }
  return out;
}

MarketSeries deflate(const std::vector<RawMonthlyRecord>& raw, const YearMonth& base_month,
                     int cape_window) {
  if (raw.empty()) throw data_error("empty record set");
  int base_idx = base_month.months_since(raw.front().date);
  if (base_idx < 0 || base_idx >= static_cast<int>(raw.size()))
    throw data_error("base month " + base_month.str() + " outside the sample");
  const double cpi_base = raw[base_idx].cpi;

  MarketSeries s;
  const size_t n = raw.size();
  s.base_month = base_month;
  s.cape_window = cape_window;
  s.dates.reserve(n);
  s.real_price.resize(n);
  s.real_dividend.resize(n);
  s.real_earnings.resize(n);
  s.log_price.resize(n);
  for (size_t t = 0; t < n; ++t) {
    const auto& r = raw[t];
    const double deflator = cpi_base / r.cpi;
    s.dates.push_back(r.date);
    s.real_price[t] = r.nominal_price * deflator;
    s.real_dividend[t] = std::isfinite(r.nominal_dividend)
                             ? r.nominal_dividend * deflator / 12.0
                             : kNaN;
    s.real_earnings[t] = std::isfinite(r.nominal_earnings) ? r.nominal_earnings * deflator : kNaN;
    s.log_price[t] = std::log(s.real_price[t]);
  }

  s.cape = compute_cape(s.real_earnings, cape_window);
  // Splice the secondary smoothed EP source where earnings are unavailable.
  for (size_t t = 0; t < n; ++t) {
    if (!std::isfinite(s.cape[t]) && std::isfinite(raw[t].secondary_ep))
      s.cape[t] = raw[t].secondary_ep * s.real_price[t];
  }

  s.log_ep.assign(n, kNaN);
  for (size_t t = 0; t < n; ++t)
    if (std::isfinite(s.cape[t]) && s.cape[t] > 0.0)
      s.log_ep[t] = std::log(s.cape[t]) - s.log_price[t];

  s.log_dp.assign(n, kNaN);
  for (size_t t = 1; t < n; ++t)
    if (std::isfinite(s.real_dividend[t - 1]) && s.real_dividend[t - 1] > 0.0)
      s.log_dp[t] = std::log(s.real_dividend[t - 1]) - s.log_price[t];

  s.log_gross_return.assign(n, kNaN);
  for (size_t t = 0; t + 1 < n; ++t) {
    if (!std::isfinite(s.real_dividend[t])) continue;
    const double total = s.real_price[t + 1] + s.real_dividend[t];
    if (total > 0.0) s.log_gross_return[t] = std::log(total) - s.log_price[t];
  }
  return s;
}

void write_derived_csv(const MarketSeries& series, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(series.size());
  for (size_t t = 0; t < series.size(); ++t) {
    rows.push_back({series.dates[t].str(), format_double(series.real_price[t]),
                    format_double(series.real_dividend[t]),
                    format_double(series.real_earnings[t]), format_double(series.cape[t]),
                    format_double(series.log_ep[t]), format_double(series.log_dp[t]),
                    format_double(series.log_gross_return[t])});
  }
  write_csv(path, {"date", "P", "D", "E", "CAPE", "logEP", "logDP", "H"}, rows);
}

}  // namespace capekit
