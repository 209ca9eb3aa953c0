#pragma once

#include <string>

namespace capekit {

/// Calendar month. Day-level resolution is deliberately absent.
struct YearMonth {
  int year = 0;
  int month = 1;  // 1..12

  bool operator==(const YearMonth&) const = default;
  bool operator<(const YearMonth& o) const {
    return year != o.year ? year < o.year : month < o.month;
  }
  bool operator<=(const YearMonth& o) const { return *this == o || *this < o; }

  YearMonth plus_months(int n) const;
  /// Signed month distance: (*this) - other.
  int months_since(const YearMonth& other) const;

  std::string str() const;  // "1871.01"
};

/// Accepts "1871.01", "1871-01", "1871/01" and the spreadsheet convention
/// where a single trailing digit "1871.1" means October (month/100 with the
/// trailing zero dropped).
YearMonth parse_year_month(const std::string& token);

}  // namespace capekit
