#include "dates.hpp"

#include <cctype>
#include <cstdio>

#include "errors.hpp"

namespace capekit {

YearMonth YearMonth::plus_months(int n) const {
  int linear = year * 12 + (month - 1) + n;
  int y = linear / 12;
  int m = linear % 12;
  if (m < 0) {
    m += 12;
    y -= 1;
  }
  return YearMonth{y, m + 1};
}

int YearMonth::months_since(const YearMonth& other) const {
  return (year - other.year) * 12 + (month - other.month);
}

std::string YearMonth::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d.%02d", year, month);
  return buf;
}

YearMonth parse_year_month(const std::string& token) {
  std::string s;
  for (char c : token)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw data_error("empty date token");

  size_t sep = s.find_first_of(".-/");
  if (sep == std::string::npos || sep == 0 || sep + 1 >= s.size())
    throw data_error("unrecognized date token '" + token + "'");

  const std::string ypart = s.substr(0, sep);
  const std::string mpart = s.substr(sep + 1);
  for (char c : ypart + mpart)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw data_error("unrecognized date token '" + token + "'");

  int year = std::stoi(ypart);
  int month;
  if (mpart.size() == 1) {
    // Spreadsheet year+month/100 notation drops the trailing zero of ".10".
    month = (s[sep] == '.') ? (mpart == "1" ? 10 : std::stoi(mpart)) : std::stoi(mpart);
  } else if (mpart.size() == 2) {
    month = std::stoi(mpart);
  } else {
    throw data_error("unrecognized date token '" + token + "'");
  }
  if (month < 1 || month > 12)
    throw data_error("month out of range in date token '" + token + "'");
  return YearMonth{year, month};
}

}  // namespace capekit
