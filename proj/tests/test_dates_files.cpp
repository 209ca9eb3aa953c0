#include <doctest.h>

#include "csv.hpp"
#include "dates.hpp"
#include "errors.hpp"
#include "kv.hpp"

using namespace capekit;

TEST_CASE("year-month parsing accepts the common encodings") {
  CHECK(parse_year_month("1871.01") == YearMonth{1871, 1});
  CHECK(parse_year_month("1871-01") == YearMonth{1871, 1});
  CHECK(parse_year_month("1871/12") == YearMonth{1871, 12});
  // Spreadsheet convention: year + month/100 drops the trailing zero of
  // October, so ".1" is month 10 while ".01" is January.
  CHECK(parse_year_month("1871.1") == YearMonth{1871, 10});
  CHECK(parse_year_month("1871.10") == YearMonth{1871, 10});
  CHECK(parse_year_month(" 2012.06 ") == YearMonth{2012, 6});
  CHECK_THROWS_AS(parse_year_month("1871.13"), Error);
  CHECK_THROWS_AS(parse_year_month("1871"), Error);
  CHECK_THROWS_AS(parse_year_month("abcd.ef"), Error);
}

TEST_CASE("year-month arithmetic") {
  YearMonth ym{1999, 11};
  CHECK(ym.plus_months(1) == YearMonth{1999, 12});
  CHECK(ym.plus_months(2) == YearMonth{2000, 1});
  CHECK(ym.plus_months(-11) == YearMonth{1998, 12});
  CHECK(ym.plus_months(26).months_since(ym) == 26);
  CHECK(ym.str() == "1999.11");
}

TEST_CASE("key-value files parse, override and round trip") {
  KeyValueFile kv = KeyValueFile::parse_text("a = 1\n# comment\nb = text value\na = 2\n");
  CHECK(kv.get_double("a") == 2.0);
  CHECK(kv.get("b") == "text value");
  CHECK(kv.get_or("missing", "x") == "x");
  CHECK_THROWS_AS(kv.get("missing"), Error);
  CHECK_THROWS_AS(kv.get_double("b"), Error);
  kv.set_double("c", 0.25);
  KeyValueFile again = KeyValueFile::parse_text(kv.to_text());
  CHECK(again.get_double("c") == 0.25);
  CHECK_THROWS_AS(KeyValueFile::parse_text("no separator line"), Error);
}

TEST_CASE("csv parsing keeps cells and reports bad content with position") {
  CsvTable t = parse_csv_text("a,b,c\n1,2,3\n4,,6\n");
  CHECK(t.header.size() == 3);
  CHECK(t.rows.size() == 2);
  CHECK(t.column("b") == 1);
  CHECK(t.column("zz") == -1);
  CHECK(parse_cell(t.rows[1][1], 1, "b") != parse_cell(t.rows[1][1], 1, "b"));  // NaN
  CHECK(parse_cell("3.5", 0, "a") == 3.5);
  try {
    parse_cell("oops", 7, "price");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 8") != std::string::npos);
    CHECK(std::string(e.what()).find("price") != std::string::npos);
  }
}
