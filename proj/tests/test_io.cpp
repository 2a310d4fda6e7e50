#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "altbm/errors.hpp"
#include "altbm/io.hpp"

using namespace altbm;

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("csv quoting and header") {
  CsvTable t({"a", "b,c", "d"});
  t.add_row({1.5, 2LL, std::string("x\"y")});
  CHECK(t.str() == "a,\"b,c\",d\n1.5,2,\"x\"\"y\"\n");
  CHECK(t.size() == 1);
}

TEST_CASE("csv rejects non-finite numbers and ragged rows") {
  CsvTable t({"a"});
  CHECK_THROWS_AS(t.add_row({std::numeric_limits<double>::quiet_NaN()}), RangeViolation);
  CHECK_THROWS_AS(t.add_row({std::numeric_limits<double>::infinity()}), RangeViolation);
  CHECK_THROWS_AS(t.add_row({1.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(CsvTable({}), InvalidArgument);
}

TEST_CASE("svg chart drops nonpositive points on log axes") {
  Series s{"s<1>", {0.0, 1.0, 10.0}, {1.0, 2.0, 3.0}};
  const auto svg = svg_line_chart({"t", "x", "y", true, false}, {s});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("s&lt;1&gt;") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
}
