#include <doctest.h>

#include <cmath>

#include "elspot/errors.hpp"
#include "elspot/rng.hpp"
#include "elspot/stats.hpp"
#include "elspot/timeutil.hpp"
#include "elspot/toml.hpp"

using namespace elspot;

TEST_SUITE_BEGIN("util");

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-6}) {
    const double x = normal_quantile(p);
    CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("rng uniform stays inside the open interval and is reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
  }
}

TEST_CASE("truncated normal respects bounds including far tails") {
  Rng rng(7);
  for (double a : {-1.0, 0.5, 8.0, 40.0}) {
    const double b = a + 0.7;
    for (int i = 0; i < 200; ++i) {
      const double x = rng.truncated_standard_normal(a, b);
      CHECK(x >= a);
      CHECK(x <= b);
    }
  }
}

TEST_CASE("dirichlet moments match") {
  Rng rng(11);
  const std::array<double, 3> alpha = {3.0, 1.0, 2.0};
  double m0 = 0.0;
  const int N = 20000;
  for (int i = 0; i < N; ++i) m0 += rng.dirichlet(alpha)[0];
  m0 /= N;
  CHECK(m0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("ks statistic on a uniform grid is tiny") {
  std::vector<double> u;
  for (int i = 1; i <= 1000; ++i) u.push_back(i / 1001.0);
  CHECK(ks_statistic_uniform(u) < 0.01);
}

TEST_CASE("timestamps round trip") {
  const std::string s = "2010-02-07T13:30:00";
  CHECK(format_timestamp(parse_timestamp(s)) == s);
  CHECK(parse_timestamp("2010-02-07 13:30:00") == parse_timestamp(s));
  CHECK(minutes_of_day(parse_timestamp(s)) == 13 * 60 + 30);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), ValidationError);
}

TEST_CASE("toml subset parses tables and arrays") {
  const std::string text = R"(
seed = 42            # comment
name = "run one"
flag = true
xs = [1.0, 2.5, 3]
[fit]
sweeps = 100
[[arc]]
id = "v1"
[[arc]]
id = "v2"
)";
  const auto t = toml::parse(text);
  CHECK(t.get_number("seed") == 42.0);
  CHECK(t.get_string("name") == "run one");
  CHECK(t.get_bool("flag", false));
  CHECK(t.get_number_array("xs") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(t.tables.at("fit").get_number("sweeps") == 100.0);
  REQUIRE(t.table_arrays.at("arc").size() == 2);
  CHECK(t.table_arrays.at("arc")[1].get_string("id") == "v2");
}

TEST_CASE("toml errors carry the line number") {
  try {
    toml::parse("a = 1\nbad line here\n");
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_SUITE_END();
