#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "fluidps/common.hpp"

using namespace fluidps;

TEST_CASE("grid snaps extent to whole cells") {
  Grid g(0.01, 1.0);
  CHECK(g.n == 100);
  CHECK(g.x_max() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(Grid(0.1, 0.95), Error);  // not a whole number of cells
  CHECK_THROWS_AS(Grid(0.0, 1.0), Error);
  CHECK_THROWS_AS(Grid(-0.1, 1.0), Error);
  CHECK_THROWS_AS(Grid(0.1, 0.0), Error);
}

TEST_CASE("trapz and cumtrapz agree on linear data exactly") {
  std::vector<double> y;
  for (int k = 0; k <= 10; ++k) y.push_back(2.0 * k * 0.5);
  // integral of 2x over [0,5] = 25, trapezoid exact for linear integrands
  CHECK(trapz(y, 0.5) == doctest::Approx(25.0).epsilon(1e-15));
  const auto c = cumtrapz(y, 0.5);
  CHECK(c.front() == 0.0);
  CHECK(c.back() == doctest::Approx(25.0).epsilon(1e-15));
  CHECK(c.size() == y.size());
}

TEST_CASE("pl_value interpolates and guards range") {
  std::vector<double> y = {0.0, 1.0, 4.0};
  CHECK(pl_value(y, 1.0, 0.5) == doctest::Approx(0.5));
  CHECK(pl_value(y, 1.0, 1.5) == doctest::Approx(2.5));
  CHECK(pl_value(y, 1.0, 2.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(pl_value(y, 1.0, 2.1), Error);
  CHECK_THROWS_AS(pl_value(y, 1.0, -0.1), Error);
}

TEST_CASE("integrate handles kinks via breakpoints") {
  // |x - 1| over [0,2] = 1
  const double v = integrate([](double x) { return std::fabs(x - 1.0); }, 0.0,
                             2.0, 1e-12, {1.0});
  CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  const double s = integrate([](double x) { return std::sin(x); }, 0.0, 3.0,
                             1e-12);
  CHECK(s == doctest::Approx(1.0 - std::cos(3.0)).epsilon(1e-10));
}

TEST_CASE("parse_number is strict") {
  CHECK(parse_number("2.5e-3") == doctest::Approx(0.0025));
  CHECK_THROWS_AS(parse_number("1.2x"), Error);
  CHECK_THROWS_AS(parse_number(""), Error);
  CHECK_THROWS_AS(parse_number("nan(box)junk"), Error);
}

TEST_CASE("split keeps empty fields") {
  const auto parts = split("a,,b", ',');
  REQUIRE(parts.size() == 3);
  CHECK(parts[1].empty());
}

TEST_CASE("fmt12 is stable and locale-free") {
  CHECK(fmt12(1.0) == "1");
  CHECK(fmt12(0.1) == "0.1");
  CHECK(fmt12(1.0 / 3.0) == fmt12(1.0 / 3.0));
  CHECK(fmt12(ExtReal::infinite()) == "inf");
}

TEST_CASE("derive_seed separates replicas and purposes") {
  const auto a = derive_seed(7, 0, 0);
  CHECK(a == derive_seed(7, 0, 0));
  CHECK(a != derive_seed(7, 0, 1));
  CHECK(a != derive_seed(7, 1, 0));
  CHECK(a != derive_seed(8, 0, 0));
}

TEST_CASE("splitmix64 sequence is reproducible") {
  std::uint64_t s1 = 42, s2 = 42;
  for (int i = 0; i < 100; ++i) CHECK(splitmix64(s1) == splitmix64(s2));
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  parallel_for(0, [](std::size_t) { CHECK(false); });
}

TEST_CASE("fft_convolve matches the direct sum") {
  std::uint64_t st = 42;
  auto u01 = [&] {
    return static_cast<double>(splitmix64(st) >> 11) * 0x1.0p-53;
  };
  const std::vector<std::pair<std::size_t, std::size_t>> shapes = {
      {1, 1}, {1, 7}, {5, 3}, {65, 64}, {1000, 333}, {2048, 2048}};
  for (auto [na, nb] : shapes) {
    std::vector<double> a(na), b(nb);
    for (double& v : a) v = u01() - 0.5;
    for (double& v : b) v = u01() - 0.5;
    const std::vector<double> z = fft_convolve(a, b);
    REQUIRE(z.size() == na + nb - 1);
    double scale = 0.0;
    for (double v : a) scale += std::fabs(v);
    for (std::size_t k = 0; k < z.size(); ++k) {
      double want = 0.0;
      for (std::size_t j = 0; j < nb; ++j)
        if (k >= j && k - j < na) want += a[k - j] * b[j];
      CHECK(std::fabs(z[k] - want) <= 1e-12 * (1.0 + scale));
    }
  }
  CHECK(fft_convolve({}, {1.0}).empty());
}

TEST_CASE("error carries its code and name") {
  try {
    fail(Errc::divergent_scheme, "step too large");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::divergent_scheme);
    CHECK(std::string(e.what()).find("divergent_scheme") != std::string::npos);
    CHECK(std::string(e.what()).find("step too large") != std::string::npos);
  }
}
