#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "chaoslab/errors.hpp"
#include "chaoslab/numerics.hpp"

using namespace chaoslab;

TEST_CASE("integrate: gaussian normalization") {
  const double v = integrate([](double x) { return std::exp(-0.5 * x * x); });
  CHECK(v == doctest::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("integrate: pure quartic weight against the gamma function") {
  // int exp(-x^4/4) dx = 4^{1/4} Gamma(1/4) / 2
  const double expected = std::pow(4.0, 0.25) * std::tgamma(0.25) / 2.0;
  const double v = integrate([](double x) { return std::exp(-x * x * x * x / 4.0); });
  CHECK(v == doctest::Approx(expected).epsilon(1e-11));
  CHECK(v == doctest::Approx(2.56369335204085).epsilon(1e-12));
}

TEST_CASE("integrate: off-centre narrow peak is found") {
  QuadratureSpec spec;
  const double mu = 40.0;
  const double s = 0.05;
  const double v = integrate([&](double x) { return std::exp(-0.5 * (x - mu) * (x - mu) / (s * s)); },
                             spec);
  CHECK(v == doctest::Approx(s * std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-10));
}

TEST_CASE("integrate_interval: polynomial is exact") {
  const double v = integrate_interval([](double x) { return 3.0 * x * x; }, 0.0, 2.0);
  CHECK(v == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("integrate: non-integrable tail raises DivergentIntegral") {
  try {
    integrate([](double x) { return 1.0 / (1.0 + std::fabs(x)); });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::DivergentIntegral || e.code() == ErrorCode::NonConvergent));
  }
}

TEST_CASE("log_integrate_exp: survives exponents far beyond double range") {
  // log int exp(1000 - x^2/2) = 1000 + log sqrt(2 pi)
  const double v = log_integrate_exp([](double x) { return 1000.0 - 0.5 * x * x; });
  CHECK(v == doctest::Approx(1000.0 + 0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("QuadratureSpec validation") {
  QuadratureSpec spec;
  spec.abs_tol = -1.0;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("log_sum_exp matches the direct formula and handles -inf") {
  const std::vector<double> v = {-1.0, 0.5, 2.0};
  CHECK(log_sum_exp(v) ==
        doctest::Approx(std::log(std::exp(-1.0) + std::exp(0.5) + std::exp(2.0))).epsilon(1e-15));
  const std::vector<double> big = {800.0, 800.0};
  CHECK(log_sum_exp(big) == doctest::Approx(800.0 + std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("gauss_legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 8, 20}) {
    const GaussLegendreRule r = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    const int deg = 2 * n - 2;  // even degree <= 2n - 1
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
    CHECK(s == doctest::Approx(2.0 / (deg + 1)).epsilon(1e-13));
  }
}

TEST_CASE("convolve: gaussian variances add") {
  auto gauss = [](double var) {
    return [var](double x) { return std::exp(-0.5 * x * x / var) / std::sqrt(2 * std::numbers::pi * var); };
  };
  const double h = 0.01;
  GridDensity p = GridDensity::sample(gauss(1.0), -10.0, 10.0, 2001);
  GridDensity q = GridDensity::sample(gauss(0.25), -5.0, 5.0, 1001);
  REQUIRE(p.spacing() == doctest::Approx(h));
  const GridDensity c = convolve(p, q);
  CHECK(c.mass() == doctest::Approx(1.0).epsilon(1e-12));
  double var = 0.0;
  for (std::size_t i = 0; i < c.n_points(); ++i) var += c.x(i) * c.x(i) * c.values[i];
  var *= c.spacing();
  CHECK(var == doctest::Approx(1.25).epsilon(1e-6));
}

TEST_CASE("convolve: mismatched spacing raises GridMismatch") {
  GridDensity p = GridDensity::sample([](double) { return 1.0; }, 0.0, 1.0, 11);
  GridDensity q = GridDensity::sample([](double) { return 1.0; }, 0.0, 1.0, 21);
  try {
    convolve(p, q);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
}

TEST_CASE("find_root: cube root of two and missing sign change") {
  const double r = find_root([](double x) { return x * x * x - 2.0; }, {0.0, 2.0}, 1e-14);
  CHECK(r == doctest::Approx(std::cbrt(2.0)).epsilon(1e-13));
  try {
    find_root([](double x) { return x * x + 1.0; }, {-1.0, 1.0}, 1e-12);
    FAIL("expected NoSignChange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSignChange);
  }
}

TEST_CASE("expand_bracket finds a distant root") {
  auto g = [](double x) { return x - 300.0; };
  const auto br = expand_bracket(g, -1.0, 1.0);
  CHECK(br.first <= 300.0);
  CHECK(br.second >= 300.0);
}

TEST_CASE("normal_quantile inverts normal_cdf, including deep tails") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> t(-37.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double x = t(gen);
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-10));
  }
  for (double u : {1e-12, 1e-5, 0.2}) CHECK(normal_quantile(1.0 - u) == doctest::Approx(-normal_quantile(u)).epsilon(1e-6));
  CHECK_THROWS_AS(normal_quantile(0.0), Error);
}

TEST_CASE("QuantileTable: standard normal quantiles and cdf round trip") {
  const QuantileTable q = QuantileTable::from_log_density(
      [](double x) { return -0.5 * x * x; }, -12.0, 12.0, 4096);
  CHECK(q.quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-7));
  CHECK(q.quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  for (double u : {1e-6, 0.01, 0.3, 0.77, 0.999}) {
    CHECK(q.cdf(q.quantile(u)) == doctest::Approx(u).epsilon(1e-10));
    CHECK(q.cdf(normal_quantile(u)) == doctest::Approx(u).epsilon(1e-7));
  }
}

TEST_CASE("QuantileTable: cdf is monotone (property)") {
  const QuantileTable q = QuantileTable::from_density(
      [](double x) { return std::exp(-x * x * x * x / 4.0 - x); }, -8.0, 8.0, 1024);
  double prev = -1.0;
  for (int i = 0; i <= 4000; ++i) {
    const double c = q.cdf(-8.0 + 16.0 * i / 4000.0);
    CHECK(c >= prev);
    prev = c;
  }
}
