#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "chaoslab/errors.hpp"
#include "chaoslab/model.hpp"

using namespace chaoslab;

namespace {

std::vector<double> random_config(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = d(gen);
  return x;
}

void check_gradient(const ModelSpec& m, std::vector<double> x) {
  std::vector<double> g(x.size());
  gibbs_log_density_gradient(m, x, g);
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double up = gibbs_log_density_unnormalized(m, x);
    x[i] = x0 - h;
    const double dn = gibbs_log_density_unnormalized(m, x);
    x[i] = x0;
    CHECK(g[i] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-6));
  }
}

}  // namespace

TEST_CASE("curie_weiss_model metadata") {
  const ModelSpec m = curie_weiss_model(1.0, 1.0, 0.7);
  CHECK(m.family == ModelFamily::CurieWeiss);
  CHECK(m.lipschitz_minus == 0.7);
  CHECK(m.lipschitz_plus == 0.0);
  CHECK(m.coupling() == 0.7);
  CHECK(gaussian_model(1.0, 0.5).is_gaussian_oracle());
  CHECK_FALSE(m.is_gaussian_oracle());
}

TEST_CASE("validate rejects inconsistent sign bounds") {
  ModelSpec m = curie_weiss_model(1.0, 1.0, 0.5);
  m.lipschitz_minus = 0.1;
  CHECK_THROWS_AS(m.validate(), Error);
  CHECK_THROWS_AS(curie_weiss_model(-1.0, 1.0, 0.5), Error);
  CHECK_THROWS_AS(gaussian_model(0.0, 0.1), Error);
}

TEST_CASE("rank-one log density: -sum V + J S^2 / (2N)") {
  const ModelSpec m = curie_weiss_model(2.0, -0.5, 0.8);
  const std::vector<double> x = {0.3, -1.1, 0.7};
  double expected = 0.0;
  double s = 0.0;
  for (double v : x) {
    expected -= oracle::quartic_v(2.0, -0.5, v);
    s += v;
  }
  expected += 0.8 * s * s / (2.0 * 3.0);
  CHECK(gibbs_log_density_unnormalized(m, x) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("energy_per_particle includes the diagonal") {
  // single particle: V(x) + W(x, x) / 2 = V(x) - J x^2 / 2
  const ModelSpec m = curie_weiss_model(1.0, 1.0, 0.6);
  const std::vector<double> x = {1.5};
  CHECK(energy_per_particle(m, x) ==
        doctest::Approx(oracle::quartic_v(1.0, 1.0, 1.5) - 0.3 * 2.25).epsilon(1e-14));
}

TEST_CASE("gradient matches finite differences (property)") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    check_gradient(curie_weiss_model(1.0, 0.5, 1.3), random_config(gen, 7));
    check_gradient(coulomb_model(1.0, 1.0, 0.1, 0.8), random_config(gen, 5));
  }
}

TEST_CASE("Coulomb kernel: force is the derivative of W and bounded by the strength") {
  const ModelSpec m = coulomb_model(1.0, 1.0, 0.05, 2.0);
  const double h = 1e-6;
  for (double u : {-3.0, -0.4, -0.01, 0.0, 0.02, 0.5, 4.0}) {
    const double fd = (m.w(u + h, 0.0) - m.w(u - h, 0.0)) / (2 * h);
    CHECK(m.grad1_w(u, 0.0) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(std::fabs(m.grad1_w(u, 0.0)) <= 2.0 + 1e-15);
  }
  // far from the origin the regularized kernel is -strength |u|
  CHECK(m.w(5.0, 0.0) == doctest::Approx(-10.0).epsilon(1e-12));
  CHECK(m.force_bound == 2.0);
  CHECK(m.lipschitz_plus == doctest::Approx(2.0 / std::sqrt(std::numbers::pi * 0.05)));
}

TEST_CASE("fingerprint separates models and is stable") {
  const auto a = curie_weiss_model(1.0, 1.0, 0.5).fingerprint();
  const auto b = curie_weiss_model(1.0, 1.0, 0.5).fingerprint();
  const auto c = curie_weiss_model(1.0, 1.0, 0.50000001).fingerprint();
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a != coulomb_model(1.0, 1.0, 0.5).fingerprint());
}

TEST_CASE("reduced_kernel_force subtracts the mean force") {
  const ModelSpec m = curie_weiss_model(1.0, 1.0, 0.5);
  // d/dx W(x, y) = -J y; mean force under a centred m_* is 0
  CHECK(reduced_kernel_force(m, [](double) { return 0.0; }, 0.3, 2.0) ==
        doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(reduced_kernel_force(m, [](double) { return -0.25; }, 0.3, 2.0) ==
        doctest::Approx(-0.75).epsilon(1e-15));
}
