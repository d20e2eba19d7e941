#include <cmath>
#include <random>

#include "doctest.h"

#include "chaoslab/bounds.hpp"
#include "chaoslab/errors.hpp"
#include "chaoslab/meanfield.hpp"

using namespace chaoslab;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("chaos bounds: closed forms") {
  ConstantsBundle c;
  c.rho = 2.0;
  c.gamma = 1.0;
  c.big_m = 3.0;
  // g = 1/2: 18 * 3.375 * 3 / (2 * 100) * (4 + 4 * 2)
  CHECK(chaos_bound_marginal(c, 10, 2) == doctest::Approx(18 * 3.375 * 3 / 200.0 * 12).epsilon(1e-14));
  CHECK(chaos_bound_conditional(c, 10, 2) ==
        doctest::Approx(36 * 3.375 * 3 / 200.0 * 3.5).epsilon(1e-14));
  c.rho = 0.0;
  CHECK(code_of([&] { chaos_bound_marginal(c, 10, 1); }) == ErrorCode::InvalidConstants);
  CHECK(code_of([&] { chaos_bound_conditional(c, 10, 1); }) == ErrorCode::InvalidConstants);
}

TEST_CASE("marginal bound equals the sum of the conditional bounds") {
  ConstantsBundle c{0.5, 0.2, 1.0};
  double sum = 0.0;
  for (int k = 1; k <= 6; ++k) {
    sum += chaos_bound_conditional(c, 50, k);
    CHECK(chaos_bound_marginal(c, 50, k) == doctest::Approx(sum).epsilon(1e-13));
  }
}

TEST_CASE("T1 tightening constant") {
  CHECK(t1_tightening_constant(2.0, 1.0) == doctest::Approx(36.0).epsilon(1e-15));
  CHECK(code_of([] { t1_tightening_constant(0.0, 1.0); }) == ErrorCode::InvalidConstants);
}

TEST_CASE("defective T2 constants in both branches") {
  const DefectiveT2 a = defective_t2_constants(1.0, 0.5, 0.2, 0.1, 10, 2.0);
  CHECK(a.lambda_n == doctest::Approx(1.0 - 12.0 * 0.2 / 10).epsilon(1e-15));
  CHECK(a.delta_n == doctest::Approx((12.0 * 0.2 + 0.1) * 2.0).epsilon(1e-15));
  const DefectiveT2 b = defective_t2_constants(1.0, 0.0, 0.2, 0.0, 100, 1.0);
  const double c = 2.0 * (std::log(100.0) + 3.0);
  CHECK(b.lambda_n == doctest::Approx(1.0 - c * 0.2 / 100).epsilon(1e-15));
  CHECK(b.delta_n == doctest::Approx(c * 0.2).epsilon(1e-15));
}

TEST_CASE("t1_particle_constant and jw_rhs") {
  CHECK(t1_particle_constant(0.5, 1.0) == doctest::Approx(512.0).epsilon(1e-15));
  CHECK(code_of([] { t1_particle_constant(-0.1, 1.0); }) == ErrorCode::InvalidConstants);
  CHECK(jw_rhs(0.5, 1.0, 0.5) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(code_of([] { jw_rhs(0.0, 1.0, 1.0); }) == ErrorCode::InvalidConstants);
}

TEST_CASE("flat Lipschitz regime: worked example") {
  const ConstantsBundle b = prop25_constants(LipschitzForceInputs{10.0, 1.0, 0.0, 1, 100});
  CHECK(*b.lambda_n == doctest::Approx(*b.lambda).epsilon(1e-15));
  CHECK(*b.lambda_n == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(*b.delta_n == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(b.rho == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(b.gamma == doctest::Approx(64.0 * 1.21 / 10.0).epsilon(1e-14));
  CHECK(b.big_m == doctest::Approx(4.0 * (0.1 / 1000.0 + 0.1)).epsilon(1e-14));
  CHECK(code_of([] { prop25_constants(LipschitzForceInputs{1.0, 0.0, 0.5, 1, 100}); }) ==
        ErrorCode::RegimeViolation);
}

TEST_CASE("flat bounded regime") {
  const ConstantsBundle b = prop25_constants(BoundedForceInputs{4.0, 1.5, 0.5});
  CHECK(b.rho == doctest::Approx(4.0 * (1.0 - 2.0 * 0.5 / 2.0)).epsilon(1e-15));
  CHECK(b.gamma == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(b.big_m == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(code_of([] { prop25_constants(BoundedForceInputs{4.0, 1.5, 1.0}); }) ==
        ErrorCode::RegimeViolation);
}

TEST_CASE("displacement convex regime, finite N and the limit") {
  const ConstantsBundle inf = prop25_constants(DisplacementInputs{2.0, 1.0, 1, 0});
  CHECK(inf.rho == doctest::Approx(2.0 / (2.0 * 1.25)).epsilon(1e-15));
  CHECK(inf.gamma == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(inf.big_m == doctest::Approx(2.0).epsilon(1e-15));
  const ConstantsBundle fin = prop25_constants(DisplacementInputs{2.0, 1.0, 1, 4});
  CHECK(fin.big_m == doctest::Approx(2.0 * (1.0 + 0.25 / 4.0)).epsilon(1e-15));
  CHECK(code_of([] { prop25_constants(DisplacementInputs{0.0, 1.0, 1, 4}); }) ==
        ErrorCode::RegimeViolation);
}

TEST_CASE("Curie-Weiss constants at J = J_c / 2") {
  const double jc = critical_coupling(curie_weiss_model(1.0, 1.0, 1.0));
  const ConstantsBundle b = curie_weiss_constants(1.0, 1.0, 0.5 * jc, 128, 1);
  CHECK(*b.rho0 == 1.0);
  CHECK(b.rho == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(*b.lambda == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(*b.eps == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(*b.lambda_n == doctest::Approx(0.25 - 12.0 * 0.5 * jc / 128).epsilon(1e-13));
  CHECK(*b.delta_n == doctest::Approx(12.0 * 0.5 * jc).epsilon(1e-13));
  CHECK(*b.var_mstar == doctest::Approx(1.0 / jc).epsilon(1e-13));
  CHECK(b.gamma == doctest::Approx(64 * std::pow(1 + *b.delta_n, 2) * std::pow(0.5 * jc, 2) / *b.lambda_n)
                       .epsilon(1e-13));
  // small N: lambda_N < 0
  CHECK(code_of([&] { curie_weiss_constants(1.0, 1.0, 0.5 * jc, 16, 1); }) ==
        ErrorCode::RegimeViolation);
  CHECK(*curie_weiss_constants_raw(1.0, 1.0, 0.5 * jc, 16, 1).lambda_n < 0.0);
  CHECK(code_of([&] { curie_weiss_constants(1.0, 1.0, 1.01 * jc, 128, 1); }) ==
        ErrorCode::Supercritical);
}

TEST_CASE("Curie-Weiss rho0 in both branches") {
  CHECK(curie_weiss_rho0(1.0, 2.5) == 2.5);
  CHECK(curie_weiss_rho0(2.0, 0.0) == doctest::Approx(std::exp(-7.0 / 72.0)).epsilon(1e-15));
  CHECK(curie_weiss_rho0(1.0, -1.0) == doctest::Approx(std::exp(-28.0 / 36.0)).epsilon(1e-15));
}

TEST_CASE("coefficient lemma: small cases by hand") {
  const Lemma51Report r = lemma51_coefficient_check(2, 0.0);
  CHECK(r.coef_b == doctest::Approx(2.0));
  CHECK(r.coef_a == doctest::Approx(3.0));
  CHECK(r.pass);
  // N = 3, alpha = 1/2: c_2 = sqrt(1/2), c_3 = 1
  const double c2 = std::sqrt(0.5);
  const Lemma51Report s = lemma51_coefficient_check(3, 0.5);
  CHECK(s.coef_b == doctest::Approx((2 * c2 + 2.0 - 0.5) / 2.0).epsilon(1e-14));
  CHECK(s.coef_a == doctest::Approx(c2 * c2 + c2 + 0.5 + 1.0 - 0.25).epsilon(1e-14));
}

TEST_CASE("coefficient lemma holds on a grid (property)") {
  for (double alpha : {0.0, 0.125, 0.25, 0.5}) {
    for (int n = 2; n <= 300; n += 7) CHECK(lemma51_coefficient_check(n, alpha).pass);
  }
}

TEST_CASE("upper solutions on random constants (property)") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> lu(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double rho = std::pow(10.0, lu(gen));
    const double gamma = std::pow(10.0, lu(gen));
    const double m = std::pow(10.0, lu(gen));
    for (int n : {3, 10, 57}) {
      const UpperSolutionReport r = verify_upper_solution(rho, gamma, m, n);
      CHECK(r.pass);
      CHECK(r.violations.empty());
    }
  }
  CHECK(code_of([] { verify_upper_solution(0.0, 1.0, 1.0, 10); }) == ErrorCode::InvalidConstants);
}
