#include "chaoslab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "chaoslab/errors.hpp"
#include "chaoslab/meanfield.hpp"
#include "chaoslab/model.hpp"

namespace chaoslab {
namespace {

void require_rho(const ConstantsBundle& c, int n, int k) {
  if (!(c.rho > 0.0)) fail(ErrorCode::InvalidConstants, "rho must be positive");
  if (!(c.gamma >= 0.0) || !(c.big_m >= 0.0)) {
    fail(ErrorCode::InvalidConstants, "gamma and M must be non-negative");
  }
  if (n < 1 || k < 1 || k > n) fail(ErrorCode::InvalidArgument, "need 1 <= k <= N");
}

double cube(double x) { return x * x * x; }

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

const char* to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::FlatBounded: return "flat-bounded";
    case Regime::FlatLipschitz: return "flat-lipschitz";
    case Regime::Displacement: return "displacement";
    case Regime::CurieWeiss: return "curie-weiss";
  }
  return "curie-weiss";
}

double chaos_bound_marginal(const ConstantsBundle& c, int n, int k) {
  require_rho(c, n, k);
  const double g = c.gamma / c.rho;
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return 18.0 * cube(1.0 + g) * c.big_m / (c.rho * nn * nn) * (kk * kk + (1.0 + 6.0 * g) * kk);
}

double chaos_bound_conditional(const ConstantsBundle& c, int n, int k) {
  require_rho(c, n, k);
  const double g = c.gamma / c.rho;
  const double nn = static_cast<double>(n);
  return 36.0 * cube(1.0 + g) * c.big_m / (c.rho * nn * nn) * (k + 3.0 * g);
}

double t1_tightening_constant(double rho, double delta) {
  if (!(rho > 0.0) || !(delta >= 0.0)) {
    fail(ErrorCode::InvalidConstants, "T1 tightening needs rho > 0 and delta >= 0");
  }
  return 8.0 * (2.0 + delta) * (2.0 + delta) / rho;
}

DefectiveT2 defective_t2_constants(double lambda, double eps, double l_minus, double l_plus,
                                   int n, double var_mstar) {
  if (!(eps >= 0.0 && eps <= 0.5)) fail(ErrorCode::InvalidArgument, "eps must lie in [0, 1/2]");
  if (n < 1) fail(ErrorCode::InvalidArgument, "N must be >= 1");
  const double c = eps > 0.0 ? 3.0 * (1.0 / std::sqrt(2.0 * eps) + 3.0)
                             : 2.0 * (std::log(static_cast<double>(n)) + 3.0);
  return {lambda - c * l_minus / n, (c * l_minus + l_plus) * var_mstar};
}

double t1_particle_constant(double lambda_n, double delta_n) {
  if (!(lambda_n > 0.0)) fail(ErrorCode::InvalidConstants, "lambda_N must be positive");
  return 64.0 * (1.0 + delta_n) * (1.0 + delta_n) / lambda_n;
}

double jw_rhs(double eps, double l_minus, double var_mstar) {
  if (!(eps > 0.0 && eps <= 0.5)) fail(ErrorCode::InvalidConstants, "eps must lie in (0, 1/2]");
  return 3.0 * (1.0 / std::sqrt(2.0 * eps) + 3.0) * l_minus * var_mstar;
}

ConstantsBundle prop25_constants(const BoundedForceInputs& in) {
  if (!(in.rho0 > 0.0)) fail(ErrorCode::RegimeViolation, "rho0 > 0 required");
  if (!(in.force_bound_minus < 0.5 * std::sqrt(in.rho0))) {
    fail(ErrorCode::RegimeViolation, "bounded force regime requires M_W^- < sqrt(rho0)/2");
  }
  ConstantsBundle b;
  b.regime = Regime::FlatBounded;
  b.rho0 = in.rho0;
  b.rho = in.rho0 * (1.0 - 2.0 * in.force_bound_minus / std::sqrt(in.rho0));
  b.gamma = 2.0 * in.force_bound;
  b.big_m = 4.0 * in.force_bound * in.force_bound;
  return b;
}

ConstantsBundle prop25_constants(const LipschitzForceInputs& in) {
  if (!(in.rho0 > 0.0)) fail(ErrorCode::RegimeViolation, "rho0 > 0 required");
  if (!(in.l_minus < 0.5 * in.rho0)) {
    fail(ErrorCode::RegimeViolation, "Lipschitz force regime requires L_W^- < rho0/2");
  }
  if (in.dimension < 1 || in.n < 1) fail(ErrorCode::InvalidArgument, "d >= 1 and N >= 1 required");
  ConstantsBundle b;
  b.regime = Regime::FlatLipschitz;
  b.rho0 = in.rho0;
  b.lambda = in.rho0 - 1.5 * in.l_minus;
  b.eps = 0.5;
  const double var = in.dimension / in.rho0;
  b.var_mstar = var;
  const DefectiveT2 t2 = defective_t2_constants(*b.lambda, 0.5, in.l_minus, in.l_plus, in.n, var);
  b.lambda_n = t2.lambda_n;
  b.delta_n = t2.delta_n;
  if (!(t2.lambda_n > 0.0)) {
    fail(ErrorCode::RegimeViolation, fmt("lambda_N = %.6g <= 0 at this N", t2.lambda_n));
  }
  const double l = in.l_plus + in.l_minus;
  b.rho = in.rho0 * (1.0 - 2.0 * in.l_minus / in.rho0);
  b.gamma = 64.0 * (1.0 + t2.delta_n) * (1.0 + t2.delta_n) * l * l / t2.lambda_n;
  b.big_m = 4.0 * l * l * (t2.delta_n / (t2.lambda_n * in.n) + var);
  return b;
}

ConstantsBundle prop25_constants(const DisplacementInputs& in) {
  if (!(in.kappa > 0.0)) fail(ErrorCode::RegimeViolation, "displacement regime requires kappa_V > 0");
  if (!(in.l_w >= 0.0) || in.dimension < 1) {
    fail(ErrorCode::InvalidArgument, "L_W >= 0 and d >= 1 required");
  }
  ConstantsBundle b;
  b.regime = Regime::Displacement;
  const double r = in.l_w * in.l_w / (in.kappa * in.kappa);
  b.rho = in.kappa / (2.0 * (1.0 + r));
  b.gamma = 2.0 * in.l_w * in.l_w / in.kappa;
  const double finite_n = in.n > 0 ? r / in.n : 0.0;
  b.big_m = 4.0 * in.l_w * in.l_w * (1.0 + finite_n) * in.dimension / in.kappa;
  return b;
}

double curie_weiss_rho0(double theta, double sigma) {
  if (sigma >= 1.0) return sigma;
  return std::exp(-7.0 * (1.0 - sigma) * (1.0 - sigma) / (36.0 * theta));
}

ConstantsBundle curie_weiss_constants_raw(double theta, double sigma, double j, int n, int d,
                                          const QuadratureSpec& spec) {
  if (!(theta > 0.0)) fail(ErrorCode::InvalidArgument, "Curie-Weiss constants need theta > 0");
  if (!(j > 0.0)) fail(ErrorCode::InvalidArgument, "Curie-Weiss constants need J > 0");
  if (n < 1 || d < 1) fail(ErrorCode::InvalidArgument, "N >= 1 and d >= 1 required");
  const ModelSpec model = curie_weiss_model(theta, sigma, j, d);
  const double jc = critical_coupling(model, spec);
  if (!(j < jc)) {
    fail(ErrorCode::Supercritical, fmt("J = %.6g is not below J_c = %.6g", j, jc));
  }
  ConstantsBundle b;
  b.regime = Regime::CurieWeiss;
  b.j_c = jc;
  const double rho0 = curie_weiss_rho0(theta, sigma);
  b.rho0 = rho0;
  const double gap = 1.0 - j / jc;
  const double r = std::min(jc / j - 1.0, 1.0);
  b.lambda = gap * rho0 / 2.0;
  b.eps = r / 2.0;
  if (d == 1) b.var_mstar = 1.0 / jc;  // m_* is centred with E x^2 = 1/J_c
  const DefectiveT2 t2 = defective_t2_constants(*b.lambda, *b.eps, j, 0.0, n, d / rho0);
  b.lambda_n = t2.lambda_n;
  b.delta_n = t2.delta_n;
  b.rho = gap * gap * rho0;
  b.gamma = 64.0 * (1.0 + t2.delta_n) * (1.0 + t2.delta_n) * j * j / t2.lambda_n;
  b.big_m = 4.0 * j * j * (t2.delta_n / (t2.lambda_n * n) + d / rho0);
  return b;
}

ConstantsBundle curie_weiss_constants(double theta, double sigma, double j, int n, int d,
                                      const QuadratureSpec& spec) {
  ConstantsBundle b = curie_weiss_constants_raw(theta, sigma, j, n, d, spec);
  if (!(*b.lambda_n > 0.0)) {
    fail(ErrorCode::RegimeViolation,
         fmt("lambda_N = %.6g <= 0 at N = %.0f; the bound needs larger N", *b.lambda_n, n));
  }
  return b;
}

Lemma51Report lemma51_coefficient_check(int n, double alpha) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "N >= 2 required");
  if (!(alpha >= 0.0 && alpha <= 0.5)) fail(ErrorCode::InvalidArgument, "alpha in [0, 1/2]");
  const double n1 = static_cast<double>(n - 1);
  double coef_b = 0.0;
  double coef_a = 0.0;
  for (int k = 2; k <= n; ++k) {
    const double km1 = static_cast<double>(k - 1);
    const double c = alpha == 0.0 ? 1.0 : std::pow(km1 / n1, alpha);
    const double c2 = c * c;
    coef_b += 2.0 * c - (k - 2) * c2 / km1;
    coef_a += c2 / km1 + 2.0 * c / n1 - (k - 2) * c2 / (n1 * km1);
  }
  coef_b /= n1;
  Lemma51Report rep;
  rep.n = n;
  rep.alpha = alpha;
  rep.coef_b = coef_b;
  rep.coef_a = coef_a;
  if (alpha > 0.0) {
    rep.lower_bound_b = 2.0 / (1.0 + alpha) - 1.0 / (1.0 + 2.0 * alpha);
    rep.upper_bound_a = 1.0 / (2.0 * alpha) + 3.0;
  } else {
    rep.lower_bound_b = 1.0;
    rep.upper_bound_a = std::log(static_cast<double>(n)) + 3.0;
  }
  constexpr double slack = 1e-12;
  rep.pass = coef_b >= rep.lower_bound_b - slack && coef_a <= rep.upper_bound_a + slack;
  return rep;
}

UpperSolutionReport verify_upper_solution(double rho, double gamma, double big_m, int n) {
  if (!(rho > 0.0)) fail(ErrorCode::InvalidConstants, "rho must be positive");
  if (!(gamma >= 0.0) || !(big_m >= 0.0)) {
    fail(ErrorCode::InvalidConstants, "gamma and M must be non-negative");
  }
  if (n < 1) fail(ErrorCode::InvalidArgument, "N >= 1 required");
  UpperSolutionReport rep;
  const double g = gamma / rho;
  const double nn = static_cast<double>(n);
  const double n2 = nn * nn;
  constexpr double rel = 1e-12;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) {
      rep.pass = false;
      rep.violations.push_back(what);
    }
  };
  auto geq = [&](double lhs, double rhs) {
    return lhs >= rhs - rel * (std::fabs(lhs) + std::fabs(rhs));
  };

  const double crude_pref = 3.0 * big_m * (1.0 + gamma / (2.0 * rho));
  auto h_bar = [&](double k) {
    return crude_pref / (rho * n2) * (k * k + 6.0 * g * k + 18.0 * g * g + 3.0 * g);
  };
  const double fine_pref = 36.0 * cube(1.0 + g) * big_m;
  auto h_fine = [&](double k) { return fine_pref / (rho * n2) * (k + 3.0 * g); };

  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double lhs = 2.0 * rho * h_bar(kk);
    const double rhs = crude_pref * kk * kk / n2 + 3.0 * gamma * (h_bar(kk + 1) - h_bar(kk));
    check(geq(lhs, rhs), "crude recursion fails at k = " + std::to_string(k));
    const double lhs_f = 2.0 * rho * h_fine(kk);
    const double rhs_f = fine_pref * kk / n2 + 3.0 * gamma * (h_fine(kk + 1) - h_fine(kk));
    check(geq(lhs_f, rhs_f), "refined recursion fails at k = " + std::to_string(k));
  }
  check(geq(h_bar(nn), big_m / (2.0 * rho)), "crude boundary H_N >= M / (2 rho) fails");
  check(geq(h_fine(nn), 6.0 * (1.0 + g) * (1.0 + g) * big_m / (rho * nn)),
        "refined boundary H_N >= 6 (1 + g)^2 M / (rho N) fails");
  if (n >= 3) {
    check(geq(54.0 * big_m * cube(1.0 + g) / (rho * n2), h_bar(3.0)),
          "H_3 <= 54 M (1 + g)^3 / (rho N^2) fails");
  }
  const double t_ratio =
      (3.0 + 3.0 * std::sqrt(6.0) * std::sqrt(g * cube(1.0 + g))) / ((1.0 + g) * (1.0 + g));
  check(geq(3.0 + 3.0 * std::sqrt(6.0), t_ratio) && 3.0 + 3.0 * std::sqrt(6.0) < 12.0,
        "(3 + 3 sqrt6 sqrt(t (1 + t)^3)) / (1 + t)^2 <= 3 + 3 sqrt6 < 12 fails");
  return rep;
}

}  // namespace chaoslab
