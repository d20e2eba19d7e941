#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chaoslab/numerics.hpp"

namespace chaoslab {

enum class Regime { FlatBounded, FlatLipschitz, Displacement, CurieWeiss };

const char* to_string(Regime regime) noexcept;

/// Constants of the sharp chaos theorem and the auxiliary quantities they
/// are built from. Fields that a regime does not define are left empty.
struct ConstantsBundle {
  double rho = 0.0;
  double gamma = 0.0;
  double big_m = 0.0;
  std::optional<double> rho0;
  std::optional<double> lambda;
  std::optional<double> eps;
  std::optional<double> lambda_n;
  std::optional<double> delta_n;
  std::optional<double> j_c;
  std::optional<double> var_mstar;
  Regime regime = Regime::CurieWeiss;
};

/// 18 (1 + g)^3 M / (rho N^2) (k^2 + (1 + 6 g) k), g = gamma / rho.
double chaos_bound_marginal(const ConstantsBundle& c, int n, int k);
/// 36 (1 + g)^3 M / (rho N^2) (k + 3 g).
double chaos_bound_conditional(const ConstantsBundle& c, int n, int k);

/// 8 (2 + delta)^2 / rho.
double t1_tightening_constant(double rho, double delta);

struct DefectiveT2 {
  double lambda_n;
  double delta_n;
};

/// eps in (0, 1/2]: c = 3 (1/sqrt(2 eps) + 3); eps = 0: c = 2 (log N + 3).
/// lambda_N = lambda - c L- / N, delta_N = (c L- + L+) Var.
DefectiveT2 defective_t2_constants(double lambda, double eps, double l_minus, double l_plus,
                                   int n, double var_mstar);

/// 64 (1 + delta_N)^2 / lambda_N.
double t1_particle_constant(double lambda_n, double delta_n);

/// 3 (1/sqrt(2 eps) + 3) L- Var.
double jw_rhs(double eps, double l_minus, double var_mstar);

struct BoundedForceInputs {
  double rho0;
  double force_bound;        // M_W
  double force_bound_minus;  // M_W^-
};
struct LipschitzForceInputs {
  double rho0;
  double l_plus;
  double l_minus;
  int dimension;
  int n;
};
struct DisplacementInputs {
  double kappa;
  double l_w;
  int dimension;
  int n;  // <= 0 means the N -> infinity limit
};

ConstantsBundle prop25_constants(const BoundedForceInputs& in);
ConstantsBundle prop25_constants(const LipschitzForceInputs& in);
ConstantsBundle prop25_constants(const DisplacementInputs& in);

/// rho0 = sigma for sigma >= 1, exp(-7 (1 - sigma)^2 / (36 theta)) otherwise.
double curie_weiss_rho0(double theta, double sigma);

/// Curie-Weiss bundle with every field filled in even when lambda_N <= 0
/// (then gamma and M are reported as computed and must not be used).
ConstantsBundle curie_weiss_constants_raw(double theta, double sigma, double j, int n, int d,
                                          const QuadratureSpec& spec = {});
/// As above; throws Supercritical for J >= J_c and RegimeViolation for lambda_N <= 0.
ConstantsBundle curie_weiss_constants(double theta, double sigma, double j, int n, int d,
                                      const QuadratureSpec& spec = {});

struct Lemma51Report {
  int n;
  double alpha;
  double coef_b;        // coefficient of A + (N-1) B
  double coef_a;        // coefficient of A
  double lower_bound_b; // 2/(1+a) - 1/(1+2a), or 1 at a = 0
  double upper_bound_a; // 1/(2a) + 3, or log N + 3 at a = 0
  bool pass;
};

Lemma51Report lemma51_coefficient_check(int n, double alpha);

struct UpperSolutionReport {
  bool pass = true;
  std::vector<std::string> violations;  // one entry per failed inequality, naming k
};

/// Checks that the crude and refined closed forms are upper solutions of the
/// entropy hierarchy recursion, with their boundary conditions.
UpperSolutionReport verify_upper_solution(double rho, double gamma, double big_m, int n);

}  // namespace chaoslab
