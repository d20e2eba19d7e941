#pragma once

#include <optional>
#include <vector>

#include "chaoslab/bounds.hpp"
#include "chaoslab/model.hpp"
#include "chaoslab/numerics.hpp"

namespace chaoslab {

/// One inequality evaluated over a scan grid. margin = rhs - lhs pointwise.
struct ScanReport {
  std::vector<double> grid;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double min_margin = 0.0;
  double tolerance = 1e-9;
  bool pass = true;
};

/// 2 rho H(pi[l] | m_*) <= I(pi[l] | Pi[pi[l]]) over tilted test measures pi[l].
ScanReport nonlinear_lsi_scan(const ModelSpec& model, const ConstantsBundle& bundle,
                              const std::vector<double>& tilt_grid, double tolerance = 1e-9,
                              const QuadratureSpec& spec = {});

/// 2 rho0 H(pi[l] | m_*) <= I(pi[l] | m_*). Uses bundle.rho0 when present,
/// bundle.rho otherwise.
ScanReport linear_lsi_scan(const ModelSpec& model, const ConstantsBundle& bundle,
                           const std::vector<double>& tilt_grid, double tolerance = 1e-9,
                           const QuadratureSpec& spec = {});

/// phi(h) = (1-eps) J l h - (1-eps) log Z(J l) - J h^2 + log Z(J h) - eps log Z(0),
/// l = f^{-1}(h). Default eps = (1 - J/J_c)^2. rhs holds phi, lhs is zero.
ScanReport phi_positivity_scan(const ModelSpec& model, std::optional<double> eps,
                               const std::vector<double>& h_grid, double tolerance = 1e-9,
                               const QuadratureSpec& spec = {});

struct PsiScan {
  double h_star;  // solves h = f(alpha h0 + (1 - alpha) h)
  ScanReport report;
};

/// psi(l) = -(J_c/2)(f(l) - f(h_*))^2 + J (l - h_*) f(l) - log Z(J l) + log Z(J h_*),
/// evaluated at l = h_* + offset for each offset.
PsiScan psi_positivity_scan(const ModelSpec& model, double alpha, double m0_mean,
                            const std::vector<double>& offsets, double tolerance = 1e-9,
                            const QuadratureSpec& spec = {});

/// log E[exp(J S_N^2 / (2N))] under m_*^{(x)N}, through the auxiliary-field identity.
double jw_log_mgf(const ModelSpec& model, int n_particles, const QuadratureSpec& spec = {});

struct BolleyVillaniReport {
  double moment;  // int exp(rho (x - mean)^2 / 4) dmu
  double bound;   // sqrt(2) e^delta
  bool pass;
};

/// The measure is given by its quantile function on (0, 1).
BolleyVillaniReport bolley_villani_moment_check(const RealFn& mu_quantile, double rho,
                                                double delta, double tolerance = 1e-9);

/// W_1^2(pi[l], m^{N,1}) <= C H(pi[l] | m^{N,1}) with C = t1_particle_constant
/// of the bundle unless overridden.
ScanReport marginal_t1_ratio_scan(const ModelSpec& model, int n_particles,
                                  const ConstantsBundle& bundle,
                                  const std::vector<double>& tilt_grid,
                                  std::optional<double> constant_override = std::nullopt,
                                  double tolerance = 1e-9, const QuadratureSpec& spec = {});

}  // namespace chaoslab
