#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>

#include "chaoslab/numerics.hpp"

namespace chaoslab {

using KernelFn = std::function<double(double, double)>;

/// V(x) = theta x^4 / 4 + sigma x^2 / 2.
struct QuarticConfinement {
  double theta = 1.0;
  double sigma = 1.0;
};

struct GeneralPotential {
  RealFn v;
  RealFn grad_v;
};

/// W(x, y) = -J x y.
struct RankOneInteraction {
  double j = 0.0;
};

struct GeneralKernel {
  KernelFn w;
  KernelFn grad1_w;
  bool symmetric = true;
};

enum class ModelFamily { CurieWeiss, Gaussian, Coulomb, Custom };

const char* to_string(ModelFamily family) noexcept;

/// A mean-field model: confinement V, interaction W and the user-supplied
/// sign-decomposition bounds (W = W+ - W-) consumed by the constants code.
struct ModelSpec {
  std::variant<QuarticConfinement, GeneralPotential> confinement;
  std::variant<RankOneInteraction, GeneralKernel> interaction;
  int dimension = 1;
  double lipschitz_plus = 0.0;
  double lipschitz_minus = 0.0;
  double force_bound = 0.0;
  double force_bound_minus = 0.0;
  double convexity_kappa = 0.0;
  ModelFamily family = ModelFamily::Custom;
  // Regularization width of the Coulomb demo kernel; 0 for other families.
  double coulomb_eps = 0.0;
  double coulomb_strength = 0.0;

  double v(double x) const;
  double grad_v(double x) const;
  double w(double x, double y) const;
  double grad1_w(double x, double y) const;

  bool is_quartic() const { return std::holds_alternative<QuarticConfinement>(confinement); }
  bool is_rank_one() const { return std::holds_alternative<RankOneInteraction>(interaction); }
  /// Quadratic confinement with rank-one coupling: every law is Gaussian.
  bool is_gaussian_oracle() const;

  const QuarticConfinement& quartic() const;
  double coupling() const;

  /// Throws InvalidArgument describing the first violated invariant.
  void validate() const;

  /// FNV-1a over the numeric description; function-valued parts hash by family only.
  std::uint64_t fingerprint() const;
};

ModelSpec curie_weiss_model(double theta, double sigma, double j, int dimension = 1);
ModelSpec gaussian_model(double sigma, double j);
/// Quartic/quadratic confinement with the Gaussian-smoothed 1D Coulomb kernel
/// W(x, y) = -strength (|.| * N(0, 2 eps))(x - y).
ModelSpec coulomb_model(double theta, double sigma, double eps, double strength = 1.0);

/// (1/N) sum V(x_i) + (1/2N^2) sum_{i,j} W(x_i, x_j), diagonal included.
double energy_per_particle(const ModelSpec& model, std::span<const double> config);

/// -sum V(x_i) - (1/2N) sum_{i,j} W(x_i, x_j).
double gibbs_log_density_unnormalized(const ModelSpec& model, std::span<const double> config);

/// Gradient of gibbs_log_density_unnormalized, written into `out`.
void gibbs_log_density_gradient(const ModelSpec& model, std::span<const double> config,
                                std::span<double> out);

/// d/dx W_*(x, y) = d/dx W(x, y) - <d/dx W(x, .), m_*>.
double reduced_kernel_force(const ModelSpec& model, const RealFn& mstar_mean_force, double x,
                            double y);

}  // namespace chaoslab
