#pragma once

#include <functional>
#include <span>

#include "chaoslab/matrix.hpp"
#include "chaoslab/numerics.hpp"

namespace chaoslab {

enum class DivergenceMethod { PlugInExact, Knn, QuantileGrid };

const char* to_string(DivergenceMethod method) noexcept;

struct DivergenceEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  DivergenceMethod method = DivergenceMethod::PlugInExact;
};

using LogDensityFn = std::function<double(std::span<const double>)>;

/// Mean of log p - log q over samples drawn from p; jackknife standard error.
DivergenceEstimate kl_plug_in(const Matrix& samples, const LogDensityFn& log_p,
                              const LogDensityFn& log_q);

/// k-nearest-neighbour KL estimator (Wang, Kulkarni and Verdu),
///   (d/n) sum_i log(nu_k(i) / rho_k(i)) + log(m / (n - 1)),
/// with rho_k the k-th neighbour distance within p and nu_k the distance to q.
/// Consistent but biased at finite n. The standard error comes from
/// `n_chunks` disjoint subsample estimates.
DivergenceEstimate kl_knn(const Matrix& samples_p, const Matrix& samples_q,
                          int k_neighbors = 5, int n_chunks = 10);

/// Integral of (d log p - d log q)^2 against p.
double fisher_information_1d(const RealFn& density_log_grad_p, const RealFn& density_log_grad_q,
                             const RealFn& p_density, const QuadratureSpec& spec = {});

/// Raw transport cost int_0^1 |F^-1(u) - G^-1(u)|^order du.
///
/// The quantile levels are clipped to [1e-8, 1 - 1e-8]; each clipped tail is
/// charged 1e-8 times the integrand at the clip point, which is exact for
/// point masses. Integration runs in the Gaussian coordinate u = Phi(t) with
/// a composite 8-point Gauss-Legendre rule.
double wasserstein_1d(const RealFn& quantile_p, const RealFn& quantile_q, int order,
                      int panels = 400);

}  // namespace chaoslab
