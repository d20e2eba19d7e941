#pragma once

#include <vector>

#include "chaoslab/model.hpp"
#include "chaoslab/numerics.hpp"

namespace chaoslab {

/// Probability measure with density proportional to exp(-V(x) + t x).
/// Immutable: the log-normalizer and integration window are computed once.
class TiltedMeasure {
 public:
  TiltedMeasure(const ModelSpec& model, double tilt, const QuadratureSpec& spec = {});

  double tilt() const { return tilt_; }
  double log_z() const { return log_z_; }
  const ModelSpec& model() const { return model_; }
  const Window& window() const { return window_; }
  const QuadratureSpec& spec() const { return spec_; }

  double log_density(double x) const { return -model_.v(x) + tilt_ * x - log_z_; }
  double density(double x) const;

  /// E[g(X)].
  double expectation(const RealFn& g) const;
  /// E[X^power], power in 0..8.
  double moment(int power) const;
  double mean() const;
  double variance() const;

 private:
  ModelSpec model_;
  double tilt_;
  QuadratureSpec spec_;
  Window window_;
  double log_z_;
};

/// log of the integral of exp(-V(x) + t x).
double log_partition(const ModelSpec& model, double tilt, const QuadratureSpec& spec = {});

/// f(h) = mean of the measure tilted by J h.
double magnetization(const ModelSpec& model, double h, const QuadratureSpec& spec = {});
/// f'(h) = J Var(pi[h]).
double magnetization_derivative(const ModelSpec& model, double h,
                                const QuadratureSpec& spec = {});
/// Solves f(l) = h for l; f must be strictly increasing (J > 0).
double inverse_magnetization(const ModelSpec& model, double h, double tol = 1e-13,
                             const QuadratureSpec& spec = {});

/// J_c = int e^{-V} / int x^2 e^{-V}.
double critical_coupling(const ModelSpec& model, const QuadratureSpec& spec = {});

struct FixedPointResult {
  double h_star;
  TiltedMeasure m_star;
  int iterations;
  double residual;
};

/// Damped iteration h <- (1 - a) h + a f(h), a = 0.5, with a bracketed root
/// search on h - f(h) over (tol, 10) as fallback.
FixedPointResult solve_fixed_point(const ModelSpec& model, double tol = 1e-12,
                                   double h_init = 1.0, int max_iterations = 10000,
                                   const QuadratureSpec& spec = {});

/// Mean of Pi[m] for any m with mean input_mean.
double pi_map_mean(const ModelSpec& model, double input_mean, const QuadratureSpec& spec = {});

struct ConcavityReport {
  std::vector<double> grid;
  std::vector<double> second_difference;  // f(h+d) - 2f(h) + f(h-d) on the grid
  std::vector<double> mirrored;           // the same at -h
  double max_second_difference;
  double min_mirrored;
  double step;
  bool pass;
};

/// Second central differences of f on a positive grid (and its mirror).
ConcavityReport ghs_concavity_check(const ModelSpec& model, const std::vector<double>& h_grid,
                                    double step = 1e-2, const QuadratureSpec& spec = {});

}  // namespace chaoslab
