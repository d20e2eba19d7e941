#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace chaoslab {

using RealFn = std::function<double(double)>;

/// Tolerances for 1D quadrature on the real line.
///
/// The integration window is discovered by doubling outward from
/// [center - initial_half_width, center + initial_half_width] until the
/// integrand at each endpoint drops below truncation_threshold times the
/// running peak. center/initial_half_width default to [-1, 1]; callers that
/// know the scale of a narrow integrand pass a better starting window.
struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 60;
  double truncation_threshold = 1e-16;
  double center = 0.0;
  double initial_half_width = 1.0;

  void validate() const;
};

/// Finite interval carrying the integrand peak found while searching for it.
/// For log-domain searches `peak` is the maximum of log f; otherwise max |f|.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
  double peak = 0.0;
};

Window find_window(const RealFn& f, const QuadratureSpec& spec = {});
Window find_log_window(const RealFn& log_f, const QuadratureSpec& spec = {});

/// Adaptive Gauss-Kronrod (21 point) integration on [lo, hi].
double integrate_interval(const RealFn& f, double lo, double hi,
                          const QuadratureSpec& spec = {});

/// Integral of f over the real line.
double integrate(const RealFn& f, const QuadratureSpec& spec = {});

/// Integral of f over a window found earlier (initial split into 8 pieces).
double integrate_on(const RealFn& f, const Window& window, const QuadratureSpec& spec = {});

/// log of the integral of exp(log_f) over the real line, shifted by the
/// peak of log_f so nothing overflows.
double log_integrate_exp(const RealFn& log_f, const QuadratureSpec& spec = {});

/// Same as log_integrate_exp but on a window already found.
double log_integrate_exp_on(const RealFn& log_f, const Window& window,
                            const QuadratureSpec& spec = {});

double log_sum_exp(std::span<const double> values);

/// Standard normal distribution.
double normal_cdf(double t);
double normal_pdf(double t);
/// Inverse of normal_cdf on (0, 1); accurate to a few ulps in the far tails.
double normal_quantile(double u);

/// n-point Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int n);

/// Density samples on a uniform grid over [lo, hi].
struct GridDensity {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> values;

  std::size_t n_points() const { return values.size(); }
  double spacing() const { return (hi - lo) / static_cast<double>(values.size() - 1); }
  double x(std::size_t i) const { return lo + spacing() * static_cast<double>(i); }
  double mass() const;
  double mean() const;
  void normalize();
  void validate() const;

  static GridDensity sample(const RealFn& density, double lo, double hi, std::size_t n_points);
};

/// Density of X + Y for independent X ~ p, Y ~ q. Both grids must share the
/// same spacing; the result lives on [p.lo + q.lo, p.hi + q.hi] and is
/// renormalized to unit trapezoid mass.
GridDensity convolve(const GridDensity& p, const GridDensity& q);

/// Bisection with secant (Illinois) acceleration. Returns a point x whose
/// final sign-changing bracket has width at most tol.
double find_root(const RealFn& g, std::pair<double, double> bracket, double tol);

/// Grows [lo, hi] geometrically away from `anchor` until g changes sign.
std::pair<double, double> expand_bracket(const RealFn& g, double lo, double hi,
                                         int max_doublings = 60);

/// Tabulated CDF of a 1D density with cubic Hermite interpolation between
/// nodes. The CDF at nodes is accumulated with 5-point Gauss-Legendre per
/// cell, so quantiles are accurate to O(h^4) in the cell width.
class QuantileTable {
 public:
  QuantileTable() = default;

  static QuantileTable from_density(const RealFn& density, double lo, double hi,
                                    std::size_t n_cells);
  static QuantileTable from_log_density(const RealFn& log_density, double lo, double hi,
                                        std::size_t n_cells);

  double cdf(double x) const;
  double quantile(double u) const;
  double lo() const { return xs_.front(); }
  double hi() const { return xs_.back(); }
  double total_mass() const { return total_mass_; }
  bool empty() const { return xs_.empty(); }

 private:
  std::vector<double> xs_;
  std::vector<double> cdf_;
  std::vector<double> pdf_;
  double total_mass_ = 0.0;
};

}  // namespace chaoslab
