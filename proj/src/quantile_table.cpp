#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chaoslab/errors.hpp"
#include "chaoslab/numerics.hpp"

namespace chaoslab {
namespace {

// Cubic Hermite segment for the CDF on [x0, x0 + h], slopes = density.
struct HermiteCell {
  double x0, h, f0, f1, d0, d1;

  double eval(double x) const {
    const double t = (x - x0) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
           (t3 - t2) * h * d1;
  }
  double deriv(double x) const {
    const double t = (x - x0) / h;
    const double t2 = t * t;
    return (6 * t2 - 6 * t) * (f0 - f1) / h + (3 * t2 - 4 * t + 1) * d0 + (3 * t2 - 2 * t) * d1;
  }
};

constexpr int kCellOrder = 5;

// Limits the end slopes so the cubic stays monotone on the cell.
HermiteCell monotone_cell(double x0, double h, double f0, double f1, double d0, double d1) {
  const double s = (f1 - f0) / h;
  if (s <= 0.0) return {x0, h, f0, f1, 0.0, 0.0};
  const double a = d0 / s;
  const double b = d1 / s;
  const double r2 = a * a + b * b;
  if (r2 > 9.0) {
    const double tau = 3.0 / std::sqrt(r2);
    d0 *= tau;
    d1 *= tau;
  }
  return {x0, h, f0, f1, d0, d1};
}

}  // namespace

QuantileTable QuantileTable::from_log_density(const RealFn& log_density, double lo, double hi,
                                              std::size_t n_cells) {
  if (!(hi > lo) || n_cells < 1) {
    fail(ErrorCode::InvalidArgument, "quantile table needs hi > lo and at least one cell");
  }
  const GaussLegendreRule gl = gauss_legendre(kCellOrder);
  const double h = (hi - lo) / static_cast<double>(n_cells);
  std::vector<double> node_log(n_cells + 1);
  std::vector<double> inner_log(n_cells * kCellOrder);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n_cells; ++i) {
    const double x = (i == n_cells) ? hi : lo + h * static_cast<double>(i);
    node_log[i] = log_density(x);
    if (std::isnan(node_log[i])) fail(ErrorCode::NonFinite, "log density is NaN");
    peak = std::max(peak, node_log[i]);
  }
  for (std::size_t i = 0; i < n_cells; ++i) {
    const double mid = lo + h * (static_cast<double>(i) + 0.5);
    for (int j = 0; j < kCellOrder; ++j) {
      const double v = log_density(mid + 0.5 * h * gl.nodes[j]);
      if (std::isnan(v)) fail(ErrorCode::NonFinite, "log density is NaN");
      inner_log[i * kCellOrder + j] = v;
      peak = std::max(peak, v);
    }
  }
  if (!std::isfinite(peak)) fail(ErrorCode::NonFinite, "log density has no finite maximum");

  QuantileTable t;
  t.xs_.resize(n_cells + 1);
  t.pdf_.resize(n_cells + 1);
  t.cdf_.assign(n_cells + 1, 0.0);
  for (std::size_t i = 0; i <= n_cells; ++i) {
    t.xs_[i] = (i == n_cells) ? hi : lo + h * static_cast<double>(i);
    t.pdf_[i] = std::exp(node_log[i] - peak);
  }
  for (std::size_t i = 0; i < n_cells; ++i) {
    double m = 0.0;
    for (int j = 0; j < kCellOrder; ++j) {
      m += gl.weights[j] * std::exp(inner_log[i * kCellOrder + j] - peak);
    }
    t.cdf_[i + 1] = t.cdf_[i] + 0.5 * h * m;
  }
  const double total = t.cdf_.back();
  if (!(total > 0.0)) fail(ErrorCode::NonFinite, "density has no mass on the table window");
  for (std::size_t i = 0; i <= n_cells; ++i) {
    t.cdf_[i] /= total;
    t.pdf_[i] /= total;
  }
  t.cdf_.back() = 1.0;
  t.total_mass_ = total;
  return t;
}

QuantileTable QuantileTable::from_density(const RealFn& density, double lo, double hi,
                                          std::size_t n_cells) {
  QuantileTable t = from_log_density(
      [&](double x) {
        const double v = density(x);
        if (!(v >= 0.0) || !std::isfinite(v)) {
          fail(ErrorCode::NonFinite, "density must be finite and non-negative");
        }
        return std::log(v);
      },
      lo, hi, n_cells);
  return t;
}

double QuantileTable::cdf(double x) const {
  if (xs_.empty()) fail(ErrorCode::InvalidArgument, "empty quantile table");
  if (x <= xs_.front()) return 0.0;
  if (x >= xs_.back()) return 1.0;
  const double h = xs_[1] - xs_[0];
  std::size_t i = static_cast<std::size_t>((x - xs_.front()) / h);
  i = std::min(i, xs_.size() - 2);
  const HermiteCell c = monotone_cell(xs_[i], xs_[i + 1] - xs_[i], cdf_[i], cdf_[i + 1], pdf_[i], pdf_[i + 1]);
  return std::clamp(c.eval(x), cdf_[i], cdf_[i + 1]);
}

double QuantileTable::quantile(double u) const {
  if (xs_.empty()) fail(ErrorCode::InvalidArgument, "empty quantile table");
  if (!(u >= 0.0 && u <= 1.0)) fail(ErrorCode::InvalidArgument, "quantile level outside [0, 1]");
  if (u <= 0.0) {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), 0.0);
    return xs_[std::max<std::ptrdiff_t>(0, it - cdf_.begin() - 1)];
  }
  if (u >= 1.0) {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), 1.0);
    return xs_[static_cast<std::size_t>(it - cdf_.begin())];
  }
  // First node with cdf >= u; the answer lies in the cell that ends there.
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t i1 = static_cast<std::size_t>(it - cdf_.begin());
  if (i1 == 0) i1 = 1;
  const std::size_t i = i1 - 1;
  const HermiteCell c = monotone_cell(xs_[i], xs_[i1] - xs_[i], cdf_[i], cdf_[i1], pdf_[i], pdf_[i1]);
  if (cdf_[i1] == cdf_[i]) return xs_[i];

  double a = xs_[i];
  double b = xs_[i1];
  double x = a + (b - a) * (u - cdf_[i]) / (cdf_[i1] - cdf_[i]);
  for (int iter = 0; iter < 60; ++iter) {
    const double g = c.eval(x) - u;
    if (g == 0.0) return x;
    if (g < 0.0) a = x; else b = x;
    const double d = c.deriv(x);
    double next = (d > 0.0) ? x - g / d : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::fabs(next - x) <= 1e-15 * (std::fabs(x) + c.h)) return next;
    x = next;
  }
  return x;
}

}  // namespace chaoslab
