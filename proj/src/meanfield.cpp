#include "chaoslab/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chaoslab/errors.hpp"

namespace chaoslab {
namespace {

// Starting window for the doubling search: a stationary point of -V + t x
// and a width from the local curvature.
QuadratureSpec hinted(const ModelSpec& model, double tilt, QuadratureSpec spec) {
  if (!model.is_quartic()) return spec;
  const auto& q = model.quartic();
  double center = 0.0;
  if (q.theta == 0.0) {
    center = tilt / q.sigma;
  } else if (tilt != 0.0) {
    const RealFn g = [&](double x) { return tilt - q.theta * x * x * x - q.sigma * x; };
    const auto br = expand_bracket(g, -1.0, 1.0);
    center = find_root(g, br, 1e-8 * (1.0 + std::fabs(br.second - br.first)));
  }
  const double curv = 3.0 * q.theta * center * center + q.sigma;
  spec.center = center;
  spec.initial_half_width = curv > 0.0 ? std::min(1.0, 2.0 / std::sqrt(curv)) : 1.0;
  return spec;
}

}  // namespace

TiltedMeasure::TiltedMeasure(const ModelSpec& model, double tilt, const QuadratureSpec& spec)
    : model_(model), tilt_(tilt), spec_(hinted(model, tilt, spec)) {
  if (!std::isfinite(tilt)) fail(ErrorCode::NonFinite, "tilt must be finite");
  const RealFn log_u = [this](double x) { return -model_.v(x) + tilt_ * x; };
  window_ = find_log_window(log_u, spec_);
  log_z_ = log_integrate_exp_on(log_u, window_, spec_);
  if (!std::isfinite(log_z_)) fail(ErrorCode::NonFinite, "log-normalizer is not finite");
}

double TiltedMeasure::density(double x) const { return std::exp(log_density(x)); }

double TiltedMeasure::expectation(const RealFn& g) const {
  return integrate_on([&](double x) { return g(x) * std::exp(log_density(x)); }, window_, spec_);
}

double TiltedMeasure::moment(int power) const {
  if (power < 0 || power > 8) fail(ErrorCode::InvalidArgument, "moment power must be in 0..8");
  if (power == 0) return 1.0;
  return expectation([power](double x) {
    double r = 1.0;
    for (int i = 0; i < power; ++i) r *= x;
    return r;
  });
}

double TiltedMeasure::mean() const { return moment(1); }

double TiltedMeasure::variance() const {
  const double m = mean();
  return expectation([m](double x) { return (x - m) * (x - m); });
}

double log_partition(const ModelSpec& model, double tilt, const QuadratureSpec& spec) {
  return TiltedMeasure(model, tilt, spec).log_z();
}

double magnetization(const ModelSpec& model, double h, const QuadratureSpec& spec) {
  return TiltedMeasure(model, model.coupling() * h, spec).mean();
}

double magnetization_derivative(const ModelSpec& model, double h, const QuadratureSpec& spec) {
  return model.coupling() * TiltedMeasure(model, model.coupling() * h, spec).variance();
}

double inverse_magnetization(const ModelSpec& model, double h, double tol,
                             const QuadratureSpec& spec) {
  if (!(model.coupling() > 0.0)) {
    fail(ErrorCode::InvalidArgument, "inverting f requires J > 0");
  }
  if (h == 0.0) return 0.0;
  const RealFn g = [&](double l) { return magnetization(model, l, spec) - h; };
  const double start = std::max(1e-3, std::fabs(h));
  const auto br = expand_bracket(g, -start, start);
  return find_root(g, br, tol);
}

double critical_coupling(const ModelSpec& model, const QuadratureSpec& spec) {
  const TiltedMeasure m0(model, 0.0, spec);
  const double second = m0.moment(2);
  if (!(second > 0.0)) fail(ErrorCode::NonFinite, "second moment must be positive");
  return 1.0 / second;
}

FixedPointResult solve_fixed_point(const ModelSpec& model, double tol, double h_init,
                                   int max_iterations, const QuadratureSpec& spec) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "fixed-point tolerance must be positive");
  const double j = model.coupling();
  auto make = [&](double h, int iterations) {
    TiltedMeasure ms(model, j * h, spec);
    const double residual = h - ms.mean();
    return FixedPointResult{h, std::move(ms), iterations, residual};
  };
  if (j == 0.0) return make(0.0, 1);

  constexpr double a = 0.5;
  double h = h_init;
  for (int it = 1; it <= max_iterations; ++it) {
    const TiltedMeasure mu(model, j * h, spec);
    const double fh = mu.mean();
    const double r = h - fh;
    // Distance to the fixed point is about |r| / (1 - f'(h)) near a stable root.
    const double slope = j * mu.variance();
    if (slope < 1.0 && std::fabs(r) <= 0.5 * tol * (1.0 - slope)) {
      FixedPointResult out = make(h, it);
      if (std::fabs(out.residual) <= tol) return out;
    }
    h = (1.0 - a) * h + a * fh;
    if (!std::isfinite(h)) break;
  }

  // Fallback: positive root of h - f(h) on (tol, 10), then the symmetric one.
  const RealFn g = [&](double x) { return x - magnetization(model, x, spec); };
  for (const auto& br : {std::pair{tol, 10.0}, std::pair{-10.0, -tol}}) {
    const double ga = g(br.first);
    const double gb = g(br.second);
    if ((ga > 0.0) != (gb > 0.0)) {
      const double root = find_root(g, br, 1e-3 * tol);
      FixedPointResult out = make(root, max_iterations);
      if (std::fabs(out.residual) <= tol) return out;
    }
  }
  fail(ErrorCode::NonConvergent,
       "fixed-point iteration did not converge in " + std::to_string(max_iterations) + " steps");
}

double pi_map_mean(const ModelSpec& model, double input_mean, const QuadratureSpec& spec) {
  return magnetization(model, input_mean, spec);
}

ConcavityReport ghs_concavity_check(const ModelSpec& model, const std::vector<double>& h_grid,
                                    double step, const QuadratureSpec& spec) {
  if (!(step > 0.0)) fail(ErrorCode::InvalidArgument, "difference step must be positive");
  ConcavityReport rep;
  rep.grid = h_grid;
  rep.step = step;
  rep.max_second_difference = -std::numeric_limits<double>::infinity();
  rep.min_mirrored = std::numeric_limits<double>::infinity();
  for (double h : h_grid) {
    if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "concavity grid must be positive");
    auto d2 = [&](double x) {
      return magnetization(model, x + step, spec) - 2.0 * magnetization(model, x, spec) +
             magnetization(model, x - step, spec);
    };
    const double pos = d2(h);
    const double neg = d2(-h);
    rep.second_difference.push_back(pos);
    rep.mirrored.push_back(neg);
    rep.max_second_difference = std::max(rep.max_second_difference, pos);
    rep.min_mirrored = std::min(rep.min_mirrored, neg);
  }
  rep.pass = rep.max_second_difference <= 1e-6 && rep.min_mirrored >= -1e-6;
  return rep;
}

}  // namespace chaoslab
