#include "chaoslab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "chaoslab/errors.hpp"
#include "chaoslab/marginals.hpp"
#include "chaoslab/meanfield.hpp"
#include "chaoslab/metrics.hpp"

namespace chaoslab {
namespace {

void require_subcritical_rank_one(const ModelSpec& model, const QuadratureSpec& spec) {
  if (!model.is_rank_one()) fail(ErrorCode::InvalidArgument, "scan needs a rank-one model");
  const double j = model.coupling();
  if (!(j > 0.0)) fail(ErrorCode::InvalidArgument, "scan needs J > 0");
  if (!(j < critical_coupling(model, spec))) {
    fail(ErrorCode::Supercritical, "scan needs J < J_c");
  }
}

void finish(ScanReport& r) {
  r.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    r.min_margin = std::min(r.min_margin, r.rhs[i] - r.lhs[i]);
  }
  if (r.grid.empty()) r.min_margin = 0.0;
  r.pass = r.min_margin >= -r.tolerance;
}

// H(pi[l] | pi[l0]) and the constant score gap, both by quadrature.
struct TiltPair {
  double entropy;
  double fisher;
};

TiltPair tilt_pair(const ModelSpec& model, double tilt_p, double tilt_ref, double tilt_score,
                   const QuadratureSpec& spec) {
  const TiltedMeasure p(model, tilt_p, spec);
  const TiltedMeasure ref(model, tilt_ref, spec);
  const double h = p.expectation([&](double x) { return p.log_density(x) - ref.log_density(x); });
  const double fi = fisher_information_1d(
      [&](double x) { return -model.grad_v(x) + tilt_p; },
      [&](double x) { return -model.grad_v(x) + tilt_score; },
      [&](double x) { return p.density(x); }, p.spec());
  return {std::max(h, 0.0), fi};
}

double reference_h(const ModelSpec& model, const QuadratureSpec& spec) {
  return solve_fixed_point(model, 1e-12, 0.0, 10000, spec).h_star;
}

}  // namespace

ScanReport nonlinear_lsi_scan(const ModelSpec& model, const ConstantsBundle& bundle,
                              const std::vector<double>& tilt_grid, double tolerance,
                              const QuadratureSpec& spec) {
  require_subcritical_rank_one(model, spec);
  const double j = model.coupling();
  const double h_star = reference_h(model, spec);
  ScanReport r;
  r.tolerance = tolerance;
  for (double ell : tilt_grid) {
    const double f_ell = magnetization(model, ell, spec);
    const TiltPair tp = tilt_pair(model, j * ell, j * h_star, j * f_ell, spec);
    r.grid.push_back(ell);
    r.lhs.push_back(2.0 * bundle.rho * tp.entropy);
    r.rhs.push_back(tp.fisher);
  }
  finish(r);
  return r;
}

ScanReport linear_lsi_scan(const ModelSpec& model, const ConstantsBundle& bundle,
                           const std::vector<double>& tilt_grid, double tolerance,
                           const QuadratureSpec& spec) {
  if (!model.is_rank_one()) fail(ErrorCode::InvalidArgument, "scan needs a rank-one model");
  const double j = model.coupling();
  const double rho = bundle.rho0.value_or(bundle.rho);
  const double h_star = j > 0.0 ? reference_h(model, spec) : 0.0;
  ScanReport r;
  r.tolerance = tolerance;
  for (double ell : tilt_grid) {
    // with J = 0 the grid is read directly as tilts
    const double scale = j > 0.0 ? j : 1.0;
    const TiltPair tp = tilt_pair(model, scale * ell, scale * h_star, scale * h_star, spec);
    r.grid.push_back(ell);
    r.lhs.push_back(2.0 * rho * tp.entropy);
    r.rhs.push_back(tp.fisher);
  }
  finish(r);
  return r;
}

ScanReport phi_positivity_scan(const ModelSpec& model, std::optional<double> eps,
                               const std::vector<double>& h_grid, double tolerance,
                               const QuadratureSpec& spec) {
  require_subcritical_rank_one(model, spec);
  const double j = model.coupling();
  const double e = eps.value_or(std::pow(1.0 - j / critical_coupling(model, spec), 2));
  const double log_z0 = log_partition(model, 0.0, spec);
  ScanReport r;
  r.tolerance = tolerance;
  for (double h : h_grid) {
    double value = 0.0;
    if (h != 0.0) {
      const double ell = inverse_magnetization(model, h, 1e-13, spec);
      value = (1.0 - e) * j * ell * h - (1.0 - e) * log_partition(model, j * ell, spec) -
              j * h * h + log_partition(model, j * h, spec) - e * log_z0;
    }
    r.grid.push_back(h);
    r.lhs.push_back(0.0);
    r.rhs.push_back(value);
  }
  finish(r);
  return r;
}

PsiScan psi_positivity_scan(const ModelSpec& model, double alpha, double m0_mean,
                            const std::vector<double>& offsets, double tolerance,
                            const QuadratureSpec& spec) {
  require_subcritical_rank_one(model, spec);
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorCode::InvalidArgument, "alpha in [0, 1]");
  const double j = model.coupling();
  const double jc = critical_coupling(model, spec);
  auto g = [&](double h) {
    return magnetization(model, alpha * m0_mean + (1.0 - alpha) * h, spec) - h;
  };
  double h_star = 0.0;
  if (g(0.0) != 0.0) h_star = find_root(g, expand_bracket(g, -1.0, 1.0), 1e-14);
  const double f_star = magnetization(model, h_star, spec);
  const double log_z_star = log_partition(model, j * h_star, spec);

  PsiScan out;
  out.h_star = h_star;
  ScanReport& r = out.report;
  r.tolerance = tolerance;
  for (double off : offsets) {
    const double ell = h_star + off;
    double value = 0.0;
    if (off != 0.0) {
      const double f_ell = magnetization(model, ell, spec);
      value = -0.5 * jc * (f_ell - f_star) * (f_ell - f_star) + j * (ell - h_star) * f_ell -
              log_partition(model, j * ell, spec) + log_z_star;
    }
    r.grid.push_back(ell);
    r.lhs.push_back(0.0);
    r.rhs.push_back(value);
  }
  finish(r);
  return out;
}

double jw_log_mgf(const ModelSpec& model, int n_particles, const QuadratureSpec& spec) {
  require_subcritical_rank_one(model, spec);
  if (n_particles < 1) fail(ErrorCode::InvalidArgument, "N >= 1 required");
  const double j = model.coupling();
  const double n = static_cast<double>(n_particles);
  const double log_z0 = log_partition(model, 0.0, spec);
  QuadratureSpec zs = spec;
  zs.center = 0.0;
  zs.initial_half_width = std::sqrt(j / n);
  const double log_int = log_integrate_exp(
      [&](double z) { return -n * z * z / (2.0 * j) + n * (log_partition(model, z, spec) - log_z0); },
      zs);
  return log_int + 0.5 * std::log(n / (2.0 * std::numbers::pi * j));
}

BolleyVillaniReport bolley_villani_moment_check(const RealFn& mu_quantile, double rho,
                                                double delta, double tolerance) {
  if (!(rho > 0.0)) fail(ErrorCode::InvalidArgument, "rho must be positive");
  // Integrals over u in (0, 1) are taken in the Gaussian coordinate u = Phi(t).
  constexpr double kT = 37.5;
  // Phi(t) rounds to 1 well before kT; the upper half stops where levels are still below 1.
  double t_hi = 8.0;
  while (normal_cdf(t_hi + 0.01) < 1.0) t_hi += 0.01;
  QuadratureSpec qs;
  qs.max_subdivisions = 400;
  const double mean = integrate_interval(
      [&](double t) {
        const double w = normal_pdf(t);
        return w == 0.0 ? 0.0 : mu_quantile(normal_cdf(t)) * w;
      },
      -kT, t_hi, qs);
  auto log_f = [&](double t) {
    const double d = mu_quantile(normal_cdf(t)) - mean;
    return 0.25 * rho * d * d - 0.5 * t * t - 0.5 * std::log(2.0 * std::numbers::pi);
  };
  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 600; ++i) peak = std::max(peak, log_f(-kT + (t_hi + kT) * i / 600.0));
  if (!std::isfinite(peak)) fail(ErrorCode::NonFinite, "moment integrand is not finite");
  if (log_f(-kT) > peak - 36.0 || log_f(t_hi) >= log_f(t_hi - 0.5)) {
    fail(ErrorCode::DivergentIntegral, "tail too heavy for exp(rho (x - mean)^2 / 4)");
  }
  const double scaled = integrate_interval([&](double t) { return std::exp(log_f(t) - peak); },
                                           -kT, t_hi, qs);
  BolleyVillaniReport rep;
  rep.moment = std::exp(peak) * scaled;
  rep.bound = std::numbers::sqrt2 * std::exp(delta);
  rep.pass = rep.moment <= rep.bound * (1.0 + tolerance);
  return rep;
}

ScanReport marginal_t1_ratio_scan(const ModelSpec& model, int n_particles,
                                  const ConstantsBundle& bundle,
                                  const std::vector<double>& tilt_grid,
                                  std::optional<double> constant_override, double tolerance,
                                  const QuadratureSpec& spec) {
  require_subcritical_rank_one(model, spec);
  double constant = 0.0;
  if (constant_override) {
    constant = *constant_override;
  } else {
    if (!bundle.lambda_n || !bundle.delta_n) {
      fail(ErrorCode::InvalidConstants, "bundle lacks lambda_N and delta_N");
    }
    constant = t1_particle_constant(*bundle.lambda_n, *bundle.delta_n);
  }
  const double j = model.coupling();
  const MixtureLaw law = build_mixture(model, n_particles, 257, spec);
  const TiltedMeasure left(model, law.z_nodes.front(), spec);
  const TiltedMeasure right(model, law.z_nodes.back(), spec);

  ScanReport r;
  r.tolerance = tolerance;
  for (double ell : tilt_grid) {
    const TiltedMeasure p(model, j * ell, spec);
    double lo = std::min({left.window().lo, right.window().lo, p.window().lo});
    double hi = std::max({left.window().hi, right.window().hi, p.window().hi});
    const double pad = 0.25 * (hi - lo);
    lo -= pad;
    hi += pad;
    const QuantileTable qm = marginal_quantile_table(law, lo, hi);
    const QuantileTable qp = QuantileTable::from_log_density(
        [&](double x) { return p.log_density(x); }, lo, hi, 8192);
    const double w1 = wasserstein_1d([&](double u) { return qp.quantile(u); },
                                     [&](double u) { return qm.quantile(u); }, 1);
    const double h = integrate_on(
        [&](double x) {
          const double lp = p.log_density(x);
          const double pd = std::exp(lp);
          if (pd == 0.0) return 0.0;
          const double pt[1] = {x};
          return pd * (lp - marginal_log_density(law, 1, pt));
        },
        p.window(), p.spec());
    r.grid.push_back(ell);
    r.lhs.push_back(w1 * w1);
    r.rhs.push_back(constant * std::max(h, 0.0));
  }
  finish(r);
  return r;
}

}  // namespace chaoslab
