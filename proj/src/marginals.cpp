#include "chaoslab/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include "chaoslab/errors.hpp"
#include "chaoslab/metrics.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Nodes this far below the heaviest one are dropped from density sums.
constexpr double kPruneLog = -60.0;

// phi(e^u) = e^u u - e^u + 1, accurate for small u.
double entropy_kernel(double u) {
  if (std::fabs(u) < 0.1) {
    double term = u * u;
    double s = 0.0;
    double fact = 2.0;  // n!
    for (int n = 2; n <= 12; ++n) {
      s += term * (n - 1) / fact;
      term *= u;
      fact *= (n + 1);
    }
    return s;
  }
  const double g = std::exp(u);
  return g * u - g + 1.0;
}

struct NodeTerm {
  double log_weight;
  double z;
  double log_z;
};

std::vector<NodeTerm> active_nodes(const MixtureLaw& law) {
  double top = kNegInf;
  for (double w : law.z_log_weights) top = std::max(top, w);
  std::vector<NodeTerm> out;
  for (std::size_t j = 0; j < law.z_nodes.size(); ++j) {
    if (law.z_log_weights[j] - top < kPruneLog) continue;
    out.push_back({law.z_log_weights[j], law.z_nodes[j], law.node_log_z[j]});
  }
  return out;
}

double log_ratio_at(const std::vector<NodeTerm>& nodes, const MixtureLaw& law, int k, double s,
                    std::vector<double>& scratch) {
  scratch.resize(nodes.size());
  const double kk = static_cast<double>(k);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const NodeTerm& n = nodes[j];
    scratch[j] = n.log_weight + (n.z - law.reference_tilt) * s + kk * (law.reference_log_z - n.log_z);
  }
  return log_sum_exp(scratch);
}

}  // namespace

MixtureLaw build_mixture(const ModelSpec& model, int n_particles, int node_count,
                         const QuadratureSpec& spec) {
  const double j = model.coupling();
  if (!(j > 0.0)) {
    fail(ErrorCode::InvalidArgument, "the mixture representation requires J > 0");
  }
  if (n_particles < 1) fail(ErrorCode::InvalidArgument, "N must be >= 1");
  if (node_count < 32) fail(ErrorCode::InvalidArgument, "node_count must be >= 32");
  const double n = static_cast<double>(n_particles);

  MixtureLaw law;
  law.model = model;
  law.n_particles = n_particles;
  law.spec = spec;

  const FixedPointResult fp = solve_fixed_point(model, 1e-12, 0.0, 10000, spec);
  law.reference_tilt = fp.m_star.tilt();
  law.reference_log_z = fp.m_star.log_z();

  const RealFn log_w = [&](double z) {
    return -n * z * z / (2.0 * j) + n * log_partition(model, z, spec);
  };
  QuadratureSpec search = spec;
  search.center = 0.0;
  search.initial_half_width = std::sqrt(j / n);
  search.truncation_threshold = 1e-20;
  const Window win = find_log_window(log_w, search);

  const GaussLegendreRule gl = gauss_legendre(node_count);
  const double half = 0.5 * (win.hi - win.lo);
  const double mid = 0.5 * (win.hi + win.lo);
  law.z_nodes.resize(node_count);
  law.z_log_weights.resize(node_count);
  law.node_log_z.resize(node_count);
  for (int i = 0; i < node_count; ++i) {
    const double z = mid + half * gl.nodes[i];
    const double lz = log_partition(model, z, spec);
    law.z_nodes[i] = z;
    law.node_log_z[i] = lz;
    law.z_log_weights[i] = std::log(gl.weights[i] * half) - n * z * z / (2.0 * j) + n * lz;
  }
  const double norm = log_sum_exp(law.z_log_weights);
  if (!std::isfinite(norm)) fail(ErrorCode::NonFinite, "mixture weights are not finite");
  for (double& w : law.z_log_weights) w -= norm;
  law.per_node_tilt = law.z_nodes;
  return law;
}

double marginal_log_density(const MixtureLaw& law, int k, std::span<const double> point) {
  if (k < 1 || k > law.n_particles || point.size() != static_cast<std::size_t>(k)) {
    fail(ErrorCode::InvalidArgument, "marginal order must satisfy 1 <= k <= N with k coordinates");
  }
  double sum_x = 0.0;
  double sum_v = 0.0;
  for (double x : point) {
    sum_x += x;
    sum_v += law.model.v(x);
  }
  std::vector<double> terms(law.z_nodes.size());
  for (std::size_t j = 0; j < law.z_nodes.size(); ++j) {
    terms[j] = law.z_log_weights[j] + law.z_nodes[j] * sum_x - k * law.node_log_z[j];
  }
  return log_sum_exp(terms) - sum_v;
}

double log_density_ratio(const MixtureLaw& law, int k, double s) {
  const auto nodes = active_nodes(law);
  std::vector<double> scratch;
  return log_ratio_at(nodes, law, k, s, scratch);
}

EntropyLevels relative_entropy_levels(const MixtureLaw& law, int k_max,
                                      const EntropyOptions& options) {
  if (k_max < 1 || k_max > std::min(law.n_particles, 8)) {
    fail(ErrorCode::InvalidArgument, "k_max must satisfy 1 <= k_max <= min(N, 8)");
  }
  EntropyLevels out;
  out.n_particles = law.n_particles;
  out.method = options.method;
  out.levels.assign(k_max + 1, 0.0);
  out.standard_errors.assign(k_max + 1, 0.0);
  const auto nodes = active_nodes(law);
  std::vector<double> scratch;

  if (options.method == EntropyMethod::MonteCarlo) {
    if (options.mc_samples < 2) fail(ErrorCode::InvalidArgument, "need at least two MC samples");
    const Matrix draws = sample_marginal(law, k_max, options.mc_samples, options.seed);
    for (int k = 1; k <= k_max; ++k) {
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::size_t i = 0; i < draws.rows; ++i) {
        double s = 0.0;
        for (int c = 0; c < k; ++c) s += draws(i, c);
        const double l = log_ratio_at(nodes, law, k, s, scratch);
        sum += l;
        sum_sq += l * l;
      }
      const double nn = static_cast<double>(draws.rows);
      const double mean = sum / nn;
      const double var = std::max(0.0, (sum_sq - nn * mean * mean) / (nn - 1.0));
      out.levels[k] = mean;
      out.standard_errors[k] = std::sqrt(var / nn);
    }
    return out;
  }

  // Exact grid: the ratio depends on the point only through s, so
  // H_k = int p0_k(s) phi(g_k(s)) ds with p0_k the k-fold self-convolution
  // of the reference one-particle density.
  const TiltedMeasure ref(law.model, law.reference_tilt, law.spec);
  const double mu = ref.mean();
  const double sd = std::sqrt(ref.variance());
  double lo = mu - options.grid_sd * sd;
  double hi = mu + options.grid_sd * sd;
  double zmin = law.reference_tilt;
  double zmax = law.reference_tilt;
  for (const NodeTerm& nd : nodes) {
    zmin = std::min(zmin, nd.z);
    zmax = std::max(zmax, nd.z);
  }
  for (double z : {zmin, zmax}) {
    const TiltedMeasure tz(law.model, z, law.spec);
    const double m = tz.mean();
    const double s = std::sqrt(tz.variance());
    lo = std::min(lo, m - options.grid_sd * s);
    hi = std::max(hi, m + options.grid_sd * s);
  }

  GridDensity p0 = GridDensity::sample([&](double x) { return ref.density(x); }, lo, hi,
                                       options.grid_points);
  const double defect = std::fabs(p0.mass() - 1.0);
  if (defect > 1e-6) {
    fail(ErrorCode::GridResolution,
         "reference density grid loses mass " + std::to_string(defect));
  }
  p0.normalize();

  GridDensity pk = p0;
  for (int k = 1; k <= k_max; ++k) {
    if (k > 1) pk = convolve(pk, p0);
    const std::size_t m = pk.n_points();
    const double h = pk.spacing();
    std::vector<double> lr(m, kNegInf);
    for (std::size_t i = 0; i < m; ++i) {
      if (pk.values[i] > 0.0) lr[i] = log_ratio_at(nodes, law, k, pk.x(i), scratch);
    }
    double e = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (pk.values[i] == 0.0) continue;
      const double wt = (i == 0 || i + 1 == m) ? 0.5 : 1.0;
      e += wt * pk.values[i] * std::exp(lr[i]);
    }
    e *= h;
    if (!(std::fabs(e - 1.0) <= 1e-6)) {
      fail(ErrorCode::GridResolution,
           "mixture mass on the k = " + std::to_string(k) + " grid is " + std::to_string(e));
    }
    const double log_e = std::log(e);
    double hk = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (pk.values[i] == 0.0) continue;
      const double wt = (i == 0 || i + 1 == m) ? 0.5 : 1.0;
      hk += wt * pk.values[i] * entropy_kernel(lr[i] - log_e);
    }
    out.levels[k] = hk * h;
  }
  return out;
}

double conditional_entropy_level(const EntropyLevels& levels, int k) {
  if (k < 1 || k >= static_cast<int>(levels.levels.size())) {
    fail(ErrorCode::InvalidArgument, "conditional level index out of range");
  }
  return levels.levels[k] - levels.levels[k - 1];
}

double gaussian_entropy_oracle(double sigma, double j, int n_particles, int k) {
  if (n_particles < 1 || k < 0 || k > n_particles) {
    fail(ErrorCode::InvalidArgument, "oracle requires 0 <= k <= N and N >= 1");
  }
  if (!(sigma > 0.0) || !(sigma - j > 0.0)) {
    fail(ErrorCode::NonPositiveDefinite, "precision sigma I - (J/N) 1 1^T is not positive definite");
  }
  // Marginal covariance (I + c 1 1^T) / sigma with c = J / (N (sigma - J)).
  const double x = k * j / (n_particles * (sigma - j));
  return 0.5 * (x - std::log1p(x));
}

QuantileTable marginal_quantile_table(const MixtureLaw& law, double lo, double hi,
                                      std::size_t n_cells) {
  return QuantileTable::from_log_density(
      [&](double x) {
        const double p[1] = {x};
        return marginal_log_density(law, 1, p);
      },
      lo, hi, n_cells);
}

double wasserstein2_marginal(const MixtureLaw& law, const TiltedMeasure& k1_reference) {
  const Window& w = k1_reference.window();
  const double mu = k1_reference.mean();
  const double half = 1.5 * std::max(mu - w.lo, w.hi - mu);
  const double lo = mu - half;
  const double hi = mu + half;
  const QuantileTable qp = marginal_quantile_table(law, lo, hi);
  const QuantileTable qq = QuantileTable::from_log_density(
      [&](double x) { return k1_reference.log_density(x); }, lo, hi, 8192);
  const double w2sq = wasserstein_1d([&](double u) { return qp.quantile(u); },
                                     [&](double u) { return qq.quantile(u); }, 2);
  return std::sqrt(w2sq);
}

Matrix sample_marginal(const MixtureLaw& law, int k, std::size_t count, std::uint64_t seed) {
  if (k < 1 || k > law.n_particles) fail(ErrorCode::InvalidArgument, "1 <= k <= N required");
  const std::size_t nodes = law.z_nodes.size();
  std::vector<double> cumulative(nodes);
  double acc = 0.0;
  for (std::size_t j = 0; j < nodes; ++j) {
    acc += std::exp(law.z_log_weights[j]);
    cumulative[j] = acc;
  }
  for (double& c : cumulative) c /= acc;
  cumulative.back() = 1.0;

  std::vector<std::unique_ptr<QuantileTable>> tables(nodes);
  auto table = [&](std::size_t j) -> const QuantileTable& {
    if (!tables[j]) {
      const TiltedMeasure tz(law.model, law.z_nodes[j], law.spec);
      const Window& w = tz.window();
      tables[j] = std::make_unique<QuantileTable>(QuantileTable::from_log_density(
          [&](double x) { return tz.log_density(x); }, w.lo, w.hi, 2048));
    }
    return *tables[j];
  };

  Rng rng(seed, 0);
  Matrix out(count, static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = rng.categorical(cumulative);
    const QuantileTable& t = table(j);
    for (int c = 0; c < k; ++c) out(i, c) = t.quantile(rng.uniform());
  }
  return out;
}

}  // namespace chaoslab
