#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chaoslab/matrix.hpp"
#include "chaoslab/meanfield.hpp"
#include "chaoslab/model.hpp"
#include "chaoslab/numerics.hpp"

namespace chaoslab {

/// Exact law of the N-particle rank-one Gibbs measure as a mixture of IID
/// tilted products:
///   m^{N,k}(x) = int w_N(z) prod_i rho_z(x_i) dz,
///   w_N(z) ~ exp(-N z^2 / (2J)) Z_1(z)^N,  rho_z ~ exp(-V(x) + z x).
/// The z-integral is discretized with Gauss-Legendre nodes on the support of w_N.
struct MixtureLaw {
  ModelSpec model;
  int n_particles = 0;
  std::vector<double> z_nodes;
  std::vector<double> z_log_weights;  // normalized: log-sum-exp = 0
  std::vector<double> per_node_tilt;  // equal to z_nodes
  std::vector<double> node_log_z;     // log Z_1(z) at each node
  double reference_tilt = 0.0;        // tilt of m_* (J h_*)
  double reference_log_z = 0.0;
  QuadratureSpec spec;
};

MixtureLaw build_mixture(const ModelSpec& model, int n_particles, int node_count = 257,
                         const QuadratureSpec& spec = {});

/// log m^{N,k}(point), k = point.size().
double marginal_log_density(const MixtureLaw& law, int k, std::span<const double> point);

/// log of the density ratio m^{N,k} / m_*^{(x)k} as a function of s = sum of the coordinates.
double log_density_ratio(const MixtureLaw& law, int k, double s);

enum class EntropyMethod { ExactGrid, MonteCarlo };

struct EntropyOptions {
  EntropyMethod method = EntropyMethod::ExactGrid;
  std::size_t grid_points = 4096;  // grid for the one-particle reference density
  double grid_sd = 12.0;           // half-width in standard deviations
  std::size_t mc_samples = 1000000;
  std::uint64_t seed = 1;
};

struct EntropyLevels {
  int n_particles = 0;
  std::vector<double> levels;           // levels[k] = H(m^{N,k} | m_*^{(x)k}), levels[0] = 0
  std::vector<double> standard_errors;  // 0 for the exact-grid path
  EntropyMethod method = EntropyMethod::ExactGrid;
};

/// Relative entropies for k = 0..k_max, k_max <= min(N, 8).
EntropyLevels relative_entropy_levels(const MixtureLaw& law, int k_max,
                                      const EntropyOptions& options = {});

/// levels[k] - levels[k-1].
double conditional_entropy_level(const EntropyLevels& levels, int k);

/// KL divergence of the k-marginal of the Gaussian model (theta = 0) from
/// N(0, 1/sigma)^k; k = N gives the full joint.
double gaussian_entropy_oracle(double sigma, double j, int n_particles, int k);

/// Quantile table of the one-particle marginal m^{N,1} on [lo, hi].
QuantileTable marginal_quantile_table(const MixtureLaw& law, double lo, double hi,
                                      std::size_t n_cells = 8192);

/// W_2 distance (not squared) between m^{N,1} and a tilted reference measure.
double wasserstein2_marginal(const MixtureLaw& law, const TiltedMeasure& k1_reference);

/// Draws `count` exact samples of m^{N,k}: a mixture node, then k IID tilted draws.
/// Rows of the result are samples.
Matrix sample_marginal(const MixtureLaw& law, int k, std::size_t count, std::uint64_t seed);

}  // namespace chaoslab
