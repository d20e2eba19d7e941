#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "chaoslab/matrix.hpp"
#include "chaoslab/model.hpp"

namespace chaoslab {

enum class SamplerAlgorithm { Mala, Ula };

const char* to_string(SamplerAlgorithm algorithm) noexcept;
SamplerAlgorithm sampler_algorithm_from_string(const std::string& name);

struct ChainConfig {
  int n_particles = 0;
  double step_size = 0.05;
  std::int64_t n_steps = 0;
  std::int64_t burn_in = 0;
  std::int64_t thinning = 1;
  std::uint64_t seed = 1;
  SamplerAlgorithm algorithm = SamplerAlgorithm::Mala;
  /// DivergentChain once the energy per particle exceeds this value.
  double energy_ceiling = 1e8;

  std::int64_t n_kept() const { return (n_steps - burn_in) / thinning; }
  void validate() const;
};

struct SampleBatch {
  Matrix draws;  // n_kept x N
  double acceptance_rate = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t model_fingerprint = 0;
  ChainConfig config;
};

struct ChainSummary {
  std::int64_t n_kept = 0;
  double acceptance_rate = 1.0;
};

/// Called once per kept state, in chain order.
using DrawVisitor = std::function<void(std::span<const double>)>;

/// Runs one chain started at the origin, RNG stream `stream` of cfg.seed.
/// MALA targets the Gibbs measure exactly; ULA has an O(step_size) bias.
ChainSummary run_chain_streaming(const ModelSpec& model, const ChainConfig& cfg,
                                 const DrawVisitor& visit, std::uint64_t stream = 0);

SampleBatch run_chain(const ModelSpec& model, const ChainConfig& cfg);

/// Independent chains on streams 0..n_chains-1, concatenated in stream order.
SampleBatch run_chains(const ModelSpec& model, const ChainConfig& cfg, int n_chains,
                       int threads = 1);

/// Dual averaging of log step size towards the target MALA acceptance rate.
/// ULA configurations are returned unchanged.
double tune_step_size(const ModelSpec& model, const ChainConfig& cfg,
                      double target_acceptance = 0.574);

/// Standard error of the mean of a correlated series by non-overlapping batch means.
double batch_means_standard_error(std::span<const double> series, int n_batches = 50);

/// Binary layout: "CHAOSLAB", u32 version, u32 N, then row-major little-endian f64.
/// A JSON sidecar `<path>.json` records the chain configuration and fingerprint.
void write_sample_batch(const std::string& path, const SampleBatch& batch);
Matrix read_sample_file(const std::string& path);

inline constexpr std::uint32_t kSampleFormatVersion = 1;

}  // namespace chaoslab
