#include "chaoslab/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <thread>
#include <vector>

#include "json.hpp"

#include "chaoslab/errors.hpp"
#include "chaoslab/rng.hpp"

namespace chaoslab {
namespace {

struct State {
  std::vector<double> x;
  std::vector<double> grad;
  double log_p = 0.0;
};

void evaluate(const ModelSpec& model, State& s) {
  s.log_p = gibbs_log_density_unnormalized(model, s.x);
  if (std::isnan(s.log_p)) fail(ErrorCode::NonFinite, "log density is NaN");
  if (!std::isfinite(s.log_p)) return;  // rejected by MALA, caught by the ceiling under ULA
  gibbs_log_density_gradient(model, s.x, s.grad);
  for (double g : s.grad) {
    if (!std::isfinite(g)) fail(ErrorCode::NonFinite, "gradient is not finite");
  }
}

// log q(to | from) up to a constant shared by both directions.
double log_proposal(const State& from, const State& to, double h) {
  double acc = 0.0;
  for (std::size_t i = 0; i < from.x.size(); ++i) {
    const double d = to.x[i] - from.x[i] - h * from.grad[i];
    acc += d * d;
  }
  return -acc / (4.0 * h);
}

class Chain {
 public:
  Chain(const ModelSpec& model, const ChainConfig& cfg, std::uint64_t stream)
      : model_(model), cfg_(cfg), rng_(cfg.seed, stream) {
    const auto n = static_cast<std::size_t>(cfg.n_particles);
    cur_.x.assign(n, 0.0);
    cur_.grad.assign(n, 0.0);
    prop_ = cur_;
    evaluate(model_, cur_);
  }

  // Returns the acceptance probability of the step (1 for ULA).
  double step(double h) {
    const std::size_t n = cur_.x.size();
    const double noise = std::sqrt(2.0 * h);
    for (std::size_t i = 0; i < n; ++i) {
      prop_.x[i] = cur_.x[i] + h * cur_.grad[i] + noise * rng_.normal();
    }
    evaluate(model_, prop_);
    double a = 1.0;
    if (cfg_.algorithm == SamplerAlgorithm::Mala) {
      if (!std::isfinite(prop_.log_p)) return 0.0;
      const double log_a = prop_.log_p - cur_.log_p + log_proposal(prop_, cur_, h) -
                           log_proposal(cur_, prop_, h);
      a = log_a >= 0.0 ? 1.0 : std::exp(log_a);
      if (rng_.uniform() >= a) return a;
    }
    std::swap(cur_, prop_);
    if (!std::isfinite(cur_.log_p) || -cur_.log_p / static_cast<double>(n) > cfg_.energy_ceiling) {
      fail(ErrorCode::DivergentChain, "energy per particle exceeded the ceiling");
    }
    return a;
  }

  std::span<const double> state() const { return cur_.x; }

 private:
  const ModelSpec& model_;
  const ChainConfig& cfg_;
  Rng rng_;
  State cur_;
  State prop_;
};

}  // namespace

const char* to_string(SamplerAlgorithm algorithm) noexcept {
  return algorithm == SamplerAlgorithm::Mala ? "mala" : "ula";
}

SamplerAlgorithm sampler_algorithm_from_string(const std::string& name) {
  if (name == "mala") return SamplerAlgorithm::Mala;
  if (name == "ula") return SamplerAlgorithm::Ula;
  fail(ErrorCode::InvalidArgument, "unknown sampler algorithm '" + name + "'");
}

void ChainConfig::validate() const {
  if (n_particles < 1) fail(ErrorCode::InvalidArgument, "n_particles must be >= 1");
  if (!(step_size > 0.0)) fail(ErrorCode::InvalidArgument, "step_size must be positive");
  if (burn_in < 0 || burn_in >= n_steps) {
    fail(ErrorCode::InvalidArgument, "need 0 <= burn_in < n_steps");
  }
  if (thinning < 1) fail(ErrorCode::InvalidArgument, "thinning must be >= 1");
}

ChainSummary run_chain_streaming(const ModelSpec& model, const ChainConfig& cfg,
                                 const DrawVisitor& visit, std::uint64_t stream) {
  cfg.validate();
  if (model.dimension != 1) fail(ErrorCode::InvalidArgument, "sampler supports d = 1");
  Chain chain(model, cfg, stream);
  double accepted = 0.0;
  ChainSummary summary;
  for (std::int64_t t = 1; t <= cfg.n_steps; ++t) {
    accepted += chain.step(cfg.step_size);
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thinning == 0) {
      visit(chain.state());
      ++summary.n_kept;
    }
  }
  summary.acceptance_rate = accepted / static_cast<double>(cfg.n_steps);
  return summary;
}

SampleBatch run_chain(const ModelSpec& model, const ChainConfig& cfg) {
  cfg.validate();
  SampleBatch batch;
  batch.draws = Matrix(static_cast<std::size_t>(cfg.n_kept()),
                       static_cast<std::size_t>(cfg.n_particles));
  std::size_t row = 0;
  const ChainSummary s = run_chain_streaming(model, cfg, [&](std::span<const double> x) {
    std::copy(x.begin(), x.end(), batch.draws.row(row++).begin());
  });
  batch.acceptance_rate = s.acceptance_rate;
  batch.seed = cfg.seed;
  batch.model_fingerprint = model.fingerprint();
  batch.config = cfg;
  return batch;
}

SampleBatch run_chains(const ModelSpec& model, const ChainConfig& cfg, int n_chains,
                       int threads) {
  cfg.validate();
  if (n_chains < 1) fail(ErrorCode::InvalidArgument, "n_chains must be >= 1");
  const auto per = static_cast<std::size_t>(cfg.n_kept());
  const auto n = static_cast<std::size_t>(cfg.n_particles);
  SampleBatch batch;
  batch.draws = Matrix(per * static_cast<std::size_t>(n_chains), n);
  std::vector<double> rates(static_cast<std::size_t>(n_chains), 0.0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chains));

  auto work = [&](int c) {
    try {
      std::size_t row = per * static_cast<std::size_t>(c);
      const ChainSummary s = run_chain_streaming(
          model, cfg,
          [&](std::span<const double> x) {
            std::copy(x.begin(), x.end(), batch.draws.row(row++).begin());
          },
          static_cast<std::uint64_t>(c));
      rates[static_cast<std::size_t>(c)] = s.acceptance_rate;
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };
  const int workers = std::clamp(threads, 1, n_chains);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int c = w; c < n_chains; c += workers) work(c);
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  double rate = 0.0;
  for (double r : rates) rate += r;
  batch.acceptance_rate = rate / n_chains;
  batch.seed = cfg.seed;
  batch.model_fingerprint = model.fingerprint();
  batch.config = cfg;
  return batch;
}

double tune_step_size(const ModelSpec& model, const ChainConfig& cfg, double target) {
  if (cfg.algorithm == SamplerAlgorithm::Ula) return cfg.step_size;
  if (!(target > 0.3 && target < 0.8)) {
    fail(ErrorCode::InvalidArgument, "target acceptance must lie in (0.3, 0.8)");
  }
  if (cfg.n_particles < 1 || !(cfg.step_size > 0.0)) {
    fail(ErrorCode::InvalidArgument, "tuning needs N >= 1 and a positive initial step");
  }
  constexpr int kAdapt = 4000;
  constexpr int kCheck = 4000;
  constexpr double kGamma = 0.05;
  constexpr double kT0 = 10.0;
  constexpr double kKappa = 0.75;

  ChainConfig c = cfg;
  double h = cfg.step_size;
  for (int round = 0; round < 6; ++round) {
    Chain chain(model, c, 1000 + static_cast<std::uint64_t>(round));
    for (int t = 0; t < 500; ++t) chain.step(h);  // leave the origin first
    const double mu = std::log(10.0 * h);
    double h_bar = 0.0;
    double log_h = std::log(h);
    double log_h_avg = log_h;
    for (int t = 1; t <= kAdapt; ++t) {
      const double a = chain.step(std::exp(log_h));
      const double w = 1.0 / (t + kT0);
      h_bar = (1.0 - w) * h_bar + w * (target - a);
      log_h = mu - std::sqrt(static_cast<double>(t)) / kGamma * h_bar;
      const double eta = std::pow(static_cast<double>(t), -kKappa);
      log_h_avg = eta * log_h + (1.0 - eta) * log_h_avg;
    }
    h = std::exp(log_h_avg);
    double acc = 0.0;
    for (int t = 0; t < kCheck; ++t) acc += chain.step(h);
    if (std::fabs(acc / kCheck - target) <= 0.05) return h;
  }
  fail(ErrorCode::NonConvergent, "step-size adaptation did not reach the target acceptance");
}

double batch_means_standard_error(std::span<const double> series, int n_batches) {
  if (n_batches < 2) fail(ErrorCode::InvalidArgument, "need at least 2 batches");
  const std::size_t len = series.size() / static_cast<std::size_t>(n_batches);
  if (len < 1) fail(ErrorCode::InvalidArgument, "series shorter than the batch count");
  std::vector<double> means(static_cast<std::size_t>(n_batches), 0.0);
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += series[b * len + i];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(len);
  }
  double m = 0.0;
  for (double v : means) m += v;
  m /= n_batches;
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  return std::sqrt(ss / (n_batches - 1.0) / n_batches);
}

namespace {

template <typename T>
void put_le(std::ofstream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::ifstream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) fail(ErrorCode::IoError, "truncated sample file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_sample_batch(const std::string& path, const SampleBatch& batch) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out.write("CHAOSLAB", 8);
  put_le<std::uint32_t>(out, kSampleFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(batch.draws.cols));
  for (double v : batch.draws.data) put_le<double>(out, v);
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);

  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(batch.model_fingerprint));
  const ChainConfig& c = batch.config;
  nlohmann::ordered_json j;
  j["format_version"] = kSampleFormatVersion;
  j["rng_algorithm_version"] = Rng::kAlgorithmVersion;
  j["n_particles"] = c.n_particles;
  j["n_rows"] = batch.draws.rows;
  j["algorithm"] = to_string(c.algorithm);
  j["step_size"] = c.step_size;
  j["n_steps"] = c.n_steps;
  j["burn_in"] = c.burn_in;
  j["thinning"] = c.thinning;
  j["seed"] = c.seed;
  j["acceptance_rate"] = batch.acceptance_rate;
  j["model_fingerprint"] = fp;
  std::ofstream side(path + ".json", std::ios::trunc);
  if (!side) fail(ErrorCode::IoError, "cannot open " + path + ".json for writing");
  side << j.dump(2) << '\n';
}

Matrix read_sample_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "CHAOSLAB", 8) != 0) {
    fail(ErrorCode::IoError, path + " is not a sample file");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kSampleFormatVersion) fail(ErrorCode::IoError, "unsupported sample file version");
  const auto n = get_le<std::uint32_t>(in);
  if (n == 0) fail(ErrorCode::IoError, "sample file declares N = 0");
  std::vector<double> values;
  for (;;) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (in.gcount() == 0) break;
    if (in.gcount() != 8) fail(ErrorCode::IoError, "truncated sample file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
    double v;
    std::memcpy(&v, bytes, 8);
    values.push_back(v);
  }
  if (values.size() % n != 0) fail(ErrorCode::IoError, "sample file has a partial row");
  Matrix m(values.size() / n, n);
  m.data = std::move(values);
  return m;
}

}  // namespace chaoslab
