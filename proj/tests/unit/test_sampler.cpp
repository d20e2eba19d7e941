#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"

#include "chaoslab/errors.hpp"
#include "chaoslab/meanfield.hpp"
#include "chaoslab/sampler.hpp"

using namespace chaoslab;

namespace {

ChainConfig small_chain(int n, std::int64_t steps, std::uint64_t seed) {
  ChainConfig c;
  c.n_particles = n;
  c.step_size = 0.2;
  c.n_steps = steps;
  c.burn_in = steps / 10;
  c.thinning = 1;
  c.seed = seed;
  return c;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("chain configuration checks") {
  ChainConfig c = small_chain(4, 100, 1);
  c.burn_in = 100;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_chain(4, 100, 1);
  c.thinning = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_chain(4, 100, 1);
  c.step_size = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(sampler_algorithm_from_string("ula") == SamplerAlgorithm::Ula);
  CHECK_THROWS_AS(sampler_algorithm_from_string("hmc"), Error);
}

TEST_CASE("run_chain: shape, acceptance range and seed determinism") {
  const ModelSpec m = curie_weiss_model(1.0, 1.0, 1.0);
  ChainConfig c = small_chain(6, 5000, 42);
  c.thinning = 3;
  const SampleBatch a = run_chain(m, c);
  const SampleBatch b = run_chain(m, c);
  CHECK(a.draws.rows == static_cast<std::size_t>((5000 - 500) / 3));
  CHECK(a.draws.cols == 6);
  CHECK(a.acceptance_rate > 0.0);
  CHECK(a.acceptance_rate <= 1.0);
  CHECK(a.draws.data == b.draws.data);
  CHECK(a.model_fingerprint == m.fingerprint());
  c.seed = 43;
  CHECK(run_chain(m, c).draws.data != a.draws.data);
}

TEST_CASE("run_chains: stream order is independent of the thread count") {
  const ModelSpec m = curie_weiss_model(1.0, 1.0, 1.0);
  const ChainConfig c = small_chain(4, 2000, 5);
  const SampleBatch one = run_chains(m, c, 3, 1);
  const SampleBatch three = run_chains(m, c, 3, 3);
  CHECK(one.draws.data == three.draws.data);
  CHECK(one.draws.rows == 3 * 1800);
}

TEST_CASE("sample file: header layout and round trip") {
  const ModelSpec m = curie_weiss_model(1.0, 1.0, 0.5);
  const SampleBatch b = run_chain(m, small_chain(5, 300, 9));
  const auto dir = std::filesystem::temp_directory_path() / "chaoslab_sampler_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "draws.bin").string();
  write_sample_batch(path, b);

  std::ifstream in(path, std::ios::binary);
  char head[16];
  in.read(head, 16);
  CHECK(std::memcmp(head, "CHAOSLAB", 8) == 0);
  std::uint32_t version;
  std::uint32_t n;
  std::memcpy(&version, head + 8, 4);
  std::memcpy(&n, head + 12, 4);
  CHECK(version == kSampleFormatVersion);
  CHECK(n == 5);
  CHECK(std::filesystem::file_size(path) == 16 + 8 * b.draws.data.size());

  const Matrix back = read_sample_file(path);
  CHECK(back.rows == b.draws.rows);
  CHECK(back.data == b.draws.data);
  CHECK(std::filesystem::exists(path + ".json"));

  std::ofstream(dir / "junk.bin") << "NOTCHAOS........";
  CHECK_THROWS_AS(read_sample_file((dir / "junk.bin").string()), Error);
}

TEST_CASE("tune_step_size reaches the target acceptance on a fresh pilot") {
  const ModelSpec g = gaussian_model(1.0, 0.5);
  ChainConfig c = small_chain(8, 40000, 3);
  c.step_size = 0.5;
  const double h8 = tune_step_size(g, c, 0.574);
  c.step_size = h8;
  const SampleBatch b = run_chain(g, c);
  CHECK(std::fabs(b.acceptance_rate - 0.574) <= 0.05);

  ChainConfig c16 = small_chain(16, 1000, 3);
  c16.step_size = 0.5;
  CHECK(tune_step_size(g, c16, 0.574) < h8);

  ChainConfig ula = c;
  ula.algorithm = SamplerAlgorithm::Ula;
  ula.step_size = 0.123;
  CHECK(tune_step_size(g, ula) == 0.123);
  CHECK_THROWS_AS(tune_step_size(g, c, 0.9), Error);
}

TEST_CASE("MALA on the Gaussian model: covariance within 3 standard errors") {
  // target covariance (sigma I - J/N 11^T)^{-1}: diagonal 1.25, off-diagonal 0.25.
  // Exchangeable entries are pooled per draw.
  const ModelSpec g = gaussian_model(1.0, 0.5);
  ChainConfig c = small_chain(4, 1010000, 77);
  c.burn_in = 10000;
  c.step_size = 0.6;
  std::vector<double> diag;
  std::vector<double> off;
  run_chain_streaming(g, c, [&](std::span<const double> x) {
    double d = 0.0;
    double o = 0.0;
    for (int i = 0; i < 4; ++i) {
      d += x[i] * x[i];
      for (int j = i + 1; j < 4; ++j) o += x[i] * x[j];
    }
    diag.push_back(d / 4.0);
    off.push_back(o / 6.0);
  });
  REQUIRE(diag.size() == 1000000);
  const auto mean = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
  };
  CHECK(std::fabs(mean(diag) - 1.25) <= 3.0 * batch_means_standard_error(diag));
  CHECK(std::fabs(mean(off) - 0.25) <= 3.0 * batch_means_standard_error(off));
}

TEST_CASE("coordinates are exchangeable") {
  const double jc = critical_coupling(curie_weiss_model(1.0, 1.0, 1.0));
  const ModelSpec m = curie_weiss_model(1.0, 1.0, 0.5 * jc);
  ChainConfig c = small_chain(8, 1010000, 21);
  c.burn_in = 10000;
  c.thinning = 10;
  c.step_size = 0.3;
  std::vector<double> a;
  std::vector<double> b;
  run_chain_streaming(m, c, [&](std::span<const double> x) {
    a.push_back(x[0]);
    b.push_back(x[1]);
  });
  REQUIRE(a.size() == 100000);
  const double crit = 1.628 * std::sqrt(2.0 / 100000.0);  // 1% level
  CHECK(ks_statistic(a, b) < crit);
}

TEST_CASE("ULA with an oversized step diverges") {
  const ModelSpec m = curie_weiss_model(1.0, 1.0, 0.5);
  ChainConfig c = small_chain(4, 1000, 1);
  c.algorithm = SamplerAlgorithm::Ula;
  c.step_size = 5.0;
  try {
    run_chain(m, c);
    FAIL("expected DivergentChain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivergentChain);
  }
}

TEST_CASE("batch means on an iid series") {
  std::vector<double> v(10000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % 2) ? 1.0 : -1.0;
  CHECK(batch_means_standard_error(v, 50) == doctest::Approx(0.0));
  CHECK_THROWS_AS(batch_means_standard_error(std::vector<double>(10, 0.0), 50), Error);
}
