#pragma once

#include <cstdint>
#include <cstddef>
#include <random>
#include <vector>

namespace chaoslab {

/// Random stream, algorithm version 1.
///
/// The engine is std::mt19937_64 seeded with a single 64-bit word taken from
/// splitmix64. Stream `s` of root seed `r` starts splitmix64 at
/// r + (s + 1) * 0x9E3779B97F4A7C15. Uniforms use the top 53 bits; normals use
/// Box-Muller and return the sine branch on the next call.
class Rng {
 public:
  static constexpr std::uint32_t kAlgorithmVersion = 1;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_positive() { return 1.0 - uniform(); }
  double normal();
  /// Index drawn from a cumulative distribution (last entry 1).
  std::size_t categorical(const std::vector<double>& cumulative);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace chaoslab
