#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace adnet {

/// Mixes a master seed with a component tag and indices (splitmix64 rounds
/// over an FNV-1a hash of the tag). Every random stream in the library is
/// obtained this way, so a run is fully determined by one 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::initializer_list<std::uint64_t> indices = {});

/// 64-bit Mersenne twister with explicit, platform-independent conversions
/// to uniforms and exponentials.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_open_low()) / rate; }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

  /// Draw from an (unnormalized, nonnegative) probability vector.
  std::size_t categorical(std::span<const double> weights);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace adnet
