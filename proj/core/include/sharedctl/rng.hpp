#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace sharedctl {

/// SplitMix64 step: advances state and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent substream seed by folding a path of indices
/// (e.g. {operator, repetition, goal, attempt}) into the base seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// Portable random stream. The engine's output sequence is fixed by the C++
/// standard, and the conversions below avoid the implementation-defined
/// standard distributions, so a seed reproduces the same draws everywhere.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm =
      "mt19937_64; seed = splitmix64 substream derivation; uniform = (x >> 11) * 2^-53; "
      "categorical = inverse CDF over the listed order";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Index drawn from a discrete distribution (weights need not be normalized).
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace sharedctl
