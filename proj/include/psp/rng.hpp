#pragma once

#include <cstdint>
#include <random>

namespace psp {

/// Random stream used by the simulators. Draws are produced from the raw
/// 64-bit engine output so that streams are bit-reproducible across standard
/// library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Exponential with the given rate (> 0).
  double exponential(double rate);
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);

private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t v);

/// Counter-based stream derivation: one independent stream per
/// (base seed, replicate, trajectory) triple.
Rng make_stream(std::uint64_t base_seed, std::uint64_t replicate, std::uint64_t trajectory);

/// Seed of replicate `replicate` derived from the experiment base seed.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate);

} // namespace psp
