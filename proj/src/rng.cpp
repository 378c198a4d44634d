#include "psp/rng.hpp"

#include <cmath>

namespace psp {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
  // 53 random bits, shifted by half an ulp to stay off 0.
  const auto bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

std::size_t Rng::index(std::size_t n) {
  auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

std::uint64_t mix64(std::uint64_t v) {
  v += 0x9e3779b97f4a7c15ULL;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
  return v ^ (v >> 31);
}

Rng make_stream(std::uint64_t base_seed, std::uint64_t replicate, std::uint64_t trajectory) {
  const std::uint64_t key = mix64(mix64(mix64(base_seed) ^ replicate) ^ (trajectory + 0x632be59bd9b4e019ULL));
  return Rng(key);
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate) {
  return mix64(base_seed ^ mix64(replicate + 1));
}

} // namespace psp
