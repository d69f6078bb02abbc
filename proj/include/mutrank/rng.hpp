#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mutrank::rng {

// splitmix64 step; used to derive independent stream seeds from a master seed.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled draw helpers. The standard pins the engine's
// output sequence but not the library distributions, so the helpers below
// are what make seeded runs byte-identical across platforms.
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 gen_;
};

// k distinct indices from [0, n), returned in ascending order.
// Partial Fisher-Yates over an index array, then sort of the prefix.
std::vector<std::size_t> sample_without_replacement(Engine& eng, std::size_t n, std::size_t k);

}  // namespace mutrank::rng
