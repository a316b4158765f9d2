#pragma once

#include <cstdint>
#include <random>

namespace wrapcop {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/*
 * Deterministic random source. A (seed, stream) pair fully determines the
 * sequence on every platform: uniforms are built from raw mt19937_64 words,
 * never from distribution adapters. derive() yields independent child
 * streams so parallel replicates stay reproducible under any thread count.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    std::uint64_t s = seed ^ (0x51d1e871u + stream);
    const std::uint64_t a = splitmix64(s);
    splitmix64(s);
    engine_.seed(a ^ splitmix64(s));
  }

  /* Uniform on [0, 1) with 53 random bits. */
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /* Uniform on (0, 1): avoids exact zero for quantile transforms. */
  double uniform_open() {
    double u = uniform();
    return u > 0.0 ? u : 0x1.0p-53;
  }

  std::uint64_t next_word() { return engine_(); }

  std::uint64_t uniform_index(std::uint64_t n) {  // unbiased via rejection
    const std::uint64_t limit = n * (~0ull / n);
    std::uint64_t w;
    do {
      w = engine_();
    } while (w >= limit);
    return w % n;
  }

  /* Child stream i of this rng's (seed, stream) identity. */
  Rng derive(std::uint64_t i) const {
    std::uint64_t s = seed_ ^ (stream_ * 0x9e3779b97f4a7c15ull);
    const std::uint64_t mixed = splitmix64(s);
    return Rng(mixed, i + 1);
  }

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_, stream_;
  std::mt19937_64 engine_;
};

}  // namespace wrapcop
