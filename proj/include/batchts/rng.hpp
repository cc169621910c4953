#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "batchts/common.hpp"

namespace batchts {

/// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
///
/// Outputs are a pure integer function of (key, stream, counter), so any
/// draw can be addressed directly and independent streams never need to
/// coordinate. This is what makes replications safe to run in parallel
/// without changing results.
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;

  static Block block(std::uint64_t key, std::uint64_t stream,
                     std::uint64_t counter) {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0;
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return {c0, c1, c2, c3};
  }
};

/// One independent random stream, keyed by (seed, stream id).
///
/// Every uniform consumes exactly one counter tick; all other variates are
/// built from uniforms in a fixed order, so a replication's draw sequence
/// depends only on (seed, stream, draw index).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t draws() const { return counter_; }

  /// Next 64 random bits; advances the counter by one.
  std::uint64_t next_bits() {
    const auto b = Philox4x32::block(seed_, stream_, counter_++);
    return (std::uint64_t{b[0]} << 32) | b[1];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_bits() >> 11) * 0x1.0p-53;
  }

  /// Bernoulli(p) as {0,1}; exact at p = 0 and p = 1 since uniform() < 1.
  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Gamma(shape, 1) for shape >= 1, Marsaglia-Tsang squeeze method.
  double gamma(double shape) {
    if (!(shape >= 1.0)) {
      throw UsageError("RandomStream::gamma requires shape >= 1");
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      const double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
        return d * v;
      }
    }
  }

  /// Beta(a, b) for a, b >= 1 via two gamma variates.
  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace batchts
