#pragma once

#include <cmath>
#include <cstdint>

namespace gcx {

/// Counter-based pseudorandom generator. Every draw is a pure function of
/// (seed, stream, counter), so a stream can be split into independent child
/// streams without coordinating state, and identical seeds always reproduce
/// identical draw sequences.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() {
    return mix(seed_ + 0x9e3779b97f4a7c15ull * (stream_ + 1), counter_++);
  }

  /// Uniform draw in (0, 1].
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  /// Child generator on an independent stream. Children of distinct indices
  /// (and of distinct parents) never overlap.
  SeededRng split(std::uint64_t substream) const {
    return SeededRng(seed_, mix(stream_ + 0x632be59bd9b4e019ull, substream));
  }

 private:
  static std::uint64_t mix(std::uint64_t key, std::uint64_t ctr) {
    std::uint64_t z = key + ctr * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gcx
