#pragma once

#include <cmath>
#include <cstdint>

namespace qpcm {

// splitmix64 step; the workhorse behind all synthetic-data randomness.
// Hand-rolled (instead of <random>) because std distributions are not
// bit-reproducible across standard libraries, and synthetic datasets must be
// byte-identical for a given seed on every platform.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-keyed random stream. Streams keyed by (seed, tag, die, element) are
// independent, so generation order and parallelism cannot change the output.
class RngStream {
 public:
  static RngStream keyed(std::uint64_t seed, std::uint64_t tag,
                         std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    splitmix64(s);
    s ^= tag * 0x9E3779B97F4A7C15ULL;
    splitmix64(s);
    s ^= a * 0xC2B2AE3D27D4EB4FULL;
    splitmix64(s);
    s ^= b * 0x165667B19E3779F9ULL;
    splitmix64(s);
    return RngStream(s);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (explicit formula; portable).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  explicit RngStream(std::uint64_t s) : state_(s) {}

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qpcm
