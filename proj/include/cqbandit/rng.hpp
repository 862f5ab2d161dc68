#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cqb {

/// What a stream is used for. Each purpose gets its own independent stream
/// per (replication, round), so e.g. reward noise does not shift when a
/// policy consumes a different number of action draws.
enum class Purpose : std::uint32_t {
  context = 1,
  cost = 2,
  reward = 3,
  policy = 4,
  instance = 5,
};

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Counter-based random stream keyed by (seed, replication, round, purpose).
///
/// Output k of a stream is a pure function of the key tuple and k, so any
/// stream can be reconstructed without replaying earlier draws. Distribution
/// transforms are written out here rather than using <random> distributions,
/// whose algorithms are implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint32_t replication, std::uint32_t round, Purpose purpose)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replication_(replication),
        round_(round),
        purpose_(static_cast<std::uint32_t>(purpose)) {}

  std::uint64_t next_u64() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    const auto out = philox4x32({block_++, round_, replication_, purpose_}, key_);
    spare_ = (std::uint64_t{out[2]} << 32) | out[3];
    cached_ = true;
    return (std::uint64_t{out[0]} << 32) | out[1];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1], safe for log().
  double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  bool bernoulli(double prob) { return uniform() < prob; }

  /// Uniform integer in [0, n) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller (one value per call; the pair's twin is discarded).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t replication_, round_, purpose_;
  std::uint32_t block_ = 0;
  std::uint64_t spare_ = 0;
  bool cached_ = false;
};

}  // namespace cqb
