#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "cqbandit/rng.hpp"

using cqb::Purpose;
using cqb::RngStream;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(cqb::philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(cqb::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(cqb::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are pure functions of their key") {
  RngStream a(42, 3, 17, Purpose::reward), b(42, 3, 17, Purpose::reward);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  std::set<std::uint64_t> firsts;
  firsts.insert(RngStream(42, 3, 17, Purpose::reward).next_u64());
  firsts.insert(RngStream(42, 3, 17, Purpose::cost).next_u64());
  firsts.insert(RngStream(42, 3, 18, Purpose::reward).next_u64());
  firsts.insert(RngStream(42, 4, 17, Purpose::reward).next_u64());
  firsts.insert(RngStream(43, 3, 17, Purpose::reward).next_u64());
  firsts.insert(RngStream(42ull | (1ull << 40), 3, 17, Purpose::reward).next_u64());
  CHECK(firsts.size() == 6);
}

TEST_CASE("uniform, below and bernoulli ranges and moments") {
  RngStream rng(7, 0, 0, Purpose::policy);
  const int n = 200000;
  double sum = 0.0, pos_min = 1.0;
  int hits = 0;
  std::array<int, 7> counts{};
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    pos_min = std::min(pos_min, rng.uniform_pos());
    hits += rng.bernoulli(0.3) ? 1 : 0;
    const auto k = rng.below(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  CHECK(pos_min > 0.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(static_cast<double>(hits) / n == doctest::Approx(0.3).epsilon(0.02));
  for (int c : counts) CHECK(std::abs(c - n / 7.0) < 5.0 * std::sqrt(n / 7.0));
}

TEST_CASE("normal draws have unit variance") {
  RngStream rng(11, 0, 0, Purpose::reward);
  const int n = 200000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    REQUIRE(std::isfinite(z));
    s += z;
    ss += z * z;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
  CHECK(ss / n == doctest::Approx(1.0).epsilon(0.02));
}
