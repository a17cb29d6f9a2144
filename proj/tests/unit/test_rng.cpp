#include <doctest.h>

#include <set>

#include "qtraj/rng.hpp"

using namespace qtraj;

// Known answers from numpy.random.Philox (4x64-10). numpy increments the
// counter before producing a block, so its outputs for state c equal
// philox4x64(c + 1).
TEST_CASE("philox known answers") {
  SUBCASE("zero key, counters 1 and 2") {
    const auto b1 = philox4x64({1, 0, 0, 0}, {0, 0});
    CHECK(b1[0] == 0x02f4ba6408e4d89bULL);
    CHECK(b1[1] == 0x3dd62b0b9ca8c5b2ULL);
    CHECK(b1[2] == 0x1c8667a55d902e79ULL);
    CHECK(b1[3] == 0x907d7a052fd5b4dcULL);
    const auto b2 = philox4x64({2, 0, 0, 0}, {0, 0});
    CHECK(b2[0] == 0x809bf322883987c3ULL);
    CHECK(b2[1] == 0x471128b9e807f7ddULL);
    CHECK(b2[2] == 0xf250ba0dbec065b7ULL);
    CHECK(b2[3] == 0xfc6ed66767a457bcULL);
  }
  SUBCASE("all-ones key, zero counter") {
    const std::uint64_t ones = ~0ULL;
    const auto b = philox4x64({0, 0, 0, 0}, {ones, ones});
    CHECK(b[0] == 0x44b7493d1acfc229ULL);
    CHECK(b[1] == 0x6636af8e997921ddULL);
    CHECK(b[2] == 0x3f73e132b5b3780eULL);
    CHECK(b[3] == 0x605644dde03b01b1ULL);
  }
  SUBCASE("mixed counter and key") {
    const auto b = philox4x64({6, 0, 7, 0}, {123, 0});
    CHECK(b[0] == 0x551c5988e5f8331dULL);
    CHECK(b[1] == 0xb9a71a13e94c2f89ULL);
    CHECK(b[2] == 0x84d5e1553a30e044ULL);
    CHECK(b[3] == 0xbc40f5a9fa76d59dULL);
  }
}

TEST_CASE("stream reproducibility and independence") {
  PhiloxStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    CHECK(x == b());
    seen.insert(x);
    seen.insert(c());
    seen.insert(d());
  }
  CHECK(seen.size() == 3000);
  CHECK(a.draws() == 1000);
}

TEST_CASE("uniform lies in the open unit interval with the right mean") {
  PhiloxStream s(7, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
}
