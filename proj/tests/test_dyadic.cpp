#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "flowline/dyadic.hpp"

using namespace flowline;

namespace {

Dyadic random_dyadic(std::mt19937_64& rng, int max_exp = 8, long max_num = 1 << 12) {
  std::uniform_int_distribution<long> num(-max_num, max_num);
  std::uniform_int_distribution<int> exp(0, max_exp);
  return Dyadic::from_parts(num(rng), exp(rng));
}

}  // namespace

TEST_CASE("arithmetic basics") {
  CHECK(half(1) + dy(1, 2) == dy(3, 2));           // 1/2 + 1/4 = 3/4
  CHECK(dy(3, 2) * Dyadic(0) == Dyadic(0));        // 3/4 * 0 = 0
  CHECK(dy(5, 3) < dy(3, 2));                      // 5/8 < 3/4
  CHECK((dy(5, 3) <=> dy(3, 2)) == std::strong_ordering::less);
}

TEST_CASE("normalization is canonical") {
  CHECK(Dyadic::from_parts(6, 3) == Dyadic::from_parts(3, 2));
  CHECK(Dyadic::from_parts(0, 7) == Dyadic(0));
  CHECK(Dyadic::from_parts(8, 3) == Dyadic(1));
  CHECK(Dyadic::from_parts(12, 2) == Dyadic(3));
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    Dyadic a = random_dyadic(rng);
    CHECK((a.exp() == 0 || (a.num() & 1) == 1));
    CHECK(Dyadic::from_parts(a.num() * 16, a.exp() + 4) == a);
  }
}

TEST_CASE("floor and ceil") {
  CHECK(dy(3, 2).floor() == 0);
  CHECK(dy(-3, 2).floor() == -1);
  CHECK(dy(-3, 2).ceil() == 0);
  CHECK(Dyadic(5).floor() == 5);
  CHECK(dy(9, 2).floor() == 2);   // 9/4
  CHECK(dy(-9, 2).floor() == -3);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    Dyadic a = random_dyadic(rng);
    BigInt f = a.floor();
    CHECK(Dyadic(f) <= a);
    CHECK(a < Dyadic(f + 1));
  }
}

TEST_CASE("mul_pow2 exactness") {
  CHECK(dy(3, 4).mul_pow2(4) == Dyadic(3));
  CHECK(Dyadic(3).mul_pow2(-4) == dy(3, 4));
  CHECK(dy(3, 1).mul_pow2(1) == Dyadic(3));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    Dyadic a = random_dyadic(rng);
    for (int e = -6; e <= 6; ++e) CHECK(a.mul_pow2(e).mul_pow2(-e) == a);
  }
}

TEST_CASE("doubling map") {
  CHECK(doubling_map(half(1), dy(3, 2), 1) == Dyadic(1));   // h_{1/2}(3/4) = 1
  CHECK(doubling_map(dy(7, 3), dy(7, 3), 5) == dy(7, 3));   // fixed point
  CHECK(doubling_map(Dyadic(0), dy(3, 4), -1) == dy(3, 5)); // 3/16 -> 3/32

  std::mt19937_64 rng(19);
  for (int i = 0; i < 200; ++i) {
    Dyadic x0 = random_dyadic(rng);
    Dyadic x = random_dyadic(rng);
    std::uniform_int_distribution<int> pw(-5, 5);
    int n = pw(rng), m = pw(rng);
    CHECK(doubling_map(x0, doubling_map(x0, x, m), n) == doubling_map(x0, x, n + m));
  }
}

TEST_CASE("text round trip p/2^k") {
  CHECK(dy(3, 2).str() == "3/2^2");
  CHECK(Dyadic(-7).str() == "-7");
  CHECK(Dyadic::parse("3/2^2") == dy(3, 2));
  CHECK(Dyadic::parse("-5/2^1") == dy(-5, 1));
  CHECK(Dyadic::parse("42") == Dyadic(42));
  CHECK(!Dyadic::parse("1/3").has_value());
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    Dyadic a = random_dyadic(rng);
    CHECK(Dyadic::parse(a.str()) == a);
  }
}

TEST_CASE("pow2 helpers") {
  CHECK(dy(1, 3).as_pow2() == -3);
  CHECK(Dyadic(8).as_pow2() == 3);
  CHECK(!dy(3, 2).as_pow2().has_value());
  CHECK(ratio_pow2(dy(1, 2), Dyadic(1)) == 2);
  CHECK(ratio_pow2(Dyadic(3), dy(3, 4)) == -4);
  CHECK(!ratio_pow2(Dyadic(3), Dyadic(5)).has_value());
}

TEST_CASE("intervals") {
  DyInterval i = DyInterval::open(Dyadic(0), half(1));
  CHECK(i.contains(dy(1, 3)));
  CHECK(!i.contains(Dyadic(0)));
  CHECK(DyInterval::closed(Dyadic(0), half(1)).contains(Dyadic(0)));
  CHECK(i.length() == half(1));
  auto j = intersect_open(i, DyInterval::open(dy(1, 2), Dyadic(2)));
  REQUIRE(j.has_value());
  CHECK(j->lo == dy(1, 2));
  CHECK(j->hi == half(1));
  CHECK(!intersect_open(i, DyInterval::open(Dyadic(1), Dyadic(2))).has_value());
  CHECK_THROWS(DyInterval::open(Dyadic(1), Dyadic(0)));
}
