#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "flowline/atlas.hpp"

using namespace flowline;

namespace {

Sft xred4() {
  InvAlphabet a;
  a.letters = {"a", "A", "b", "B"};
  a.inv = {1, 0, 3, 2};
  return build_reduced(a);
}

DyInterval i_zero() { return DyInterval::open(dy(-7, 4), dy(7, 4)); }  // (-7/16, 7/16)

std::vector<Atlas> sample_elements(const Sft& s) {
  Clopen ca = Clopen::letter(s, "a");
  Clopen cb = Clopen::letter(s, "b");
  auto fibers = script_f_generators(i_zero(), Dyadic(0));
  std::vector<Atlas> out;
  out.push_back(Atlas::from_z_chart(s, ca, fibers[0]));   // Thompson pair member
  out.push_back(Atlas::from_z_chart(s, ca, fibers[2]));   // a germ transport
  out.push_back(Atlas::from_z_chart(s, cb, fibers[1]));
  out.push_back(Atlas::from_z_chart(s, cb, fibers[5]));
  return out;
}

}  // namespace

TEST_CASE("identity atlas") {
  Sft s = xred4();
  Atlas id = Atlas::identity(s);
  std::mt19937_64 rng(3);
  CHECK(id.is_identity());
  auto cert = elem_validate(id, 20, rng, true);
  CHECK(cert.ok);
  for (int i = 0; i < 20; ++i) {
    PointY y = random_point_y(s, rng);
    CHECK(id.cocycle(y).is_zero());
    CHECK(point_y_equal(id.apply(y), y));
  }
}

TEST_CASE("atlas with a boundary jump is rejected") {
  Sft s = xred4();
  // two pieces over the whole space with fibers that do not match at 1/2
  Clopen whole = Clopen::whole(s);
  std::vector<AtlasPiece> pieces;
  pieces.push_back({whole, Dyadic(0), half(1),
                    TypeDMap::from_pl(pl_connect(Dyadic(0), half(1), Dyadic(0), dy(3, 3)))});
  pieces.push_back({whole, half(1), Dyadic(1), TypeDMap::identity(half(1), Dyadic(1))});
  CHECK_THROWS(Atlas(s, std::move(pieces)));
}

TEST_CASE("chart elements validate including equivariance") {
  Sft s = xred4();
  std::mt19937_64 rng(5);
  for (const auto& g : sample_elements(s)) {
    auto cert = elem_validate(g, 60, rng, true);
    CHECK(cert.ok);
  }
}

TEST_CASE("group laws and the evaluator oracle") {
  Sft s = xred4();
  std::mt19937_64 rng(7);
  auto gens = sample_elements(s);
  const Atlas& g = gens[0];
  const Atlas& h = gens[1];
  Atlas gh = compose(g, h);
  for (int i = 0; i < 100; ++i) {
    PointY y = random_point_y(s, rng);
    CHECK(point_y_equal(gh.apply(y), g.apply(h.apply(y))));
    // cocycle identity
    CHECK(gh.cocycle(y) == g.cocycle(h.apply(y)) + h.cocycle(y));
  }
  CHECK(equal(compose(g, g.inverse()), Atlas::identity(s)));
  CHECK(compose(g.inverse(), g).is_identity());
  Atlas assoc1 = compose(compose(g, h), gens[2]);
  Atlas assoc2 = compose(g, compose(h, gens[2]));
  CHECK(equal(assoc1, assoc2));
}

TEST_CASE("disjointly supported elements commute structurally") {
  Sft s = xred4();
  // I = (1/16, 7/16): no nonzero dihedral translate of I meets I, so the
  // charts over [a] and [b] are honestly disjoint in Z
  DyInterval i = DyInterval::open(dy(1, 4), dy(7, 4));
  Clopen ca = Clopen::letter(s, "a");
  Clopen cb = Clopen::letter(s, "b");
  auto fibers = script_f_generators(i, dy(1, 2));
  Atlas g = Atlas::from_z_chart(s, ca, fibers[0]);
  Atlas h = Atlas::from_z_chart(s, cb, fibers[2]);
  CHECK(equal(compose(g, h), compose(h, g)));
}

TEST_CASE("sigma conjugation is the structural mirror") {
  Sft s = xred4();
  std::mt19937_64 rng(11);
  auto gens = sample_elements(s);
  for (const auto& g : gens) {
    Atlas m = g.sigma_conjugate();
    CHECK(equal(m, g));  // generators are sigma-hat equivariant by construction
    for (int i = 0; i < 50; ++i) {
      PointY y = random_point_y(s, rng);
      CHECK(g.cocycle(hat_sigma(s, y)) == -g.cocycle(y));
    }
  }
  // equivariance survives composition and inversion
  Atlas w = compose(gens[0], compose(gens[1].inverse(), gens[2]));
  CHECK(equal(w.sigma_conjugate(), w));
}

TEST_CASE("support region stays inside the chart") {
  Sft s = xred4();
  auto gens = sample_elements(s);
  for (const auto& g : gens) {
    auto region = g.support_region();
    CHECK(!region.empty());
    for (const auto& [c, iv] : region) {
      // inside [0,1) after normalization
      CHECK(Dyadic(0) <= iv.lo);
      CHECK(iv.hi <= Dyadic(1));
    }
  }
  CHECK(Atlas::identity(s).support_region().empty());
  // the moved set of g equals that of g^{-1}: test through the cocycle
  const Atlas& g = gens[0];
  Atlas gi = g.inverse();
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    PointY y = random_point_y(s, rng);
    CHECK(g.cocycle(y).is_zero() == gi.cocycle(y).is_zero());
  }
}

TEST_CASE("random words keep exact group structure") {
  Sft s = xred4();
  std::mt19937_64 rng(13);
  auto gens = sample_elements(s);
  std::uniform_int_distribution<std::size_t> pick(0, gens.size() - 1);
  std::bernoulli_distribution inv(0.5);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<Atlas> word;
    for (int i = 0; i < 3; ++i) {
      Atlas a = gens[pick(rng)];
      word.push_back(inv(rng) ? a.inverse() : a);
    }
    Atlas w = compose_word(word);
    for (int i = 0; i < 60; ++i) {
      PointY y = random_point_y(s, rng);
      PointY expect = y;
      for (auto it = word.rbegin(); it != word.rend(); ++it) expect = it->apply(expect);
      CHECK(point_y_equal(w.apply(y), expect));
    }
    CHECK(equal(w.sigma_conjugate(), w));
    CHECK(compose(w, w.inverse()).is_identity());
  }
}
