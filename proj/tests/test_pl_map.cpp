#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "flowline/pl_map.hpp"

using namespace flowline;

namespace {

Dyadic random_dyadic_in(std::mt19937_64& rng, const Dyadic& lo, const Dyadic& hi, int depth = 10) {
  std::uniform_int_distribution<long> num(1, (1L << depth) - 1);
  return lo + (hi - lo) * Dyadic::from_parts(num(rng), depth);
}

PlMap random_word(std::mt19937_64& rng, const std::vector<PlMap>& gens, int len) {
  PlMap w = PlMap::identity(gens[0].dom_lo(), gens[0].dom_hi());
  std::uniform_int_distribution<std::size_t> pick(0, gens.size() - 1);
  std::bernoulli_distribution inv(0.5);
  for (int i = 0; i < len; ++i) {
    const PlMap& g = gens[pick(rng)];
    w = compose(w, inv(rng) ? g.inverse() : g);
  }
  return w;
}

}  // namespace

TEST_CASE("thompson generator A evaluates per its breakpoints") {
  auto gens = thompson_f_generators01();
  const PlMap& a = gens[0];
  CHECK(a.eval(half(1)) == dy(1, 2));
  CHECK(a.eval(dy(7, 3)) == dy(3, 2));  // 2*(7/8) - 1 = 3/4
  CHECK(a.eval(Dyadic(0)) == Dyadic(0));
  CHECK(a.eval(Dyadic(1)) == Dyadic(1));
  PlMap id = PlMap::identity(Dyadic(0), Dyadic(1));
  CHECK(id.eval(dy(5, 3)) == dy(5, 3));
}

TEST_CASE("compose and invert") {
  auto gens = thompson_f_generators01();
  const PlMap& a = gens[0];
  CHECK(compose(a, a.inverse()).is_identity());
  CHECK(compose(a.inverse(), a).is_identity());
  CHECK(compose(a, a).eval(half(1)) == dy(1, 3));  // A(A(1/2)) = 1/8
  PlMap id = PlMap::identity(Dyadic(0), Dyadic(1));
  CHECK(compose(a, id) == a);
  CHECK(compose(id, a) == a);
  CHECK(a.inverse().eval(dy(1, 2)) == half(1));
  auto exps = a.inverse().slope_exps();
  CHECK(exps == std::vector<std::int64_t>{1, 0, -1});
}

TEST_CASE("group laws on short words") {
  auto gens = thompson_f_generators01();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    PlMap f = random_word(rng, gens, 3);
    PlMap g = random_word(rng, gens, 3);
    PlMap h = random_word(rng, gens, 3);
    CHECK(compose(compose(f, g), h) == compose(f, compose(g, h)));
    CHECK(compose(f, f.inverse()).is_identity());
    // dyadic closure + pointwise agreement of the normal form
    for (int s = 0; s < 10; ++s) {
      Dyadic x = random_dyadic_in(rng, Dyadic(0), Dyadic(1));
      CHECK(compose(f, g).eval(x) == f.eval(g.eval(x)));
    }
  }
}

TEST_CASE("normal form detects pointwise equality") {
  auto gens = thompson_f_generators01();
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    PlMap f = random_word(rng, gens, 4);
    PlMap g = random_word(rng, gens, 4);
    bool same_samples = true;
    for (int s = 0; s < 200 && same_samples; ++s) {
      Dyadic x = random_dyadic_in(rng, Dyadic(0), Dyadic(1), 12);
      same_samples = f.eval(x) == g.eval(x);
    }
    CHECK(same_samples == (f == g));
  }
}

TEST_CASE("periodic line maps") {
  auto gens = ttilde_generators();
  std::mt19937_64 rng(13);
  for (const auto& g : gens) {
    for (int s = 0; s < 50; ++s) {
      Dyadic x = random_dyadic_in(rng, Dyadic(-4), Dyadic(4));
      CHECK(g.eval(x + Dyadic(1)) == g.eval(x) + Dyadic(1));
      CHECK(g.inv_eval(g.eval(x)) == x);
    }
  }
  const PlMap& t1 = gens[3];
  CHECK(t1.eval(Dyadic(0)) == Dyadic(1));
  // composition of lifts stays a lift
  PlMap w = compose(gens[2], compose(gens[0], gens[1].inverse()));
  for (int s = 0; s < 30; ++s) {
    Dyadic x = random_dyadic_in(rng, Dyadic(-2), Dyadic(2));
    CHECK(w.eval(x + Dyadic(1)) == w.eval(x) + Dyadic(1));
    CHECK(w.eval(x) == gens[2].eval(gens[0].eval(gens[1].inv_eval(x))));
  }
}

TEST_CASE("rescaled generators transport exactly") {
  DyInterval quarter = DyInterval::open(dy(1, 2), half(1));  // [1/4, 1/2]
  auto gens = thompson_f_generators(quarter);
  REQUIRE(gens.size() == 2);
  // conjugation is by the affine x/4 + 1/4, so A(1/2) = 1/4 transports
  CHECK(gens[0].eval(dy(3, 3)) == dy(5, 4));  // A_I(3/8) = 1/4*A(1/2)+1/4 = 5/16
  CHECK(gens[0].dom_lo() == dy(1, 2));
  CHECK(gens[0].dom_hi() == half(1));
  auto exps = gens[0].slope_exps();
  CHECK(exps == std::vector<std::int64_t>{-1, 0, 1});
}

TEST_CASE("pl_connect joins arbitrary dyadic intervals") {
  std::mt19937_64 rng(17);
  auto rnd = [&](long lo, long hi) {
    std::uniform_int_distribution<long> d(lo, hi);
    return d(rng);
  };
  for (int trial = 0; trial < 50; ++trial) {
    Dyadic a = Dyadic::from_parts(rnd(-40, 40), 3);
    Dyadic b = a + Dyadic::from_parts(rnd(1, 64), 4);
    Dyadic c = Dyadic::from_parts(rnd(-40, 40), 2);
    Dyadic d = c + Dyadic::from_parts(rnd(1, 64), 5);
    PlMap m = pl_connect(a, b, c, d);
    CHECK(m.dom_lo() == a);
    CHECK(m.dom_hi() == b);
    CHECK(m.img_lo() == c);
    CHECK(m.img_hi() == d);
    CHECK(compose(m.inverse(), m).is_identity());
  }
}

TEST_CASE("pl_push_off moves L off itself") {
  DyInterval j = DyInterval::open(Dyadic(0), Dyadic(1));
  PlMap v = pl_push_off(j, dy(3, 3), half(1));  // L = [3/8, 1/2]
  CHECK(v.eval(dy(3, 3)) > half(1));
  CHECK(v.eval(Dyadic(0)) == Dyadic(0));
  CHECK(v.eval(Dyadic(1)) == Dyadic(1));
  CHECK(v.eval(dy(1, 4)) == dy(1, 4));  // identity near the ends
}

TEST_CASE("germ conjugator node formula and conjugation identity") {
  GermConjugator c(Dyadic(1), Side::left);
  CHECK(c.eval(dy(7, 3)) == Dyadic(3));  // c(1 - 2^-3) = 3
  CHECK(c.eval(dy(3, 2)) == Dyadic(2));  // c(1 - 2^-2) = 2
  std::mt19937_64 rng(29);
  for (int s = 0; s < 100; ++s) {
    Dyadic x = Dyadic(1) - random_dyadic_in(rng, dy(1, 10), Dyadic(2), 12);
    CHECK(c.eval(doubling_map(Dyadic(1), x)) == c.eval(x) - Dyadic(1));
    CHECK(c.inv_eval(c.eval(x)) == x);
  }
  // midpoint between nodes lands strictly between the integers
  Dyadic mid = midpoint(dy(3, 2), dy(7, 3));  // between 1-2^-2 and 1-2^-3
  CHECK(c.eval(mid) > Dyadic(2));
  CHECK(c.eval(mid) < Dyadic(3));

  GermConjugator r(half(1), Side::right);
  for (int s = 0; s < 100; ++s) {
    Dyadic x = half(1) + random_dyadic_in(rng, dy(1, 10), Dyadic(2), 12);
    CHECK(r.eval(doubling_map(half(1), x)) == r.eval(x) + Dyadic(1));
    CHECK(r.inv_eval(r.eval(x)) == x);
  }
  PlMap fin = r.restrict(half(1) + dy(1, 3), half(1) + half(1));
  CHECK(fin.eval(half(1) + dy(1, 2)) == r.eval(half(1) + dy(1, 2)));
}
