#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "flowline/type_d.hpp"

using namespace flowline;

namespace {

/// The running example: fixed points 0 and 1/2, one self-similar singularity
/// at 0 whose right annulus on [1/4, 1/2] has nodes 1/4, 3/8, 7/16, 1/2 with
/// values 1/4, 5/16, 3/8, 1/2.
TypeDMap example_germ_map() {
  Germ g;
  g.x0 = Dyadic(0);
  g.y0 = Dyadic(0);
  g.right = GermSide{half(1), PlMap({{dy(1, 2), dy(1, 2)},
                                     {dy(3, 3), dy(5, 4)},
                                     {dy(7, 4), dy(3, 3)},
                                     {half(1), half(1)}})};
  return TypeDMap({TypeDMap::Seg(g)});
}

Dyadic random_dyadic_in(std::mt19937_64& rng, const Dyadic& lo, const Dyadic& hi, int depth = 12) {
  std::uniform_int_distribution<long> num(1, (1L << depth) - 1);
  return lo + (hi - lo) * Dyadic::from_parts(num(rng), depth);
}

}  // namespace

TEST_CASE("germ descent evaluation") {
  TypeDMap f = example_germ_map();
  CHECK(f.eval(dy(3, 4)) == dy(5, 5));   // d_eval(3/16) = 5/32
  CHECK(f.eval(Dyadic(0)) == Dyadic(0)); // singular fixed value
  CHECK(f.eval(dy(3, 3)) == dy(5, 4));
  CHECK(f.inv_eval(dy(5, 5)) == dy(3, 4));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    Dyadic x = random_dyadic_in(rng, Dyadic(0), half(1));
    CHECK(f.inv_eval(f.eval(x)) == x);
  }
}

TEST_CASE("identity germ reduces to the identity map") {
  Germ g;
  g.x0 = half(1);
  g.y0 = half(1);
  g.left = GermSide{dy(1, 2), PlMap::identity(half(1) - dy(1, 2), half(1) - dy(1, 3))};
  g.right = GermSide{dy(1, 2), PlMap::identity(half(1) + dy(1, 3), half(1) + dy(1, 2))};
  TypeDMap f({TypeDMap::Seg(PlMap::identity(Dyadic(0), dy(1, 2))),
              TypeDMap::Seg(g),
              TypeDMap::Seg(PlMap::identity(dy(3, 2), Dyadic(1)))});
  CHECK(f.is_identity());
  CHECK(f.is_pl());  // affine sides dissolve in the canonical form
  CHECK(f.eval(dy(7, 4)) == dy(7, 4));
}

TEST_CASE("corrupted germ data is rejected") {
  Germ g;
  g.x0 = Dyadic(0);
  g.y0 = Dyadic(0);
  // endpoint consistency broken: value at 1/4 should be half the value at 1/2
  g.right = GermSide{half(1), PlMap({{dy(1, 2), dy(3, 3)}, {half(1), half(1)}})};
  CHECK_THROWS(TypeDMap({TypeDMap::Seg(g)}));
}

TEST_CASE("self-similarity verification certificate") {
  std::mt19937_64 rng(11);
  TypeDMap f = example_germ_map();
  Certificate c = verify_type_d(f, 1000, rng);
  CHECK(c.ok);
  TypeDMap pl = TypeDMap::from_pl(thompson_f_generators01()[0]);
  CHECK(verify_type_d(pl, 10, rng).ok);  // vacuous for germ-free maps
}

TEST_CASE("inverse and composition cancel germs") {
  TypeDMap f = example_germ_map();
  TypeDMap finv = f.inverse();
  CHECK(equal(compose(f, finv), TypeDMap::identity(Dyadic(0), half(1))));
  CHECK(equal(compose(finv, f), TypeDMap::identity(Dyadic(0), half(1))));
  CHECK(equal(finv.inverse(), f));
}

TEST_CASE("composition against the evaluator oracle") {
  std::mt19937_64 rng(17);
  TypeDMap f = example_germ_map();
  // PL factor after the germ map
  PlMap a = thompson_f_generators(DyInterval::open(Dyadic(0), half(1)))[0];
  TypeDMap af = compose(TypeDMap::from_pl(a), f);
  CHECK(af.eval(dy(3, 4)) == a.eval(dy(5, 5)));
  for (int i = 0; i < 500; ++i) {
    Dyadic x = random_dyadic_in(rng, Dyadic(0), half(1));
    CHECK(af.eval(x) == a.eval(f.eval(x)));
  }
  CHECK(verify_type_d(af, 200, rng).ok);
  // germ after germ: singular chain through 0
  TypeDMap ff = compose(f, f);
  for (int i = 0; i < 500; ++i) {
    Dyadic x = random_dyadic_in(rng, Dyadic(0), half(1));
    CHECK(ff.eval(x) == f.eval(f.eval(x)));
  }
  CHECK(verify_type_d(ff, 200, rng).ok);
  // two identity-germ maps compose to the identity
  TypeDMap id = TypeDMap::identity(Dyadic(0), half(1));
  CHECK(equal(compose(id, id), id));
}

TEST_CASE("pl embedding: germ-free TypeD matches PlMap semantics") {
  std::mt19937_64 rng(23);
  auto gens = thompson_f_generators01();
  TypeDMap a = TypeDMap::from_pl(gens[0]);
  TypeDMap b = TypeDMap::from_pl(gens[1]);
  TypeDMap ab = compose(a, b);
  PlMap ab_pl = compose(gens[0], gens[1]);
  CHECK(ab.is_pl());
  for (int i = 0; i < 200; ++i) {
    Dyadic x = random_dyadic_in(rng, Dyadic(0), Dyadic(1));
    CHECK(ab.eval(x) == ab_pl.eval(x));
  }
  CHECK(equal(ab.inverse(), TypeDMap::from_pl(ab_pl.inverse())));
}

TEST_CASE("restrict re-derives germ windows") {
  TypeDMap f = example_germ_map();
  TypeDMap cut = f.restrict(Dyadic(0), dy(3, 3));  // cut inside the window
  CHECK(cut.singular_points().size() == 1);
  std::mt19937_64 rng(29);
  for (int i = 0; i < 200; ++i) {
    Dyadic x = random_dyadic_in(rng, Dyadic(0), dy(3, 3));
    CHECK(cut.eval(x) == f.eval(x));
  }
  PlMap away = f.restrict_to_pl(dy(1, 4), dy(7, 4));
  for (int i = 0; i < 50; ++i) {
    Dyadic x = random_dyadic_in(rng, dy(1, 4), dy(7, 4));
    CHECK(away.eval(x) == f.eval(x));
  }
  CHECK_THROWS(f.restrict_to_pl(Dyadic(0), dy(1, 4)));
}

TEST_CASE("equality across different stored scales") {
  TypeDMap f = example_germ_map();
  // same map, window stored at half the scale
  TypeDMap g = concat({f.restrict(Dyadic(0), dy(1, 2)), f.restrict(dy(1, 2), half(1))});
  CHECK(equal(f, g));
  CHECK(equal(g, f));
  // genuinely different germ data
  TypeDMap h = compose(f, f);
  CHECK(!equal(f, h));
}

TEST_CASE("fragmentation: trivial containment") {
  DyInterval i1 = DyInterval::open(Dyadic(0), dy(3, 3));
  DyInterval i2 = DyInterval::open(dy(1, 3), half(1));
  // element supported in (0, 3/8): conjugated Thompson pair member
  PlMap inner = thompson_f_generators(DyInterval::open(dy(1, 4), dy(5, 4)))[0];
  TypeDMap f = concat({TypeDMap::identity(Dyadic(0), dy(1, 4)),
                       TypeDMap::from_pl(inner),
                       TypeDMap::identity(dy(5, 4), half(1))});
  FragmentResult r = fragment(f, i1, i2);
  REQUIRE(r.ok);
  CHECK(equal(*r.f1, f));
  CHECK(r.f2->is_identity());
}

TEST_CASE("fragmentation: genuine split with pointwise verification") {
  DyInterval i1 = DyInterval::open(Dyadic(0), dy(3, 3));
  DyInterval i2 = DyInterval::open(dy(1, 3), half(1));
  PlMap a = thompson_f_generators(DyInterval::open(Dyadic(0), half(1)))[0];
  TypeDMap f = TypeDMap::from_pl(a);
  FragmentResult r = fragment(f, i1, i2);
  REQUIRE(r.ok);
  TypeDMap back = compose(*r.f1, *r.f2);
  CHECK(equal(back, f));
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    Dyadic x = random_dyadic_in(rng, Dyadic(0), half(1));
    CHECK(back.eval(x) == f.eval(x));
  }
}

TEST_CASE("fragmentation: germ in the overlap goes to the second factor") {
  DyInterval i1 = DyInterval::open(Dyadic(0), dy(3, 3));
  DyInterval i2 = DyInterval::open(dy(1, 3), half(1));
  // build an element with a singular point at 5/16, supported in (1/4, 7/16)
  DyInterval sup = DyInterval::open(dy(1, 2), dy(7, 4));
  TypeDMap g = germ_element(DyInterval::open(Dyadic(0), half(1)), dy(5, 4), Side::right,
                            ttilde_generators()[3]);
  (void)sup;
  FragmentResult r = fragment(g, i1, i2);
  REQUIRE(r.ok);
  CHECK(equal(compose(*r.f1, *r.f2), g));
  std::mt19937_64 rng(37);
  for (int i = 0; i < 200; ++i) {
    Dyadic x = random_dyadic_in(rng, Dyadic(0), half(1));
    CHECK(compose(*r.f1, *r.f2).eval(x) == g.eval(x));
  }
}

TEST_CASE("fragmentation rejects displacement across the overlap") {
  // map pushing (1/8, 1/2)-material across the sliver overlap (1/4, 5/16)
  DyInterval i1 = DyInterval::open(Dyadic(0), dy(5, 4));
  DyInterval i2 = DyInterval::open(dy(1, 2), Dyadic(1));
  std::vector<TypeDMap> parts;
  parts.push_back(TypeDMap::identity(Dyadic(0), dy(1, 3)));
  parts.push_back(TypeDMap::from_pl(pl_connect(dy(1, 3), dy(3, 2), dy(1, 3), dy(1, 2))));
  parts.push_back(TypeDMap::from_pl(pl_connect(dy(3, 2), dy(7, 3), dy(1, 2), dy(7, 3))));
  parts.push_back(TypeDMap::identity(dy(7, 3), Dyadic(1)));
  TypeDMap f = concat(parts).inverse();  // pushes [1/4-ish] upward past 5/16
  FragmentResult r = fragment(f, i1, i2);
  CHECK(!r.ok);
  CHECK(r.witness.has_value());
}

TEST_CASE("scriptF generating family") {
  DyInterval I = DyInterval::open(Dyadic(0), Dyadic(1));
  auto gens = script_f_generators(I, half(1));
  CHECK(gens.size() >= 14);  // 2 + |ttilde gens| * 3
  std::mt19937_64 rng(41);
  for (const auto& g : gens) {
    Certificate c = verify_type_d(g, 500, rng);
    CHECK(c.ok);
    CHECK(g.dom_lo() == Dyadic(0));
    CHECK(g.dom_hi() == Dyadic(1));
    CHECK(g.eval(Dyadic(0)) == Dyadic(0));
    CHECK(g.eval(Dyadic(1)) == Dyadic(1));
  }
  // the t_1 transport acts as the doubling map near the point on the right;
  // that germ is locally PL, so the canonical form carries no singularity
  TypeDMap s = germ_element(I, half(1), Side::right, ttilde_generators()[3]);
  CHECK(s.is_pl());
  // a genuinely non-affine line map transports to a real singularity
  TypeDMap s2 = germ_element(I, half(1), Side::right, ttilde_generators()[0]);
  CHECK(s2.singular_points() == std::vector<Dyadic>{half(1)});
  std::mt19937_64 rng2(43);
  for (int i = 0; i < 50; ++i) {
    Dyadic x = half(1) + random_dyadic_in(rng2, Dyadic(0), dy(1, 6));
    CHECK(s.eval(x) == doubling_map(half(1), x));
  }
  CHECK(s.eval(dy(1, 3)) == dy(1, 3));  // identity left of the point
}

TEST_CASE("germ elements compose and invert soundly") {
  DyInterval I = DyInterval::open(Dyadic(0), Dyadic(1));
  auto tt = ttilde_generators();
  TypeDMap g1 = germ_element(I, half(1), Side::left, tt[0]);
  TypeDMap g2 = germ_element(I, half(1), Side::right, tt[2]);
  std::mt19937_64 rng(47);
  TypeDMap w = compose(g1, g2);
  CHECK(verify_type_d(w, 300, rng).ok);
  for (int i = 0; i < 300; ++i) {
    Dyadic x = random_dyadic_in(rng, Dyadic(0), Dyadic(1));
    CHECK(w.eval(x) == g1.eval(g2.eval(x)));
  }
  CHECK(equal(compose(w, w.inverse()), TypeDMap::identity(Dyadic(0), Dyadic(1))));
  TypeDMap e1 = endpoint_germ_element(I, true, tt[1]);
  TypeDMap e2 = endpoint_germ_element(I, false, tt[3]);
  CHECK(verify_type_d(compose(e1, e2), 200, rng).ok);
  CHECK(equal(compose(e1, e1.inverse()), TypeDMap::identity(Dyadic(0), Dyadic(1))));
}
