#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "flowline/suspension.hpp"

using namespace flowline;

namespace {

Sft xred4() {
  InvAlphabet a;
  a.letters = {"a", "A", "b", "B"};
  a.inv = {1, 0, 3, 2};
  return build_reduced(a);
}

Dyadic random_time(std::mt19937_64& rng, int depth = 8) {
  std::uniform_int_distribution<long> num(-(1L << (depth + 2)), (1L << (depth + 2)));
  return Dyadic::from_parts(num(rng), depth);
}

}  // namespace

TEST_CASE("flow normalization and group law") {
  Sft s = xred4();
  std::mt19937_64 rng(3);
  SymPoint x = random_ep_point(s, rng);
  PointY y = make_point_y(x, dy(1, 2));
  CHECK(flow(y, half(1)).t == dy(3, 2));               // (x,1/4)+1/2 -> 3/4
  PointY wrapped = flow(make_point_y(x, dy(3, 2)), half(1));
  CHECK(wrapped.t == dy(1, 2));                        // wrap rule
  CHECK(wrapped.x.at(0) == x.at(1));                   // base advanced by phi
  for (int i = 0; i < 100; ++i) {
    PointY p = make_point_y(random_ep_point(s, rng), random_time(rng).frac());
    Dyadic u = random_time(rng), v = random_time(rng);
    CHECK(point_y_equal(flow(p, u + v), flow(flow(p, u), v)));
    CHECK(point_y_equal(flow(flow(p, u), -u), p));
  }
}

TEST_CASE("hat sigma involution and flow reversal") {
  Sft s = xred4();
  std::mt19937_64 rng(5);
  SymPoint x = random_ep_point(s, rng);
  PointY y0 = make_point_y(x, Dyadic(0));
  PointY sy0 = hat_sigma(s, y0);
  CHECK(sy0.t.is_zero());
  CHECK(ep_equal(sy0.x, s.reversal(x)));
  for (int i = 0; i < 100; ++i) {
    PointY p = make_point_y(random_ep_point(s, rng), random_time(rng).frac());
    CHECK(point_y_equal(hat_sigma(s, hat_sigma(s, p)), p));
    Dyadic u = random_time(rng);
    CHECK(point_y_equal(hat_sigma(s, flow(p, u)), flow(hat_sigma(s, p), -u)));
  }
  // no representable fixed point: periodic orbits up to period 6 and random points
  for (const auto& orb : periodic_orbits_up_to(s, 6)) {
    PointY p = make_point_y(*orb.point, Dyadic(0));
    for (int k = 0; k < static_cast<int>(orb.cycle.size()); ++k) {
      CHECK(!point_y_equal(hat_sigma(s, p), p));
      p = flow(p, half(1));
      CHECK(!point_y_equal(hat_sigma(s, p), p));
      p = flow(p, half(1));
    }
  }
  for (int i = 0; i < 100; ++i) {
    PointY p = make_point_y(random_ep_point(s, rng), random_time(rng).frac());
    CHECK(!point_y_equal(hat_sigma(s, p), p));
  }
}

TEST_CASE("projection and lifts") {
  Sft s = xred4();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    PointY y = make_point_y(random_ep_point(s, rng), random_time(rng).frac());
    PointZ z = project_lift(s, y);
    auto [l1, l2] = lifts(z);
    CHECK((point_y_equal(l1, y) || point_y_equal(l2, y)));
    CHECK(point_y_equal(hat_sigma(s, l1), l2));
    CHECK(point_z_equal(s, project_lift(s, hat_sigma(s, y)), z));
    // the two lifts differ within a small window
    bool differ = l1.t != l2.t;
    for (long j = -2; j <= 2 && !differ; ++j) differ = l1.x.at(j) != l2.x.at(j);
    CHECK(differ);
  }
}

TEST_CASE("chart validation on the reduced subshift") {
  Sft s = xred4();
  Clopen ca = Clopen::letter(s, "a");
  auto cert = chart_validate(s, ca, DyInterval::open(Dyadic(0), dy(1, 2)), true);
  CHECK(cert.valid);
  auto ext = make_extendable_chart(s, ca, DyInterval::open(Dyadic(0), dy(1, 2)),
                                   DyInterval::open(dy(-1, 3), dy(3, 3)), true);
  CHECK(ext.has_value());
  // interval of length >= 1 over a cylinder through a period-1 point
  auto bad = chart_validate(s, ca, DyInterval::open(Dyadic(0), dy(9, 3)), true);
  CHECK(!bad.valid);
  REQUIRE(bad.violation.has_value());
  CHECK(!bad.violation->reflect);
  CHECK(std::abs(bad.violation->n) == 1);
  // whole space with a short interval: valid as a Y-chart
  auto whole = chart_validate(s, Clopen::whole(s), DyInterval::open(Dyadic(0), dy(1, 2)), false);
  CHECK(whole.valid);
}

TEST_CASE("quarter-interval chart decomposition") {
  Sft s = xred4();
  ChartDecomposition dec = chart_decomposition(s);
  CHECK(dec.partition.size() == 4);  // letter cylinders suffice
  CHECK(dec.charts.size() == 16);
  for (const auto& ch : dec.charts) {
    CHECK(ch.cert.valid);
    CHECK(ch.extended.has_value());
  }
  // pairwise closures: equal charts under the dihedral identification, or
  // single-side meetings, never positive-length violations
  int equal_pairs = 0, single = 0, disjoint = 0;
  for (std::size_t i = 0; i < dec.charts.size(); ++i) {
    for (std::size_t j = i + 1; j < dec.charts.size(); ++j) {
      auto meet = chart_closure_meet(s, dec.charts[i].c, dec.charts[i].i, dec.charts[j].c,
                                     dec.charts[j].i);
      CHECK(meet.kind != ChartMeet::violation);
      if (meet.kind == ChartMeet::equal_chart) ++equal_pairs;
      if (meet.kind == ChartMeet::single_side) ++single;
      if (meet.kind == ChartMeet::disjoint) ++disjoint;
    }
  }
  CHECK(equal_pairs == 8);  // sigma-hat pairs the 16 labels into 8 chart sets
  CHECK(single > 0);
  // closures cover Z: random points lie in the closure of some chart
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    PointY y = make_point_y(random_ep_point(s, rng), random_time(rng).frac());
    PointZ z = project_lift(s, y);
    bool covered = false;
    for (const auto& ch : dec.charts) covered = covered || chart_closure_contains(ch, s, z);
    CHECK(covered);
  }
}

TEST_CASE("doubling admits a chart decomposition") {
  InvAlphabet bin;
  bin.letters = {"0", "1"};
  Sft d = build_doubling(Sft::full_shift(bin, false));
  ChartDecomposition dec = chart_decomposition(d);
  CHECK(!dec.charts.empty());
  for (const auto& ch : dec.charts) CHECK(ch.cert.valid);
}
