#include "flowline/suspension.hpp"

#include <algorithm>
#include <stdexcept>

namespace flowline {

PointY make_point_y(SymPoint x, Dyadic t) {
  const BigInt k = t.floor();
  if (k == 0) return {std::move(x), std::move(t)};
  const long ks = k.convert_to<long>();
  return {x.shifted(ks), t - Dyadic(k)};
}

PointY flow(const PointY& y, const Dyadic& s) { return make_point_y(y.x, y.t + s); }

PointY hat_sigma(const Sft& s, const PointY& y) {
  SymPoint sx = s.reversal(y.x);
  if (y.t.is_zero()) return {std::move(sx), Dyadic(0)};
  return {sx.shifted(-1), Dyadic(1) - y.t};
}

bool point_y_equal(const PointY& a, const PointY& b, long radius) {
  if (a.t != b.t) return false;
  if (a.x.is_eventually_periodic() && b.x.is_eventually_periodic())
    return ep_equal(a.x, b.x);
  return a.x.window(-radius, radius) == b.x.window(-radius, radius);
}

namespace {

/// -1, 0, 1 ordering of lifts: by t, then window-lexicographic on x out to the
/// subshift's separation radius (forced to resolve for genuine mirror pairs).
int lift_compare(const Sft& s, const PointY& a, const PointY& b) {
  if (a.t != b.t) return a.t < b.t ? -1 : 1;
  const long r = std::max<long>(s.separation_radius(), 2);
  for (long i = 0; i <= r; ++i) {
    for (long j : {i, -i}) {
      const int la = a.x.at(j);
      const int lb = b.x.at(j);
      if (la != lb) return la < lb ? -1 : 1;
      if (j == 0) break;
    }
  }
  return 0;
}

}  // namespace

PointZ project_lift(const Sft& s, const PointY& y) {
  PointY m = hat_sigma(s, y);
  if (lift_compare(s, y, m) <= 0) return {y, m};
  return {m, y};
}

std::pair<PointY, PointY> lifts(const PointZ& z) { return {z.main, z.mirror}; }

bool point_z_equal(const Sft& s, const PointZ& a, const PointZ& b, long radius) {
  (void)s;
  return point_y_equal(a.main, b.main, radius) && point_y_equal(a.mirror, b.mirror, radius);
}

std::string DihedralElem::str() const {
  return (reflect ? "reflection n=" : "translation n=") + std::to_string(n);
}

namespace {

std::vector<long> integers_in_open(const Dyadic& lo, const Dyadic& hi) {
  std::vector<long> out;
  BigInt n = lo.floor() + 1;
  while (Dyadic(n) < hi) {
    if (Dyadic(n) > lo) out.push_back(n.convert_to<long>());
    ++n;
  }
  return out;
}

}  // namespace

ChartCertificate chart_validate(const Sft& s, const Clopen& c, const DyInterval& i, bool z_kind) {
  ChartCertificate cert;
  if (c.is_empty()) {
    cert.detail = "empty clopen: trivially a chart";
    return cert;
  }
  // translations k with (I - k) meeting I: k in (lo - hi, hi - lo), k != 0
  for (long k : integers_in_open(i.lo - i.hi, i.hi - i.lo)) {
    if (k == 0) continue;
    if (!c.image_shift(k).intersect(c).is_empty()) {
      cert.valid = false;
      cert.violation = DihedralElem{k, false};
      cert.detail = "phi^" + std::to_string(k) + "(C) meets C";
      return cert;
    }
  }
  if (z_kind) {
    if (!s.has_involution()) {
      cert.valid = false;
      cert.detail = "Z-chart requested without involution data";
      return cert;
    }
    // reflections (n, 1): (-I - n) meets I when n in (-2 hi, -2 lo)
    for (long n : integers_in_open(-i.hi - i.hi, -i.lo - i.lo)) {
      if (!c.image_reversal().image_shift(n).intersect(c).is_empty()) {
        cert.valid = false;
        cert.violation = DihedralElem{n, true};
        cert.detail = "phi^" + std::to_string(n) + " sigma (C) meets C";
        return cert;
      }
    }
  }
  cert.detail = "valid";
  return cert;
}

std::optional<Chart> make_extendable_chart(const Sft& s, const Clopen& c, const DyInterval& i,
                                           const DyInterval& j, bool z_kind) {
  if (!(j.lo < i.lo && i.hi < j.hi)) throw std::invalid_argument("J must enclose closure(I)");
  ChartCertificate inner = chart_validate(s, c, i, z_kind);
  ChartCertificate outer = chart_validate(s, c, j, z_kind);
  if (!inner.valid || !outer.valid) return std::nullopt;
  Chart ch{c, i, z_kind, j, inner};
  return ch;
}

ChartMeetReport chart_closure_meet(const Sft& s, const Clopen& c1, const DyInterval& i1,
                                   const Clopen& c2, const DyInterval& i2) {
  ChartMeetReport rep;
  // collect all gamma in D_infty with gamma(closure strip 1) meeting strip 2;
  // closed intervals, so the index ranges are inclusive
  struct Overlap {
    DihedralElem g;
    Dyadic lo, hi;  // interval intersection gamma(I1bar) cap I2bar
  };
  std::vector<Overlap> hits;
  auto clopen_hit = [&](const DihedralElem& g) {
    Clopen img = g.reflect ? c1.image_reversal().image_shift(g.n) : c1.image_shift(g.n);
    return !img.intersect(c2).is_empty();
  };
  // translations: (I1 - n) cap I2 nonempty (closed): n in [lo1 - hi2, hi1 - lo2]
  for (BigInt n = (i1.lo - i2.hi).ceil(); Dyadic(n) <= i1.hi - i2.lo; ++n) {
    const long k = n.convert_to<long>();
    const Dyadic lo = max(i1.lo - Dyadic(n), i2.lo);
    const Dyadic hi = min(i1.hi - Dyadic(n), i2.hi);
    if (lo > hi) continue;
    DihedralElem g{k, false};
    if (clopen_hit(g)) hits.push_back({g, lo, hi});
  }
  if (s.has_involution()) {
    // reflections: (-I1 - n) cap I2 nonempty: n in [-hi1 - hi2, -lo1 - lo2]
    for (BigInt n = (-i1.hi - i2.hi).ceil(); Dyadic(n) <= -i1.lo - i2.lo; ++n) {
      const long k = n.convert_to<long>();
      const Dyadic lo = max(-i1.hi - Dyadic(n), i2.lo);
      const Dyadic hi = min(-i1.lo - Dyadic(n), i2.hi);
      if (lo > hi) continue;
      DihedralElem g{k, true};
      if (clopen_hit(g)) hits.push_back({g, lo, hi});
    }
  }
  if (hits.empty()) {
    rep.kind = ChartMeet::disjoint;
    rep.detail = "closures disjoint";
    return rep;
  }
  // identical charts: some gamma carries strip 1 exactly onto strip 2
  for (const auto& h : hits) {
    const bool full = h.lo == i2.lo && h.hi == i2.hi &&
                      (h.hi - h.lo) == (i1.hi - i1.lo);
    if (full) {
      Clopen img = h.g.reflect ? c1.image_reversal().image_shift(h.g.n)
                               : c1.image_shift(h.g.n);
      if (img.same_set(c2)) {
        rep.kind = ChartMeet::equal_chart;
        rep.detail = "identified by " + h.g.str();
        return rep;
      }
      rep.kind = ChartMeet::violation;
      rep.detail = "full-width overlap under " + h.g.str() + " without identification";
      return rep;
    }
  }
  // otherwise every hit must be a single boundary point, all on one side
  std::optional<Dyadic> side;
  for (const auto& h : hits) {
    if (h.lo != h.hi) {
      rep.kind = ChartMeet::violation;
      rep.detail = "interval overlap of positive length under " + h.g.str();
      return rep;
    }
    if (!(h.lo == i2.lo || h.lo == i2.hi)) {
      rep.kind = ChartMeet::violation;
      rep.detail = "meeting point is not a side of the second chart";
      return rep;
    }
    if (side && *side != h.lo) {
      rep.kind = ChartMeet::violation;
      rep.detail = "closures meet in two different sides";
      return rep;
    }
    side = h.lo;
  }
  rep.kind = ChartMeet::single_side;
  rep.detail = "single side at t=" + side->str();
  return rep;
}

ChartDecomposition chart_decomposition(const Sft& s) {
  ChartDecomposition out;
  const Dyadic quarter = dy(1, 2);
  const Dyadic margin = dy(1, 5);  // 1/32
  // refine letter cylinders by window radius until all quarter charts extend
  for (int radius = 0; radius <= 6; ++radius) {
    std::vector<Clopen> parts;
    std::function<void(Word&)> gen = [&](Word& w) {
      if (static_cast<int>(w.size()) == 2 * radius + 1) {
        Clopen c = Clopen::cylinder(s, -radius, w);
        if (!c.is_empty()) parts.push_back(std::move(c));
        return;
      }
      for (int l = 0; l < s.alphabet().size(); ++l) {
        w.push_back(l);
        gen(w);
        w.pop_back();
      }
    };
    Word w;
    gen(w);
    std::vector<Chart> charts;
    bool all_ok = true;
    for (const auto& c : parts) {
      for (int j = 0; j < 4 && all_ok; ++j) {
        const Dyadic lo = quarter * Dyadic(j);
        const Dyadic hi = quarter * Dyadic(j + 1);
        auto ch = make_extendable_chart(s, c, DyInterval::open(lo, hi),
                                        DyInterval::open(lo - margin, hi + margin), true);
        if (!ch) {
          all_ok = false;
          break;
        }
        charts.push_back(std::move(*ch));
      }
      if (!all_ok) break;
    }
    if (!all_ok) continue;
    out.partition = std::move(parts);
    out.charts = std::move(charts);
    break;
  }
  if (out.charts.empty())
    throw std::runtime_error("chart decomposition did not stabilize within the radius budget");
  // group charts identified by the dihedral action
  out.canonical_of.assign(out.charts.size(), -1);
  for (std::size_t i = 0; i < out.charts.size(); ++i) {
    if (out.canonical_of[i] >= 0) continue;
    out.canonical_of[i] = static_cast<int>(i);
    for (std::size_t j = i + 1; j < out.charts.size(); ++j) {
      if (out.canonical_of[j] >= 0) continue;
      auto meet = chart_closure_meet(s, out.charts[i].c, out.charts[i].i, out.charts[j].c,
                                     out.charts[j].i);
      if (meet.kind == ChartMeet::equal_chart) out.canonical_of[j] = static_cast<int>(i);
    }
  }
  return out;
}

bool chart_closure_contains(const Chart& ch, const Sft& s, const PointZ& z) {
  // some dihedral translate of a lift lies in closure(C) x closure(I)
  for (const PointY* y : {&z.main, &z.mirror}) {
    for (BigInt n = (ch.i.lo - y->t).ceil() - 1; Dyadic(n) <= ch.i.hi - y->t + Dyadic(1); ++n) {
      const Dyadic t = y->t + Dyadic(n);
      if (t < ch.i.lo || t > ch.i.hi) continue;
      const long k = n.convert_to<long>();
      // lift (x, t) with pi(x, t) = y: x shifted by -k
      SymPoint xs = y->x.shifted(-k);
      Word win = xs.window(ch.c.lo(), ch.c.hi());
      if (ch.c.words().count(win)) return true;
    }
  }
  return false;
}

}  // namespace flowline
