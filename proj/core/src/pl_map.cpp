#include "flowline/pl_map.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace flowline {

namespace {

std::int64_t segment_slope_exp(const PlNode& a, const PlNode& b) {
  auto e = ratio_pow2(b.x - a.x, b.y - a.y);
  if (!e) throw std::invalid_argument("PL segment slope is not a power of two");
  return *e;
}

Dyadic eval_segment(const PlNode& a, const PlNode& b, const Dyadic& x) {
  return a.y + (x - a.x).mul_pow2(segment_slope_exp(a, b));
}

Dyadic inv_eval_segment(const PlNode& a, const PlNode& b, const Dyadic& y) {
  return a.x + (y - a.y).mul_pow2(-segment_slope_exp(a, b));
}

}  // namespace

PlMap::PlMap(std::vector<PlNode> nodes, bool periodic)
    : nodes_(std::move(nodes)), periodic_(periodic) {
  if (nodes_.size() < 2) throw std::invalid_argument("PlMap needs at least two nodes");
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    if (!(nodes_[i].x < nodes_[i + 1].x) || !(nodes_[i].y < nodes_[i + 1].y))
      throw std::invalid_argument("PlMap nodes must be strictly increasing");
    segment_slope_exp(nodes_[i], nodes_[i + 1]);  // validates
  }
  if (periodic_) {
    const Dyadic one = 1;
    if (nodes_.back().x - nodes_.front().x != one || nodes_.back().y - nodes_.front().y != one)
      throw std::invalid_argument("periodic PlMap must span one period with f(x+1)=f(x)+1");
  }
  normalize();
}

void PlMap::normalize() {
  if (periodic_ && !nodes_.front().x.is_zero()) {
    nodes_ = period_from(Dyadic(0));
  }
  std::vector<PlNode> out;
  out.reserve(nodes_.size());
  out.push_back(nodes_.front());
  for (std::size_t i = 1; i + 1 < nodes_.size(); ++i) {
    const std::int64_t e_in = segment_slope_exp(out.back(), nodes_[i]);
    const std::int64_t e_out = segment_slope_exp(nodes_[i], nodes_[i + 1]);
    if (e_in != e_out) out.push_back(nodes_[i]);
  }
  out.push_back(nodes_.back());
  nodes_ = std::move(out);
}

std::vector<PlNode> PlMap::period_from(const Dyadic& x) const {
  std::set<Dyadic> xs;
  xs.insert(x);
  xs.insert(x + Dyadic(1));
  const Dyadic base_lo = nodes_.front().x;
  for (const auto& n : nodes_) {
    // translate n.x by integers into [x, x+1]
    BigInt k = (x - n.x).ceil();
    Dyadic cand = n.x + Dyadic(k);
    for (int probe = 0; probe < 2; ++probe, cand += Dyadic(1)) {
      if (x <= cand && cand <= x + Dyadic(1)) xs.insert(cand);
    }
  }
  (void)base_lo;
  std::vector<PlNode> out;
  for (const auto& xi : xs) out.push_back({xi, eval(xi)});
  return out;
}

PlMap PlMap::identity(const Dyadic& lo, const Dyadic& hi) {
  return PlMap({{lo, lo}, {hi, hi}});
}

PlMap PlMap::affine(const Dyadic& lo, const Dyadic& hi, std::int64_t slope_exp, const Dyadic& offset) {
  return PlMap({{lo, lo.mul_pow2(slope_exp) + offset}, {hi, hi.mul_pow2(slope_exp) + offset}});
}

PlMap PlMap::line_translation(const BigInt& s) {
  return PlMap({{Dyadic(0), Dyadic(s)}, {Dyadic(1), Dyadic(s) + Dyadic(1)}}, true);
}

Dyadic PlMap::eval(const Dyadic& x) const {
  if (periodic_) {
    const BigInt k = (x - nodes_.front().x).floor();
    Dyadic xr = x - Dyadic(k);
    // binary-search below works on the stored period
    std::size_t i = 0;
    while (i + 2 < nodes_.size() && nodes_[i + 1].x <= xr) ++i;
    return eval_segment(nodes_[i], nodes_[i + 1], xr) + Dyadic(k);
  }
  if (!(nodes_.front().x <= x && x <= nodes_.back().x))
    throw std::out_of_range("PlMap::eval outside domain");
  std::size_t lo = 0, hi = nodes_.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (nodes_[mid].x <= x)
      lo = mid;
    else
      hi = mid;
  }
  return eval_segment(nodes_[lo], nodes_[lo + 1], x);
}

Dyadic PlMap::inv_eval(const Dyadic& y) const {
  if (periodic_) {
    const BigInt k = (y - nodes_.front().y).floor();
    Dyadic yr = y - Dyadic(k);
    std::size_t i = 0;
    while (i + 2 < nodes_.size() && nodes_[i + 1].y <= yr) ++i;
    return inv_eval_segment(nodes_[i], nodes_[i + 1], yr) + Dyadic(k);
  }
  if (!(nodes_.front().y <= y && y <= nodes_.back().y))
    throw std::out_of_range("PlMap::inv_eval outside image");
  std::size_t lo = 0, hi = nodes_.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (nodes_[mid].y <= y)
      lo = mid;
    else
      hi = mid;
  }
  return inv_eval_segment(nodes_[lo], nodes_[lo + 1], y);
}

std::vector<std::int64_t> PlMap::slope_exps() const {
  std::vector<std::int64_t> out;
  out.reserve(nodes_.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
    out.push_back(segment_slope_exp(nodes_[i], nodes_[i + 1]));
  return out;
}

PlMap PlMap::inverse() const {
  std::vector<PlNode> nodes;
  nodes.reserve(nodes_.size());
  for (const auto& n : nodes_) nodes.push_back({n.y, n.x});
  return PlMap(std::move(nodes), periodic_);
}

PlMap PlMap::restrict(const Dyadic& u, const Dyadic& v) const {
  if (!(u < v)) throw std::invalid_argument("PlMap::restrict needs u < v");
  std::set<Dyadic> xs;
  xs.insert(u);
  xs.insert(v);
  if (periodic_) {
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
      const Dyadic& xb = nodes_[i].x;
      for (BigInt k = (u - xb).ceil(); xb + Dyadic(k) < v; ++k) {
        Dyadic x = xb + Dyadic(k);
        if (u < x) xs.insert(x);
      }
    }
  } else {
    if (!(nodes_.front().x <= u && v <= nodes_.back().x))
      throw std::out_of_range("PlMap::restrict outside domain");
    for (const auto& n : nodes_)
      if (u < n.x && n.x < v) xs.insert(n.x);
  }
  std::vector<PlNode> nodes;
  for (const auto& x : xs) nodes.push_back({x, eval(x)});
  return PlMap(std::move(nodes));
}

PlMap PlMap::translate_conj(const Dyadic& s, const Dyadic& t) const {
  std::vector<PlNode> nodes;
  nodes.reserve(nodes_.size());
  for (const auto& n : nodes_) nodes.push_back({n.x - s, n.y - t});
  return PlMap(std::move(nodes), periodic_);
}

PlMap PlMap::reflect() const {
  std::vector<PlNode> nodes;
  nodes.reserve(nodes_.size());
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
    nodes.push_back({-it->x, -it->y});
  return PlMap(std::move(nodes), periodic_);
}

bool PlMap::is_identity() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const PlNode& n) { return n.x == n.y; });
}

std::string PlMap::str() const {
  std::string s = periodic_ ? "pl~[" : "pl[";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (i) s += ' ';
    s += '(' + nodes_[i].x.str() + ',' + nodes_[i].y.str() + ')';
  }
  s += ']';
  return s;
}

PlMap compose(const PlMap& f, const PlMap& g) {
  if (!f.periodic() && g.periodic())
    throw std::invalid_argument("cannot compose interval map after line map");
  std::set<Dyadic> xs;
  std::vector<PlNode> nodes;
  if (g.periodic()) {
    // both periodic: breakpoints over one period of g
    for (const auto& n : g.nodes()) xs.insert(n.x);
    const Dyadic w_lo = g.img_lo();
    for (const auto& m : f.nodes()) {
      BigInt k = (w_lo - m.x).ceil();
      Dyadic w = m.x + Dyadic(k);
      for (int probe = 0; probe < 2; ++probe, w += Dyadic(1))
        if (w_lo <= w && w <= w_lo + Dyadic(1)) xs.insert(g.inv_eval(w));
    }
    xs.insert(g.dom_lo() + Dyadic(1));
    for (const auto& x : xs)
      if (g.dom_lo() <= x && x <= g.dom_lo() + Dyadic(1)) nodes.push_back({x, f.eval(g.eval(x))});
    return PlMap(std::move(nodes), true);
  }
  if (!f.periodic()) {
    if (g.image() != f.domain())
      throw std::invalid_argument("compose: image of g must equal domain of f");
    for (const auto& m : f.nodes())
      if (g.img_lo() <= m.x && m.x <= g.img_hi()) xs.insert(g.inv_eval(m.x));
  } else {
    for (const auto& m : f.nodes()) {
      BigInt k = (g.img_lo() - m.x).ceil();
      for (Dyadic w = m.x + Dyadic(k); w <= g.img_hi(); w += Dyadic(1))
        if (g.img_lo() <= w) xs.insert(g.inv_eval(w));
    }
  }
  for (const auto& n : g.nodes()) xs.insert(n.x);
  for (const auto& x : xs) nodes.push_back({x, f.eval(g.eval(x))});
  return PlMap(std::move(nodes));
}

PlMap concat(const std::vector<PlMap>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat of nothing");
  std::vector<PlNode> nodes = parts.front().nodes();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto& p = parts[i];
    if (p.dom_lo() != nodes.back().x || p.img_lo() != nodes.back().y)
      throw std::invalid_argument("concat: parts do not glue continuously");
    nodes.insert(nodes.end(), p.nodes().begin() + 1, p.nodes().end());
  }
  return PlMap(std::move(nodes));
}

namespace {

/// Dyadic PL map [0,1] -> [0,n] through nodes (1 - 2^-j, j).
PlMap unit_to_integer(const BigInt& n) {
  if (n == 1) return PlMap::identity(0, 1);
  std::vector<PlNode> nodes;
  nodes.push_back({Dyadic(0), Dyadic(0)});
  BigInt j = 1;
  while (j < n) {
    nodes.push_back({Dyadic(1) - dy(1, j.convert_to<std::int64_t>()), Dyadic(j)});
    ++j;
  }
  nodes.push_back({Dyadic(1), Dyadic(n)});
  return PlMap(std::move(nodes));
}

/// Dyadic PL map [0,m] -> [0,n] for positive integers m, n.
PlMap integer_to_integer(const BigInt& m, const BigInt& n) {
  if (m == n) return PlMap::identity(0, Dyadic(m));
  if (m < n) {
    std::vector<PlMap> parts;
    if (m > 1) parts.push_back(PlMap::identity(0, Dyadic(m - 1)));
    PlMap tail = unit_to_integer(n - m + 1).translate_conj(Dyadic(1) - Dyadic(m), Dyadic(1) - Dyadic(m));
    parts.push_back(tail);
    return concat(parts);
  }
  return integer_to_integer(n, m).inverse();
}

}  // namespace

PlMap pl_connect(const Dyadic& a, const Dyadic& b, const Dyadic& c, const Dyadic& d) {
  if (!(a < b) || !(c < d)) throw std::invalid_argument("pl_connect: degenerate interval");
  const Dyadic l1 = b - a;
  const Dyadic l2 = d - c;
  const std::int64_t k1 = l1.exp();
  const std::int64_t k2 = l2.exp();
  PlMap in = PlMap::affine(a, b, k1, -a.mul_pow2(k1));           // [a,b] -> [0,m1]
  PlMap mid = integer_to_integer(l1.num(), l2.num());            // [0,m1] -> [0,m2]
  PlMap out = PlMap::affine(Dyadic(0), Dyadic(l2.num()), -k2, c);  // [0,m2] -> [c,d]
  return compose(out, compose(mid, in));
}

PlMap pl_push_off(const DyInterval& j, const Dyadic& l0, const Dyadic& l1) {
  if (!(j.lo < l0 && l0 < l1 && l1 < j.hi))
    throw std::invalid_argument("pl_push_off: L must sit strictly inside J");
  const Dyadic p = midpoint(j.lo, l0);
  const Dyadic r = midpoint(l1, j.hi);
  const Dyadic q = midpoint(l1, r);
  std::vector<PlMap> parts;
  parts.push_back(PlMap::identity(j.lo, p));
  parts.push_back(pl_connect(p, l0, p, q));
  parts.push_back(pl_connect(l0, r, q, r));
  parts.push_back(PlMap::identity(r, j.hi));
  return concat(parts);
}

std::vector<PlMap> thompson_f_generators01() {
  PlMap a({{Dyadic(0), Dyadic(0)},
           {half(1), dy(1, 2)},
           {dy(3, 2), half(1)},
           {Dyadic(1), Dyadic(1)}});
  PlMap b({{Dyadic(0), Dyadic(0)},
           {half(1), half(1)},
           {dy(3, 2), dy(5, 3)},
           {dy(7, 3), dy(3, 2)},
           {Dyadic(1), Dyadic(1)}});
  return {a, b};
}

std::vector<PlMap> thompson_f_generators(const DyInterval& I) {
  PlMap c = pl_connect(Dyadic(0), Dyadic(1), I.lo, I.hi);
  std::vector<PlMap> out;
  for (const auto& g : thompson_f_generators01())
    out.push_back(compose(c, compose(g, c.inverse())));
  return out;
}

std::vector<PlMap> ttilde_generators() {
  PlMap a({{Dyadic(0), Dyadic(0)},
           {half(1), dy(1, 2)},
           {dy(3, 2), half(1)},
           {Dyadic(1), Dyadic(1)}},
          true);
  PlMap b({{Dyadic(0), Dyadic(0)},
           {half(1), half(1)},
           {dy(3, 2), dy(5, 3)},
           {dy(7, 3), dy(3, 2)},
           {Dyadic(1), Dyadic(1)}},
          true);
  PlMap c({{Dyadic(0), dy(3, 2)},
           {half(1), Dyadic(1)},
           {dy(3, 2), dy(3, 1)},
           {Dyadic(1), dy(7, 2)}},
          true);
  return {a, b, c, PlMap::line_translation(1)};
}

namespace {

/// n with 2^(-n-1) < d <= 2^(-n), for d > 0.
std::int64_t dyadic_level(const Dyadic& d) {
  const std::int64_t e = d.floor_log2_abs();
  if (d == Dyadic(1).mul_pow2(e)) return -e;
  return -e - 1;
}

}  // namespace

Dyadic GermConjugator::eval(const Dyadic& x) const {
  if (side_ == Side::left) {
    const Dyadic d = x0_ - x;
    if (!(d > Dyadic(0))) throw std::out_of_range("GermConjugator::eval wrong side");
    const std::int64_t n = dyadic_level(d);
    return Dyadic(BigInt(n)) + (x - (x0_ - Dyadic(1).mul_pow2(-n))).mul_pow2(n + 1);
  }
  const Dyadic d = x - x0_;
  if (!(d > Dyadic(0))) throw std::out_of_range("GermConjugator::eval wrong side");
  const std::int64_t n = dyadic_level(d);
  return Dyadic(BigInt(-n - 1)) + (x - (x0_ + Dyadic(1).mul_pow2(-n - 1))).mul_pow2(n + 1);
}

Dyadic GermConjugator::inv_eval(const Dyadic& w) const {
  if (side_ == Side::left) {
    const BigInt n = w.floor();
    const std::int64_t ni = n.convert_to<std::int64_t>();
    return x0_ - Dyadic(1).mul_pow2(-ni) + (w - Dyadic(n)).mul_pow2(-ni - 1);
  }
  const BigInt nc = (-w).ceil() - 1;
  const std::int64_t ni = nc.convert_to<std::int64_t>();
  return x0_ + Dyadic(1).mul_pow2(-ni - 1) + (w + Dyadic(nc) + Dyadic(1)).mul_pow2(-ni - 1);
}

PlMap GermConjugator::restrict(const Dyadic& u, const Dyadic& v) const {
  if (!(u < v)) throw std::invalid_argument("GermConjugator::restrict needs u < v");
  std::vector<PlNode> nodes;
  nodes.push_back({u, eval(u)});
  // interior nodes sit at x0 -+ 2^-n
  const BigInt wlo = eval(u).floor() + 1;
  const BigInt whi = eval(v).ceil() - 1;
  for (BigInt w = wlo; w <= whi; ++w) {
    Dyadic x = inv_eval(Dyadic(w));
    if (u < x && x < v) nodes.push_back({x, Dyadic(w)});
  }
  nodes.push_back({v, eval(v)});
  return PlMap(std::move(nodes));
}

}  // namespace flowline
