#include "flowline/fragment.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace flowline {

namespace {

Dyadic atlas_displacement(const Atlas& g) {
  Dyadic d = 0;
  for (const auto& p : g.pieces()) d = max(d, displacement_bound(p.fiber));
  return d;
}

Atlas shrink_atlas_germs(const Atlas& g, const Dyadic& max_scale, const Dyadic& max_image) {
  std::vector<AtlasPiece> pieces;
  for (const auto& p : g.pieces())
    pieces.push_back({p.c, p.lo, p.hi, p.fiber.shrink_germ_sides(max_scale, max_image)});
  return Atlas(g.ambient(), std::move(pieces));
}

Dyadic clamp_to(const Dyadic& v, const Dyadic& x, const Dyadic& cap) {
  return min(max(v, x - cap), x + cap);
}

/// Mirror transform of a cell under t -> 1 - t (the sigma-hat fiber action).
struct Cell {
  Dyadic p, q, vp, vq;
  Cell mirrored() const { return {Dyadic(1) - q, Dyadic(1) - p, Dyadic(1) - vq, Dyadic(1) - vp}; }
  bool operator<(const Cell& o) const {
    if (p != o.p) return p < o.p;
    if (q != o.q) return q < o.q;
    if (vp != o.vp) return vp < o.vp;
    return vq < o.vq;
  }
  bool operator==(const Cell& o) const = default;
};

/// Dyadic PL cell filler that commutes with the mirror transform, so that
/// stage maps built from it stay sigma-hat equivariant.
PlMap symmetric_connector(const Cell& cell) {
  if (cell.p == cell.vp && cell.q == cell.vq) return PlMap::identity(cell.p, cell.q);
  const Cell m = cell.mirrored();
  if (m < cell) {
    PlMap base = symmetric_connector(m);
    return base.reflect().translate_conj(Dyadic(-1), Dyadic(-1));
  }
  if (cell == m) {
    // self-mirrored cell: build one half and reflect it
    const Dyadic mid = midpoint(cell.p, cell.q);
    PlMap lower = pl_connect(cell.p, mid, cell.vp, mid);
    PlMap upper = lower.reflect().translate_conj(Dyadic(-1), Dyadic(-1));
    return concat({lower, upper});
  }
  return pl_connect(cell.p, cell.q, cell.vp, cell.vq);
}

/// Stage map: f with its displacement capped at `cap`, interpolated over the
/// fiber's structural nodes plus an absolute 2^-grid_exp grid. Germ windows
/// are kept atomic: fully present once their displacement fits under the cap,
/// PL-interpolated otherwise.
TypeDMap stage_fiber(const TypeDMap& f, const Dyadic& cap, std::int64_t grid_exp) {
  struct Window {
    Dyadic lo, x0, hi;
    bool uncapped;
  };
  std::vector<Window> windows;
  std::set<Dyadic> nodes{f.dom_lo(), f.dom_hi()};
  for (const auto& seg : f.segs()) {
    if (std::holds_alternative<PlMap>(seg)) {
      for (const auto& nd : std::get<PlMap>(seg).nodes()) nodes.insert(nd.x);
    } else {
      const Germ& g = std::get<Germ>(seg);
      Dyadic wd = (g.y0 - g.x0).abs();
      for (const auto& side : {g.left, g.right}) {
        if (!side) continue;
        for (const auto& nd : side->annulus.nodes()) wd = max(wd, (nd.y - nd.x).abs());
      }
      windows.push_back({g.win_lo(), g.x0, g.win_hi(), wd <= cap});
      nodes.insert(g.win_lo());
      nodes.insert(g.x0);
      nodes.insert(g.win_hi());
    }
  }
  const Dyadic step = Dyadic(1).mul_pow2(-grid_exp);
  for (BigInt k = f.dom_lo().mul_pow2(grid_exp).ceil();; ++k) {
    const Dyadic t = Dyadic(k).mul_pow2(-grid_exp);
    if (t >= f.dom_hi()) break;
    if (t > f.dom_lo()) nodes.insert(t);
  }
  (void)step;
  // grid nodes interior to germ windows would break their atomic treatment
  for (const auto& w : windows) {
    for (auto it = nodes.upper_bound(w.lo); it != nodes.end() && *it < w.hi;) {
      if (*it != w.x0)
        it = nodes.erase(it);
      else
        ++it;
    }
  }
  std::vector<Dyadic> xs(nodes.begin(), nodes.end());
  std::vector<TypeDMap> parts;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const Dyadic& p = xs[i];
    const Dyadic& q = xs[i + 1];
    const Window* win = nullptr;
    for (const auto& w : windows)
      if (w.lo <= p && q <= w.hi) win = &w;
    if (win && win->uncapped) {
      if (p == win->lo && (q == win->x0 || q == win->hi)) {
        parts.push_back(f.restrict(win->lo, win->hi));  // whole window at once
      }
      continue;  // the second half was covered above
    }
    const Dyadic vp = clamp_to(f.eval(p), p, cap);
    const Dyadic vq = clamp_to(f.eval(q), q, cap);
    if (vp == f.eval(p) && vq == f.eval(q) && !win) {
      parts.push_back(f.restrict(p, q));  // cap inactive on an affine cell
    } else {
      parts.push_back(TypeDMap::from_pl(symmetric_connector({p, q, vp, vq})));
    }
  }
  return concat(parts);
}

Atlas stage_atlas(const Atlas& g, const Dyadic& cap, std::int64_t grid_exp) {
  std::vector<AtlasPiece> pieces;
  for (const auto& p : g.pieces())
    pieces.push_back({p.c, p.lo, p.hi, stage_fiber(p.fiber, cap, grid_exp)});
  return Atlas(g.ambient(), std::move(pieces));
}

/// Sides of the quarter slabs in the fundamental window.
const std::vector<Dyadic>& quarter_sides() {
  static const std::vector<Dyadic> sides{Dyadic(0), dy(1, 2), half(1), dy(3, 2)};
  return sides;
}

/// Partner clopen of D at a self-mirrored side: sigma at t=0, sigma o phi^{-1}
/// at t=1/2.
Clopen side_partner(const Clopen& d, const Dyadic& side) {
  if (side.is_zero()) return d.image_reversal();
  return d.image_reversal().image_shift(-1);
}

struct CorrectorPlan {
  std::vector<Atlas> correctors;
  std::vector<int> charts;
};

/// Splits every atom of `fam` one letter finer (on the left of its window).
std::vector<Clopen> refine_family(const Sft& s, const std::vector<Clopen>& fam) {
  std::vector<Clopen> out;
  for (const auto& a : fam) {
    for (int l = 0; l < s.alphabet().size(); ++l) {
      std::set<Word> ws;
      for (const auto& w : a.words()) {
        Word e;
        e.reserve(w.size() + 1);
        e.push_back(l);
        e.insert(e.end(), w.begin(), w.end());
        ws.insert(std::move(e));
      }
      Clopen c(s, a.lo() - 1, std::move(ws));
      if (!c.is_empty()) out.push_back(std::move(c));
    }
  }
  return out;
}

/// Elements on the side-overlap windows pulling every side image of h back to
/// the side, built sigma-hat-equivariantly.
CorrectorPlan side_correctors(const Atlas& h, const ChartDecomposition& cover,
                              const Dyadic& window_half) {
  const Sft& s = h.ambient();
  CorrectorPlan plan;
  const std::vector<Dyadic> own_sides{Dyadic(0), dy(1, 2), half(1)};  // 3/4 mirrors 1/4
  for (const auto& t0 : own_sides) {
    const bool self_side = t0.is_zero() || t0 == half(1);
    // side value per point, constant on each piece clopen
    std::vector<std::pair<Clopen, Dyadic>> values;
    for (const auto& p : h.pieces()) {
      if (!(p.lo <= t0 && t0 < p.hi)) continue;
      values.emplace_back(p.c, p.fiber.eval(t0));
    }
    // atoms: piece clopens refined by the cover partition, then (self sides)
    // closed under the side involution and split until the side chart is valid
    std::vector<Clopen> atoms;
    for (const auto& [c, v] : values) {
      for (const auto& ck : cover.partition) {
        Clopen a = c.intersect(ck);
        if (!a.is_empty()) atoms.push_back(std::move(a));
      }
      (void)v;
    }
    if (self_side) {
      for (int guard = 0; guard < 8; ++guard) {
        // close under the side partner map
        std::vector<Clopen> refined;
        for (const auto& a : atoms)
          for (const auto& b : atoms) {
            Clopen piece = a.intersect(side_partner(b, t0));
            if (!piece.is_empty()) refined.push_back(std::move(piece));
          }
        atoms = std::move(refined);
        bool ok = true;
        for (const auto& a : atoms)
          ok = ok && chart_validate(s, a, DyInterval::open(t0 - window_half, t0 + window_half),
                                    true)
                         .valid;
        if (ok) break;
        atoms = refine_family(s, atoms);
        if (guard == 7) throw std::runtime_error("side atoms did not stabilize");
      }
    }
    std::vector<Clopen> done;
    for (const auto& a : atoms) {
      bool skip = false;
      for (const auto& d : done)
        if (d.same_set(a)) skip = true;
      if (skip) continue;
      std::optional<Dyadic> v;
      for (const auto& [c, val] : values)
        if (a.subset_of(c)) v = val;
      if (!v) throw std::runtime_error("side atom not contained in a piece");
      done.push_back(a);
      if (self_side) done.push_back(side_partner(a, t0));
      if (*v == t0) continue;
      if ((*v - t0).abs() >= window_half)
        throw std::runtime_error("side displacement exceeds the corrector window");
      TypeDMap bump =
          concat({TypeDMap::from_pl(pl_connect(t0 - window_half, *v, t0 - window_half, t0)),
                  TypeDMap::from_pl(pl_connect(*v, t0 + window_half, t0, t0 + window_half))});
      plan.correctors.push_back(Atlas::from_z_chart(s, a, bump));
      int quarter = static_cast<int>((t0 * Dyadic(4)).floor().convert_to<long>()) % 4;
      int cover_piece = 0;
      for (std::size_t k = 0; k < cover.partition.size(); ++k)
        if (a.subset_of(cover.partition[k])) cover_piece = static_cast<int>(k);
      plan.charts.push_back(cover_piece * 4 + quarter);
    }
  }
  return plan;
}

struct SlabPlan {
  std::vector<Atlas> factors;
  std::vector<int> charts;
};

/// Splits a side-fixing element into sigma-hat-equivariant factors supported
/// in single quarter charts.
SlabPlan slab_parts(const Atlas& h, const ChartDecomposition& cover) {
  const Sft& s = h.ambient();
  SlabPlan plan;
  const Dyadic quarter = dy(1, 2);
  auto part_of = [&](std::size_t k, int j) -> std::optional<Atlas> {
    const Dyadic lo = quarter * Dyadic(j);
    const Dyadic hi = quarter * Dyadic(j + 1);
    std::vector<AtlasPiece> active;
    for (const auto& p : h.pieces()) {
      const Dyadic u = max(p.lo, lo);
      const Dyadic v = min(p.hi, hi);
      if (!(u < v)) continue;
      Clopen c = p.c.intersect(cover.partition[k]);
      if (c.is_empty()) continue;
      TypeDMap f = p.fiber.restrict(u, v);
      if (f.is_identity()) continue;
      active.push_back({std::move(c), u, v, std::move(f)});
    }
    if (active.empty()) return std::nullopt;
    // boundary values are fixed (= the side), so the identity fill glues
    std::set<Dyadic> cuts{Dyadic(0), Dyadic(1)};
    for (const auto& p : active) {
      cuts.insert(p.lo);
      cuts.insert(p.hi);
    }
    std::vector<AtlasPiece> pieces = std::move(active);
    auto it = cuts.begin();
    Dyadic prev = *it;
    for (++it; it != cuts.end(); ++it) {
      Clopen coveredc = Clopen::empty(s);
      for (const auto& p : pieces)
        if (p.lo <= prev && *it <= p.hi) coveredc = coveredc.unioned(p.c);
      Clopen rest = coveredc.complement();
      if (!rest.is_empty()) pieces.push_back({rest, prev, *it, TypeDMap::identity(prev, *it)});
      prev = *it;
    }
    return Atlas(s, std::move(pieces));
  };
  std::vector<std::vector<std::optional<Atlas>>> grid(cover.partition.size());
  for (std::size_t k = 0; k < cover.partition.size(); ++k)
    for (int j = 0; j < 4; ++j) grid[k].push_back(part_of(k, j));
  std::vector<std::vector<bool>> used(cover.partition.size(), std::vector<bool>(4, false));
  for (std::size_t k = 0; k < cover.partition.size(); ++k) {
    for (int j = 0; j < 4; ++j) {
      if (!grid[k][j] || used[k][j]) continue;
      used[k][j] = true;
      Atlas part = *grid[k][j];
      Atlas mirror = part.sigma_conjugate();
      if (equal(mirror, part)) {
        plan.factors.push_back(part);
        plan.charts.push_back(static_cast<int>(k) * 4 + j);
        continue;
      }
      // locate the partner: clopen sigma-phi image of C_k, slab 3 - j
      const int jm = 3 - j;
      Clopen mc = cover.partition[k].image_shift(1).image_reversal();
      bool found = false;
      for (std::size_t k2 = 0; k2 < cover.partition.size() && !found; ++k2) {
        if (!cover.partition[k2].same_set(mc)) continue;
        if (!grid[k2][jm] || used[k2][jm])
          throw std::runtime_error("mirror slab part missing: element not equivariant?");
        if (!equal(*grid[k2][jm], mirror))
          throw std::runtime_error("mirror slab part does not match");
        used[k2][jm] = true;
        plan.factors.push_back(compose(part, *grid[k2][jm]));
        plan.charts.push_back(static_cast<int>(k) * 4 + j);
        found = true;
      }
      if (!found) throw std::runtime_error("mirror cover piece not found");
    }
  }
  return plan;
}

}  // namespace

FragmentationResult fragment_element(const Atlas& g, const ChartDecomposition& cover) {
  FragmentationResult res;
  const Sft& s = g.ambient();
  if (!equal(g.sigma_conjugate(), g)) {
    res.detail = "element is not sigma-hat equivariant";
    return res;
  }
  // singular points must keep a margin from the quarter boundaries
  Dyadic margin = dy(1, 4);  // 1/16
  for (const auto& p : g.pieces()) {
    for (const auto& x0 : p.fiber.singular_points()) {
      for (const auto& t0 : quarter_sides()) {
        const Dyadic d = (x0 - t0).abs();
        if (d.is_zero()) {
          res.detail = "singular fiber point sits on a chart boundary";
          return res;
        }
        margin = min(margin, d);
      }
      const Dyadic dwrap = (x0 - Dyadic(1)).abs();
      if (dwrap.is_zero()) {
        res.detail = "singular fiber point sits on the wrap";
        return res;
      }
      margin = min(margin, dwrap);
    }
  }
  const Dyadic window_half = dy(1, 4);  // 1/16 corrector half-window
  std::int64_t grid_exp = 6;            // 1/64 grid
  for (int attempt = 0; attempt < 3; ++attempt, ++grid_exp) {
    res.factors.clear();
    res.factor_chart.clear();
    const Dyadic eps = Dyadic(1).mul_pow2(-grid_exp);
    Atlas base = shrink_atlas_germs(g, min(margin.mul_pow2(-1), eps.mul_pow2(-2)),
                                    eps.mul_pow2(-2));
    const Dyadic disp = atlas_displacement(base);
    // chain stages
    std::vector<Atlas> stages{Atlas::identity(s)};
    if (disp > window_half) {
      long n = 1;
      while (Dyadic(n) * eps < disp) ++n;
      for (long j = 1; j < n; ++j) stages.push_back(stage_atlas(base, Dyadic(j) * eps, grid_exp));
    }
    stages.push_back(base);
    bool ok = true;
    std::vector<Atlas> hs;
    for (std::size_t j = 0; j + 1 < stages.size(); ++j) {
      Atlas h = compose(stages[j + 1], stages[j].inverse());
      if (atlas_displacement(h) >= window_half) {
        ok = false;
        break;
      }
      hs.push_back(std::move(h));
    }
    if (!ok) continue;
    try {
      for (auto it = hs.rbegin(); it != hs.rend(); ++it) {
        const Atlas& h = *it;
        if (h.is_identity()) continue;
        CorrectorPlan cp = side_correctors(h, cover, window_half);
        Atlas kh = h;
        for (const auto& c : cp.correctors) kh = compose(c, kh);
        // kh must fix every slab side
        for (const auto& p : kh.pieces()) {
          for (const auto& t0 : quarter_sides())
            if (p.lo <= t0 && t0 < p.hi && p.fiber.eval(t0) != t0)
              throw std::runtime_error("side correction incomplete");
          if (p.hi == Dyadic(1) && p.fiber.eval(Dyadic(1)) != Dyadic(1))
            throw std::runtime_error("side correction incomplete at the wrap");
        }
        SlabPlan sp = slab_parts(kh, cover);
        for (std::size_t i = 0; i < cp.correctors.size(); ++i) {
          res.factors.push_back(cp.correctors[i].inverse());
          res.factor_chart.push_back(cp.charts[i]);
        }
        for (std::size_t i = 0; i < sp.factors.size(); ++i) {
          res.factors.push_back(sp.factors[i]);
          res.factor_chart.push_back(sp.charts[i]);
        }
      }
    } catch (const std::exception& e) {
      res.detail = e.what();
      continue;
    }
    // exact verification: the ordered product (left-to-right composition)
    // reproduces g
    Atlas acc = Atlas::identity(s);
    for (const auto& f : res.factors) acc = compose(acc, f);
    if (!equal(acc, g)) {
      res.detail = "recomposition mismatch";
      continue;
    }
    for (const auto& f : res.factors) {
      if (!equal(f.sigma_conjugate(), f)) {
        res.detail = "factor escaped the centralizer";
        return res;
      }
    }
    res.ok = true;
    res.detail = "fragmented into " + std::to_string(res.factors.size()) + " chart factors";
    return res;
  }
  if (res.detail.empty()) res.detail = "displacement chain failed within the grid budget";
  return res;
}

}  // namespace flowline
