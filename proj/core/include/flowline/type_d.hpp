#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "flowline/pl_map.hpp"

namespace flowline {

struct Certificate {
  bool ok = true;
  std::string detail;
  std::optional<Dyadic> witness;
};

/// One side of a self-similar singularity. The annulus map determines the map
/// on the whole side of the window by the commutation with doubling maps:
/// f(x) = h_{y0}^{-n}(A(h_{x0}^n(x))) for the level n taking x into the
/// fundamental annulus [x0-scale, x0-scale/2] (left) or [x0+scale/2, x0+scale]
/// (right).
struct GermSide {
  Dyadic scale;   // any positive dyadic
  PlMap annulus;  // strictly increasing dyadic PL on the fundamental annulus
};

struct Germ {
  Dyadic x0;
  Dyadic y0;
  std::optional<GermSide> left;
  std::optional<GermSide> right;

  Dyadic win_lo() const { return left ? x0 - left->scale : x0; }
  Dyadic win_hi() const { return right ? x0 + right->scale : x0; }
};

/// Increasing homeomorphism between closed dyadic intervals that is dyadic PL
/// away from finitely many singular points, at which it commutes with the
/// doubling maps h (the germ data above). With no germs this is exactly a
/// PlMap.
class TypeDMap {
 public:
  using Seg = std::variant<PlMap, Germ>;

  explicit TypeDMap(std::vector<Seg> segs);
  static TypeDMap from_pl(PlMap pl);
  static TypeDMap identity(const Dyadic& lo, const Dyadic& hi);

  const std::vector<Seg>& segs() const { return segs_; }
  Dyadic dom_lo() const;
  Dyadic dom_hi() const;
  Dyadic img_lo() const;
  Dyadic img_hi() const;
  DyInterval domain() const { return DyInterval::closed(dom_lo(), dom_hi()); }
  DyInterval image() const { return DyInterval::closed(img_lo(), img_hi()); }

  Dyadic eval(const Dyadic& x) const;
  Dyadic inv_eval(const Dyadic& y) const;
  Dyadic operator()(const Dyadic& x) const { return eval(x); }

  bool is_pl() const;
  bool is_identity() const;
  /// Singular points (germ centers), in increasing order.
  std::vector<Dyadic> singular_points() const;

  TypeDMap inverse() const;
  /// Sub-map on [u, v]. Cutting inside a germ window re-derives the germ at a
  /// smaller scale; cutting at the center keeps the one-sided germ.
  TypeDMap restrict(const Dyadic& u, const Dyadic& v) const;
  /// Finite PL restriction; [u, v] must not contain a singular point.
  PlMap restrict_to_pl(const Dyadic& u, const Dyadic& v) const;
  /// x -> f(x + s) - t.
  TypeDMap translate_conj(const Dyadic& s, const Dyadic& t) const;
  /// x -> -f(-x).
  TypeDMap reflect() const;
  /// Shrinks germ windows so that none contains a point of `pts` (other than
  /// its own center).
  TypeDMap avoid_windows(const std::vector<Dyadic>& pts) const;

  /// Re-derives every germ side at scales <= max_scale with annulus image span
  /// <= max_image; the vacated rings become explicit PL material. The map is
  /// unchanged.
  TypeDMap shrink_germ_sides(const Dyadic& max_scale, const Dyadic& max_image) const;

  /// Maximal runs of non-identity material, as closed dyadic hulls.
  std::vector<DyInterval> support_hull() const;

  std::string str() const;

 private:
  void validate() const;
  std::vector<Seg> segs_;
};

/// Structural + pointwise equality (canonical: affine germ sides dissolve,
/// germ windows are compared at a common scale).
bool equal(const TypeDMap& f, const TypeDMap& g);

/// Exact supremum of |f(x) - x| (attained at PL nodes, germ data points, or in
/// the limit at a germ centre).
Dyadic displacement_bound(const TypeDMap& f);

/// f after g; image of g must equal domain of f.
TypeDMap compose(const TypeDMap& f, const TypeDMap& g);

TypeDMap concat(const std::vector<TypeDMap>& parts);

/// Structural invariants plus the sampled self-similarity identity
/// d_eval(h_{x0}(x)) = h_{y0}(d_eval(x)) at `samples` random dyadics per germ.
Certificate verify_type_d(const TypeDMap& f, int samples, std::mt19937_64& rng);

/// Splits f = f1 o f2 with support(f1) in i1 and support(f2) in i2, given
/// closure(supp f) in i1 union i2. Fails (with the offending point) when some
/// point is displaced across the whole overlap.
struct FragmentResult {
  bool ok = false;
  std::string detail;
  std::optional<Dyadic> witness;
  std::optional<TypeDMap> f1;
  std::optional<TypeDMap> f2;
};
FragmentResult fragment(const TypeDMap& f, const DyInterval& i1, const DyInterval& i2);

/// A germ element of scriptF(I): supported compactly in I, single singularity
/// at x acting as the transport of the line map u (an element commuting with
/// x -> x+1) through the germ conjugator on the given side; identity germ on
/// the other side.
TypeDMap germ_element(const DyInterval& I, const Dyadic& x, Side side, const PlMap& u);
/// One-sided germ element at an endpoint of I (at_lo selects which one).
TypeDMap endpoint_germ_element(const DyInterval& I, bool at_lo, const PlMap& u);

/// Generating family of scriptF(I): the Thompson F pair on I, the transported
/// line-map generators as two-sided germs at x, and the one-sided germ
/// families at both endpoints.
std::vector<TypeDMap> script_f_generators(const DyInterval& I, const Dyadic& x);

}  // namespace flowline
