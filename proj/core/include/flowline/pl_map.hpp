#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowline/dyadic.hpp"

namespace flowline {

/// Node of a piecewise map: the graph passes through (x, y).
struct PlNode {
  Dyadic x;
  Dyadic y;
  bool operator==(const PlNode& o) const = default;
};

/// Increasing dyadic piecewise-linear homeomorphism.
///
/// Interval maps carry their whole graph as a node list over [a, b]; every
/// segment slope is an exact power of two. Line maps commuting with x -> x+1
/// store one fundamental period [x0, x0+1] with f(x0+1) = f(x0)+1 and are
/// evaluated by integer reduction.
class PlMap {
 public:
  PlMap() = default;
  explicit PlMap(std::vector<PlNode> nodes, bool periodic = false);

  static PlMap identity(const Dyadic& lo, const Dyadic& hi);
  static PlMap affine(const Dyadic& lo, const Dyadic& hi, std::int64_t slope_exp, const Dyadic& offset);
  /// Line map x -> x + s (s integer for the periodic class).
  static PlMap line_translation(const BigInt& s);

  const std::vector<PlNode>& nodes() const { return nodes_; }
  bool periodic() const { return periodic_; }
  Dyadic dom_lo() const { return nodes_.front().x; }
  Dyadic dom_hi() const { return nodes_.back().x; }
  Dyadic img_lo() const { return nodes_.front().y; }
  Dyadic img_hi() const { return nodes_.back().y; }
  DyInterval domain() const { return DyInterval::closed(dom_lo(), dom_hi()); }
  DyInterval image() const { return DyInterval::closed(img_lo(), img_hi()); }

  Dyadic eval(const Dyadic& x) const;
  Dyadic inv_eval(const Dyadic& y) const;
  Dyadic operator()(const Dyadic& x) const { return eval(x); }

  /// Slope exponents per segment, in order.
  std::vector<std::int64_t> slope_exps() const;

  PlMap inverse() const;
  /// Restriction to [u, v] (a subinterval of the domain; for periodic maps any
  /// bounded interval), as a plain interval map.
  PlMap restrict(const Dyadic& u, const Dyadic& v) const;
  /// x -> f(x + s) - t; for periodic maps with integer s, t stays periodic.
  PlMap translate_conj(const Dyadic& s, const Dyadic& t) const;
  /// x -> -f(-x).
  PlMap reflect() const;
  bool is_identity() const;

  bool operator==(const PlMap& o) const {
    return periodic_ == o.periodic_ && nodes_ == o.nodes_;
  }

  std::string str() const;

 private:
  void normalize();
  /// Node span of one period starting at x (periodic maps).
  std::vector<PlNode> period_from(const Dyadic& x) const;

  std::vector<PlNode> nodes_;
  bool periodic_ = false;
};

/// f after g; g's image must equal f's domain (interval maps), or both periodic.
PlMap compose(const PlMap& f, const PlMap& g);

/// Glues maps on touching domains into one map; consecutive entries must agree
/// at the shared endpoint.
PlMap concat(const std::vector<PlMap>& parts);

/// Some dyadic PL homeomorphism [a,b] -> [c,d] (two-sided Thompson transport).
PlMap pl_connect(const Dyadic& a, const Dyadic& b, const Dyadic& c, const Dyadic& d);

/// An element of F^c(J) mapping L = [l0, l1] strictly off itself (to the right),
/// with support compactly inside the open interval J.
PlMap pl_push_off(const DyInterval& j, const Dyadic& l0, const Dyadic& l1);

/// Standard Thompson F pair on [0, 1].
std::vector<PlMap> thompson_f_generators01();
/// The [0,1] pair transported to the dyadic interval I.
std::vector<PlMap> thompson_f_generators(const DyInterval& I);
/// Periodic line maps: lifts of the standard T generators plus the unit
/// translation t_1.
std::vector<PlMap> ttilde_generators();

enum class Side { left, right };

/// Dyadic PL homeomorphism c from one side of x0 onto the line with
/// c(x0 -+ 2^-n) = +-n, linear between consecutive nodes. It conjugates the
/// doubling map h_{x0} to the unit translation: c(h_{x0}(x)) = c(x) -+ 1.
/// The full map has infinitely many breakpoints; it is exposed through exact
/// evaluation and finite restrictions.
class GermConjugator {
 public:
  GermConjugator(Dyadic x0, Side side) : x0_(std::move(x0)), side_(side) {}

  const Dyadic& x0() const { return x0_; }
  Side side() const { return side_; }

  Dyadic eval(const Dyadic& x) const;
  Dyadic inv_eval(const Dyadic& w) const;
  /// Finite PL restriction to [u, v], a compact interval on the chosen side
  /// (not containing x0).
  PlMap restrict(const Dyadic& u, const Dyadic& v) const;

 private:
  Dyadic x0_;
  Side side_;
};

}  // namespace flowline
