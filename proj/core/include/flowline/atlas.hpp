#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowline/suspension.hpp"
#include "flowline/type_d.hpp"

namespace flowline {

/// One slab of a group element: for x in c and t in [lo, hi), the element maps
/// pi(x, t) to pi(x, fiber(t)); fiber is a type-D homeomorphism on [lo, hi]
/// whose image may leave the fundamental window.
struct AtlasPiece {
  Clopen c;
  Dyadic lo;
  Dyadic hi;
  TypeDMap fiber;
};

/// Element of the suspension homeomorphism group: a finite piece family
/// partitioning X x [0,1), each piece acting fiber-wise by a type-D map.
class Atlas {
 public:
  Atlas(Sft ambient, std::vector<AtlasPiece> pieces);

  static Atlas identity(Sft ambient);
  /// Builds the element acting as `fiber` on the Y-chart C x I (I = fiber's
  /// domain), identity elsewhere. Pieces are normalized into the fundamental
  /// window.
  static Atlas from_y_chart(Sft ambient, const Clopen& c, const TypeDMap& fiber);
  /// The sigma-hat-equivariant element for a Z-chart: the Y-chart element
  /// together with its mirror.
  static Atlas from_z_chart(Sft ambient, const Clopen& c, const TypeDMap& fiber);

  const Sft& ambient() const { return ambient_; }
  const std::vector<AtlasPiece>& pieces() const { return pieces_; }

  PointY apply(const PointY& y) const;
  /// tau_g(y) = f(t) - t for the applicable piece.
  Dyadic cocycle(const PointY& y) const;

  Atlas inverse() const;
  /// Structural conjugate sigma-hat o g o sigma-hat.
  Atlas sigma_conjugate() const;

  bool is_identity() const;

  /// Closure of the moved set, as (clopen, closed interval) blocks per piece;
  /// germ windows contribute their hulls.
  std::vector<std::pair<Clopen, DyInterval>> support_region() const;

  std::string str() const;

 private:
  void merge_pieces();
  void sort_pieces();
  void validate() const;
  Sft ambient_;
  std::vector<AtlasPiece> pieces_;
};

/// g after h.
Atlas compose(const Atlas& g, const Atlas& h);
Atlas compose_word(const std::vector<Atlas>& word);

/// Structural equality via common refinement of pieces.
bool equal(const Atlas& g, const Atlas& h);

struct ElemCertificate {
  bool ok = true;
  std::string detail;
  std::optional<Dyadic> witness_t;
};

/// Partition and continuity are enforced at construction; this re-checks them,
/// runs the fiber verifier, and (for claimed centralizer elements) checks the
/// cocycle antisymmetry both structurally and on sampled points.
ElemCertificate elem_validate(const Atlas& g, int samples, std::mt19937_64& rng,
                              bool expect_equivariant);

PointY random_point_y(const Sft& s, std::mt19937_64& rng, int depth = 8);

/// Per-element piece budget for compositions; guards degenerate inputs.
inline constexpr std::size_t kAtlasPieceLimit = 200000;

}  // namespace flowline
