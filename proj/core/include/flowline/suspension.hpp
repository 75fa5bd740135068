#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowline/subshift.hpp"

namespace flowline {

/// Point of the suspension Y = (X x R)/Z, stored with t normalized into
/// [0, 1) via (x, t) ~ (phi(x), t - 1).
struct PointY {
  SymPoint x;
  Dyadic t;
};

PointY make_point_y(SymPoint x, Dyadic t);
PointY flow(const PointY& y, const Dyadic& s);
/// hat sigma: (x, t) -> (sigma(x), -t), renormalized.
PointY hat_sigma(const Sft& s, const PointY& y);

/// Equality on representable points; lazy symbolic coordinates are compared
/// out to `radius` letters.
bool point_y_equal(const PointY& a, const PointY& b, long radius = 64);

/// Point of the dihedral suspension Z = Y / hat-sigma: both lifts, with a
/// deterministic distinguished one (smaller t, then window-lexicographic x;
/// ties are impossible once the subshift passes the reversibility check).
struct PointZ {
  PointY main;
  PointY mirror;
};

PointZ project_lift(const Sft& s, const PointY& y);
std::pair<PointY, PointY> lifts(const PointZ& z);
bool point_z_equal(const Sft& s, const PointZ& a, const PointZ& b, long radius = 64);

/// Element of the infinite dihedral group acting on X x R by
/// (n, r) . (x, t) = (phi^n sigma^r (x), (-1)^r t - n).
struct DihedralElem {
  long n = 0;
  bool reflect = false;
  std::string str() const;
};

struct ChartCertificate {
  bool valid = true;
  std::string detail;
  std::optional<DihedralElem> violation;
};

/// Chart data Y_{C,I} / Z_{C,I} with its validity certificate.
struct Chart {
  Clopen c;
  DyInterval i;
  bool z_kind = true;
  std::optional<DyInterval> extended;  // enclosing valid interval J
  ChartCertificate cert;
};

/// Decides injectivity of the projection on C x I: enumerates the finite
/// obstruction set Gamma = {gamma != id : gamma(I) meets I} and checks the
/// exact clopen emptiness gamma(C) cap C = empty for each.
ChartCertificate chart_validate(const Sft& s, const Clopen& c, const DyInterval& i, bool z_kind);

/// Validated chart with an enclosing interval: closure(I) inside J, both valid.
std::optional<Chart> make_extendable_chart(const Sft& s, const Clopen& c, const DyInterval& i,
                                           const DyInterval& j, bool z_kind);

/// How the closures of two Z-charts meet.
enum class ChartMeet { disjoint, single_side, equal_chart, violation };

struct ChartMeetReport {
  ChartMeet kind = ChartMeet::disjoint;
  std::string detail;
};

/// Exact classification of closure(Z_{C1,I1}) cap closure(Z_{C2,I2}).
ChartMeetReport chart_closure_meet(const Sft& s, const Clopen& c1, const DyInterval& i1,
                                   const Clopen& c2, const DyInterval& i2);

struct ChartDecomposition {
  std::vector<Clopen> partition;   // refined clopen partition of X
  std::vector<Chart> charts;       // one chart per (piece, quarter interval)
  std::vector<int> canonical_of;   // charts[i] equals charts[canonical_of[i]] as a set
};

/// The quarter-interval decomposition: I_j = (j/4, (j+1)/4) over a clopen
/// partition refined until every Z_{C,I_j} is an extendable chart. Charts
/// identified by the dihedral action are grouped via canonical_of.
ChartDecomposition chart_decomposition(const Sft& s);

/// Membership of a point of Z in the closure of a chart.
bool chart_closure_contains(const Chart& ch, const Sft& s, const PointZ& z);

}  // namespace flowline
