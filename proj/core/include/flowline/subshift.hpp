#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "flowline/dyadic.hpp"

namespace flowline {

using Word = std::vector<int>;  // letter indices

std::string word_str(const Word& w, const std::vector<std::string>& names);

/// Finite alphabet with an involution a -> a^{-1} on letters.
struct InvAlphabet {
  std::vector<std::string> letters;
  std::vector<int> inv;  // involution on indices; empty means "no involution"

  int size() const { return static_cast<int>(letters.size()); }
  bool has_involution() const { return !inv.empty(); }
  bool involution_fixed_point_free() const;
  int index(const std::string& name) const;
  void check() const;
};

/// Bi-infinite symbolic point: either eventually periodic (exact) or backed by
/// a pure window oracle.
class SymPoint {
 public:
  /// ...uuu w vvv... with the first letter of w at `offset`, u-blocks ending
  /// at offset-1 and v-blocks starting at offset+|w|.
  static SymPoint eventually_periodic(Word left_cycle, Word center, Word right_cycle,
                                      long offset = 0);
  static SymPoint periodic(Word cycle, long offset = 0);
  static SymPoint lazy(std::function<int(long)> oracle, std::string label);

  int at(long i) const;
  Word window(long lo, long hi) const;  // letters at lo..hi inclusive
  bool is_eventually_periodic() const;
  std::string label() const;

  SymPoint shifted(long k) const;  // phi^k: letter at i becomes letter at i+k of x

  /// Decidable equality for eventually periodic points; lazy points compare
  /// by identity of structure over a caller-supplied radius elsewhere.
  friend bool ep_equal(const SymPoint& a, const SymPoint& b);

  struct Ep {
    Word u, w, v;
    long offset;
  };
  const Ep* ep() const { return ep_ ? &*ep_ : nullptr; }

 private:
  SymPoint() = default;
  std::optional<Ep> ep_;
  std::function<int(long)> oracle_;
  std::shared_ptr<std::map<long, int>> memo_;
  std::string label_;
};

class Clopen;

/// Subshift of finite type presented as a memory-m vertex graph (vertices are
/// the allowed m-words that survive trimming), with optional reversing
/// involution sigma(x)_n = inv(x_{-(n+1)}).
class Sft {
 public:
  static Sft from_forbidden(InvAlphabet alphabet, std::vector<Word> forbidden,
                            bool use_involution);
  static Sft full_shift(InvAlphabet alphabet, bool use_involution);
  static Sft from_graph(InvAlphabet alphabet, int memory, std::vector<Word> vertices,
                        std::vector<std::pair<int, int>> edges, bool use_involution);

  const InvAlphabet& alphabet() const;
  int memory() const;
  const std::vector<Word>& vertices() const;
  const std::vector<std::vector<int>>& out_edges() const;
  const std::vector<std::vector<int>>& in_edges() const;
  bool has_involution() const;
  int vertex_index(const Word& w) const;  // -1 when absent

  /// Is w a factor of some bi-infinite point?
  bool word_allowed(const Word& w) const;
  /// Letters following letter-word w of length >= m... convenience for oracles.
  std::vector<int> followers(const Word& w) const;

  /// F(w): the involution image of an m-word (reverse + letter involution).
  Word inv_word(const Word& w) const;

  bool point_allowed(const SymPoint& x, long lo, long hi) const;

  /// sigma(x) per the index law; requires involution data.
  SymPoint reversal(const SymPoint& x) const;

  /// Uniform radius R such that every point differs from its sigma- and
  /// sigma-phi-image within window [-R, R]; meaningful after
  /// check_reversibility passes. Computed lazily and cached.
  long separation_radius() const;

  bool operator==(const Sft& o) const { return impl_ == o.impl_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  explicit Sft(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

/// Clopen subset: finite union of cylinders, normalized to a window
/// [lo, lo+len-1] as a set of allowed window words.
class Clopen {
 public:
  Clopen(Sft ambient, long lo, std::set<Word> words);
  static Clopen cylinder(Sft ambient, long lo, Word w);
  static Clopen letter(Sft ambient, const std::string& name);  // [a]_0
  static Clopen whole(Sft ambient);
  static Clopen empty(Sft ambient);

  const Sft& ambient() const { return ambient_; }
  long lo() const { return lo_; }
  long hi() const { return lo_ + len() - 1; }
  long len() const;
  const std::set<Word>& words() const { return words_; }

  bool is_empty() const { return words_.empty(); }
  bool contains(const SymPoint& x) const;

  /// Same subset presented over the (larger) window [new_lo, new_hi].
  Clopen widen(long new_lo, long new_hi) const;

  Clopen unioned(const Clopen& o) const;
  Clopen intersect(const Clopen& o) const;
  Clopen complement() const;
  Clopen image_shift(long k) const;  // phi^k(C)
  Clopen image_reversal() const;     // sigma(C)

  bool same_set(const Clopen& o) const;
  bool subset_of(const Clopen& o) const;

  /// A representable point inside, when non-empty.
  std::optional<SymPoint> sample_point() const;

  std::string str() const;

 private:
  Clopen(Sft ambient, long lo, std::set<Word> words, bool canonicalize);
  Sft ambient_;
  long lo_ = 0;
  std::set<Word> words_;
  void prune(bool canonicalize);
};

/// Splits X into the minimal phi-invariant clopen pieces (undirected graph
/// components of the trimmed vertex graph).
std::vector<Clopen> invariant_clopen_pieces(const Sft& s);
bool is_irreducible(const Sft& s);

struct CheckReport {
  bool ok = true;
  std::string detail;
  std::optional<SymPoint> witness_point;
  std::optional<Word> witness_word;
};

/// sigma^2 = id and sigma phi sigma = phi^{-1} on sampled points, plus the
/// exact automaton decision that no point satisfies sigma(x) = x or
/// sigma(x) = phi(x).
CheckReport check_reversibility(const Sft& s, int samples, std::mt19937_64& rng);

/// Decides density of aperiodic points: for every vertex word w, the extension
/// set of w must contain a non-periodic point.
CheckReport check_topological_freeness(const Sft& s);

struct OrbitDescriptor {
  Word cycle;                      // primitive cycle word (periodic orbits)
  std::optional<SymPoint> point;   // representative (isolated orbits)
  std::optional<Clopen> certificate;  // isolating cylinder, when applicable
  std::string note;
};

/// Periodic orbits of period <= p, up to rotation, primitive words only.
std::vector<OrbitDescriptor> periodic_orbits_up_to(const Sft& s, int p);

/// Isolated orbits found by bounded search (middle paths up to `radius`);
/// sound certificates, possibly incomplete beyond the budget.
struct IsolatedReport {
  std::vector<OrbitDescriptor> orbits;
  bool exhaustive = false;  // true when the search provably found everything
  std::string note;
};
IsolatedReport isolated_orbits(const Sft& s, int radius);

/// Random eventually periodic point of the subshift.
SymPoint random_ep_point(const Sft& s, std::mt19937_64& rng, int span = 6);

/// Lazy point with dense forward orbit (irreducible subshifts): length-lex
/// enumeration of all allowed words joined by connecting paths.
SymPoint transitive_point(const Sft& s);

/// The subshift of reduced words over an involutive alphabet (even size >= 4,
/// fixed-point-free involution): forbidden words a a^{-1}.
Sft build_reduced(InvAlphabet alphabet);

/// Doubling: two copies of the base, the shift acting forwards on one copy
/// and backwards (reversed vertices) on the other, sigma exchanging them.
Sft build_doubling(const Sft& base);

}  // namespace flowline
