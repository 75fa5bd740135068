#pragma once

#include <string>
#include <vector>

#include "flowline/atlas.hpp"

namespace flowline {

/// The finite generating family: dyadic windows I_{-1}, I_0, I_1 around the
/// integers -1, 0, 1 (each shorter than 1, jointly covering a neighbourhood of
/// [-1, 1]), a clopen partition refined until every Z_{C_i, I_w} is an
/// extendable chart, and the scriptF generator fibers on each such chart
/// lifted to sigma-hat-equivariant elements.
struct GeneratorFamily {
  struct Key {
    int piece = 0;
    int window = 0;  // 0 -> I_{-1}, 1 -> I_0, 2 -> I_1
    int fiber = 0;
    std::string str() const;
  };

  std::vector<Clopen> partition;
  std::vector<DyInterval> windows;       // I_{-1}, I_0, I_1
  std::vector<Dyadic> centers;           // -1, 0, 1
  std::vector<std::vector<TypeDMap>> fibers;  // per window: scriptF generators
  std::vector<Atlas> elements;
  std::vector<Key> keys;
};

GeneratorFamily standard_generators(const Sft& s);

/// Composes a signed word over the family: indices are 1-based, negative for
/// inverses (as stored in word files).
Atlas compose_generator_word(const GeneratorFamily& fam, const std::vector<int>& word);

}  // namespace flowline
