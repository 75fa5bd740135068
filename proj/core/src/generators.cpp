#include "flowline/generators.hpp"

#include <functional>
#include <stdexcept>

namespace flowline {

std::string GeneratorFamily::Key::str() const {
  return "p" + std::to_string(piece) + ".w" + std::to_string(window) + ".f" +
         std::to_string(fiber);
}

GeneratorFamily standard_generators(const Sft& s) {
  GeneratorFamily fam;
  fam.centers = {Dyadic(-1), Dyadic(0), Dyadic(1)};
  fam.windows = {DyInterval::open(dy(-19, 4), dy(-5, 4)),  // (-19/16, -5/16)
                 DyInterval::open(dy(-7, 4), dy(7, 4)),    // (-7/16, 7/16)
                 DyInterval::open(dy(5, 4), dy(19, 4))};   // (5/16, 19/16)
  const Dyadic margin = dy(1, 5);  // 1/32 enlargement for extendability

  // refine cylinders until all three windows give extendable charts
  for (int radius = 0; radius <= 6 && fam.partition.empty(); ++radius) {
    std::vector<Clopen> parts;
    Word w;
    std::function<void()> gen = [&]() {
      if (static_cast<int>(w.size()) == 2 * radius + 1) {
        Clopen c = Clopen::cylinder(s, -radius, w);
        if (!c.is_empty()) parts.push_back(std::move(c));
        return;
      }
      for (int l = 0; l < s.alphabet().size(); ++l) {
        w.push_back(l);
        gen();
        w.pop_back();
      }
    };
    gen();
    bool ok = true;
    for (const auto& c : parts) {
      for (const auto& iv : fam.windows) {
        auto ch = make_extendable_chart(
            s, c, iv, DyInterval::open(iv.lo - margin, iv.hi + margin), true);
        if (!ch) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) fam.partition = std::move(parts);
  }
  if (fam.partition.empty())
    throw std::runtime_error("admissible chart partition did not stabilize");

  for (int widx = 0; widx < 3; ++widx)
    fam.fibers.push_back(script_f_generators(fam.windows[widx], fam.centers[widx]));

  for (std::size_t p = 0; p < fam.partition.size(); ++p) {
    for (int widx = 0; widx < 3; ++widx) {
      for (std::size_t f = 0; f < fam.fibers[widx].size(); ++f) {
        fam.elements.push_back(Atlas::from_z_chart(s, fam.partition[p], fam.fibers[widx][f]));
        fam.keys.push_back({static_cast<int>(p), widx, static_cast<int>(f)});
      }
    }
  }
  return fam;
}

Atlas compose_generator_word(const GeneratorFamily& fam, const std::vector<int>& word) {
  if (fam.elements.empty()) throw std::invalid_argument("empty generator family");
  Atlas acc = Atlas::identity(fam.elements.front().ambient());
  for (int ix : word) {
    if (ix == 0 || std::abs(ix) > static_cast<int>(fam.elements.size()))
      throw std::out_of_range("generator index out of range");
    const Atlas& g = fam.elements[std::abs(ix) - 1];
    acc = compose(acc, ix > 0 ? g : g.inverse());
  }
  return acc;
}

}  // namespace flowline
