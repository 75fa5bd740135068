#include <algorithm>
#include <functional>
#include <stdexcept>

#include "flowline/subshift.hpp"

namespace flowline {

Clopen::Clopen(Sft ambient, long lo, std::set<Word> words)
    : Clopen(std::move(ambient), lo, std::move(words), true) {}

Clopen::Clopen(Sft ambient, long lo, std::set<Word> words, bool canonicalize)
    : ambient_(std::move(ambient)), lo_(lo), words_(std::move(words)) {
  if (!words_.empty()) {
    const std::size_t len = words_.begin()->size();
    for (const auto& w : words_)
      if (w.size() != len) throw std::invalid_argument("Clopen words must share one window");
  }
  prune(canonicalize);
}

void Clopen::prune(bool canonicalize) {
  for (auto it = words_.begin(); it != words_.end();) {
    if (!ambient_.word_allowed(*it))
      it = words_.erase(it);
    else
      ++it;
  }
  if (!canonicalize) return;
  // canonical narrow window: drop a boundary coordinate whenever the word set
  // is saturated in it
  bool changed = true;
  while (changed && !words_.empty() && len() > 1) {
    changed = false;
    std::set<Word> tails;
    for (const auto& w : words_) tails.insert(Word(w.begin() + 1, w.end()));
    bool saturated = true;
    for (const auto& t : tails) {
      for (int l = 0; l < ambient_.alphabet().size() && saturated; ++l) {
        Word e;
        e.reserve(t.size() + 1);
        e.push_back(l);
        e.insert(e.end(), t.begin(), t.end());
        if (ambient_.word_allowed(e) && !words_.count(e)) saturated = false;
      }
      if (!saturated) break;
    }
    if (saturated) {
      lo_ += 1;
      words_ = std::move(tails);
      changed = true;
      continue;
    }
    std::set<Word> heads;
    for (const auto& w : words_) heads.insert(Word(w.begin(), w.end() - 1));
    saturated = true;
    for (const auto& h : heads) {
      for (int l = 0; l < ambient_.alphabet().size() && saturated; ++l) {
        Word e = h;
        e.push_back(l);
        if (ambient_.word_allowed(e) && !words_.count(e)) saturated = false;
      }
      if (!saturated) break;
    }
    if (saturated) {
      words_ = std::move(heads);
      changed = true;
    }
  }
}

long Clopen::len() const {
  return words_.empty() ? 0 : static_cast<long>(words_.begin()->size());
}

Clopen Clopen::cylinder(Sft ambient, long lo, Word w) {
  std::set<Word> ws{std::move(w)};
  return Clopen(std::move(ambient), lo, std::move(ws));
}

Clopen Clopen::letter(Sft ambient, const std::string& name) {
  const int l = ambient.alphabet().index(name);
  return cylinder(std::move(ambient), 0, {l});
}

Clopen Clopen::whole(Sft ambient) {
  std::set<Word> ws(ambient.vertices().begin(), ambient.vertices().end());
  return Clopen(std::move(ambient), 0, std::move(ws));
}

Clopen Clopen::empty(Sft ambient) { return Clopen(std::move(ambient), 0, {}); }

bool Clopen::contains(const SymPoint& x) const {
  if (words_.empty()) return false;
  return words_.count(x.window(lo_, hi())) > 0;
}

Clopen Clopen::widen(long new_lo, long new_hi) const {
  if (words_.empty()) {
    return Clopen(ambient_, new_lo, {});
  }
  if (new_lo > lo_ || new_hi < hi())
    throw std::invalid_argument("widen must enlarge the window");
  std::set<Word> cur = words_;
  long clo = lo_, chi = hi();
  const int k = ambient_.alphabet().size();
  while (clo > new_lo) {
    std::set<Word> next;
    for (const auto& w : cur) {
      for (int l = 0; l < k; ++l) {
        Word e;
        e.reserve(w.size() + 1);
        e.push_back(l);
        e.insert(e.end(), w.begin(), w.end());
        if (ambient_.word_allowed(e)) next.insert(std::move(e));
      }
    }
    cur = std::move(next);
    --clo;
  }
  while (chi < new_hi) {
    std::set<Word> next;
    for (const auto& w : cur) {
      for (int l = 0; l < k; ++l) {
        Word e = w;
        e.push_back(l);
        if (ambient_.word_allowed(e)) next.insert(std::move(e));
      }
    }
    cur = std::move(next);
    ++chi;
  }
  return Clopen(ambient_, new_lo, std::move(cur));
}

namespace {

std::pair<Clopen, Clopen> common_window(const Clopen& a, const Clopen& b) {
  if (a.is_empty() && b.is_empty()) return {a, b};
  if (a.is_empty()) return {Clopen(b.ambient(), b.lo(), {}), b};
  if (b.is_empty()) return {a, Clopen(a.ambient(), a.lo(), {})};
  const long lo = std::min(a.lo(), b.lo());
  const long hi = std::max(a.hi(), b.hi());
  return {a.widen(lo, hi), b.widen(lo, hi)};
}

}  // namespace

Clopen Clopen::unioned(const Clopen& o) const {
  auto [a, b] = common_window(*this, o);
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  std::set<Word> ws = a.words();
  ws.insert(b.words().begin(), b.words().end());
  return Clopen(ambient_, a.lo(), std::move(ws));
}

Clopen Clopen::intersect(const Clopen& o) const {
  auto [a, b] = common_window(*this, o);
  if (a.is_empty() || b.is_empty()) return Clopen(ambient_, a.lo(), {});
  std::set<Word> ws;
  std::set_intersection(a.words().begin(), a.words().end(), b.words().begin(), b.words().end(),
                        std::inserter(ws, ws.begin()));
  return Clopen(ambient_, a.lo(), std::move(ws));
}

Clopen Clopen::complement() const {
  if (words_.empty()) return whole(ambient_);
  const long l = len();
  // enumerate all allowed window words of this length
  std::set<Word> all;
  Word w;
  std::function<void()> gen = [&]() {
    if (static_cast<long>(w.size()) == l) {
      all.insert(w);
      return;
    }
    for (int a = 0; a < ambient_.alphabet().size(); ++a) {
      w.push_back(a);
      if (ambient_.word_allowed(w)) gen();
      w.pop_back();
    }
  };
  gen();
  std::set<Word> ws;
  std::set_difference(all.begin(), all.end(), words_.begin(), words_.end(),
                      std::inserter(ws, ws.begin()));
  return Clopen(ambient_, lo_, std::move(ws));
}

Clopen Clopen::image_shift(long k) const { return Clopen(ambient_, lo_ - k, words_); }

Clopen Clopen::image_reversal() const {
  if (!ambient_.has_involution()) throw std::invalid_argument("ambient has no involution");
  if (words_.empty()) return *this;
  std::set<Word> ws;
  for (const auto& w : words_) ws.insert(ambient_.inv_word(w));
  return Clopen(ambient_, -hi() - 1, std::move(ws));
}

bool Clopen::same_set(const Clopen& o) const {
  auto [a, b] = common_window(*this, o);
  return a.words() == b.words();
}

bool Clopen::subset_of(const Clopen& o) const {
  auto [a, b] = common_window(*this, o);
  return std::includes(b.words().begin(), b.words().end(), a.words().begin(), a.words().end());
}

std::optional<SymPoint> Clopen::sample_point() const {
  if (words_.empty()) return std::nullopt;
  const Word& w = *words_.begin();
  // extend the window word to an eventually periodic point by walking the
  // graph backward and forward until a vertex repeats
  const int m = ambient_.memory();
  Word full = w;
  long full_lo = lo_;
  while (static_cast<int>(full.size()) < m) {
    bool extended = false;
    for (int l = 0; l < ambient_.alphabet().size() && !extended; ++l) {
      Word e = full;
      e.push_back(l);
      if (ambient_.word_allowed(e)) {
        full = std::move(e);
        extended = true;
      }
    }
    if (!extended) return std::nullopt;
  }
  auto vat = [&](std::size_t i) {
    return ambient_.vertex_index(Word(full.begin() + i, full.begin() + i + m));
  };
  // backward from the first vertex
  std::vector<int> back{vat(0)};
  std::map<int, int> bpos{{back[0], 0}};
  int bcyc;
  while (true) {
    int nxt = ambient_.in_edges()[back.back()].front();
    auto it = bpos.find(nxt);
    if (it != bpos.end()) {
      bcyc = it->second;
      break;
    }
    bpos[nxt] = static_cast<int>(back.size());
    back.push_back(nxt);
  }
  std::vector<int> fwd{vat(full.size() - m)};
  std::map<int, int> fpos{{fwd[0], 0}};
  int fcyc;
  while (true) {
    int nxt = ambient_.out_edges()[fwd.back()].front();
    auto it = fpos.find(nxt);
    if (it != fpos.end()) {
      fcyc = it->second;
      break;
    }
    fpos[nxt] = static_cast<int>(fwd.size());
    fwd.push_back(nxt);
  }
  const long bt = static_cast<long>(back.size());
  const long ft = static_cast<long>(fwd.size());
  const long pb = bt - bcyc;
  const long pf = ft - fcyc;
  const long flen = static_cast<long>(full.size());
  auto letter_at = [=, amb = ambient_](long i) -> int {
    if (i >= full_lo && i < full_lo + flen) return full[i - full_lo];
    if (i < full_lo) {
      long k = full_lo - i;
      if (k >= bt) k = bcyc + (k - bcyc) % pb;
      return amb.vertices()[back[k]][0];
    }
    long k = i - (full_lo + flen - m);
    if (k >= ft) k = fcyc + (k - fcyc) % pf;
    return amb.vertices()[fwd[k]][0];
  };
  Word u, mid, v;
  const long left_end = full_lo - std::max<long>(bcyc, 1);
  long right_start = full_lo + flen - m + std::max<long>(fcyc, 1);
  if (right_start <= left_end) right_start = left_end + 1;
  for (long i = left_end + 1 - pb; i <= left_end; ++i) u.push_back(letter_at(i));
  for (long i = left_end + 1; i < right_start; ++i) mid.push_back(letter_at(i));
  for (long i = right_start; i < right_start + pf; ++i) v.push_back(letter_at(i));
  SymPoint pt = SymPoint::eventually_periodic(u, mid, v, left_end + 1);
  if (!contains(pt)) return std::nullopt;
  return pt;
}

std::string Clopen::str() const {
  if (words_.empty()) return "{}";
  std::string s = "[window " + std::to_string(lo_) + ".." + std::to_string(hi()) + ":";
  for (const auto& w : words_) s += ' ' + word_str(w, ambient_.alphabet().letters);
  return s + ']';
}

}  // namespace flowline
