#include <numeric>
#include <stdexcept>

#include "flowline/subshift.hpp"

namespace flowline {

std::string word_str(const Word& w, const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += '.';
    s += names[w[i]];
  }
  return s;
}

SymPoint SymPoint::eventually_periodic(Word left_cycle, Word center, Word right_cycle,
                                       long offset) {
  if (left_cycle.empty() || right_cycle.empty())
    throw std::invalid_argument("eventually periodic point needs non-empty cycles");
  SymPoint p;
  p.ep_ = Ep{std::move(left_cycle), std::move(center), std::move(right_cycle), offset};
  return p;
}

SymPoint SymPoint::periodic(Word cycle, long offset) {
  Word c = cycle;
  return eventually_periodic(std::move(cycle), {}, std::move(c), offset);
}

SymPoint SymPoint::lazy(std::function<int(long)> oracle, std::string label) {
  SymPoint p;
  p.oracle_ = std::move(oracle);
  p.memo_ = std::make_shared<std::map<long, int>>();
  p.label_ = std::move(label);
  return p;
}

namespace {

long floor_mod(long a, long m) {
  long r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

int SymPoint::at(long i) const {
  if (ep_) {
    const long wlen = static_cast<long>(ep_->w.size());
    if (i < ep_->offset) {
      const long m = static_cast<long>(ep_->u.size());
      // u-blocks end at offset-1: index offset-1 is the last letter of u
      return ep_->u[floor_mod(i - ep_->offset, m)];
    }
    if (i < ep_->offset + wlen) return ep_->w[i - ep_->offset];
    const long m = static_cast<long>(ep_->v.size());
    return ep_->v[floor_mod(i - ep_->offset - wlen, m)];
  }
  auto it = memo_->find(i);
  if (it != memo_->end()) return it->second;
  const int l = oracle_(i);
  memo_->emplace(i, l);
  return l;
}

Word SymPoint::window(long lo, long hi) const {
  Word w;
  w.reserve(hi - lo + 1);
  for (long i = lo; i <= hi; ++i) w.push_back(at(i));
  return w;
}

bool SymPoint::is_eventually_periodic() const { return ep_.has_value(); }

std::string SymPoint::label() const { return ep_ ? "ep" : label_; }

SymPoint SymPoint::shifted(long k) const {
  if (ep_) {
    Ep e = *ep_;
    e.offset -= k;
    SymPoint p;
    p.ep_ = std::move(e);
    return p;
  }
  auto base = *this;
  return lazy([base, k](long i) { return base.at(i + k); }, label_ + "<<" + std::to_string(k));
}

bool ep_equal(const SymPoint& a, const SymPoint& b) {
  const auto* ea = a.ep();
  const auto* eb = b.ep();
  if (!ea || !eb) throw std::invalid_argument("ep_equal needs eventually periodic points");
  const long pl = static_cast<long>(std::lcm(ea->u.size(), eb->u.size()));
  const long pr = static_cast<long>(std::lcm(ea->v.size(), eb->v.size()));
  const long lo = std::min(ea->offset, eb->offset) - 2 * pl - 1;
  const long hi = std::max(ea->offset + static_cast<long>(ea->w.size()),
                           eb->offset + static_cast<long>(eb->w.size())) +
                  2 * pr + 1;
  return a.window(lo, hi) == b.window(lo, hi);
}

}  // namespace flowline
