#include "flowline/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowline {

namespace {

std::int64_t msb_index(const BigInt& v) {
  // boost msb() requires a positive argument
  return static_cast<std::int64_t>(boost::multiprecision::msb(v));
}

}  // namespace

Dyadic Dyadic::from_parts(BigInt num, std::int64_t exp) {
  if (exp < 0) throw std::invalid_argument("Dyadic exponent must be >= 0");
  Dyadic d;
  d.num_ = std::move(num);
  d.exp_ = exp;
  if (d.num_ == 0) {
    d.exp_ = 0;
    return d;
  }
  while (d.exp_ > 0 && (d.num_ & 1) == 0) {
    d.num_ >>= 1;
    --d.exp_;
  }
  return d;
}

Dyadic Dyadic::operator-() const {
  Dyadic r;
  r.num_ = -num_;
  r.exp_ = exp_;
  return r;
}

Dyadic& Dyadic::operator+=(const Dyadic& o) {
  const std::int64_t k = std::max(exp_, o.exp_);
  BigInt a = num_ << static_cast<unsigned>(k - exp_);
  BigInt b = o.num_ << static_cast<unsigned>(k - o.exp_);
  *this = from_parts(a + b, k);
  return *this;
}

Dyadic& Dyadic::operator-=(const Dyadic& o) {
  *this += -o;
  return *this;
}

Dyadic& Dyadic::operator*=(const Dyadic& o) {
  *this = from_parts(num_ * o.num_, exp_ + o.exp_);
  return *this;
}

std::strong_ordering Dyadic::operator<=>(const Dyadic& o) const {
  const std::int64_t k = std::max(exp_, o.exp_);
  BigInt a = num_ << static_cast<unsigned>(k - exp_);
  BigInt b = o.num_ << static_cast<unsigned>(k - o.exp_);
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Dyadic Dyadic::mul_pow2(std::int64_t e) const {
  if (num_ == 0) return {};
  if (e >= 0) {
    const std::int64_t drop = std::min(e, exp_);
    return from_parts(num_ << static_cast<unsigned>(e - drop), exp_ - drop);
  }
  return from_parts(num_, exp_ - e);
}

BigInt Dyadic::floor() const {
  if (exp_ == 0) return num_;
  BigInt q = num_ >> static_cast<unsigned>(exp_);
  // cpp_int shift is arithmetic only for non-negative values; fix up negatives
  if (num_ < 0) {
    BigInt back = q << static_cast<unsigned>(exp_);
    if (back > num_) --q;
    while ((q + 1) << static_cast<unsigned>(exp_) <= num_) ++q;
  }
  return q;
}

BigInt Dyadic::ceil() const { return -((-*this).floor()); }

std::int64_t Dyadic::floor_log2_abs() const {
  if (num_ == 0) throw std::invalid_argument("floor_log2_abs of zero");
  BigInt a = num_ < 0 ? BigInt(-num_) : num_;
  return msb_index(a) - exp_;
}

std::optional<std::int64_t> Dyadic::as_pow2() const {
  if (num_ <= 0) return std::nullopt;
  if ((num_ & (num_ - 1)) != 0) return std::nullopt;
  return msb_index(num_) - exp_;
}

std::string Dyadic::str() const {
  std::string s = num_.str();
  if (exp_ == 0) return s;
  return s + "/2^" + std::to_string(exp_);
}

std::optional<Dyadic> Dyadic::parse(std::string_view text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string_view::npos) {
      return Dyadic(BigInt(std::string(text)));
    }
    std::string_view den = text.substr(slash + 1);
    if (den.substr(0, 2) != "2^") return std::nullopt;
    BigInt num(std::string(text.substr(0, slash)));
    const std::int64_t exp = std::stoll(std::string(den.substr(2)));
    if (exp < 0) return std::nullopt;
    return from_parts(std::move(num), exp);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

double Dyadic::approx() const {
  return num_.convert_to<double>() / std::pow(2.0, static_cast<double>(exp_));
}

Dyadic min(const Dyadic& a, const Dyadic& b) { return a <= b ? a : b; }
Dyadic max(const Dyadic& a, const Dyadic& b) { return a >= b ? a : b; }
Dyadic midpoint(const Dyadic& a, const Dyadic& b) { return (a + b).mul_pow2(-1); }

Dyadic doubling_map(const Dyadic& x0, const Dyadic& x, std::int64_t n) {
  return (x - x0).mul_pow2(n) + x0;
}

std::optional<std::int64_t> ratio_pow2(const Dyadic& dx, const Dyadic& dyv) {
  if (dx.is_zero() || dyv.is_zero()) return std::nullopt;
  if ((dx.num() < 0) != (dyv.num() < 0)) return std::nullopt;
  const std::int64_t e = dyv.floor_log2_abs() - dx.floor_log2_abs();
  if (dx.mul_pow2(e) == dyv) return e;
  return std::nullopt;
}

DyInterval::DyInterval(Dyadic l, Dyadic h, bool lopen, bool hopen)
    : lo(std::move(l)), hi(std::move(h)), lo_open(lopen), hi_open(hopen) {
  if (!(lo < hi)) throw std::invalid_argument("DyInterval requires lo < hi");
}

bool DyInterval::contains(const Dyadic& x) const {
  if (lo_open ? !(lo < x) : !(lo <= x)) return false;
  if (hi_open ? !(x < hi) : !(x <= hi)) return false;
  return true;
}

DyInterval DyInterval::translate(const Dyadic& s) const {
  DyInterval r = *this;
  r.lo += s;
  r.hi += s;
  return r;
}

DyInterval DyInterval::reflect() const {
  DyInterval r;
  r.lo = -hi;
  r.hi = -lo;
  r.lo_open = hi_open;
  r.hi_open = lo_open;
  return r;
}

std::string DyInterval::str() const {
  std::string s;
  s += lo_open ? '(' : '[';
  s += lo.str();
  s += ", ";
  s += hi.str();
  s += hi_open ? ')' : ']';
  return s;
}

std::optional<DyInterval> intersect_open(const DyInterval& a, const DyInterval& b) {
  Dyadic lo = max(a.lo, b.lo);
  Dyadic hi = min(a.hi, b.hi);
  if (!(lo < hi)) return std::nullopt;
  return DyInterval::open(lo, hi);
}

}  // namespace flowline
