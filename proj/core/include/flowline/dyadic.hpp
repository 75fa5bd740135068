#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flowline {

using BigInt = boost::multiprecision::cpp_int;

/// Exact element of Z[1/2], stored as num / 2^exp with exp == 0 or num odd.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long v) : num_(v) {}  // NOLINT: implicit on purpose, integers embed
  Dyadic(BigInt v) : num_(std::move(v)) {}

  static Dyadic from_parts(BigInt num, std::int64_t exp);

  const BigInt& num() const { return num_; }
  std::int64_t exp() const { return exp_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return exp_ == 0; }

  Dyadic operator-() const;
  Dyadic& operator+=(const Dyadic& o);
  Dyadic& operator-=(const Dyadic& o);
  Dyadic& operator*=(const Dyadic& o);
  friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }
  friend Dyadic operator-(Dyadic a, const Dyadic& b) { return a -= b; }
  friend Dyadic operator*(Dyadic a, const Dyadic& b) { return a *= b; }

  std::strong_ordering operator<=>(const Dyadic& o) const;
  bool operator==(const Dyadic& o) const { return num_ == o.num_ && exp_ == o.exp_; }

  /// Multiplies by 2^e (exact for any integer e).
  Dyadic mul_pow2(std::int64_t e) const;

  BigInt floor() const;
  BigInt ceil() const;
  Dyadic frac() const { return *this - Dyadic(floor()); }
  Dyadic abs() const { return num_ < 0 ? -*this : *this; }

  /// Greatest n with 2^n <= |x|; requires x != 0.
  std::int64_t floor_log2_abs() const;
  /// e such that *this == 2^e, if it is a power of two.
  std::optional<std::int64_t> as_pow2() const;

  /// Renders "p" (exp 0) or "p/2^k".
  std::string str() const;
  static std::optional<Dyadic> parse(std::string_view text);

  double approx() const;

 private:
  BigInt num_ = 0;
  std::int64_t exp_ = 0;
};

inline Dyadic half(long p) { return Dyadic::from_parts(p, 1); }
inline Dyadic dy(long num, std::int64_t exp) { return Dyadic::from_parts(num, exp); }

Dyadic min(const Dyadic& a, const Dyadic& b);
Dyadic max(const Dyadic& a, const Dyadic& b);
Dyadic midpoint(const Dyadic& a, const Dyadic& b);

/// h_{x0}^n(x) = 2^n (x - x0) + x0.
Dyadic doubling_map(const Dyadic& x0, const Dyadic& x, std::int64_t n = 1);

/// If dy == dx * 2^e for some integer e (dx, dy nonzero, same sign), returns e.
std::optional<std::int64_t> ratio_pow2(const Dyadic& dx, const Dyadic& dyv);

/// Interval with dyadic endpoints; openness tracked per endpoint.
struct DyInterval {
  Dyadic lo;
  Dyadic hi;
  bool lo_open = true;
  bool hi_open = true;

  DyInterval() = default;
  DyInterval(Dyadic l, Dyadic h, bool lopen = true, bool hopen = true);

  static DyInterval open(Dyadic l, Dyadic h) { return {std::move(l), std::move(h), true, true}; }
  static DyInterval closed(Dyadic l, Dyadic h) { return {std::move(l), std::move(h), false, false}; }

  Dyadic length() const { return hi - lo; }
  bool contains(const Dyadic& x) const;
  bool contains_closure(const Dyadic& x) const { return lo <= x && x <= hi; }
  bool strictly_inside(const Dyadic& x) const { return lo < x && x < hi; }
  DyInterval translate(const Dyadic& s) const;
  DyInterval reflect() const;  // {-hi, -lo}, flags swapped

  bool operator==(const DyInterval& o) const = default;
  std::string str() const;
};

/// Open-interval intersection (openness of the inputs ignored); empty -> nullopt.
std::optional<DyInterval> intersect_open(const DyInterval& a, const DyInterval& b);

}  // namespace flowline
