#ifndef REPUTEQ_RATIONAL_HPP
#define REPUTEQ_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace reputeq {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.template convert_to<double>(); }
inline double to_double(double x) { return x; }

// Scalar conversion points used by code templated on double vs Rat.
template <class S>
S scalar_from(const Rat& r);
template <>
inline double scalar_from<double>(const Rat& r) { return to_double(r); }
template <>
inline Rat scalar_from<Rat>(const Rat& r) { return r; }

template <class S>
S scalar_from_int(long long v) { return static_cast<S>(v); }
template <>
inline Rat scalar_from_int<Rat>(long long v) { return Rat(v); }

// Parses a decimal literal ("0.2", "-1.5e-3") into an exact rational.
inline Rat rat_from_decimal(const std::string& text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    neg = text[i] == '-';
    ++i;
  }
  BigInt mantissa = 0;
  long long frac_digits = 0;
  bool any_digit = false;
  for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
    mantissa = mantissa * 10 + (text[i] - '0');
    any_digit = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
      mantissa = mantissa * 10 + (text[i] - '0');
      ++frac_digits;
      any_digit = true;
    }
  }
  long long exp10 = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      eneg = text[i] == '-';
      ++i;
    }
    bool any_exp = false;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
      exp10 = exp10 * 10 + (text[i] - '0');
      any_exp = true;
    }
    if (!any_exp) throw std::invalid_argument("bad decimal literal: " + text);
    if (eneg) exp10 = -exp10;
  }
  if (!any_digit || i != text.size())
    throw std::invalid_argument("bad decimal literal: " + text);
  exp10 -= frac_digits;
  Rat value(mantissa);
  BigInt pow10 = 1;
  for (long long p = 0; p < (exp10 < 0 ? -exp10 : exp10); ++p) pow10 *= 10;
  if (exp10 >= 0)
    value *= Rat(pow10);
  else
    value /= Rat(pow10);
  return neg ? -value : value;
}

// Exact rational for the shortest decimal representation of a double.
// This is the convention for interpreting numeric config entries: the literal
// the double prints as (0.2 -> 1/5), not the underlying binary fraction.
inline Rat rat_from_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc()) throw std::invalid_argument("unprintable double");
  return rat_from_decimal(std::string(buf, res.ptr));
}

struct Fraction {
  BigInt num;
  BigInt den;
};

namespace detail {

inline BigInt rat_floor(const Rat& a) {
  BigInt n = numerator(a), d = denominator(a);
  if (n >= 0) return BigInt(n / d);
  return BigInt(-((-n + d - 1) / d));
}

// Simplest fraction strictly inside the open interval (a, b): continued-
// fraction descent, so thin intervals like (0.5, 0.500001) take O(log) steps
// rather than one mediant at a time.
inline Fraction simplest_between(const Rat& a, const Rat& b) {
  BigInt fa = rat_floor(a);
  if (Rat(fa + 1) < b) return Fraction{fa + 1, 1};
  if (a == Rat(fa)) {
    // Integer left endpoint: inside values are fa + 1/q with 1/q < b - fa.
    BigInt q = rat_floor(1 / (b - Rat(fa))) + 1;
    return Fraction{fa * q + 1, q};
  }
  Fraction inner = simplest_between(1 / (b - Rat(fa)), 1 / (a - Rat(fa)));
  return Fraction{fa * inner.num + inner.den, inner.num};
}

}  // namespace detail

// Smallest-denominator fraction strictly inside (lo, hi).
inline Fraction stern_brocot_min_denominator(const Rat& lo, const Rat& hi) {
  if (!(lo < hi)) throw std::invalid_argument("empty interval");
  Fraction f = detail::simplest_between(lo, hi);
  BigInt g = gcd(f.num, f.den);
  f.num /= g;
  f.den /= g;
  return f;
}

// 64-bit splitmix step; used to derive independent per-path RNG streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4a4acf8688e2bULL;
  return z ^ (z >> 31);
}

}  // namespace reputeq

#endif  // REPUTEQ_RATIONAL_HPP
