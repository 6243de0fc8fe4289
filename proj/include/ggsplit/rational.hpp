#pragma once
// Exact rational arithmetic on int64, used for Euler characteristics.
// Overflow is not a concern at the sizes involved (denominators are group
// orders, numerators small), but we check anyway via __int128 in multiply.

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ggsplit {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalise(); }

  void normalise() {
    if (den == 0) throw std::runtime_error("Rational: zero denominator");
    if (den < 0) { num = -num; den = -den; }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
    if (num == 0) den = 1;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(const Rational& a) { return Rational(-a.num, a.den); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    __int128 n = (__int128)a.num * b.num;
    __int128 d = (__int128)a.den * b.den;
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
      throw std::runtime_error("Rational: overflow");
    return Rational((std::int64_t)n, (std::int64_t)d);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num == 0) throw std::runtime_error("Rational: division by zero");
    return a * Rational(b.den, b.num);
  }
  Rational& operator+=(const Rational& o) { *this = *this + o; return *this; }
  Rational& operator-=(const Rational& o) { *this = *this - o; return *this; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return (__int128)a.num * b.den < (__int128)b.num * a.den;
  }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
  }
};

}  // namespace ggsplit
