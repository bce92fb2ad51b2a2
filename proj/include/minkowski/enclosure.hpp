#pragma once

/**
 * @file enclosure.hpp
 * @brief Closed intervals [lo, hi] certified to contain a real value.
 *
 * Arithmetic assumes IEEE-754 binary64 with round-to-nearest. Every basic
 * operation is correctly rounded, so stepping one ulp outward contains the
 * exact result. libm functions (exp, log, exp2, pow, sqrt) are widened by
 * kLibmUlps ulps; glibc documents errors of at most 1-2 ulps for them.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace minkowski {

inline constexpr int kLibmUlps = 4;

/// Unit roundoff of binary64.
inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

/// gamma_n = n u / (1 - n u): relative error bound after n rounded operations.
constexpr double gamma_bound(double n) { return n * kUnitRoundoff / (1.0 - n * kUnitRoundoff); }

inline double next_down(double x, int ulps = 1) {
  for (int i = 0; i < ulps; ++i) x = std::nextafter(x, -std::numeric_limits<double>::infinity());
  return x;
}
inline double next_up(double x, int ulps = 1) {
  for (int i = 0; i < ulps; ++i) x = std::nextafter(x, std::numeric_limits<double>::infinity());
  return x;
}

struct Enclosure {
  double lo = 0.0;
  double hi = 0.0;

  constexpr Enclosure() = default;
  constexpr Enclosure(double lo_, double hi_) : lo(lo_), hi(hi_) {}

  static constexpr Enclosure exact(double v) { return {v, v}; }
  /// The exact value is within `ulps` ulps of v.
  static Enclosure around(double v, int ulps = 1) { return {next_down(v, ulps), next_up(v, ulps)}; }

  double width() const { return hi - lo; }
  double mid() const { return lo + (hi - lo) / 2; }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains(const Enclosure& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const Enclosure& o) const { return lo <= o.hi && o.lo <= hi; }
  bool is_valid() const { return lo <= hi; }
  /// Width relative to the smallest magnitude in the interval.
  double relative_width() const {
    const double m = std::min(std::fabs(lo), std::fabs(hi));
    return m > 0 ? width() / m : std::numeric_limits<double>::infinity();
  }

  friend bool operator==(const Enclosure&, const Enclosure&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Enclosure& e) {
    return os << '[' << e.lo << ", " << e.hi << ']';
  }
};

inline Enclosure hull(const Enclosure& a, const Enclosure& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline Enclosure operator+(const Enclosure& a, const Enclosure& b) {
  return {next_down(a.lo + b.lo), next_up(a.hi + b.hi)};
}
inline Enclosure operator-(const Enclosure& a) { return {-a.hi, -a.lo}; }
inline Enclosure operator-(const Enclosure& a, const Enclosure& b) {
  return {next_down(a.lo - b.hi), next_up(a.hi - b.lo)};
}
inline Enclosure operator*(const Enclosure& a, const Enclosure& b) {
  const double p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {next_down(*std::min_element(p, p + 4)), next_up(*std::max_element(p, p + 4))};
}
inline Enclosure operator/(const Enclosure& a, const Enclosure& b) {
  if (b.lo <= 0.0 && b.hi >= 0.0) throw std::domain_error("Enclosure division by an interval containing zero");
  const double q[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return {next_down(*std::min_element(q, q + 4)), next_up(*std::max_element(q, q + 4))};
}
inline Enclosure& operator+=(Enclosure& a, const Enclosure& b) { return a = a + b; }
inline Enclosure& operator-=(Enclosure& a, const Enclosure& b) { return a = a - b; }
inline Enclosure& operator*=(Enclosure& a, const Enclosure& b) { return a = a * b; }

/// Multiplication by 2^k is exact away from under/overflow.
inline Enclosure ldexp(const Enclosure& a, int k) {
  Enclosure r{std::ldexp(a.lo, k), std::ldexp(a.hi, k)};
  if (k < 0) r = {next_down(r.lo), next_up(r.hi)};
  return r;
}

inline Enclosure exp(const Enclosure& a) {
  return {std::max(0.0, next_down(std::exp(a.lo), kLibmUlps)), next_up(std::exp(a.hi), kLibmUlps)};
}
inline Enclosure log(const Enclosure& a) {
  if (a.lo <= 0.0) throw std::domain_error("Enclosure log of non-positive interval");
  return {next_down(std::log(a.lo), kLibmUlps), next_up(std::log(a.hi), kLibmUlps)};
}
inline Enclosure sqrt(const Enclosure& a) {
  if (a.lo < 0.0) throw std::domain_error("Enclosure sqrt of negative interval");
  return {std::max(0.0, next_down(std::sqrt(a.lo))), next_up(std::sqrt(a.hi))};
}
inline Enclosure exp2(const Enclosure& a) {
  return {std::max(0.0, next_down(std::exp2(a.lo), kLibmUlps)), next_up(std::exp2(a.hi), kLibmUlps)};
}
/// Non-negative base, real exponent: monotone in each argument.
inline Enclosure pow(const Enclosure& base, double exponent) {
  if (base.lo < 0.0) throw std::domain_error("Enclosure pow of negative base");
  if (exponent == 0.0) return Enclosure::exact(1.0);
  const double a = std::pow(base.lo, exponent), b = std::pow(base.hi, exponent);
  const double lo = std::min(a, b), hi = std::max(a, b);
  return {std::max(0.0, next_down(lo, kLibmUlps)), next_up(hi, kLibmUlps)};
}
/// Integer power by repeated outward multiplication.
inline Enclosure pow(const Enclosure& base, unsigned n) {
  Enclosure r = Enclosure::exact(1.0);
  for (unsigned i = 0; i < n; ++i) r = r * base;
  return r;
}

namespace constants {

inline Enclosure log2() { return Enclosure::around(0.69314718055994530942); }
inline Enclosure pi() { return Enclosure::around(3.14159265358979323846); }

}  // namespace constants

}  // namespace minkowski
