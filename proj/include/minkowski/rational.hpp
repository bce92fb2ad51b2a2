#pragma once

/**
 * @file rational.hpp
 * @brief Non-negative rationals with 64-bit checked arithmetic.
 *
 * Values are always in lowest terms. The single value 1/0 is a sentinel
 * for +infinity and is only meaningful as an endpoint of a Stern-Brocot
 * interval; value-level operations reject it.
 */

#include <charconv>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace minkowski {

/// Thrown when an exact 64-bit computation would wrap around.
class overflow_error : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Thrown when a request exceeds a configured resource limit.
class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw overflow_error("64-bit addition overflow");
  return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw overflow_error("64-bit multiplication overflow");
  return r;
}

}  // namespace detail

class Rational {
 public:
  using int_type = std::uint64_t;

  constexpr Rational() = default;

  /// Reduces to lowest terms. den = 0 is accepted only as 1/0.
  constexpr Rational(int_type num, int_type den) : num_(num), den_(den) {
    if (den_ == 0) {
      if (num_ == 0) throw std::domain_error("0/0 is not a rational");
      num_ = 1;
      return;
    }
    const int_type g = std::gcd(num_, den_);
    num_ /= g;
    den_ /= g;
  }

  constexpr explicit Rational(int_type n) : num_(n), den_(1) {}

  static constexpr Rational infinity() { return Rational(1, 0); }

  /// Builds without reducing. Caller guarantees gcd(num, den) = 1.
  static constexpr Rational unchecked(int_type num, int_type den) {
    Rational r;
    r.num_ = num;
    r.den_ = den;
    return r;
  }

  constexpr int_type num() const { return num_; }
  constexpr int_type den() const { return den_; }
  constexpr bool is_infinite() const { return den_ == 0; }
  constexpr bool is_integer() const { return den_ == 1; }

  /// Correctly rounded when num and den are below 2^53.
  double to_double() const {
    if (is_infinite()) return std::numeric_limits<double>::infinity();
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend constexpr bool operator==(const Rational&, const Rational&) = default;

  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const unsigned __int128 lhs = static_cast<unsigned __int128>(a.num_) * b.den_;
    const unsigned __int128 rhs = static_cast<unsigned __int128>(b.num_) * a.den_;
    if (a.is_infinite() && b.is_infinite()) return std::strong_ordering::equal;
    return lhs <=> rhs;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.num_ << '/' << r.den_;
  }

  std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

 private:
  int_type num_ = 0;
  int_type den_ = 1;
};

inline void require_finite(const Rational& x, const char* what) {
  if (x.is_infinite()) throw std::domain_error(std::string(what) + ": infinite argument");
}

/// 1/x; 0 maps to the sentinel and back.
inline Rational reciprocal(const Rational& x) { return Rational::unchecked(x.den(), x.num()); }

inline Rational operator+(const Rational& a, const Rational& b) {
  require_finite(a, "operator+");
  require_finite(b, "operator+");
  const auto g = std::gcd(a.den(), b.den());
  const auto den = detail::checked_mul(a.den() / g, b.den());
  const auto num = detail::checked_add(detail::checked_mul(a.num(), b.den() / g),
                                       detail::checked_mul(b.num(), a.den() / g));
  return Rational(num, den);
}

/// a - b for a >= b.
inline Rational operator-(const Rational& a, const Rational& b) {
  require_finite(a, "operator-");
  require_finite(b, "operator-");
  if (a < b) throw std::domain_error("negative rational result");
  const auto g = std::gcd(a.den(), b.den());
  const auto den = detail::checked_mul(a.den() / g, b.den());
  const auto num = detail::checked_mul(a.num(), b.den() / g) - detail::checked_mul(b.num(), a.den() / g);
  return Rational(num, den);
}

inline Rational operator/(const Rational& a, const Rational& b) {
  require_finite(a, "operator/");
  require_finite(b, "operator/");
  if (b.num() == 0) throw std::domain_error("division by zero");
  const auto g1 = std::gcd(a.num(), b.num());
  const auto g2 = std::gcd(a.den(), b.den());
  return Rational(detail::checked_mul(a.num() / g1, b.den() / g2), detail::checked_mul(a.den() / g2, b.num() / g1));
}

/// Mediant (a.num+b.num)/(a.den+b.den); lowest terms when a, b are unimodular neighbours.
inline Rational mediant(const Rational& a, const Rational& b) {
  return Rational::unchecked(detail::checked_add(a.num(), b.num()), detail::checked_add(a.den(), b.den()));
}

/// Parses "p/q" or "p". Throws std::invalid_argument on malformed input.
inline Rational parse_rational(std::string_view text) {
  auto parse_u64 = [&](std::string_view s) {
    std::uint64_t v = 0;
    if (s.empty()) throw std::invalid_argument("malformed fraction: '" + std::string(text) + "'");
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw std::invalid_argument("malformed fraction: '" + std::string(text) + "'");
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_u64(text));
  const auto num = parse_u64(text.substr(0, slash));
  const auto den = parse_u64(text.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("malformed fraction: zero denominator");
  return Rational(num, den);
}

}  // namespace minkowski
