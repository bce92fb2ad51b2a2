#pragma once

/**
 * @file dyadic.hpp
 * @brief Exact dyadic rationals n / 2^e with a big-integer numerator.
 */

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

#include "minkowski/enclosure.hpp"

namespace minkowski {

using BigInt = boost::multiprecision::cpp_int;

/// Value numerator / 2^exponent, kept reduced (numerator odd or exponent 0).
class DyadicRational {
 public:
  DyadicRational() = default;
  DyadicRational(BigInt numerator, std::uint64_t exponent) : num_(std::move(numerator)), exp_(exponent) {
    normalize();
  }
  explicit DyadicRational(long long v) : num_(v), exp_(0) {}

  /// 2^-k.
  static DyadicRational pow2_neg(std::uint64_t k) { return DyadicRational(BigInt(1), k); }

  const BigInt& numerator() const { return num_; }
  std::uint64_t exponent() const { return exp_; }
  bool is_zero() const { return num_.is_zero(); }
  int sign() const { return num_.sign(); }

  friend DyadicRational operator+(const DyadicRational& a, const DyadicRational& b) {
    const auto e = std::max(a.exp_, b.exp_);
    return DyadicRational(shifted(a, e) + shifted(b, e), e);
  }
  friend DyadicRational operator-(const DyadicRational& a, const DyadicRational& b) {
    const auto e = std::max(a.exp_, b.exp_);
    return DyadicRational(shifted(a, e) - shifted(b, e), e);
  }
  friend DyadicRational operator-(const DyadicRational& a) { return DyadicRational(-a.num_, a.exp_); }
  friend DyadicRational operator*(const DyadicRational& a, const DyadicRational& b) {
    return DyadicRational(a.num_ * b.num_, a.exp_ + b.exp_);
  }
  /// Exact halving / doubling by 2^k (k may be negative).
  friend DyadicRational ldexp(const DyadicRational& a, long long k) {
    if (k >= 0) {
      const auto kk = static_cast<std::uint64_t>(k);
      if (kk <= a.exp_) return DyadicRational(a.num_, a.exp_ - kk);
      return DyadicRational(BigInt(a.num_ << static_cast<unsigned>(kk - a.exp_)), 0);
    }
    return DyadicRational(a.num_, a.exp_ + static_cast<std::uint64_t>(-k));
  }

  friend bool operator==(const DyadicRational&, const DyadicRational&) = default;
  friend std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b) {
    const auto e = std::max(a.exp_, b.exp_);
    const BigInt lhs = shifted(a, e), rhs = shifted(b, e);
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  /// Enclosure of the value; width is at most a few ulps.
  Enclosure to_enclosure() const {
    if (num_.is_zero()) return Enclosure::exact(0.0);
    const auto [mant, shift] = leading_bits(num_ < 0 ? BigInt(-num_) : num_);
    // mant holds the top 64 bits; the discarded tail adds < 1 to mant.
    const long long scale = shift - static_cast<long long>(exp_);
    const double m = static_cast<double>(mant);
    Enclosure r{next_down(m), next_up(shift > 0 ? static_cast<double>(mant) + 1.0 : m)};
    r = {std::ldexp(r.lo, static_cast<int>(std::clamp<long long>(scale, -2200, 2200))),
         std::ldexp(r.hi, static_cast<int>(std::clamp<long long>(scale, -2200, 2200)))};
    if (scale < -1000) r = {next_down(r.lo), next_up(std::max(r.hi, std::numeric_limits<double>::denorm_min()))};
    r.lo = std::max(r.lo, 0.0);
    return num_ < 0 ? -r : r;
  }

  double to_double() const { return to_enclosure().mid(); }

  /// "n/2^e" in lowest terms, written as n/d when d fits in 64 bits.
  std::string str() const {
    if (exp_ == 0) return num_.str();
    if (exp_ < 64) return num_.str() + "/" + std::to_string(std::uint64_t{1} << exp_);
    return num_.str() + "/2^" + std::to_string(exp_);
  }

  friend std::ostream& operator<<(std::ostream& os, const DyadicRational& d) { return os << d.str(); }

 private:
  static BigInt shifted(const DyadicRational& a, std::uint64_t e) {
    return a.num_ << static_cast<unsigned>(e - a.exp_);
  }

  /// Top 64 bits of a positive integer and the shift that restores it.
  static std::pair<std::uint64_t, long long> leading_bits(const BigInt& v) {
    const auto bits = static_cast<long long>(boost::multiprecision::msb(v)) + 1;
    if (bits <= 64) return {static_cast<std::uint64_t>(v), 0};
    const auto shift = bits - 64;
    return {static_cast<std::uint64_t>(BigInt(v >> static_cast<unsigned>(shift))), shift};
  }

  void normalize() {
    if (num_.is_zero()) {
      exp_ = 0;
      return;
    }
    const bool negative = num_ < 0;
    if (negative) num_ = -num_;
    const auto tz = static_cast<std::uint64_t>(boost::multiprecision::lsb(num_));
    const auto k = std::min(tz, exp_);
    if (k > 0) {
      num_ >>= static_cast<unsigned>(k);
      exp_ -= k;
    }
    if (negative) num_ = -num_;
  }

  BigInt num_{0};
  std::uint64_t exp_ = 0;
};

}  // namespace minkowski
