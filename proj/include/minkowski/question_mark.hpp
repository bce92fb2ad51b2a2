#pragma once

/**
 * @file question_mark.hpp
 * @brief Minkowski's question mark function at rationals.
 *
 * For x = [a0; a1, ..., ar] with partial sums s_k = a0 + ... + ak,
 *
 *     F(x) = 1 - 2^-s0 + 2^-s1 - ... + (-1)^(r+1) 2^-sr,
 *
 * and ?(x) = 2 F(x) on [0, 1]. The periodic function Psi(x) = 2^x (1 - F(x))
 * has period 1 and mean c0 over a period.
 *
 * Exact values are DyadicRational with exponent s_r. The fast path evaluates
 * the same alternating series in binary64 and returns a certified enclosure.
 */

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "minkowski/continued_fraction.hpp"
#include "minkowski/dyadic.hpp"
#include "minkowski/enclosure.hpp"
#include "minkowski/rational.hpp"

namespace minkowski {

/// Requested enclosure width is below what binary64 can certify.
class precision_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest exact exponent F_exact will materialise (bits of the numerator).
inline constexpr std::uint64_t kMaxDyadicBits = std::uint64_t{1} << 26;

/// Exact F(x) for finite x >= 0.
inline DyadicRational F_exact(const Rational& x) {
  const ContinuedFraction cf = cf_from_rational(x);
  const std::uint64_t total = cf.term_sum();
  if (total > kMaxDyadicBits) throw resource_error("F_exact: continued fraction term sum too large");

  // N = 2^S - 2^(S-s0) + 2^(S-s1) - ... ; consecutive (+, -) pairs are disjoint
  // runs of one bits, so the numerator is written limb by limb.
  std::vector<std::uint64_t> limbs(total / 64 + 1, 0);
  auto set_run = [&](std::uint64_t from, std::uint64_t to) {  // bits [from, to)
    for (std::uint64_t b = from; b < to;) {
      const auto word = b / 64, offset = b % 64;
      const auto count = std::min<std::uint64_t>(64 - offset, to - b);
      const std::uint64_t mask = count == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << count) - 1) << offset;
      limbs[word] |= mask;
      b += count;
    }
  };

  // Exponents of the signed terms, leading +2^S first.
  std::vector<std::uint64_t> positions;
  positions.reserve(cf.size() + 1);
  positions.push_back(total);
  std::uint64_t partial = 0;
  for (auto a : cf.terms()) {
    partial += a;
    positions.push_back(total - partial);
  }
  for (std::size_t k = 0; k + 1 < positions.size(); k += 2) set_run(positions[k + 1], positions[k]);
  if (positions.size() % 2 == 1) set_run(positions.back(), positions.back() + 1);

  BigInt numerator;
  boost::multiprecision::import_bits(numerator, limbs.begin(), limbs.end(), 64, false);
  return DyadicRational(std::move(numerator), total);
}

/// Exact ?(x) = 2 F(x) for x in [0, 1].
inline DyadicRational qmark_exact(const Rational& x) {
  require_finite(x, "qmark_exact");
  if (x > Rational(1)) throw std::domain_error("qmark_exact: argument outside [0, 1]");
  return ldexp(F_exact(x), 1);
}

/// F at a Stern-Brocot endpoint: the sentinel 1/0 carries the total mass 1.
inline DyadicRational F_endpoint(const Rational& x) {
  return x.is_infinite() ? DyadicRational(1) : F_exact(x);
}

/// Enclosure of T = 2^s0 (1 - F(x)) = 1 - 2^-(s1-s0) + ...; T lies in (1/2, 1].
namespace detail {

struct TailSum {
  Enclosure value;
  std::uint64_t a0 = 0;
};

inline TailSum scaled_tail(const Rational& x) {
  require_finite(x, "F_enclosure");
  std::uint64_t p = x.num(), q = x.den();
  const std::uint64_t a0 = p / q;
  p %= q;
  std::swap(p, q);
  double t = 1.0;
  std::uint64_t depth = 0;
  int terms = 0;
  double sign = -1.0;
  while (q != 0) {
    depth += p / q;
    p %= q;
    std::swap(p, q);
    const int e = depth > 2000 ? 2000 : static_cast<int>(depth);
    t += sign * std::ldexp(1.0, -e);
    sign = -sign;
    ++terms;
  }
  // Partial sums stay in [1/2, 1]; each addition errs by at most u, and
  // underflowed terms by at most 2^-1074.
  const double err = (terms + 1) * kUnitRoundoff + terms * std::numeric_limits<double>::denorm_min();
  return {{next_down(t - err), next_up(t + err)}, a0};
}

}  // namespace detail

/// Certified binary64 enclosure of F(x); width a few ulps.
inline Enclosure F_enclosure(const Rational& x) {
  if (x.is_infinite()) return Enclosure::exact(1.0);
  const auto [t, a0] = detail::scaled_tail(x);
  const int shift = a0 > 2000 ? 2000 : static_cast<int>(a0);
  return Enclosure::exact(1.0) - ldexp(t, -shift);
}

/// Fast certified enclosure of Psi(x) = 2^frac(x) * T(x).
inline Enclosure psi_enclosure(const Rational& x) {
  const auto [t, a0] = detail::scaled_tail(x);
  if (x.is_integer()) return t;
  const double frac = static_cast<double>(x.num() % x.den()) / static_cast<double>(x.den());
  return exp2(Enclosure::around(frac)) * t;
}

/// Psi(x) = 2^x (1 - F(x)) through exact F; throws precision_error if the
/// certified width exceeds target_width.
inline Enclosure psi(const Rational& x, double target_width) {
  require_finite(x, "psi");
  const DyadicRational tail = DyadicRational(1) - F_exact(x);
  const std::uint64_t a0 = x.num() / x.den();
  // 2^x (1 - F) = 2^frac * (2^a0 (1 - F)).
  const Enclosure scaled = ldexp(tail, static_cast<long long>(a0)).to_enclosure();
  Enclosure result = scaled;
  if (!x.is_integer()) {
    const double frac = static_cast<double>(x.num() % x.den()) / static_cast<double>(x.den());
    result = exp2(Enclosure::around(frac)) * scaled;
  }
  if (result.width() > target_width)
    throw precision_error("psi: requested width " + std::to_string(target_width) + " is below the certifiable " +
                          std::to_string(result.width()));
  return result;
}

/// Residuals of the two exact identities at x:
///   functional: 2F(x) - (F(x-1) + 1) for x >= 1, 2F(x) - F(x/(1-x)) for x < 1
///   reflection: F(x) + F(1/x) - 1 (x > 0; zero at x = 0 by F(inf) = 1)
struct DistrResidual {
  DyadicRational functional;
  DyadicRational reflection;
  bool is_zero() const { return functional.is_zero() && reflection.is_zero(); }
};

inline DistrResidual verify_distr(const Rational& x) {
  require_finite(x, "verify_distr");
  const DyadicRational Fx = F_exact(x);
  const DyadicRational twice = ldexp(Fx, 1);
  DistrResidual out;
  const Rational one(1);
  if (x >= one) {
    out.functional = twice - (F_exact(x - one) + DyadicRational(1));
  } else {
    // x/(1-x) with 1-x = (q-p)/q, so x/(1-x) = p/(q-p) already in lowest terms.
    const Rational image = Rational::unchecked(x.num(), x.den() - x.num());
    out.functional = twice - F_exact(image);
  }
  out.reflection = Fx + F_endpoint(reciprocal(x)) - DyadicRational(1);
  return out;
}

}  // namespace minkowski
