#pragma once

/**
 * @file continued_fraction.hpp
 * @brief Canonical finite continued fractions [a0; a1, ..., ar].
 *
 * Canonical means a0 >= 0, ai >= 1 for i >= 1, and ar >= 2 whenever r >= 1,
 * so each non-negative rational has exactly one representation. Integers
 * are the single-term form [n].
 */

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "minkowski/rational.hpp"

namespace minkowski {

class ContinuedFraction {
 public:
  using term_type = std::uint64_t;

  /// Validates canonical form; throws std::invalid_argument otherwise.
  explicit ContinuedFraction(std::vector<term_type> terms) : terms_(std::move(terms)) { validate(); }
  ContinuedFraction(std::initializer_list<term_type> terms) : terms_(terms) { validate(); }

  const std::vector<term_type>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  term_type operator[](std::size_t i) const { return terms_[i]; }

  /// Sum of all partial quotients; the Calkin-Wilf generation of the value.
  term_type term_sum() const { return std::accumulate(terms_.begin(), terms_.end(), term_type{0}); }

  friend bool operator==(const ContinuedFraction&, const ContinuedFraction&) = default;

 private:
  void validate() const {
    if (terms_.empty()) throw std::invalid_argument("continued fraction needs at least one term");
    for (std::size_t i = 1; i < terms_.size(); ++i)
      if (terms_[i] == 0) throw std::invalid_argument("partial quotients after a0 must be >= 1");
    if (terms_.size() > 1 && terms_.back() < 2)
      throw std::invalid_argument("canonical continued fraction needs last term >= 2");
  }

  std::vector<term_type> terms_;
};

/// Euclidean algorithm. Throws std::domain_error for the infinity sentinel.
inline ContinuedFraction cf_from_rational(const Rational& x) {
  require_finite(x, "cf_from_rational");
  std::vector<ContinuedFraction::term_type> terms;
  auto p = x.num();
  auto q = x.den();
  while (q != 0) {
    terms.push_back(p / q);
    p %= q;
    std::swap(p, q);
  }
  // The Euclidean expansion of a reduced fraction already ends in a term >= 2
  // unless it is an integer.
  return ContinuedFraction(std::move(terms));
}

/// Evaluates through the convergent recurrence p_k = a_k p_{k-1} + p_{k-2}.
inline Rational rational_from_cf(const ContinuedFraction& cf) {
  std::uint64_t p_prev = 1, p = cf[0];
  std::uint64_t q_prev = 0, q = 1;
  for (std::size_t i = 1; i < cf.size(); ++i) {
    const auto a = cf[i];
    const auto p_next = detail::checked_add(detail::checked_mul(a, p), p_prev);
    const auto q_next = detail::checked_add(detail::checked_mul(a, q), q_prev);
    p_prev = std::exchange(p, p_next);
    q_prev = std::exchange(q, q_next);
  }
  return Rational::unchecked(p, q);
}

/// Sum of partial quotients of x without materialising the terms.
inline std::uint64_t cf_term_sum(const Rational& x) {
  require_finite(x, "cf_term_sum");
  std::uint64_t p = x.num(), q = x.den(), sum = 0;
  while (q != 0) {
    sum += p / q;
    p %= q;
    std::swap(p, q);
  }
  return sum;
}

}  // namespace minkowski
