#pragma once

/**
 * @file identities.hpp
 * @brief Exact linear relations between the moments m_L and M_L.
 *
 *   m_L = sum_s (-1)^s binom(L, s) m_s              (reflection x -> 1 - x)
 *   m_L = M_L - sum_{s<L} binom(L, s) M_s
 *   M_L ~ L! c0 / (log 2)^L
 *   mgf(t) = sum_L m_L t^L / L! = int_0^1 e^(tx) d?(x)
 */

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "minkowski/dyadic.hpp"
#include "minkowski/enclosure.hpp"

namespace minkowski {

enum class MomentKind { m, M };

struct MomentVector {
  std::vector<Enclosure> values;  // indexed by L = 0..L_max
  MomentKind kind = MomentKind::m;

  int max_order() const { return static_cast<int>(values.size()) - 1; }
  const Enclosure& operator[](int L) const { return values.at(static_cast<std::size_t>(L)); }
};

using BigRational = boost::multiprecision::cpp_rational;

/// Row L of Pascal's triangle as exact integers.
inline std::vector<BigInt> binomial_row(int L) {
  if (L < 0) throw std::invalid_argument("binomial_row: L must be >= 0");
  std::vector<BigInt> row(static_cast<std::size_t>(L) + 1);
  row[0] = 1;
  for (int s = 1; s <= L; ++s) row[static_cast<std::size_t>(s)] = row[static_cast<std::size_t>(s) - 1] * (L - s + 1) / s;
  return row;
}

/// Enclosure of an exact integer.
inline Enclosure to_enclosure(const BigInt& v) { return DyadicRational(v, 0).to_enclosure(); }

namespace detail {

inline void require_order(const MomentVector& m, int L, const char* what) {
  if (L < 0 || L > m.max_order())
    throw std::out_of_range(std::string(what) + ": moment vector does not cover L = " + std::to_string(L));
}

/// sum_s sign(s) binom(L, s) v_s over s in [0, upto], positive and negative terms kept apart.
inline Enclosure binomial_sum(const MomentVector& v, int L, int upto, bool alternate) {
  const auto row = binomial_row(L);
  Enclosure pos = Enclosure::exact(0.0), neg = Enclosure::exact(0.0);
  for (int s = 0; s <= upto; ++s) {
    const Enclosure term = to_enclosure(row[static_cast<std::size_t>(s)]) * v[s];
    if (alternate && s % 2 == 1)
      neg += term;
    else
      pos += term;
  }
  return pos - neg;
}

}  // namespace detail

/// m_L - sum_s (-1)^s binom(L, s) m_s; contains 0 for certified inputs.
inline Enclosure reflect_residual(const MomentVector& m, int L) {
  detail::require_order(m, L, "reflect_residual");
  if (L == 0) return Enclosure::exact(0.0);
  return m[L] - detail::binomial_sum(m, L, L, true);
}

/// T(m)_L = sum_s (-1)^s binom(L, s) m_s for every L.
inline MomentVector reflection_map(const MomentVector& m) {
  MomentVector out{{}, m.kind};
  for (int L = 0; L <= m.max_order(); ++L) out.values.push_back(detail::binomial_sum(m, L, L, true));
  return out;
}

/// The same map in exact rational arithmetic; T(T(v)) == v.
inline std::vector<BigRational> reflection_map_exact(const std::vector<BigRational>& v) {
  std::vector<BigRational> out;
  for (int L = 0; L < static_cast<int>(v.size()); ++L) {
    const auto row = binomial_row(L);
    BigRational sum = 0;
    for (int s = 0; s <= L; ++s) {
      const BigRational term = BigRational(row[static_cast<std::size_t>(s)]) * v[static_cast<std::size_t>(s)];
      sum += s % 2 ? -term : term;
    }
    out.push_back(sum);
  }
  return out;
}

/// M_L = m_L + sum_{s<L} binom(L, s) M_s.
inline MomentVector M_from_m(const MomentVector& m) {
  if (m.kind != MomentKind::m) throw std::invalid_argument("M_from_m: expected a vector of m_L");
  MomentVector M{{}, MomentKind::M};
  for (int L = 0; L <= m.max_order(); ++L) {
    if (L == 0) {
      M.values.push_back(m[0]);
      continue;
    }
    M.values.push_back(m[L] + detail::binomial_sum(M, L, L - 1, false));
  }
  return M;
}

/// log L! by summing logs.
inline Enclosure log_factorial(int L) {
  Enclosure sum = Enclosure::exact(0.0);
  for (int k = 2; k <= L; ++k) sum += log(Enclosure::exact(k));
  return sum;
}

/// M_L (log 2)^L / (L! c0), assembled in log space.
inline Enclosure M_ratio(const MomentVector& M, const Enclosure& c0, int L) {
  if (M.kind != MomentKind::M) throw std::invalid_argument("M_ratio: expected a vector of M_L");
  detail::require_order(M, L, "M_ratio");
  const Enclosure lg = Enclosure::exact(L) * log(constants::log2()) - log_factorial(L) - log(c0);
  return exp(log(M[L]) + lg);
}

/// Truncated series for mgf(t) = sum_L m_L t^L / L! plus the tail bound
/// m_Lmax |t|^(Lmax+1) e^|t| / (Lmax+1)!, valid since m_L decreases in L.
inline Enclosure mgf_eval(double t, int L_max, const MomentVector& m) {
  if (std::fabs(t) > 10) throw std::domain_error("mgf_eval: |t| > 10 loses all digits to cancellation");
  if (m.kind != MomentKind::m) throw std::invalid_argument("mgf_eval: expected a vector of m_L");
  detail::require_order(m, L_max, "mgf_eval");
  const Enclosure tt = Enclosure::exact(t);
  Enclosure power = Enclosure::exact(1.0);  // t^L / L!
  Enclosure pos = Enclosure::exact(0.0), neg = Enclosure::exact(0.0);
  for (int L = 0; L <= L_max; ++L) {
    if (L > 0) power = power * tt / Enclosure::exact(L);
    const Enclosure term = power * m[L];
    if (term.hi <= 0)
      neg += -term;
    else
      pos += term;
  }
  // |t|^(Lmax+1)/(Lmax+1)! = |power * t| / (Lmax+1).
  const Enclosure next = power * tt / Enclosure::exact(L_max + 1);
  const double tail = (Enclosure::exact(std::max(std::fabs(next.lo), std::fabs(next.hi))) * Enclosure::exact(m[L_max].hi) *
                       exp(Enclosure::exact(std::fabs(t))))
                          .hi;
  const Enclosure sum = pos - neg;
  return {next_down(sum.lo - tail), next_up(sum.hi + tail)};
}

}  // namespace minkowski
