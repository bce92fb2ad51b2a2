#pragma once

/**
 * @file tree_moments.hpp
 * @brief Finite-generation estimates of m_L from Calkin-Wilf generations.
 *
 * Two estimators:
 *   m_gen_cf(L, n)   = 2^(2-n) sum of x^L over x = [0; a1, ..., as] with
 *                      a1 + ... + as = n and as >= 2,
 *   m_gen_tree(L, n) = 2^(1-n) sum of (x/(x+1))^L over generation n.
 *
 * For x = p/q in generation n (partial quotients summing to n), x/(x+1) =
 * p/(p+q) = [0; a0+1, a1, ..., ar] has partial quotients summing to n+1 and a
 * last term >= 2 (or is 1/2). The map is a bijection, so
 * m_gen_tree(L, n) == m_gen_cf(L, n+1) as point sets; numerically the two sums
 * differ only by rounding.
 *
 * These are plain binary64 diagnostics with compensated summation. Certified
 * values come from stieltjes.hpp.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "minkowski/enclosure.hpp"
#include "minkowski/parallel.hpp"
#include "minkowski/rational.hpp"
#include "minkowski/stern_brocot.hpp"

namespace minkowski {

/// Neumaier's compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double compensation = 0.0;
  std::uint64_t count = 0;

  void add(double x) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
      compensation += (sum - t) + x;
    else
      compensation += (x - t) + sum;
    sum = t;
    ++count;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum);
    --count;
    compensation += other.compensation;
    count += other.count;
  }
  double value() const { return sum + compensation; }
};

struct GenerationEstimate {
  int L = 0;
  int n = 0;
  double value_cf_form = 0.0;
  double value_tree_form = 0.0;
  std::uint64_t node_count = 0;        // 2^(n-1) tree nodes
  std::uint64_t composition_count = 0;  // 2^(n-2) compositions, 0 for n = 1
};

namespace detail {

inline double pow_int(double x, int n) {
  double r = 1.0;
  for (unsigned e = static_cast<unsigned>(n); e; e >>= 1u) {
    if (e & 1u) r *= x;
    x *= x;
  }
  return r;
}

/// Levels enumerated serially before the remaining subtrees go to workers.
inline constexpr int kGenerationSplit = 10;

/// Convergent state of a partial continued fraction [0; a1, ..., ak].
struct CfState {
  std::uint64_t p1, q1;  // p_k / q_k
  std::uint64_t p0, q0;  // p_(k-1) / q_(k-1)
  int remaining;
};

struct CfWalker {
  int L;

  double value(std::uint64_t p, std::uint64_t q) const {
    return pow_int(static_cast<double>(p) / static_cast<double>(q), L);
  }

  /// Children of a state in canonical order: a = 1, 2, ..., remaining.
  template <class Leaf, class Inner>
  void children(const CfState& s, Leaf&& on_leaf, Inner&& on_inner) const {
    for (int a = 1; a <= s.remaining; ++a) {
      const std::uint64_t p = a * s.p1 + s.p0, q = a * s.q1 + s.q0;
      if (a == s.remaining) {
        if (a >= 2) on_leaf(p, q);
      } else {
        on_inner(CfState{p, q, s.p1, s.q1, s.remaining - a});
      }
    }
  }

  void walk(const CfState& s, CompensatedSum& acc) const {
    children(
        s, [&](std::uint64_t p, std::uint64_t q) { acc.add(value(p, q)); },
        [&](const CfState& c) { walk(c, acc); });
  }
};

struct TreeWalker {
  int L;
  int generation;

  double value(std::uint64_t p, std::uint64_t q) const {
    return pow_int(static_cast<double>(p) / static_cast<double>(p + q), L);
  }

  void walk(std::uint64_t p, std::uint64_t q, int level, CompensatedSum& acc) const {
    if (level == generation) {
      acc.add(value(p, q));
      return;
    }
    walk(p, p + q, level + 1, acc);
    walk(p + q, q, level + 1, acc);
  }
};

inline CompensatedSum reduce_sums(const std::vector<CompensatedSum>& parts) {
  if (parts.empty()) return {};
  return pairwise_reduce(parts, 0, parts.size(), [](CompensatedSum a, const CompensatedSum& b) {
    a.merge(b);
    return a;
  });
}

inline void check_generation(int L, int n, const GenerationLimits& limits, const char* what) {
  if (L < 0) throw std::invalid_argument(std::string(what) + ": L must be >= 0");
  if (n < 1) throw std::invalid_argument(std::string(what) + ": n must be >= 1");
  if (n > limits.max_generation) throw resource_error(std::string(what) + ": n exceeds configured generation limit");
}

}  // namespace detail

/// Compensated sum of x^L over compositions of n with last part >= 2 (unscaled).
inline CompensatedSum composition_sum(int L, int n, GenerationLimits limits = {},
                                      unsigned threads = default_thread_count()) {
  detail::check_generation(L, n, limits, "m_gen_cf");
  const detail::CfWalker walker{L};
  // Items in canonical order: leaf values found while expanding, and subtrees.
  std::vector<std::variant<double, detail::CfState>> items;
  auto expand = [&](auto& self, const detail::CfState& s, int consumed) -> void {
    walker.children(
        s, [&](std::uint64_t p, std::uint64_t q) { items.emplace_back(walker.value(p, q)); },
        [&](const detail::CfState& c) {
          if (consumed + (s.remaining - c.remaining) >= detail::kGenerationSplit)
            items.emplace_back(c);
          else
            self(self, c, consumed + (s.remaining - c.remaining));
        });
  };
  // [0; ...] starts from p_0/q_0 = 0/1 and p_-1/q_-1 = 1/0.
  expand(expand, detail::CfState{0, 1, 1, 0, n}, 0);

  std::vector<CompensatedSum> parts(items.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (const auto* v = std::get_if<double>(&items[i]))
      parts[i].add(*v);
    else
      pending.push_back(i);
  }
  parallel_for(pending.size(), threads,
               [&](std::size_t j) { walker.walk(std::get<detail::CfState>(items[pending[j]]), parts[pending[j]]); });
  return detail::reduce_sums(parts);
}

/// Compensated sum of (x/(x+1))^L over Calkin-Wilf generation n (unscaled).
inline CompensatedSum generation_sum(int L, int n, GenerationLimits limits = {},
                                     unsigned threads = default_thread_count()) {
  detail::check_generation(L, n, limits, "m_gen_tree");
  const detail::TreeWalker walker{L, n};
  const int split = std::min(n, detail::kGenerationSplit);
  // Nodes of level `split` in left-to-right order are the canonical subtrees.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> roots{{1, 1}};
  for (int level = 1; level < split; ++level) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> next;
    next.reserve(roots.size() * 2);
    for (auto [p, q] : roots) {
      next.emplace_back(p, p + q);
      next.emplace_back(p + q, q);
    }
    roots = std::move(next);
  }
  std::vector<CompensatedSum> parts(roots.size());
  parallel_for(roots.size(), threads,
               [&](std::size_t i) { walker.walk(roots[i].first, roots[i].second, split, parts[i]); });
  return detail::reduce_sums(parts);
}

/// 2^(2-n) sum over compositions of n with last part >= 2 of [0; a1, ..., as]^L.
inline double m_gen_cf(int L, int n, GenerationLimits limits = {}, unsigned threads = default_thread_count()) {
  return std::ldexp(composition_sum(L, n, limits, threads).value(), 2 - n);
}

/// 2^(1-n) sum over generation n of (x/(x+1))^L.
inline double m_gen_tree(int L, int n, GenerationLimits limits = {}, unsigned threads = default_thread_count()) {
  return std::ldexp(generation_sum(L, n, limits, threads).value(), 1 - n);
}

inline GenerationEstimate generation_estimate(int L, int n, GenerationLimits limits = {},
                                              unsigned threads = default_thread_count()) {
  GenerationEstimate e;
  e.L = L;
  e.n = n;
  const auto cf = composition_sum(L, n, limits, threads);
  const auto tree = generation_sum(L, n, limits, threads);
  e.value_cf_form = std::ldexp(cf.value(), 2 - n);
  e.value_tree_form = std::ldexp(tree.value(), 1 - n);
  e.composition_count = cf.count;
  e.node_count = tree.count;
  return e;
}

struct ConvergenceRow {
  int n = 0;
  double value_cf_form = 0.0;
  double value_tree_form = 0.0;
  double error_cf = 0.0;
  double error_tree = 0.0;
};

struct ConvergenceReport {
  int L = 0;
  Enclosure reference;
  std::vector<ConvergenceRow> rows;
  /// Least-squares slope of log2(error) against n over rows with n >= fit_from
  /// and nonzero error; errors behave like rate^n. Empty if fewer than two points.
  std::optional<double> decay_rate_cf, decay_rate_tree;
};

namespace detail {

inline std::optional<double> fit_decay(const std::vector<ConvergenceRow>& rows, int fit_from, bool tree) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const auto& r : rows) {
    const double e = tree ? r.error_tree : r.error_cf;
    if (r.n < fit_from || !(e > 0)) continue;
    const double x = r.n, y = std::log2(e);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++count;
  }
  if (count < 2) return std::nullopt;
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return std::exp2(slope);
}

}  // namespace detail

/// Per-generation errors of both estimators against reference.mid() for n in [n_min, n_max].
inline ConvergenceReport convergence_report(int L, int n_max, const Enclosure& reference, int n_min = 1,
                                            GenerationLimits limits = {},
                                            unsigned threads = default_thread_count()) {
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("convergence_report: need 1 <= n_min <= n_max");
  ConvergenceReport report;
  report.L = L;
  report.reference = reference;
  for (int n = n_min; n <= n_max; ++n) {
    const auto e = generation_estimate(L, n, limits, threads);
    report.rows.push_back({n, e.value_cf_form, e.value_tree_form, std::fabs(e.value_cf_form - reference.mid()),
                           std::fabs(e.value_tree_form - reference.mid())});
  }
  constexpr int kFitFrom = 5;
  report.decay_rate_cf = detail::fit_decay(report.rows, kFitFrom, false);
  report.decay_rate_tree = detail::fit_decay(report.rows, kFitFrom, true);
  return report;
}

}  // namespace minkowski
