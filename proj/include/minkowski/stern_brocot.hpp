#pragma once

/**
 * @file stern_brocot.hpp
 * @brief Stern-Brocot partitions of [0, inf] and Calkin-Wilf generations.
 *
 * A depth-d Stern-Brocot interval [p/q, r/s] has unimodular endpoints
 * (|p s - r q| = 1) and carries F-measure exactly 2^-d. Splitting at the
 * mediant yields the two depth-(d+1) children. Entries at depth d are bounded
 * by Fibonacci numbers, so depth 40 stays far below 2^53.
 */

#include <cstdint>
#include <iterator>
#include <stdexcept>
#include <utility>
#include <vector>

#include "minkowski/continued_fraction.hpp"
#include "minkowski/rational.hpp"

namespace minkowski {

inline constexpr int kMaxTreeDepth = 40;

struct SternBrocotInterval {
  Rational left;
  Rational right;  // may be the 1/0 sentinel
  int depth = 0;

  static constexpr SternBrocotInterval whole_line() {
    return {Rational::unchecked(0, 1), Rational::unchecked(1, 0), 0};
  }
  static constexpr SternBrocotInterval unit() {
    return {Rational::unchecked(0, 1), Rational::unchecked(1, 1), 1};
  }

  bool is_unimodular() const {
    const auto a = static_cast<unsigned __int128>(left.num()) * right.den();
    const auto b = static_cast<unsigned __int128>(right.num()) * left.den();
    return (a > b ? a - b : b - a) == 1;
  }

  Rational split_point() const { return mediant(left, right); }

  friend bool operator==(const SternBrocotInterval&, const SternBrocotInterval&) = default;
};

/// Mediant split; both children are unimodular with depth + 1.
inline std::pair<SternBrocotInterval, SternBrocotInterval> sb_refine(const SternBrocotInterval& iv) {
  if (!iv.is_unimodular()) throw std::invalid_argument("sb_refine: interval is not unimodular");
  const Rational m = iv.split_point();
  return {{iv.left, m, iv.depth + 1}, {m, iv.right, iv.depth + 1}};
}

/// Recovers the Stern-Brocot interval with the given endpoints, including its depth.
/// Throws std::invalid_argument if the endpoints are not tree neighbours.
inline SternBrocotInterval sb_interval(const Rational& left, const Rational& right) {
  SternBrocotInterval iv{left, right, 0};
  if (!(left < right) || !iv.is_unimodular())
    throw std::invalid_argument("sb_interval: endpoints are not Stern-Brocot neighbours");
  // The mediant sits at tree level depth, and level k holds the rationals whose
  // partial quotients sum to k + 1.
  iv.depth = static_cast<int>(cf_term_sum(iv.split_point())) - 1;
  return iv;
}

/// (a/(a+b), (a+b)/b); both children are automatically in lowest terms.
inline std::pair<Rational, Rational> cw_children(const Rational& x) {
  require_finite(x, "cw_children");
  const auto s = detail::checked_add(x.num(), x.den());
  return {Rational::unchecked(x.num(), s), Rational::unchecked(s, x.den())};
}

struct GenerationLimits {
  int max_generation = 30;
};

/**
 * Generation n of the Calkin-Wilf tree, streamed depth-first left to right.
 *
 * Holds one root-to-leaf path; advancing pops right children and steps
 * to the next right sibling, so iteration is amortised O(1) per element.
 */
class CwGeneration {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Rational;
    using difference_type = std::ptrdiff_t;
    using pointer = const Rational*;
    using reference = const Rational&;

    iterator() = default;

    reference operator*() const { return path_.back(); }
    pointer operator->() const { return &path_.back(); }

    iterator& operator++() {
      // Climb while the current node is a right child.
      while (path_.size() > 1 && is_right_.back()) {
        path_.pop_back();
        is_right_.pop_back();
      }
      if (path_.size() == 1) {
        done_ = true;
        return *this;
      }
      path_.pop_back();
      is_right_.pop_back();
      push(cw_children(path_.back()).second, true);
      descend_left();
      return *this;
    }
    void operator++(int) { ++*this; }

    friend bool operator==(const iterator& it, std::default_sentinel_t) { return it.done_; }

   private:
    friend class CwGeneration;
    explicit iterator(int generation) : generation_(generation) {
      path_.reserve(static_cast<std::size_t>(generation));
      push(Rational::unchecked(1, 1), false);
      descend_left();
    }
    void push(const Rational& r, bool right) {
      path_.push_back(r);
      is_right_.push_back(right);
    }
    void descend_left() {
      while (static_cast<int>(path_.size()) < generation_) push(cw_children(path_.back()).first, false);
    }

    int generation_ = 0;
    std::vector<Rational> path_;
    std::vector<bool> is_right_;
    bool done_ = false;
  };

  explicit CwGeneration(int n, GenerationLimits limits = {}) : n_(n) {
    if (n < 1) throw std::invalid_argument("cw_generation: n must be >= 1");
    if (n > limits.max_generation) throw resource_error("cw_generation: n exceeds configured generation limit");
  }

  iterator begin() const { return iterator(n_); }
  std::default_sentinel_t end() const { return {}; }
  std::uint64_t size() const { return std::uint64_t{1} << (n_ - 1); }

 private:
  int n_;
};

inline CwGeneration cw_generation(int n, GenerationLimits limits = {}) { return CwGeneration(n, limits); }

}  // namespace minkowski
