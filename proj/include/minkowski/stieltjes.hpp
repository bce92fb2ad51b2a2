#pragma once

/**
 * @file stieltjes.hpp
 * @brief Certified Riemann-Stieltjes integration against dF on Stern-Brocot
 *        partitions.
 *
 * F is singular, so ordinary quadrature against dF fails. The engine uses the
 * tree partition instead: a depth-d interval [l, r] carries F-measure exactly
 * 2^-d, and for f monotone on [l, r] its contribution lies between
 * f(l) 2^-d and f(r) 2^-d. Summing both sides over a partition brackets the
 * integral; refining a leaf at its mediant halves that leaf's bracket width.
 *
 * Adaptive mode refines every leaf whose bracket width exceeds a threshold
 * tau = target * 2^-d_alloc, and searches d_alloc over a few deterministic
 * passes until the total bracket width meets the target. Uniform mode refines
 * every leaf to max_depth.
 *
 * Determinism: the top levels of the partition are expanded serially into a
 * fixed list of subtrees, subtrees are integrated independently, and the
 * results are reduced pairwise in canonical left-to-right order. The thread
 * count only decides who computes which subtree. Every addition is checked
 * with an error-free transformation and the accumulated rounding error widens
 * the final enclosure outward.
 */

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "minkowski/enclosure.hpp"
#include "minkowski/parallel.hpp"
#include "minkowski/rational.hpp"
#include "minkowski/stern_brocot.hpp"

namespace minkowski {

enum class Direction { increasing, decreasing };

/// Piecewise monotonicity: pieces[i] holds between breakpoints[i-1] and breakpoints[i].
struct Monotonicity {
  std::vector<Rational> breakpoints;
  std::vector<Direction> pieces{Direction::increasing};

  static Monotonicity increasing() { return {}; }
  static Monotonicity decreasing() { return {{}, {Direction::decreasing}}; }
  static Monotonicity piecewise(std::vector<Rational> breakpoints, std::vector<Direction> pieces) {
    if (pieces.size() != breakpoints.size() + 1)
      throw std::invalid_argument("Monotonicity: need one direction per piece");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
      throw std::invalid_argument("Monotonicity: breakpoints must be sorted");
    return {std::move(breakpoints), std::move(pieces)};
  }
  bool is_simple() const { return breakpoints.empty(); }
};

/**
 * An integrand evaluates K components at once and returns, for each, a
 * certified enclosure of its value at a rational (or at the 1/0 sentinel, where
 * it must return its finite limit). All components share one monotonicity.
 */
template <class F>
concept StieltjesIntegrand = requires(const F& f, const Rational& x) {
  { F::components } -> std::convertible_to<std::size_t>;
  { f.eval(x) } -> std::same_as<std::array<Enclosure, F::components>>;
  { f.monotonicity() } -> std::convertible_to<Monotonicity>;
};

/// Type-erased single-component integrand.
struct IntegrandDescriptor {
  static constexpr std::size_t components = 1;
  std::function<Enclosure(const Rational&)> evaluator;
  Monotonicity shape = Monotonicity::increasing();

  std::array<Enclosure, 1> eval(const Rational& x) const { return {evaluator(x)}; }
  const Monotonicity& monotonicity() const { return shape; }
};

enum class QuadratureMode { uniform_depth, adaptive };

struct QuadratureRequest {
  SternBrocotInterval domain = SternBrocotInterval::whole_line();
  double target_width = 1e-9;
  int max_depth = kMaxTreeDepth;
  QuadratureMode mode = QuadratureMode::adaptive;
  unsigned threads = default_thread_count();
  /// Adaptive passes stop (flagged unconverged) rather than exceed this many leaves.
  std::uint64_t leaf_budget = std::uint64_t{1} << 33;
};

template <std::size_t K>
struct QuadratureResult {
  std::array<Enclosure, K> values{};
  std::array<double, K> bracket_width{};
  bool converged = false;
  std::uint64_t leaves = 0;
  int deepest = 0;
  int passes = 0;
  double seconds = 0.0;

  const Enclosure& value() const
    requires(K == 1)
  {
    return values[0];
  }
};

namespace detail {

/// Endpoint values split into lower and upper arrays so the loops vectorise.
template <std::size_t K>
struct Values {
  std::array<double, K> lo, hi;

  static Values from(const std::array<Enclosure, K>& e) {
    Values v;
    for (std::size_t k = 0; k < K; ++k) v.lo[k] = e[k].lo, v.hi[k] = e[k].hi;
    return v;
  }
};

/// Pairwise partial sums of lower and upper brackets with exact rounding-error tallies.
template <std::size_t K>
struct Partial {
  std::array<double, K> lo{}, hi{}, lo_err{}, hi_err{};
  std::uint64_t leaves = 0;
  int deepest = 0;
  int height = 0;
};

/// 2^-d without a libm call.
inline double pow2_neg(int d) {
  static const std::array<double, 1076> table = [] {
    std::array<double, 1076> t{};
    for (int i = 0; i < 1076; ++i) t[static_cast<std::size_t>(i)] = std::ldexp(1.0, -i);
    return t;
  }();
  return d < 1076 ? table[static_cast<std::size_t>(d)] : 0.0;
}

inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

/// a += b.
template <std::size_t K>
void accumulate(Partial<K>& a, const Partial<K>& b) {
  for (std::size_t k = 0; k < K; ++k) {
    double s, e;
    two_sum(a.lo[k], b.lo[k], s, e);
    a.lo[k] = s;
    a.lo_err[k] += b.lo_err[k] + std::fabs(e);
    two_sum(a.hi[k], b.hi[k], s, e);
    a.hi[k] = s;
    a.hi_err[k] += b.hi_err[k] + std::fabs(e);
  }
  a.leaves += b.leaves;
  a.deepest = std::max(a.deepest, b.deepest);
  a.height = std::max(a.height, b.height) + 1;
}

template <std::size_t K>
Partial<K> combine(Partial<K> a, const Partial<K>& b) {
  accumulate(a, b);
  return a;
}

/// Contribution of f over a leaf is within [lo, hi] * 2^-depth.
template <std::size_t K>
struct Bracket {
  std::array<double, K> lo, hi;
};

template <class F>
class Walker {
 public:
  static constexpr std::size_t K = F::components;

  Walker(const F& f, const std::array<double, K>& tau, int max_depth, bool uniform)
      : f_(f), shape_(f.monotonicity()), tau_(tau), max_depth_(max_depth), uniform_(uniform) {
    for (const auto& b : shape_.breakpoints) breakpoint_values_.push_back(Values<K>::from(f_.eval(b)));
  }

  Bracket<K> bracket(const Rational& l, const Rational& r, const Values<K>& fl, const Values<K>& fr) const {
    Bracket<K> b;
    if (shape_.is_simple()) {
      fill_monotone(b, shape_.pieces[0], fl, fr);
      return b;
    }
    // Piece containing the interval start, and breakpoints strictly inside.
    const auto first = std::upper_bound(shape_.breakpoints.begin(), shape_.breakpoints.end(), l);
    const auto last = std::lower_bound(shape_.breakpoints.begin(), shape_.breakpoints.end(), r);
    if (first >= last) {
      fill_monotone(b, shape_.pieces[static_cast<std::size_t>(first - shape_.breakpoints.begin())], fl, fr);
      return b;
    }
    for (std::size_t k = 0; k < K; ++k) {
      b.lo[k] = std::min(fl.lo[k], fr.lo[k]);
      b.hi[k] = std::max(fl.hi[k], fr.hi[k]);
    }
    for (auto it = first; it != last; ++it) {
      const auto& v = breakpoint_values_[static_cast<std::size_t>(it - shape_.breakpoints.begin())];
      for (std::size_t k = 0; k < K; ++k) {
        b.lo[k] = std::min(b.lo[k], v.lo[k]);
        b.hi[k] = std::max(b.hi[k], v.hi[k]);
      }
    }
    return b;
  }

  bool should_refine(const Bracket<K>& b, int depth) const {
    if (depth >= max_depth_) return false;
    if (uniform_) return true;
    const double mu = pow2_neg(depth);
    bool refine = false;
    for (std::size_t k = 0; k < K; ++k) refine |= (b.hi[k] - b.lo[k]) * mu > tau_[k];
    return refine;
  }

  void leaf(const Bracket<K>& b, int depth, Partial<K>& p) const {
    if (depth >= 1075) {
      // Measure below the smallest subnormal: bracket [min(lo,0), max(hi,0)] * 2^-1074.
      constexpr double tiny = std::numeric_limits<double>::denorm_min();
      for (std::size_t k = 0; k < K; ++k) {
        p.lo[k] = b.lo[k] < 0 ? -tiny * std::ceil(-b.lo[k]) : 0.0;
        p.hi[k] = b.hi[k] > 0 ? tiny * std::ceil(b.hi[k]) : 0.0;
        p.lo_err[k] = p.hi_err[k] = 0.0;
      }
    } else {
      const double mu = pow2_neg(depth);
      bool underflow = false;
      for (std::size_t k = 0; k < K; ++k) {
        p.lo[k] = b.lo[k] * mu;
        p.hi[k] = b.hi[k] * mu;
        p.lo_err[k] = p.hi_err[k] = 0.0;
        underflow |= std::fabs(p.lo[k]) < std::numeric_limits<double>::min() && b.lo[k] != 0.0;
        underflow |= std::fabs(p.hi[k]) < std::numeric_limits<double>::min() && b.hi[k] != 0.0;
      }
      // Scaling by 2^-depth is exact unless the result is subnormal.
      if (underflow)
        for (std::size_t k = 0; k < K; ++k)
          p.lo_err[k] = p.hi_err[k] = std::numeric_limits<double>::denorm_min();
    }
    p.leaves = 1;
    p.deepest = depth;
    p.height = 0;
  }

  Partial<K> leaf(const Bracket<K>& b, int depth) const {
    Partial<K> p;
    leaf(b, depth, p);
    return p;
  }

  void walk(const Rational& l, const Rational& r, int depth, const Values<K>& fl, const Values<K>& fr,
            Partial<K>& out) const {
    const Bracket<K> b = bracket(l, r, fl, fr);
    if (!should_refine(b, depth)) {
      leaf(b, depth, out);
      return;
    }
    const Rational m = mediant(l, r);
    const auto fm = Values<K>::from(f_.eval(m));
    walk(l, m, depth + 1, fl, fm, out);
    Partial<K> right;
    walk(m, r, depth + 1, fm, fr, right);
    accumulate(out, right);
  }

  const F& integrand() const { return f_; }

 private:
  void fill_monotone(Bracket<K>& b, Direction dir, const Values<K>& fl, const Values<K>& fr) const {
    if (dir == Direction::increasing) {
      b.lo = fl.lo;
      b.hi = fr.hi;
    } else {
      b.lo = fr.lo;
      b.hi = fl.hi;
    }
  }

  const F& f_;
  Monotonicity shape_;
  std::array<double, K> tau_;
  int max_depth_;
  bool uniform_;
  std::vector<Values<K>> breakpoint_values_;
};

/// Levels expanded serially before subtrees are handed to workers.
inline constexpr int kSplitLevels = 8;

template <std::size_t K>
struct Subtree {
  Rational l, r;
  int depth;
  Values<K> fl, fr;
};

template <class F>
Partial<F::components> run_pass(const F& f, std::span<const SternBrocotInterval> domains,
                                const std::array<double, F::components>& tau, int max_depth, bool uniform,
                                unsigned threads) {
  constexpr std::size_t K = F::components;
  const Walker<F> walker(f, tau, max_depth, uniform);

  // Canonical list of finished leaves and pending subtrees.
  std::vector<std::variant<Partial<K>, Subtree<K>>> items;
  auto expand = [&](auto& self, const Rational& l, const Rational& r, int depth, int level, const Values<K>& fl,
                    const Values<K>& fr) -> void {
    const Bracket<K> b = walker.bracket(l, r, fl, fr);
    if (!walker.should_refine(b, depth)) {
      items.emplace_back(walker.leaf(b, depth));
      return;
    }
    if (level == kSplitLevels) {
      items.emplace_back(Subtree<K>{l, r, depth, fl, fr});
      return;
    }
    const Rational m = mediant(l, r);
    const auto fm = Values<K>::from(f.eval(m));
    self(self, l, m, depth + 1, level + 1, fl, fm);
    self(self, m, r, depth + 1, level + 1, fm, fr);
  };
  for (const auto& d : domains) {
    if (!d.is_unimodular()) throw std::invalid_argument("integrate_dF: domain is not a Stern-Brocot interval");
    expand(expand, d.left, d.right, d.depth, 0, Values<K>::from(f.eval(d.left)), Values<K>::from(f.eval(d.right)));
  }

  std::vector<Partial<K>> partials(items.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (auto* p = std::get_if<Partial<K>>(&items[i]))
      partials[i] = *p;
    else
      pending.push_back(i);
  }
  parallel_for(pending.size(), threads, [&](std::size_t j) {
    const auto& t = std::get<Subtree<K>>(items[pending[j]]);
    walker.walk(t.l, t.r, t.depth, t.fl, t.fr, partials[pending[j]]);
  });
  return pairwise_reduce(partials, 0, partials.size(), [](const auto& a, const auto& b) { return combine(a, b); });
}

/// Final enclosure: the accumulated rounding-error tallies are themselves sums
/// of non-negative floats, so inflating them by gamma_height bounds them.
template <std::size_t K>
std::array<Enclosure, K> finalize(const Partial<K>& p) {
  std::array<Enclosure, K> out;
  const double inflate = 1.0 + gamma_bound(p.height + 4);
  for (std::size_t k = 0; k < K; ++k) {
    double lo = p.lo[k], hi = p.hi[k];
    if (p.lo_err[k] > 0) lo = next_down(lo - p.lo_err[k] * inflate);
    if (p.hi_err[k] > 0) hi = next_up(hi + p.hi_err[k] * inflate);
    out[k] = {lo, hi};
  }
  return out;
}

}  // namespace detail

/**
 * Integrates each component of f against dF over the union of the given
 * Stern-Brocot intervals. In adaptive mode targets[k] bounds the width of
 * component k's enclosure; unreachable targets return the achieved
 * enclosure with converged = false.
 */
template <StieltjesIntegrand F>
QuadratureResult<F::components> integrate_dF(const F& f, std::span<const SternBrocotInterval> domains,
                                             const std::array<double, F::components>& targets,
                                             const QuadratureRequest& req) {
  constexpr std::size_t K = F::components;
  if (req.max_depth > kMaxTreeDepth) throw std::invalid_argument("integrate_dF: max_depth exceeds 40");
  for (double t : targets)
    if (!(t > 0)) throw std::invalid_argument("integrate_dF: target width must be positive");

  const auto start = std::chrono::steady_clock::now();
  QuadratureResult<K> result;
  auto publish = [&](const detail::Partial<K>& p, int passes) {
    result.values = detail::finalize(p);
    for (std::size_t k = 0; k < K; ++k) result.bracket_width[k] = result.values[k].width();
    result.leaves = p.leaves;
    result.deepest = p.deepest;
    result.passes = passes;
    result.converged = true;
    for (std::size_t k = 0; k < K; ++k)
      if (result.values[k].width() > targets[k]) result.converged = false;
  };

  if (req.mode == QuadratureMode::uniform_depth) {
    publish(detail::run_pass(f, domains, targets, req.max_depth, true, req.threads), 1);
  } else {
    // Bracket widths aim slightly below target so the final rounding widening fits.
    std::array<double, K> goal{}, tau{}, prev_tau{}, prev_width{};
    for (std::size_t k = 0; k < K; ++k) goal[k] = targets[k] * (1.0 - 1e-6);
    tau = goal;
    std::uint64_t prev_leaves = 0;
    constexpr int kMaxPasses = 24;
    for (int pass = 1;; ++pass) {
      const auto p = detail::run_pass(f, domains, tau, req.max_depth, false, req.threads);
      publish(p, pass);
      if (result.converged || pass == kMaxPasses || p.leaves == prev_leaves) break;

      // W(tau) behaves like a power law; estimate its exponent from the last
      // two passes and aim for 85% of the goal.
      std::array<double, K> next = tau;
      double leaf_growth = 1.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double w = p.hi[k] - p.lo[k];
        if (w <= goal[k]) continue;
        double exponent = 0.5;
        if (pass > 1 && prev_tau[k] != tau[k] && prev_width[k] > w && w > 0)
          exponent = std::clamp(std::log(prev_width[k] / w) / std::log(prev_tau[k] / tau[k]), 0.25, 1.0);
        const double factor = std::max(std::pow(0.85 * goal[k] / w, 1.0 / exponent), 0x1p-24);
        next[k] = tau[k] * factor;
        // Leaf counts grow roughly like tau^-(1 - exponent) per unit of width.
        leaf_growth = std::max(leaf_growth, std::pow(factor, -(1.0 - exponent)));
      }
      if (static_cast<double>(p.leaves) * leaf_growth > static_cast<double>(req.leaf_budget)) break;
      for (std::size_t k = 0; k < K; ++k) prev_width[k] = p.hi[k] - p.lo[k];
      prev_tau = tau;
      tau = next;
      prev_leaves = p.leaves;
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

template <StieltjesIntegrand F>
QuadratureResult<F::components> integrate_dF(const F& f, const QuadratureRequest& req) {
  std::array<double, F::components> targets;
  targets.fill(req.target_width);
  const SternBrocotInterval domains[1] = {req.domain};
  return integrate_dF(f, std::span<const SternBrocotInterval>(domains), targets, req);
}

// ---------------------------------------------------------------------------
// Integrands
// ---------------------------------------------------------------------------

namespace detail {

/// x^n for a double x with the relative error of both the input rounding and
/// the multiplications: |computed - exact| <= gamma_{2n} * exact.
inline double pow_uint(double x, unsigned n) {
  double r = 1.0;
  while (n) {
    if (n & 1u) r *= x;
    x *= x;
    n >>= 1u;
  }
  return r;
}

/// Encloses v, a computed approximation of a non-negative value with relative error <= gamma_n.
inline Enclosure widen_relative(double v, double n) {
  const double g = gamma_bound(n + 4);
  double lo = v * (1.0 - g), hi = v * (1.0 + g);
  // Below this the relative model is lost to gradual underflow.
  constexpr double tiny = 0x1p-960;
  if (v < tiny) lo = 0.0, hi += tiny;
  return {lo, hi};
}

}  // namespace detail

/// x^L for several L at once; increasing on [0, inf). Finite at the sentinel only for L = 0.
template <std::size_t K>
class PowerBatch {
 public:
  static constexpr std::size_t components = K;

  explicit PowerBatch(const std::array<unsigned, K>& exponents) : exponents_(exponents) {
    max_exponent_ = *std::max_element(exponents_.begin(), exponents_.end());
    for (std::size_t k = 0; k < K; ++k) {
      const double g = gamma_bound(2.0 * exponents_[k] + 4);
      lo_factor_[k] = 1.0 - g;
      hi_factor_[k] = 1.0 + g;
    }
  }

  std::array<Enclosure, K> eval(const Rational& x) const {
    if (x.is_infinite()) throw std::domain_error("PowerBatch: x^L has no finite limit at infinity");
    std::array<Enclosure, K> out;
    if (x.is_integer()) {
      // Exact for the integers the tree visits as endpoints.
      for (std::size_t k = 0; k < K; ++k) out[k] = Enclosure::exact(detail::pow_uint(x.to_double(), exponents_[k]));
      bool exact = true;
      for (std::size_t k = 0; k < K; ++k) exact &= out[k].hi < 0x1p53;
      if (exact) return out;
    }
    const double v = x.to_double();
    std::array<double, K> raw;
    if (max_exponent_ <= 32) {
      std::array<double, 33> powers;
      powers[0] = 1.0;
      for (unsigned n = 1; n <= max_exponent_; ++n) powers[n] = powers[n - 1] * v;
      for (std::size_t k = 0; k < K; ++k) raw[k] = powers[exponents_[k]];
    } else {
      for (std::size_t k = 0; k < K; ++k) raw[k] = detail::pow_uint(v, exponents_[k]);
    }
    bool tiny = false;
    for (std::size_t k = 0; k < K; ++k) {
      out[k] = {raw[k] * lo_factor_[k], raw[k] * hi_factor_[k]};
      tiny |= raw[k] < kTiny;
    }
    if (tiny)
      for (std::size_t k = 0; k < K; ++k)
        if (raw[k] < kTiny) out[k] = {0.0, out[k].hi + kTiny};
    return out;
  }

  Monotonicity monotonicity() const { return Monotonicity::increasing(); }
  const std::array<unsigned, K>& exponents() const { return exponents_; }

 private:
  // Below this the relative error model is lost to gradual underflow.
  static constexpr double kTiny = 0x1p-960;
  std::array<unsigned, K> exponents_;
  std::array<double, K> lo_factor_{}, hi_factor_{};
  unsigned max_exponent_ = 0;
};

/// (x/(x+1))^L on [0, inf]; increasing with limit 1 at the sentinel.
class RatioPower {
 public:
  static constexpr std::size_t components = 1;
  explicit RatioPower(unsigned L) : L_(L) {}

  std::array<Enclosure, 1> eval(const Rational& x) const {
    if (x.is_infinite() || L_ == 0) return {Enclosure::exact(1.0)};
    if (x.num() == 0) return {Enclosure::exact(0.0)};
    const double y = static_cast<double>(x.num()) / static_cast<double>(x.num() + x.den());
    return {detail::widen_relative(detail::pow_uint(y, L_), 2.0 * L_)};
  }
  Monotonicity monotonicity() const { return Monotonicity::increasing(); }

 private:
  unsigned L_;
};

/// Components {2^x, x 2^x}; both increasing on [0, inf).
class Exp2Moments {
 public:
  static constexpr std::size_t components = 2;

  std::array<Enclosure, 2> eval(const Rational& x) const {
    if (x.is_infinite()) throw std::domain_error("Exp2Moments: no finite limit at infinity");
    if (x.num() == 0) return {Enclosure::exact(1.0), Enclosure::exact(0.0)};
    if (x.is_integer()) {
      const double p = std::ldexp(1.0, static_cast<int>(x.num()));
      return {Enclosure::exact(p), Enclosure::exact(p * static_cast<double>(x.num()))};
    }
    const double v = x.to_double();
    const double e = std::exp2(v);
    // Input rounding perturbs 2^x by a relative v ln2 u; libm adds kLibmUlps ulps.
    const double n = v + 2.0 * kLibmUlps + 2.0;
    return {detail::widen_relative(e, n), detail::widen_relative(e * v, n + 2.0)};
  }
  Monotonicity monotonicity() const { return Monotonicity::increasing(); }
};

// ---------------------------------------------------------------------------
// Moments and structural constants
// ---------------------------------------------------------------------------

struct MomentOptions {
  QuadratureMode mode = QuadratureMode::adaptive;
  int max_depth = kMaxTreeDepth;
  unsigned threads = default_thread_count();
  std::uint64_t leaf_budget = std::uint64_t{1} << 33;
};

/// One computed moment with enough metadata to reproduce it.
struct MomentRecord {
  std::string kind = "m";  // "m" = int_0^1 x^L d?(x), "M" = int_0^inf x^L dF(x)
  int L = 0;
  Enclosure value;
  std::string method = "stieltjes";
  std::string mode = "adaptive";
  double target_width = 0.0;
  int max_depth = kMaxTreeDepth;
  int cutoff = 0;  // M only
  std::uint64_t leaves = 0;
  bool converged = true;
  double wall_time = 0.0;
};

inline std::string to_string(QuadratureMode mode) {
  return mode == QuadratureMode::adaptive ? "adaptive" : "uniform";
}

/**
 * m_L for every L in Ls, each to absolute width targets[i], in as few tree
 * traversals as possible (chunks of up to 12 exponents share one pass).
 * m_L = 2 int_0^1 x^L dF(x).
 */
inline std::vector<MomentRecord> moment_m_batch(const std::vector<unsigned>& Ls, const std::vector<double>& targets,
                                                const MomentOptions& opt = {}) {
  if (Ls.size() != targets.size()) throw std::invalid_argument("moment_m_batch: one target per moment");
  constexpr std::size_t kChunk = 12;
  std::vector<MomentRecord> out(Ls.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    out[i].L = static_cast<int>(Ls[i]);
    out[i].target_width = targets[i];
    out[i].mode = to_string(opt.mode);
    out[i].max_depth = opt.max_depth;
    if (Ls[i] == 0)
      out[i].value = Enclosure::exact(1.0);
    else
      pending.push_back(i);
  }
  // One pass per chunk, evaluated with the narrowest batch that holds it.
  auto run_chunk = [&]<std::size_t K>(std::integral_constant<std::size_t, K>, std::size_t begin, std::size_t end) {
    std::array<unsigned, K> exps{};
    std::array<double, K> goals{};
    for (std::size_t j = 0; j < K; ++j) {
      // Unused slots repeat the last exponent; they never add refinement.
      const std::size_t src = pending[std::min(begin + j, end - 1)];
      exps[j] = Ls[src];
      goals[j] = targets[src] / 2;
    }
    QuadratureRequest req;
    req.max_depth = opt.max_depth;
    req.mode = opt.mode;
    req.threads = opt.threads;
    req.leaf_budget = opt.leaf_budget;
    const SternBrocotInterval unit[1] = {SternBrocotInterval::unit()};
    const auto res = integrate_dF(PowerBatch<K>(exps), std::span<const SternBrocotInterval>(unit), goals, req);
    for (std::size_t j = 0; begin + j < end; ++j) {
      auto& rec = out[pending[begin + j]];
      rec.value = ldexp(res.values[j], 1);
      rec.leaves = res.leaves;
      rec.converged = opt.mode == QuadratureMode::uniform_depth || rec.value.width() <= rec.target_width;
      rec.wall_time = res.seconds;
    }
  };
  for (std::size_t begin = 0; begin < pending.size(); begin += kChunk) {
    const std::size_t end = std::min(pending.size(), begin + kChunk);
    if (end - begin == 1)
      run_chunk(std::integral_constant<std::size_t, 1>{}, begin, end);
    else if (end - begin <= 4)
      run_chunk(std::integral_constant<std::size_t, 4>{}, begin, end);
    else
      run_chunk(std::integral_constant<std::size_t, kChunk>{}, begin, end);
  }
  return out;
}

/// m_L = int_0^1 x^L d?(x) to absolute width target_width.
inline MomentRecord moment_m(unsigned L, double target_width, const MomentOptions& opt = {}) {
  return moment_m_batch({L}, {target_width}, opt).front();
}

/// m_L to relative width rel_width; a cheap pilot pass fixes the magnitude.
inline MomentRecord moment_m_relative(unsigned L, double rel_width, const MomentOptions& opt = {}) {
  if (L == 0) return moment_m(0, rel_width, opt);
  MomentOptions pilot_opt = opt;
  pilot_opt.mode = QuadratureMode::adaptive;
  double pilot_target = 1e-3;
  for (;;) {
    const auto pilot = moment_m(L, pilot_target, pilot_opt);
    if (pilot.value.lo > 0 && pilot.value.width() <= 0.1 * pilot.value.lo) {
      auto rec = moment_m(L, rel_width * pilot.value.lo, opt);
      rec.target_width = rel_width * pilot.value.lo;
      return rec;
    }
    if (!pilot.converged || pilot_target < 1e-300) return pilot;
    pilot_target /= 1e3;
  }
}

/// int_0^1 2^x d?(x) and int_0^1 x 2^x d?(x), each to absolute width target.
inline QuadratureResult<2> exp2_moments(double target_width, const MomentOptions& opt = {}) {
  QuadratureRequest req;
  req.max_depth = opt.max_depth;
  req.mode = opt.mode;
  req.threads = opt.threads;
  req.leaf_budget = opt.leaf_budget;
  const SternBrocotInterval unit[1] = {SternBrocotInterval::unit()};
  auto res = integrate_dF(Exp2Moments{}, std::span<const SternBrocotInterval>(unit),
                          {target_width / 2, target_width / 2}, req);
  for (auto& v : res.values) v = ldexp(v, 1);
  return res;
}

/// int_0^1 2^x d?(x) = m(log 2), to absolute width target.
inline Enclosure exp2_mean(double target_width, const MomentOptions& opt = {}) {
  QuadratureRequest req;
  req.max_depth = opt.max_depth;
  req.mode = opt.mode;
  req.threads = opt.threads;
  req.leaf_budget = opt.leaf_budget;
  req.domain = SternBrocotInterval::unit();
  req.target_width = target_width / 2;
  const IntegrandDescriptor f{[](const Rational& x) { return Exp2Moments{}.eval(x)[0]; }};
  return ldexp(integrate_dF(f, req).value(), 1);
}

namespace detail {

/// Integration by parts with H(u) = int_0^u 2^t dt and 1 - F = 1 - ?/2 on [0, 1]:
///   c0 = int_0^1 Psi = H(1)/2 + (1/2) int_0^1 H d? = I / (2 log 2),  I = int 2^x d?.
inline Enclosure c0_from_exp2_mean(const Enclosure& I) { return I / (Enclosure::exact(2.0) * constants::log2()); }

/// Same with H(u) = int_0^u t 2^t dt = 2^u (u/c - 1/c^2) + 1/c^2, c = log 2:
///   c1 = H(1)/2 + (1/2) (J/c - I/c^2 + 1/c^2),  J = int x 2^x d?.
inline Enclosure c1_from_exp2_moments(const Enclosure& I, const Enclosure& J) {
  const Enclosure c = constants::log2();
  const Enclosure c2 = c * c;
  const Enclosure one = Enclosure::exact(1.0);
  const Enclosure H1 = Enclosure::exact(2.0) * (one / c - one / c2) + one / c2;
  const Enclosure half = Enclosure::exact(0.5);
  return half * H1 + half * (J / c - I / c2 + one / c2);
}

}  // namespace detail

/// c0 = int_0^1 Psi(x) dx, to absolute width target_width.
inline Enclosure c0(double target_width, const MomentOptions& opt = {}) {
  // c0 = I / (2 log 2); the quotient shrinks I's width by 2 log 2 > 1.38.
  return detail::c0_from_exp2_mean(exp2_mean(target_width * 1.38, opt));
}

/// c1 = int_0^1 x Psi(x) dx, to absolute width target_width.
inline Enclosure c1(double target_width, const MomentOptions& opt = {}) {
  // Width of c1 is (w_J / c + w_I / c^2) / 2 <= 1.77 max(w_I, w_J).
  const auto r = exp2_moments(target_width / 1.8, opt);
  return detail::c1_from_exp2_moments(r.values[0], r.values[1]);
}

/// Certified bracket of the tail int_N^inf x^L dF(x) for integer N >= 1.
///
/// Integration by parts gives N^L (1 - F(N)) + L int_N^inf x^(L-1) (1 - F(x)) dx
/// with 1 - F(N) = 2^-N exactly and 0 <= 1 - F(x) <= 2^-floor(x) <= 2^(1-x), and
///   int_N^inf x^(L-1) 2^-x dx = Gamma(L, N c) / c^L
///                             = (L-1)! / c^L * sum_{k<L} e^-y y^k / k!,  y = N c.
inline Enclosure moment_M_tail(unsigned L, unsigned N) {
  const Enclosure c = constants::log2();
  const Enclosure n = Enclosure::exact(static_cast<double>(N));
  const Enclosure boundary = exp(Enclosure::exact(static_cast<double>(L)) * log(n) - n * c);
  if (L == 0) return {0.0, boundary.hi};
  const Enclosure y = n * c;
  Enclosure poisson = exp(-y);
  Enclosure sum = poisson;
  Enclosure scale = Enclosure::exact(1.0) / c;  // (L-1)! / c^L
  for (unsigned k = 1; k < L; ++k) {
    poisson = poisson * y / Enclosure::exact(static_cast<double>(k));
    sum += poisson;
    scale = scale * Enclosure::exact(static_cast<double>(k)) / c;
  }
  const Enclosure integral_bound = Enclosure::exact(2.0 * L) * scale * sum;
  return {std::max(0.0, boundary.lo), (boundary + integral_bound).hi};
}

/// M_L = int_0^inf x^L dF(x): tree quadrature over [0, N] plus the certified tail.
inline MomentRecord moment_M(unsigned L, unsigned N, double target_width, const MomentOptions& opt = {}) {
  if (N < 1) throw std::invalid_argument("moment_M: cutoff must be >= 1");
  MomentRecord rec;
  rec.kind = "M";
  rec.L = static_cast<int>(L);
  rec.cutoff = static_cast<int>(N);
  rec.target_width = target_width;
  rec.mode = to_string(opt.mode);
  rec.max_depth = opt.max_depth;
  if (L == 0) {
    rec.value = Enclosure::exact(1.0);
    return rec;
  }
  const Enclosure tail = moment_M_tail(L, N);
  std::vector<SternBrocotInterval> domains;
  for (unsigned k = 0; k < N; ++k)
    domains.push_back(sb_interval(Rational(k), Rational(k + 1)));
  QuadratureRequest req;
  req.max_depth = opt.max_depth;
  req.mode = opt.mode;
  req.threads = opt.threads;
  req.leaf_budget = opt.leaf_budget;
  const double body_target = std::max(target_width - tail.width(), target_width * 1e-3);
  const auto body = integrate_dF(PowerBatch<1>({L}), std::span<const SternBrocotInterval>(domains),
                                 std::array<double, 1>{body_target}, req);
  rec.value = body.value() + tail;
  rec.leaves = body.leaves;
  rec.wall_time = body.seconds;
  rec.converged = rec.value.width() <= target_width;
  return rec;
}

}  // namespace minkowski
