#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "minkowski/dyadic.hpp"
#include "minkowski/question_mark.hpp"
#include "minkowski/stern_brocot.hpp"

using namespace minkowski;

namespace {

DyadicRational dy(long long num, std::uint64_t exponent) { return DyadicRational(BigInt(num), exponent); }

}  // namespace

TEST(Dyadic, NormalisesAndCompares) {
  EXPECT_EQ(dy(4, 3), dy(1, 1));
  EXPECT_EQ(dy(-6, 2).str(), "-3/2");
  EXPECT_LT(dy(1, 3), dy(1, 2));
  EXPECT_EQ(dy(3, 2) + dy(1, 2), DyadicRational(1));
  EXPECT_EQ(dy(1, 2) - dy(3, 2), dy(-1, 1));
  EXPECT_EQ(ldexp(dy(3, 4), 2), dy(3, 2));
  EXPECT_EQ(ldexp(dy(3, 0), 3), DyadicRational(24));
  EXPECT_EQ(DyadicRational::pow2_neg(70).str(), "1/2^70");
}

TEST(Dyadic, EnclosureContainsValue) {
  EXPECT_TRUE(dy(3, 2).to_enclosure().contains(0.75));
  EXPECT_TRUE(dy(-3, 2).to_enclosure().contains(-0.75));
  // 1 - 2^-80 needs more than 53 bits.
  const auto near_one = DyadicRational(1) - DyadicRational::pow2_neg(80);
  const auto e = near_one.to_enclosure();
  EXPECT_LE(e.lo, 1.0);
  EXPECT_GE(e.hi, 1.0 - 0x1p-53);
  EXPECT_LE(e.width(), 0x1p-51);
  EXPECT_GE(DyadicRational::pow2_neg(2000).to_enclosure().hi, 0.0);
}

TEST(QuestionMark, ExactValues) {
  EXPECT_EQ(qmark_exact(Rational(1, 2)), dy(1, 1));
  EXPECT_EQ(qmark_exact(Rational(1, 3)), dy(1, 2));
  EXPECT_EQ(qmark_exact(Rational(2, 3)), dy(3, 2));
  EXPECT_EQ(qmark_exact(Rational(2, 5)), dy(3, 3));
  EXPECT_EQ(qmark_exact(Rational(0)), DyadicRational(0));
  EXPECT_EQ(qmark_exact(Rational(1)), DyadicRational(1));
  EXPECT_EQ(qmark_exact(Rational(1, 1000)), DyadicRational::pow2_neg(999));
  EXPECT_EQ(qmark_exact(Rational(2, 3)).str(), "3/4");
}

TEST(QuestionMark, DomainErrors) {
  EXPECT_THROW(qmark_exact(Rational(3, 2)), std::domain_error);
  EXPECT_THROW(qmark_exact(Rational::infinity()), std::domain_error);
  EXPECT_EQ(F_endpoint(Rational::infinity()), DyadicRational(1));
}

TEST(QuestionMark, FOnTheHalfLine) {
  EXPECT_EQ(F_exact(Rational(1)), dy(1, 1));
  EXPECT_EQ(F_exact(Rational(2)), dy(3, 2));
  EXPECT_EQ(F_exact(Rational(5, 2)), DyadicRational(1) - dy(1, 2) + dy(1, 4));
}

TEST(QuestionMark, MonotoneOnSortedRationals) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> d(1, 5000);
  std::vector<Rational> xs;
  for (int i = 0; i < 2000; ++i) {
    const auto q = d(rng);
    xs.emplace_back(d(rng) % (q + 1), q);
  }
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] == xs[i - 1]) continue;
    EXPECT_LT(qmark_exact(xs[i - 1]), qmark_exact(xs[i]));
  }
}

TEST(QuestionMark, FunctionalEquationAndReflection) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> d(0, 10000), q(1, 10000);
  for (int i = 0; i < 10000; ++i) {
    const auto p = d(rng);
    const Rational x(p, q(rng));
    const auto res = verify_distr(x);
    ASSERT_TRUE(res.is_zero()) << x;
  }
}

TEST(QuestionMark, IntervalMeasureIsDyadic) {
  std::mt19937_64 rng(9);
  std::bernoulli_distribution side;
  for (int i = 0; i < 500; ++i) {
    auto iv = SternBrocotInterval::whole_line();
    const int depth = static_cast<int>(rng() % 31);
    for (int k = 0; k < depth; ++k) {
      const auto [l, r] = sb_refine(iv);
      iv = side(rng) ? r : l;
    }
    EXPECT_EQ(F_endpoint(iv.right) - F_endpoint(iv.left), DyadicRational::pow2_neg(iv.depth));
  }
}

TEST(QuestionMark, LongExpansionsRespectResourceLimit) {
  // [0; 2^40 - 1] would need a 2^40-bit numerator.
  const Rational x(1, (std::uint64_t{1} << 40) - 1);
  EXPECT_THROW(F_exact(x), resource_error);
  EXPECT_TRUE(F_enclosure(x).contains(0.0));
}

TEST(QuestionMark, FastEnclosureContainsExact) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::uint64_t> d(1, 1'000'000);
  for (int i = 0; i < 3000; ++i) {
    const Rational x(d(rng), d(rng));
    const auto exact = F_exact(x).to_enclosure();
    const auto fast = F_enclosure(x);
    EXPECT_TRUE(fast.intersects(exact)) << x;
    EXPECT_LE(fast.width(), 1e-14);
  }
}

TEST(Psi, EndpointsAndBounds) {
  EXPECT_TRUE(psi_enclosure(Rational(0)).contains(1.0));
  EXPECT_TRUE(psi_enclosure(Rational(1)).contains(1.0));
  // Psi(1/2) = sqrt(2) (1 - 1/4).
  EXPECT_TRUE(psi_enclosure(Rational(1, 2)).contains(std::sqrt(2.0) * 0.75) ||
              psi_enclosure(Rational(1, 2)).width() < 1e-15);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::uint64_t> d(1, 1'000'000);
  double lo = 10, hi = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto q = d(rng);
    const auto v = psi_enclosure(Rational(d(rng) % q, q));
    lo = std::min(lo, v.lo);
    hi = std::max(hi, v.hi);
  }
  EXPECT_GT(lo, 0.9);
  EXPECT_LT(hi, 1.2);
}

TEST(Psi, Periodic) {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<std::uint64_t> d(1, 100000);
  for (int i = 0; i < 2000; ++i) {
    const auto q = d(rng);
    const Rational x(d(rng) % q, q);
    const Rational x1 = x + Rational(1);
    const auto a = psi(x, 1e-12), b = psi(x1, 1e-12);
    EXPECT_TRUE(a.intersects(b)) << x;
    // 2^(x+1) (1 - F(x+1)) = 2^x (1 - F(x)) exactly: (1 - F(x+1)) = (1 - F(x)) / 2.
    EXPECT_EQ(DyadicRational(1) - F_exact(x1), ldexp(DyadicRational(1) - F_exact(x), -1));
  }
}

TEST(Psi, PrecisionErrorBelowBinary64) {
  EXPECT_THROW(psi(Rational(1, 3), 1e-20), precision_error);
  EXPECT_NO_THROW(psi(Rational(1, 3), 1e-14));
}
