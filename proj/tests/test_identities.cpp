#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "minkowski/identities.hpp"
#include "minkowski/stieltjes.hpp"

using namespace minkowski;

namespace {

constexpr int kOrders = 50;
constexpr double kWidth = 1e-8;
constexpr Enclosure kC0{1.030199563382, 1.030199563383};

// Certified m_0..m_50, computed once for the whole suite.
const MomentVector& certified() {
  static const MomentVector m = [] {
    std::vector<unsigned> Ls;
    for (unsigned L = 0; L <= kOrders; ++L) Ls.push_back(L);
    MomentOptions opt;
    opt.threads = 2;
    MomentVector out;
    for (const auto& rec : moment_m_batch(Ls, std::vector<double>(Ls.size(), kWidth), opt))
      out.values.push_back(rec.value);
    return out;
  }();
  return m;
}

MomentVector truncated(int L_max) {
  MomentVector v = certified();
  v.values.resize(static_cast<std::size_t>(L_max) + 1);
  return v;
}

}  // namespace

TEST(Binomial, Rows) {
  EXPECT_EQ(binomial_row(0), std::vector<BigInt>{1});
  EXPECT_EQ(binomial_row(4), (std::vector<BigInt>{1, 4, 6, 4, 1}));
  EXPECT_EQ(binomial_row(60)[30], BigInt("118264581564861424"));
  EXPECT_THROW(binomial_row(-1), std::invalid_argument);
}

TEST(Reflection, HandValues) {
  const MomentVector m{{Enclosure::exact(1.0), Enclosure::exact(0.5)}};
  EXPECT_EQ(reflect_residual(m, 0), Enclosure::exact(0.0));
  EXPECT_TRUE(reflect_residual(m, 1).contains(0.0));
  EXPECT_THROW(reflect_residual(m, 2), std::out_of_range);
}

TEST(Reflection, ExactInvolution) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> d(-1000, 1000);
  std::vector<BigRational> v;
  for (int i = 0; i <= 25; ++i) v.emplace_back(d(rng), 1 + std::abs(d(rng)));
  EXPECT_EQ(reflection_map_exact(reflection_map_exact(v)), v);
  // Midpoints of certified moments.
  std::vector<BigRational> mids;
  for (const auto& e : truncated(20).values) mids.emplace_back(e.mid());
  EXPECT_EQ(reflection_map_exact(reflection_map_exact(mids)), mids);
}

TEST(Reflection, CertifiedResidualsContainZero) {
  const auto m = truncated(20);
  for (int L = 0; L <= 20; ++L) {
    const auto r = reflect_residual(m, L);
    EXPECT_TRUE(r.contains(0.0)) << L;
    if (L == 10) {
      double w = 0;
      for (int s = 0; s <= 10; ++s) w = std::max(w, m[s].width());
      EXPECT_LE(r.width(), std::ldexp(1.0, 10) * w * 11);
    }
  }
  const auto image = reflection_map(m);
  for (int L = 0; L <= 20; ++L) EXPECT_TRUE(image[L].intersects(m[L]));
}

TEST(HalfLine, RecursionFromUnitMoments) {
  const auto M = M_from_m(truncated(20));
  EXPECT_EQ(M[0], Enclosure::exact(1.0));
  EXPECT_TRUE(M[1].contains(1.5));
  EXPECT_TRUE(M[2].contains(4.29092647645));
  for (int L = 1; L <= 20; ++L) EXPECT_GT(M[L].lo, M[L - 1].hi);
  for (int L = 5; L < 20; ++L) EXPECT_GT(M[L + 1].lo / M[L].hi, L / std::log(2.0) * 0.5) << L;
  EXPECT_THROW(M_from_m(M), std::invalid_argument);
}

TEST(HalfLine, AgreesWithQuadrature) {
  MomentOptions opt;
  opt.threads = 2;
  const auto M = M_from_m(truncated(2));
  const auto direct = moment_M(2, 50, 1e-7, opt);
  EXPECT_TRUE(M[2].intersects(direct.value));
}

TEST(HalfLine, RatioApproachesOne) {
  const auto M = M_from_m(truncated(20));
  const auto r5 = M_ratio(M, kC0, 5), r20 = M_ratio(M, kC0, 20);
  EXPECT_GE(r20.lo, 0.9);
  EXPECT_LE(r20.hi, 1.1);
  EXPECT_LT(std::fabs(r20.mid() - 1), std::fabs(r5.mid() - 1));
  for (int L = 0; L <= 20; ++L) EXPECT_GT(M_ratio(M, kC0, L).lo, 0);
  EXPECT_THROW(M_ratio(truncated(20), kC0, 5), std::invalid_argument);
}

TEST(Mgf, BoundaryValueAndDerivative) {
  const auto m = certified();
  const auto at0 = mgf_eval(0.0, kOrders, m);
  EXPECT_TRUE(at0.contains(1.0));
  const double h = 1e-5;
  const auto plus = mgf_eval(h, kOrders, m), minus = mgf_eval(-h, kOrders, m);
  const Enclosure slope = (plus - minus) / Enclosure::exact(2 * h);
  EXPECT_NEAR(slope.mid(), 0.5, 1e-4);
}

TEST(Mgf, MatchesExpMean) {
  // mgf(log 2) = int 2^x d?.
  MomentOptions opt;
  opt.threads = 2;
  const auto direct = exp2_mean(1e-8, opt);
  EXPECT_TRUE(mgf_eval(std::log(2.0), kOrders, certified()).intersects(direct));
}

TEST(Mgf, NegativeArgumentsIncreasing) {
  const auto m = certified();
  const auto at5 = mgf_eval(-5.0, kOrders, m);
  EXPECT_GT(at5.lo, 0.0);
  EXPECT_LT(at5.hi, 1.0);
  // e^(tx) increases with t for x >= 0.
  Enclosure previous = mgf_eval(-10.0, kOrders, m);
  EXPECT_GT(previous.lo, 0.0);
  for (double t = -8; t <= 0; t += 2) {
    const auto v = mgf_eval(t, kOrders, m);
    EXPECT_GT(v.lo, previous.hi) << t;
    previous = v;
  }
  EXPECT_THROW(mgf_eval(-10.5, kOrders, m), std::domain_error);
  EXPECT_THROW(mgf_eval(1.0, kOrders + 1, m), std::out_of_range);
}
