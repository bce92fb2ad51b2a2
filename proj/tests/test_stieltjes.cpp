#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "minkowski/stieltjes.hpp"

using namespace minkowski;

namespace {

MomentOptions threads(unsigned n) {
  MomentOptions opt;
  opt.threads = n;
  return opt;
}

QuadratureRequest request(SternBrocotInterval domain, double target, unsigned n = 2) {
  QuadratureRequest req;
  req.domain = domain;
  req.target_width = target;
  req.threads = n;
  return req;
}

// Independent bracket from a depth-24 Stern-Brocot Riemann-Stieltjes sum of
// 2^x (1 - F) and x 2^x (1 - F) with closed-form antiderivatives.
constexpr Enclosure kC0Oracle{1.0301995214, 1.0301996075};
constexpr Enclosure kC1Oracle{0.5006464691, 0.5006465171};

}  // namespace

TEST(Stieltjes, ConstantOneIsExact) {
  const IntegrandDescriptor one{[](const Rational&) { return Enclosure::exact(1.0); }};
  auto req = request(SternBrocotInterval::whole_line(), 1e-12);
  const auto r = integrate_dF(one, req);
  EXPECT_EQ(r.value(), Enclosure::exact(1.0));
  req.mode = QuadratureMode::uniform_depth;
  req.max_depth = 10;
  const auto u = integrate_dF(one, req);
  EXPECT_EQ(u.value(), Enclosure::exact(1.0));
  EXPECT_EQ(u.leaves, 1u << 10);
}

TEST(Stieltjes, FirstMomentIsOneHalf) {
  const auto r = moment_m(1, 1e-9, threads(2));
  EXPECT_TRUE(r.value.contains(0.5));
  EXPECT_LE(r.value.width(), 1e-9);
  EXPECT_TRUE(r.converged);
}

TEST(Stieltjes, SecondMomentMatchesTable) {
  const auto r = moment_m(2, 1e-9, threads(2));
  EXPECT_TRUE(r.value.intersects({0.2909264764, 0.2909264765}));
  EXPECT_LE(r.value.width(), 1e-9);
}

TEST(Stieltjes, UniformDepthShrinksAndContains) {
  MomentOptions opt = threads(2);
  opt.mode = QuadratureMode::uniform_depth;
  double previous = 1.0;
  for (int depth : {6, 10, 14, 18}) {
    opt.max_depth = depth;
    const auto r = moment_m_batch({2}, {1.0}, opt).front();
    EXPECT_TRUE(r.value.contains(0.29092647645)) << depth;
    EXPECT_LT(r.value.width(), previous);
    // A depth-d leaf has measure 2^-(d-1) on [0, 1] after doubling.
    EXPECT_LE(r.value.width(), std::ldexp(1.0, -(depth - 1)) + 1e-15);
    previous = r.value.width();
  }
}

TEST(Stieltjes, BitIdenticalAcrossThreadCounts) {
  const auto a = moment_m_batch({1, 2, 3, 7}, {1e-8, 1e-8, 1e-8, 1e-8}, threads(1));
  for (unsigned n : {2u, 3u, 8u}) {
    const auto b = moment_m_batch({1, 2, 3, 7}, {1e-8, 1e-8, 1e-8, 1e-8}, threads(n));
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].value, b[i].value) << n;
      EXPECT_EQ(a[i].leaves, b[i].leaves);
    }
  }
}

TEST(Stieltjes, BatchAgreesWithSingle) {
  const auto batch = moment_m_batch({3, 5}, {1e-8, 1e-8}, threads(2));
  EXPECT_TRUE(batch[0].value.intersects(moment_m(3, 1e-8, threads(2)).value));
  EXPECT_TRUE(batch[1].value.intersects(moment_m(5, 1e-8, threads(2)).value));
  EXPECT_EQ(moment_m(0, 1e-8).value, Enclosure::exact(1.0));
}

TEST(Stieltjes, PushforwardToUnitInterval) {
  // Y = X / (X + 1) under dF has law d?, so both sides are m_L.
  for (unsigned L : {1u, 2u, 4u}) {
    const auto lhs = integrate_dF(RatioPower(L), request(SternBrocotInterval::whole_line(), 1e-8));
    const auto rhs = moment_m(L, 1e-8, threads(2));
    EXPECT_TRUE(lhs.value().intersects(rhs.value)) << L;
  }
}

TEST(Stieltjes, DecreasingIntegrand) {
  // 1 / (1 + x) = 1 - Y with Y as above, so the integral is 1 - m_1 = 1/2.
  const IntegrandDescriptor f{[](const Rational& x) {
                                if (x.is_infinite()) return Enclosure::exact(0.0);
                                return Enclosure::exact(1.0) /
                                       Enclosure::exact(static_cast<double>(x.num() + x.den())) *
                                       Enclosure::exact(static_cast<double>(x.den()));
                              },
                              Monotonicity::decreasing()};
  const auto r = integrate_dF(f, request(SternBrocotInterval::whole_line(), 1e-9));
  EXPECT_TRUE(r.value().contains(0.5));
  EXPECT_LE(r.value().width(), 1e-9);
}

TEST(Stieltjes, PiecewiseMatchesSplitDomains) {
  auto dist = [](const Rational& x) {
    return Enclosure::around(std::fabs(x.to_double() - 0.5), 2);
  };
  const IntegrandDescriptor vee{dist, Monotonicity::piecewise({Rational(1, 2)},
                                                              {Direction::decreasing, Direction::increasing})};
  const auto whole = integrate_dF(vee, request(SternBrocotInterval::unit(), 1e-9));
  const IntegrandDescriptor down{dist, Monotonicity::decreasing()};
  const IntegrandDescriptor up{dist, Monotonicity::increasing()};
  const auto left = integrate_dF(down, request(sb_interval(Rational(0), Rational(1, 2)), 5e-10));
  const auto right = integrate_dF(up, request(sb_interval(Rational(1, 2), Rational(1)), 5e-10));
  EXPECT_TRUE(whole.value().intersects(left.value() + right.value()));
  EXPECT_LE(whole.value().width(), 1e-9);
  // ?(1 - x) = 1 - ?(x): the two halves carry equal mass.
  EXPECT_TRUE(left.value().intersects(right.value()));
}

TEST(Stieltjes, MultipleDomainsSumMeasures) {
  const IntegrandDescriptor one{[](const Rational&) { return Enclosure::exact(1.0); }};
  std::vector<SternBrocotInterval> domains;
  for (unsigned k = 0; k < 5; ++k) domains.push_back(sb_interval(Rational(k), Rational(k + 1)));
  QuadratureRequest req;
  req.threads = 2;
  const auto r = integrate_dF(one, std::span<const SternBrocotInterval>(domains), std::array<double, 1>{1e-9}, req);
  EXPECT_EQ(r.value(), Enclosure::exact(1.0 - 1.0 / 32));
}

TEST(Stieltjes, RejectsBadRequests) {
  QuadratureRequest req;
  req.max_depth = 41;
  EXPECT_THROW(integrate_dF(PowerBatch<1>({2}), req), std::invalid_argument);
  EXPECT_THROW(PowerBatch<1>({2}).eval(Rational::infinity()), std::domain_error);
  EXPECT_THROW(Monotonicity::piecewise({Rational(1)}, {Direction::increasing}), std::invalid_argument);
  EXPECT_THROW(moment_M(2, 0, 1e-6), std::invalid_argument);
}

TEST(Stieltjes, LeafBudgetStopsWithoutConverging) {
  MomentOptions opt = threads(2);
  opt.leaf_budget = 5000;
  const auto r = moment_m(2, 1e-12, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(r.value.contains(0.29092647645));
}

TEST(Constants, ExpMeanIsTwiceLogTwoTimesC0) {
  const auto I = exp2_mean(1e-9, threads(2));
  EXPECT_LE(I.width(), 1e-9);
  EXPECT_TRUE(I.intersects(Enclosure::exact(2 * std::log(2.0)) * kC0Oracle));
  EXPECT_NEAR(I.mid(), 1.42816, 1e-5);
}

TEST(Constants, C0AndC1AgainstIndependentBracket) {
  const auto c0v = c0(1e-9, threads(2));
  EXPECT_LE(c0v.width(), 1e-9);
  EXPECT_TRUE(c0v.intersects(kC0Oracle));
  EXPECT_TRUE(c0v.intersects({1.030199563382, 1.030199563383}));
  const auto c1v = c1(1e-9, threads(2));
  EXPECT_LE(c1v.width(), 1e-9);
  EXPECT_TRUE(c1v.intersects(kC1Oracle));
}

TEST(MomentsOnHalfLine, TailBracket) {
  const auto t = moment_M_tail(2, 40);
  EXPECT_LE(t.lo, 1600 * std::ldexp(1.0, -40) + 1e-25);
  EXPECT_GE(t.lo, 1600 * std::ldexp(1.0, -40) * (1 - 1e-12));
  EXPECT_LT(t.hi, 1e-7);
  EXPECT_LT(moment_M_tail(2, 60).hi, t.hi);
  EXPECT_GE(moment_M_tail(0, 10).hi, std::ldexp(1.0, -10));
}

TEST(MomentsOnHalfLine, SecondMomentFromParts) {
  // M_2 = m_2 + 1 + 3 follows from the functional equation; 4.2909264764...
  const auto r = moment_M(2, 50, 1e-7, threads(2));
  EXPECT_TRUE(r.value.contains(4.29092647645));
  EXPECT_LE(r.value.width(), 1e-7);
  EXPECT_EQ(r.kind, "M");
  EXPECT_EQ(r.cutoff, 50);
}
