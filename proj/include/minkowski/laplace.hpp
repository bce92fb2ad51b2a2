#pragma once

/**
 * @file laplace.hpp
 * @brief Saddle-point data and the g/r decomposition behind the asymptotics of m_L.
 *
 * Integrating by parts with 1 - F(x) = 2^-x Psi(x),
 *
 *   m_L = L int_0^inf K(x) Psi(x) dx,   K(x) = e^f(x) / (x (x+1)),
 *   f(x) = L log(x/(x+1)) - c x,        c = log 2,
 *
 * and splitting Psi = c0 + (Psi - c0) gives m_L = c0 L g_L + L r_L. The saddle
 * x0 of f solves x0 (x0+1) = L/c. The leading term of m_L is
 * (4 pi^2 c)^(1/4) c0 L^(1/4) C^sqrt(L) with C = e^(-2 sqrt(c)).
 *
 * g_L and its segments are smooth integrals (Gauss-Kronrod). r_L integrates a
 * merely continuous Psi; it is computed as a periodic trapezoid sum over the
 * grid j/N (N <= 10^6) so Psi is evaluated at exact rationals. Its tolerance is
 * the difference between the last two grid levels, not a certified bound.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "minkowski/enclosure.hpp"
#include "minkowski/question_mark.hpp"
#include "minkowski/rational.hpp"

namespace minkowski {

namespace constants {

/// C = e^(-2 sqrt(log 2)).
inline Enclosure C() { return exp(Enclosure::exact(-2.0) * sqrt(log2())); }

/// (4 pi^2 log 2)^(1/4).
inline Enclosure fourth_root_4pi2log2() {
  const Enclosure pi = constants::pi();
  return pow(Enclosure::exact(4.0) * pi * pi * log2(), 0.25);
}

}  // namespace constants

struct SaddleData {
  double L = 0;
  double c = 0;
  double x0 = 0;
  double f_at_x0 = 0;
  double alpha = 0;
  double beta = 0;
  double delta = 0;
};

/// Saddle point and local coefficients; L may be any positive real.
inline SaddleData saddle(double L) {
  if (!(L > 0)) throw std::domain_error("saddle: L must be positive");
  SaddleData s;
  s.L = L;
  s.c = std::log(2.0);
  const double r = L / s.c;
  // (-1 + sqrt(1 + 4r)) / 2 without the cancellation.
  s.x0 = 2 * r / (1 + std::sqrt(1 + 4 * r));
  const double x = s.x0, x1 = s.x0 + 1;
  s.f_at_x0 = -L * std::log1p(1 / x) - s.c * x;
  s.alpha = L * (2 * x + 1) / (2 * x * x * x1 * x1);
  s.beta = L * (3 * x * x + 3 * x + 1) / (3 * x * x * x * x1 * x1 * x1);
  s.delta = std::pow(L, 2.0 / 7.0);
  return s;
}

/// f(x) = L log(x/(x+1)) - x log 2.
inline double f_eval(double L, double x) {
  if (!(x > 0)) throw std::domain_error("f_eval: x must be positive");
  return -L * std::log1p(1 / x) - std::log(2.0) * x;
}

/// K(x) = x^(L-1) 2^-x / (x+1)^(L+1), the kernel of g_L.
inline double kernel(double L, double x) {
  if (x < 0) throw std::domain_error("kernel: x must be non-negative");
  if (x == 0) return L == 1 ? 1.0 : 0.0;
  return std::exp(f_eval(L, x)) / (x * (x + 1));
}

struct DecompositionReport {
  double L = 0;
  double x0 = 0, delta = 0;
  double I1 = 0, I2 = 0, I3 = 0, I4 = 0;
  double g_L = 0;
  double r_L = 0;
  double m_L_reconstructed = 0;
  /// Kronrod error estimate summed over segments, and the grid-change estimate for r_L.
  double g_error = 0, r_error = 0;
  /// Final grid size used for r_L.
  long grid = 0;
  bool converged = true;
};

namespace detail {

/// Periodised kernel sum_{n >= 0} K(u + n), summed until the terms are negligible.
inline double periodic_kernel(double L, double u, double x0) {
  double sum = 0;
  for (int n = 0;; ++n) {
    const double term = kernel(L, u + n);
    sum += term;
    if (u + n > x0 + 2 && term <= 1e-18 * sum) break;
    if (n > 100000) break;
  }
  return sum;
}

}  // namespace detail

/**
 * g_L over the segments [0,1], [1, x0-d], [x0-d, x0+d], [x0+d, inf) with
 * d = L^(2/7) (segments clamped to stay ordered when x0 - d < 1), r_L on a
 * periodic grid, and the reconstruction c0 L g_L + L r_L.
 */
inline DecompositionReport g_r_split(int L, double quad_tol, const Enclosure& c0) {
  if (L < 1) throw std::domain_error("g_r_split: L must be >= 1");
  if (!(quad_tol > 0)) throw std::invalid_argument("g_r_split: tolerance must be positive");
  const double Ld = L;
  const SaddleData s = saddle(Ld);
  DecompositionReport rep;
  rep.L = Ld;
  rep.x0 = s.x0;
  rep.delta = s.delta;

  using boost::math::quadrature::gauss_kronrod;
  auto K = [&](double x) { return kernel(Ld, x); };
  constexpr unsigned kMaxDepth = 20;
  auto segment = [&](double a, double b) {
    if (!(b > a)) return 0.0;
    double err = 0;
    const double v = gauss_kronrod<double, 61>::integrate(K, a, b, kMaxDepth, quad_tol, &err);
    rep.g_error += err;
    if (err > quad_tol * std::max(std::fabs(v), std::numeric_limits<double>::min())) rep.converged = false;
    return v;
  };
  const double b1 = 1.0;
  const double b2 = std::max(b1, s.x0 - s.delta);
  const double b3 = std::max(b2, s.x0 + s.delta);
  rep.I1 = segment(0.0, b1);
  rep.I2 = segment(b1, b2);
  rep.I3 = segment(b2, b3);
  rep.I4 = segment(b3, std::numeric_limits<double>::infinity());
  rep.g_L = rep.I1 + rep.I2 + rep.I3 + rep.I4;

  // r_L = int_0^1 (Psi(u) - c0) Kper(u) du on grids j/N, N = 15625 * 2^k <= 10^6.
  // Psi(0) = Psi(1) = 1 and the endpoint weights are halved (trapezoid rule).
  const double c0_mid = c0.mid();
  double previous = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> psi_cache, kper_cache;
  for (long N = 15625; N <= 1000000; N *= 2) {
    // Reuse the coarser grid's samples at even indices.
    std::vector<double> psi(N + 1), kper(N + 1);
    for (long j = 0; j <= N; ++j) {
      if (j % 2 == 0 && !psi_cache.empty()) {
        psi[j] = psi_cache[j / 2];
        kper[j] = kper_cache[j / 2];
        continue;
      }
      psi[j] = psi_enclosure(Rational(static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(N))).mid();
      kper[j] = detail::periodic_kernel(Ld, static_cast<double>(j) / static_cast<double>(N), s.x0);
    }
    double full = 0, kernel_sum = 0;
    for (long j = 0; j <= N; ++j) {
      const double w = (j == 0 || j == N) ? 0.5 : 1.0;
      full += w * psi[j] * kper[j];
      kernel_sum += w * kper[j];
    }
    full /= static_cast<double>(N);
    kernel_sum /= static_cast<double>(N);
    // Subtract c0 against the same grid so the kernel's own quadrature error cancels.
    const double r = full - c0_mid * kernel_sum;
    rep.r_error = std::isnan(previous) ? std::fabs(r) : std::fabs(r - previous);
    previous = r;
    rep.r_L = r;
    rep.grid = N;
    psi_cache = std::move(psi);
    kper_cache = std::move(kper);
  }
  if (rep.r_error > quad_tol * std::max(std::fabs(rep.g_L), std::numeric_limits<double>::min()) * 100)
    rep.converged = false;
  rep.m_L_reconstructed = c0_mid * Ld * rep.g_L + Ld * rep.r_L;
  return rep;
}

/// (4 pi^2 log 2)^(1/4) c0.
inline Enclosure leading_coefficient(const Enclosure& c0) { return constants::fourth_root_4pi2log2() * c0; }

/// log of L^(1/4) C^sqrt(L) = (1/4) log L - 2 sqrt(L log 2).
inline Enclosure log_scale(double L) {
  if (!(L >= 1)) throw std::domain_error("log_scale: L must be >= 1");
  const Enclosure l = Enclosure::exact(L);
  return Enclosure::exact(0.25) * log(l) - Enclosure::exact(2.0) * sqrt(l * constants::log2());
}

/// Leading-order prediction (4 pi^2 log 2)^(1/4) c0 L^(1/4) C^sqrt(L), assembled in log space.
inline Enclosure predictor(double L, const Enclosure& c0) {
  return exp(log(leading_coefficient(c0)) + log_scale(L));
}

/// m*_L = m_L / (L^(1/4) C^sqrt(L)).
inline Enclosure mstar(double L, const Enclosure& mL) { return mL * exp(-log_scale(L)); }

}  // namespace minkowski
