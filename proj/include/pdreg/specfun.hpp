#pragma once

// Bessel J0/J1, Struve H0/H1, the Lambda combinations built from them, the
// standard normal CDF and the generalized-Bessel integral used by the
// Gaussian-kernel isotropic estimator.
//
// Accuracy (absolute): J within ~1e-15 everywhere; H within ~1e-13 for
// x <= 50 and improving beyond; see the band constants below.

#include "pdreg/errors.hpp"
#include "pdreg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pdreg::specfun {

namespace detail {

inline void require_finite(double x, const char* fn)
{
  if (!std::isfinite(x))
    throw domain_error(std::string(fn) + ": non-finite argument");
}

inline void require_order01(int order, const char* fn)
{
  if (order != 0 && order != 1)
    throw domain_error(std::string(fn) + ": only orders 0 and 1 are supported");
}

// Power series is used up to this argument; the largest term is ~e^x/(2 pi x)
// so long double keeps ~1e-16 absolute accuracy.
inline constexpr double series_limit = 12.0;
// Hankel asymptotics: smallest term ~e^{-2x}, negligible from here on.
inline constexpr double bessel_asymptotic_limit = 25.0;
// Struve-minus-Neumann asymptotics: smallest term ~e^{-x}.
inline constexpr double struve_asymptotic_limit = 30.0;

inline double bessel_series(int order, double x)
{
  const long double q = -static_cast<long double>(x) * x / 4.0L;
  long double term = order == 0 ? 1.0L : static_cast<long double>(x) / 2.0L;
  long double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * (k + order));
    sum += term;
    if (std::fabs(static_cast<double>(term)) < 1e-22 && k > x)
      break;
  }
  return static_cast<double>(sum);
}

// Miller's backward recurrence normalised with J0 + 2 sum J_2k = 1; x > 0.
inline void bessel_miller(double x, double& j0, double& j1)
{
  const int start = 2 * static_cast<int>((x + 15.0 * std::cbrt(x) + 24.0) / 2.0);
  const long double inv = 1.0L / x;
  long double above = 0.0L;    // J_{n+1}
  long double cur = 1e-30L;    // J_n, arbitrary scale
  long double norm = 2.0L * cur;
  for (int n = start; n > 0; --n) {
    const long double below = 2.0L * n * inv * cur - above;
    above = cur;
    cur = below;
    if ((n - 1) % 2 == 0 && n - 1 > 0)
      norm += 2.0L * cur;
    if (std::fabs(static_cast<double>(cur)) > 1e250) {
      cur *= 1e-250L;
      above *= 1e-250L;
      norm *= 1e-250L;
    }
  }
  norm += cur;
  j0 = static_cast<double>(cur / norm);
  j1 = static_cast<double>(above / norm);
}

// P and Q of the Hankel expansion J = sqrt(2/(pi x)) (P cos chi - Q sin chi).
inline void hankel_pq(int order, double x, double& p, double& q)
{
  const double mu = 4.0 * order * order;
  long double term = 1.0L;
  long double ps = 1.0L, qs = 0.0L;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (8.0L * k * x);
    const double mag = std::fabs(static_cast<double>(term));
    if (mag > last)
      break;  // asymptotic series started diverging
    last = mag;
    // t_k contributes to P for even k and to Q for odd k, alternating in pairs
    const int sign = ((k / 2) % 2 == 0) ? 1 : -1;
    if (k % 2 == 0)
      ps += sign * term;
    else
      qs += sign * term;
    if (mag < 1e-20)
      break;
  }
  p = static_cast<double>(ps);
  q = static_cast<double>(qs);
}

// cos and sin of chi = x - (2 order + 1) pi / 4 without forming chi.
inline void hankel_phase(int order, double x, double& c, double& s)
{
  const double cx = std::cos(x), sx = std::sin(x);
  constexpr double r2 = std::numbers::sqrt2 / 2.0;
  if (order == 0) {
    c = (cx + sx) * r2;
    s = (sx - cx) * r2;
  } else {
    c = (sx - cx) * r2;
    s = -(sx + cx) * r2;
  }
}

inline double bessel_asymptotic(int order, double x)
{
  double p, q, c, s;
  hankel_pq(order, x, p, q);
  hankel_phase(order, x, c, s);
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * c - q * s);
}

inline double neumann_asymptotic(int order, double x)
{
  double p, q, c, s;
  hankel_pq(order, x, p, q);
  hankel_phase(order, x, c, s);
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * s + q * c);
}

inline double bessel_nonneg(int order, double x)
{
  if (x <= series_limit)
    return bessel_series(order, x);
  if (x < bessel_asymptotic_limit) {
    double j0, j1;
    bessel_miller(x, j0, j1);
    return order == 0 ? j0 : j1;
  }
  return bessel_asymptotic(order, x);
}

inline double struve_series(int order, double x)
{
  const long double half = static_cast<long double>(x) / 2.0L;
  const long double q = -half * half;
  const long double pi = std::numbers::pi_v<long double>;
  // leading terms (x/2)^{nu+1} / (Gamma(3/2) Gamma(nu + 3/2))
  long double term = order == 0 ? 2.0L * x / pi : 2.0L * x * x / (3.0L * pi);
  long double sum = term;
  for (int k = 0; k < 300; ++k) {
    const long double a = k + 1.5L;
    const long double b = k + 1.5L + order;
    term *= q / (a * b);
    sum += term;
    if (std::fabs(static_cast<double>(term)) < 1e-22 && k > x)
      break;
  }
  return static_cast<double>(sum);
}

// H0(x) = (2/pi) int_0^{pi/2} sin(x cos t) dt
// H1(x) = (2x/pi) int_0^{pi/2} sin^2 t sin(x cos t) dt
inline double struve_integral(int order, double x)
{
  static const GaussLegendreTable table = make_gauss_legendre(64);
  const double half_pi = std::numbers::pi / 2.0;
  double v;
  if (order == 0) {
    v = integrate_gauss_legendre([x](double t) { return std::sin(x * std::cos(t)); },
                                 0.0, half_pi, table);
  } else {
    v = x * integrate_gauss_legendre(
              [x](double t) {
                const double s = std::sin(t);
                return s * s * std::sin(x * std::cos(t));
              },
              0.0, half_pi, table);
  }
  return 2.0 / std::numbers::pi * v;
}

// H_nu(x) - Y_nu(x) ~ (2/pi) * sum, truncated at its smallest term.
inline double struve_asymptotic(int order, double x)
{
  const double inv2 = 1.0 / (x * x);
  double sum, term;
  if (order == 0) {
    term = 1.0 / x;
    sum = term;
    for (int k = 1; k < 200; ++k) {
      const double next = -term * (2.0 * k - 1.0) * (2.0 * k - 1.0) * inv2;
      if (std::fabs(next) > std::fabs(term))
        break;
      term = next;
      sum += term;
      if (std::fabs(term) < 1e-20)
        break;
    }
  } else {
    // 1 + sum_{k>=1} (-1)^{k+1} ((2k-1)!!)^2 / ((2k-1) x^{2k})
    sum = 1.0;
    double df2 = 1.0;  // ((2k-1)!!)^2
    term = 1.0;
    for (int k = 1; k < 200; ++k) {
      const double odd = 2.0 * k - 1.0;
      df2 *= odd * odd;
      double next = df2 / odd * std::pow(inv2, k);
      if (k % 2 == 0)
        next = -next;
      if (std::fabs(next) > std::fabs(term))
        break;
      term = next;
      sum += term;
      if (std::fabs(term) < 1e-20)
        break;
    }
  }
  return neumann_asymptotic(order, x) + 2.0 / std::numbers::pi * sum;
}

} // namespace detail

/// Bessel function of the first kind, J0 or J1.
inline double bessel_j(int order, double x)
{
  detail::require_finite(x, "bessel_j");
  detail::require_order01(order, "bessel_j");
  const double v = detail::bessel_nonneg(order, std::fabs(x));
  return (order == 1 && x < 0.0) ? -v : v;
}

/// Struve function H0 or H1 for x >= 0.
inline double struve_h(int order, double x)
{
  detail::require_finite(x, "struve_h");
  detail::require_order01(order, "struve_h");
  if (x < 0.0)
    throw domain_error("struve_h: negative argument");
  if (x <= detail::series_limit)
    return detail::struve_series(order, x);
  if (x < detail::struve_asymptotic_limit)
    return detail::struve_integral(order, x);
  return detail::struve_asymptotic(order, x);
}

/// Lambda_1(x) = x J0 + (pi x / 2)(J1 H0 - J0 H1), the antiderivative of J0
/// vanishing at 0; Lambda_0 = Lambda_1 - x J0. Both are odd in x.
inline double lambda(int order, double x)
{
  detail::require_finite(x, "lambda");
  detail::require_order01(order, "lambda");
  if (x < 0.0)
    return -lambda(order, -x);
  const double j0 = bessel_j(0, x);
  const double j1 = bessel_j(1, x);
  const double h0 = struve_h(0, x);
  const double h1 = struve_h(1, x);
  const double mixed = std::numbers::pi * x / 2.0 * (j1 * h0 - j0 * h1);
  return order == 1 ? x * j0 + mixed : mixed;
}

/// Standard normal distribution function.
inline double norm_cdf(double x)
{
  detail::require_finite(x, "norm_cdf");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Phi(b) - Phi(a) without cancellation in either tail.
inline double norm_cdf_diff(double a, double b)
{
  detail::require_finite(a, "norm_cdf_diff");
  detail::require_finite(b, "norm_cdf_diff");
  constexpr double s = std::numbers::sqrt2;
  if (a > 1.0 && b > 1.0)
    return 0.5 * (std::erfc(a / s) - std::erfc(b / s));
  if (a < -1.0 && b < -1.0)
    return 0.5 * (std::erfc(-b / s) - std::erfc(-a / s));
  return 0.5 * (std::erf(b / s) - std::erf(a / s));
}

/// Node count for the trapezoid rule on the pi-periodic integrand
/// exp(a cos 2p) cos(b sin p): the Fourier content is ~|b| + O(b^{1/3}) from
/// the cosine and ~18 sqrt(a) from the exponential.
inline int gen_bessel_nodes(double a, double b)
{
  const double ab = std::fabs(b);
  const double need = ab + 8.0 * std::cbrt(ab) + 18.0 * std::sqrt(std::fabs(a)) + 20.0;
  return static_cast<int>(std::ceil(need / 2.0)) + 2;
}

namespace detail {

// (1/pi) int_0^pi exp(-2a sin^2 p) cos(b sin p) dp by the symmetric
// trapezoid rule with n nodes per period.
inline double gen_bessel_scaled_trapezoid(double a, double b, int n)
{
  double sum = 1.0;  // p = 0
  const int half = (n - 1) / 2;
  for (int k = 1; k <= half; ++k) {
    const double s = std::sin(std::numbers::pi * k / n);
    sum += 2.0 * std::exp(-2.0 * a * s * s) * std::cos(b * s);
  }
  if (n % 2 == 0)
    sum += std::exp(-2.0 * a) * std::cos(b);
  return sum / n;
}

} // namespace detail

/// (1/pi) int_0^pi exp(a cos 2p) cos(b sin p) dp.
inline double gen_bessel_integral(double a, double b,
                                  const QuadratureRule& rule = QuadratureRule::periodic_trapezoid())
{
  detail::require_finite(a, "gen_bessel_integral");
  detail::require_finite(b, "gen_bessel_integral");
  rule.validate();
  if (rule.kind == QuadratureRule::Kind::periodic_trapezoid) {
    const int n = std::max(rule.node_count, gen_bessel_nodes(a, b));
    return std::exp(a) * detail::gen_bessel_scaled_trapezoid(a, b, n);
  }
  auto f = [a, b](double p) { return std::exp(a * std::cos(2.0 * p)) * std::cos(b * std::sin(p)); };
  return integrate(f, 0.0, std::numbers::pi, rule) / std::numbers::pi;
}

/// exp(-a) * gen_bessel_integral(a, b), evaluated without overflow for large a.
inline double gen_bessel_integral_scaled(double a, double b,
                                         const QuadratureRule& rule = QuadratureRule::periodic_trapezoid())
{
  detail::require_finite(a, "gen_bessel_integral_scaled");
  detail::require_finite(b, "gen_bessel_integral_scaled");
  rule.validate();
  if (rule.kind == QuadratureRule::Kind::periodic_trapezoid)
    return detail::gen_bessel_scaled_trapezoid(a, b, std::max(rule.node_count, gen_bessel_nodes(a, b)));
  auto f = [a, b](double p) {
    const double s = std::sin(p);
    return std::exp(-2.0 * a * s * s) * std::cos(b * s);
  };
  return integrate(f, 0.0, std::numbers::pi, rule) / std::numbers::pi;
}

/// Largest a for which gen_bessel_series is used.
inline constexpr double gen_bessel_series_limit = 4.0;

/// exp(-a) * gen_bessel_integral(a, b) for 0 <= a <= gen_bessel_series_limit,
/// from exp(-a) [I_0(a) J_0(b) + 2 sum_k I_k(a) J_2k(b)]. Both Bessel
/// sequences come from backward recurrence normalized by
/// I_0 + 2 sum I_k = exp(a) and J_0 + 2 sum J_2k = 1.
inline double gen_bessel_series(double a, double b)
{
  detail::require_finite(a, "gen_bessel_series");
  detail::require_finite(b, "gen_bessel_series");
  if (a < 0.0 || a > gen_bessel_series_limit)
    throw domain_error("gen_bessel_series: a must lie in [0, gen_bessel_series_limit]");
  b = std::fabs(b);
  if (b < 1e-3)
    return detail::gen_bessel_scaled_trapezoid(a, b, gen_bessel_nodes(a, b));

  constexpr int kmax = 32;
  double ik[kmax + 1];
  // smallest K with (a/2)^K / K! below 1e-18, a bound on exp(-a) I_K(a)
  int K = 0;
  for (double t = 1.0; K < kmax && t > 1e-18; t *= 0.5 * a / (K + 1))
    ++K;
  if (a == 0.0)
    K = 0;
  if (K == 0) {
    ik[0] = 1.0;
  } else {
    // I_{k-1} = (2k / a) I_k + I_{k+1}, started well above K
    const int start = K + 8;
    double up = 0.0, cur = 1e-280, norm = 0.0;
    for (int k = start; k >= 1; --k) {
      const double down = 2.0 * k / a * cur + up;
      up = cur;
      cur = down;
      if (k - 1 <= K)
        ik[k - 1] = cur;
      norm += 2.0 * up;
      if (std::fabs(cur) > 1e250) {
        cur *= 1e-250;
        up *= 1e-250;
        norm *= 1e-250;
        for (int j = k - 1; j <= K; ++j)
          ik[j] *= 1e-250;
      }
    }
    norm += cur;
    for (int k = 0; k <= K; ++k)
      ik[k] /= norm;
  }

  // J_{n-1} = (2n / b) J_n - J_{n+1}, started at an even order above max(2K, b)
  const double top = std::max(2.0 * K, b);
  int start = static_cast<int>(top + 12.0 + std::sqrt(20.0 * top));
  start += start % 2;
  const double two_over_b = 2.0 / b;
  double up = 0.0, cur = 1e-280, norm = 0.0, acc = 0.0;
  for (int n = start; n >= 1; --n) {
    const double down = n * two_over_b * cur - up;
    up = cur;
    cur = down;
    const int order = n - 1;
    if (order % 2 == 0) {
      if (order > 0)
        norm += 2.0 * cur;
      else
        norm += cur;
      const int k = order / 2;
      if (k <= K)
        acc += (k == 0 ? 1.0 : 2.0) * ik[k] * cur;
    }
    if (std::fabs(cur) > 1e250) {
      cur *= 1e-250;
      up *= 1e-250;
      norm *= 1e-250;
      acc *= 1e-250;
    }
  }
  return acc / norm;
}

} // namespace pdreg::specfun
