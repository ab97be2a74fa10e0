#pragma once

// Slow reference computations that share no code with the library.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

using big = boost::multiprecision::cpp_bin_float_50;

inline double bessel_j(int order, double x)
{
  return boost::math::cyl_bessel_j(order, x);
}

/// Power series H_nu(x) = sum (-1)^k (x/2)^(2k+nu+1) / (Gamma(k+3/2) Gamma(k+nu+3/2)) in 50 digits.
inline double struve_h(int nu, double xd)
{
  const big x = xd;
  const big half = x / 2;
  big term;
  // k = 0 term: (x/2)^(nu+1) / (Gamma(3/2) Gamma(nu + 3/2))
  const big g32 = boost::multiprecision::sqrt(boost::math::constants::pi<big>()) / 2;
  const big gnu = nu == 0 ? g32 : g32 * big(1.5);
  term = boost::multiprecision::pow(half, nu + 1) / (g32 * gnu);
  big sum = term;
  for (int k = 1; k < 400; ++k) {
    // ratio t_k / t_{k-1} = -(x/2)^2 / ((k + 1/2)(k + nu + 1/2))
    term *= -(half * half) / ((big(k) + big(0.5)) * (big(k + nu) + big(0.5)));
    sum += term;
    if (boost::multiprecision::abs(term) < big("1e-45") * (1 + boost::multiprecision::abs(sum)) && k > xd)
      break;
  }
  return static_cast<double>(sum);
}

/// Adaptive Gauss-Kronrod on [a, b] split into pieces of length at most `piece`.
inline double integrate(const std::function<double(double)>& f, double a, double b, double piece = 0.5,
                        double tol = 1e-13)
{
  if (b <= a)
    return 0.0;
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / piece)));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lo = a + (b - a) * i / n;
    const double hi = a + (b - a) * (i + 1) / n;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 12, tol);
  }
  return total;
}

/// Plain composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n)
{
  if (n % 2)
    ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline double kernel(int family, double z)
{
  // 0 uniform, 1 epanechnikov, 2 gaussian
  const double az = std::fabs(z);
  if (family == 0)
    return az <= 1.0 ? 0.5 : 0.0;
  if (family == 1)
    return az <= 1.0 ? 0.75 * (1.0 - z * z) : 0.0;
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// (1/m) sum_i int_0^inf w(r u) [K_h(u - v_i) + K_h(u + v_i)] du with
/// w = J_0 (isotropic, d = 2) or w(t) = exp(-t^2) (monotone).
inline double estimator(int family, bool monotone, double h, const std::vector<double>& v, double r)
{
  auto weight = [&](double u) {
    return monotone ? std::exp(-r * r * u * u) : bessel_j(0, r * u);
  };
  double total = 0.0;
  for (double vi : v) {
    const double reach = family == 2 ? 9.0 * h : h;
    const double lo = std::max(0.0, vi - reach);
    const double hi = vi + reach;
    // segment length tied to the oscillation period 2 pi / r
    const double piece = std::min(0.25, 1.0 / std::max(r, 1e-3));
    auto f = [&](double u) { return weight(u) * (kernel(family, (u - vi) / h) + kernel(family, (u + vi) / h)) / h; };
    // kinks of compact kernels sit at |v +- h|; split there
    std::vector<double> cuts{lo, hi};
    if (family != 2) {
      for (double c : {vi - h, vi + h, h - vi})
        if (c > lo && c < hi)
          cuts.push_back(c);
    }
    if (family == 2 && vi < reach)
      cuts.push_back(0.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      total += integrate(f, std::max(0.0, cuts[k]), cuts[k + 1], piece);
  }
  return total / static_cast<double>(v.size());
}

} // namespace oracle
