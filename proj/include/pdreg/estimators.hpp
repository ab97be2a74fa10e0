#pragma once

// Positive definite regression estimators built from reflected kernel
// surrogates of a spectral distribution:
//
//   general    f(x) = (1/m) sum_i cos(2 pi x.v_i) FT(K_H)(x)
//   isotropic  g(r) = (1/m) sum_i int_0^inf Omega_d(r u) [K_h(u - v_i) + K_h(u + v_i)] du
//   monotone   q(r) = (1/m) sum_i int_0^inf exp(-r^2 u^2) [K_h(u - v_i) + K_h(u + v_i)] du
//
// Because K is symmetric and both integrands are even in u, each reflected
// pair equals the full-line integral int_R w(r u) K_h(u - v_i) du. The closed
// forms below are written in that form.

#include "pdreg/errors.hpp"
#include "pdreg/kernels.hpp"
#include "pdreg/quadrature.hpp"
#include "pdreg/specfun.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pdreg {

enum class EstimatorKind
{
  general,
  isotropic,
  monotone
};

inline std::string_view to_string(EstimatorKind k)
{
  switch (k) {
  case EstimatorKind::general: return "general";
  case EstimatorKind::isotropic: return "isotropic";
  case EstimatorKind::monotone: return "monotone";
  }
  return "?";
}

inline EstimatorKind parse_estimator_kind(std::string_view s)
{
  if (s == "general")
    return EstimatorKind::general;
  if (s == "isotropic")
    return EstimatorKind::isotropic;
  if (s == "monotone")
    return EstimatorKind::monotone;
  throw config_error("unknown estimator kind '" + std::string(s) + "'");
}

inline bool is_radial(EstimatorKind k) { return k != EstimatorKind::general; }

struct EstimatorSpec
{
  EstimatorKind kind = EstimatorKind::isotropic;
  KernelSpec kernel;
  /// Input dimension d. Isotropic closed forms exist for d = 2 only.
  std::size_t dim = 2;
  /// Diagonal of the bandwidth matrix H (general kind). Empty means h^2 I.
  std::vector<double> bandwidth_diag;

  std::vector<double> bandwidth() const
  {
    if (!bandwidth_diag.empty())
      return bandwidth_diag;
    return std::vector<double>(dim, kernel.h * kernel.h);
  }

  void validate() const
  {
    kernel.validate();
    if (dim == 0)
      throw config_error("EstimatorSpec: dim must be >= 1");
    if (kind == EstimatorKind::general) {
      if (kernel.family != KernelFamily::gaussian)
        throw unsupported_configuration("general estimator requires the gaussian kernel");
      if (!bandwidth_diag.empty()) {
        if (bandwidth_diag.size() != dim)
          throw config_error("EstimatorSpec: bandwidth matrix diagonal must have dim entries");
        for (double hv : bandwidth_diag)
          if (!(hv > 0.0) || !std::isfinite(hv))
            throw config_error("EstimatorSpec: bandwidth matrix must be positive definite");
      }
    } else if (!bandwidth_diag.empty()) {
      throw config_error("EstimatorSpec: bandwidth matrix applies to the general kind only");
    }
  }
};

/// A fitted estimator: spec, merged pseudo data and variance scale sigma^2.
struct FittedEstimator
{
  EstimatorSpec spec;
  PseudoDataset pseudo;
  double sigma2 = 1.0;

  void validate() const
  {
    spec.validate();
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
      throw config_error("FittedEstimator: sigma2 must be finite and > 0");
    pseudo.validate(is_radial(spec.kind));
    const std::size_t want = spec.kind == EstimatorKind::general ? spec.dim : 1;
    if (pseudo.dim != want)
      throw config_error("FittedEstimator: pseudo data dimension does not match the estimator");
  }
};

// ---------------------------------------------------------------------------
// Per-pseudo-value contributions (r > 0), normalised so that each tends to 1
// as r -> 0.

namespace terms {

inline double omega2(double x) { return specfun::bessel_j(0, x); }

// 32+ node Gauss-Legendre on the compact support [v - h, v + h]. The
// integrand is analytic there, so this is exact to rounding whenever the
// closed form would lose digits to cancellation.
template <class W>
double compact_full_line(KernelFamily f, double h, double v, double r, const W& w)
{
  const int n = 32 + static_cast<int>(std::ceil(4.0 * r * h));
  thread_local std::map<int, specfun::GaussLegendreTable> cache;
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, specfun::make_gauss_legendre(n)).first;
  const auto& table = it->second;
  return specfun::integrate_gauss_legendre(
    [&](double u) { return w(u) * kernel_unit_density(f, (u - v) / h) / h; }, v - h, v + h, table);
}

// Cancellation ratio of the Epanechnikov closed forms.
inline double epanechnikov_conditioning(double h, double v, double r)
{
  const double rh = r * h;
  return (1.0 + v * v / (h * h)) * std::max(1.0, 1.0 / (rh * rh));
}

inline constexpr double epanechnikov_conditioning_limit = 1e3;

inline double isotropic_uniform(double h, double v, double r)
{
  return (specfun::lambda(1, r * (v + h)) - specfun::lambda(1, r * (v - h))) / (2.0 * h * r);
}

inline double isotropic_epanechnikov(double h, double v, double r)
{
  const double hi = r * (v + h), lo = r * (v - h);
  const double c = 1.0 - v * v / (h * h);
  const double d_l1 = specfun::lambda(1, hi) - specfun::lambda(1, lo);
  const double d_j1 = specfun::bessel_j(1, hi) - specfun::bessel_j(1, lo);
  const double d_l0 = specfun::lambda(0, hi) - specfun::lambda(0, lo);
  return 3.0 / (4.0 * h * r) * (c * d_l1 - c * d_j1 + d_l0 / (r * r * h * h));
}

inline double isotropic_gaussian(double h, double v, double r)
{
  const double a = 0.25 * h * h * r * r;
  if (a <= specfun::gen_bessel_series_limit)
    return specfun::gen_bessel_series(a, r * v);
  return specfun::gen_bessel_integral_scaled(a, r * v);
}

inline double monotone_uniform(double h, double v, double r)
{
  constexpr double s2 = std::numbers::sqrt2;
  return std::sqrt(std::numbers::pi) / (2.0 * h * r) *
         specfun::norm_cdf_diff(s2 * r * (v - h), s2 * r * (v + h));
}

inline double monotone_epanechnikov(double h, double v, double r)
{
  constexpr double s2 = std::numbers::sqrt2;
  const double r2h2 = r * r * h * h;
  const double mass = specfun::norm_cdf_diff(s2 * r * (v - h), s2 * r * (v + h));
  const double edge = (v + h) * std::exp(-r * r * (v - h) * (v - h)) -
                      (v - h) * std::exp(-r * r * (v + h) * (v + h));
  return 3.0 / (4.0 * h * r) *
         (std::sqrt(std::numbers::pi) * (1.0 - v * v / (h * h) - 1.0 / (2.0 * r2h2)) * mass +
          edge / (2.0 * r * h * h));
}

inline double monotone_gaussian(double h, double v, double r)
{
  const double a = r * r + 1.0 / (2.0 * h * h);
  const double c = v * v / (4.0 * h * h * h * h * a) - v * v / (2.0 * h * h);
  return std::exp(c) / (h * std::sqrt(2.0 * a));
}

inline double isotropic_closed(KernelFamily f, double h, double v, double r)
{
  switch (f) {
  case KernelFamily::uniform: return isotropic_uniform(h, v, r);
  case KernelFamily::epanechnikov: return isotropic_epanechnikov(h, v, r);
  case KernelFamily::gaussian: return isotropic_gaussian(h, v, r);
  }
  return 0.0;
}

inline double monotone_closed(KernelFamily f, double h, double v, double r)
{
  switch (f) {
  case KernelFamily::uniform: return monotone_uniform(h, v, r);
  case KernelFamily::epanechnikov: return monotone_epanechnikov(h, v, r);
  case KernelFamily::gaussian: return monotone_gaussian(h, v, r);
  }
  return 0.0;
}

// Below this radius every closed form is replaced by its second-order
// expansion around r = 0.
inline constexpr double small_r = 1e-8;

inline double isotropic(KernelFamily f, double h, double v, double r)
{
  if (r < small_r)
    return 1.0 - 0.25 * r * r * (v * v + h * h * kernel_second_moment(f));
  if (f == KernelFamily::epanechnikov &&
      epanechnikov_conditioning(h, v, r) > epanechnikov_conditioning_limit)
    return compact_full_line(f, h, v, r, [r](double u) { return omega2(r * u); });
  return isotropic_closed(f, h, v, r);
}

inline double monotone(KernelFamily f, double h, double v, double r)
{
  if (r < small_r)
    return 1.0 - r * r * (v * v + h * h * kernel_second_moment(f));
  if (f == KernelFamily::epanechnikov &&
      epanechnikov_conditioning(h, v, r) > epanechnikov_conditioning_limit)
    return compact_full_line(f, h, v, r, [r](double u) { return std::exp(-r * r * u * u); });
  return monotone_closed(f, h, v, r);
}

} // namespace terms

// ---------------------------------------------------------------------------

namespace detail {

inline void require_radius(double r, const char* fn)
{
  if (!std::isfinite(r) || r < 0.0)
    throw domain_error(std::string(fn) + ": r must be finite and >= 0");
}

inline void require_kind(const FittedEstimator& fit, EstimatorKind kind, const char* fn)
{
  if (fit.spec.kind != kind)
    throw config_error(std::string(fn) + ": estimator kind is " + std::string(to_string(fit.spec.kind)));
}

} // namespace detail

/// Closed-form isotropic estimator (d = 2) with unit variance, no small-r
/// guards; r > 0.
inline double isotropic_closed_form(const KernelSpec& kernel, const PseudoDataset& pseudo, double r)
{
  kernel.validate();
  if (!(r > 0.0) || !std::isfinite(r))
    throw domain_error("isotropic_closed_form: r must be finite and > 0");
  double sum = 0.0;
  for (double v : pseudo.values)
    sum += terms::isotropic_closed(kernel.family, kernel.h, v, r);
  return sum / static_cast<double>(pseudo.size());
}

/// Closed-form monotone estimator with unit variance, no guards; r > 0.
inline double monotone_closed_form(const KernelSpec& kernel, const PseudoDataset& pseudo, double r)
{
  kernel.validate();
  if (!(r > 0.0) || !std::isfinite(r))
    throw domain_error("monotone_closed_form: r must be finite and > 0");
  double sum = 0.0;
  for (double v : pseudo.values)
    sum += terms::monotone_closed(kernel.family, kernel.h, v, r);
  return sum / static_cast<double>(pseudo.size());
}

/// sigma^2 * g_m(r) for the isotropic estimator in d = 2.
inline double eval_isotropic(const FittedEstimator& fit, double r)
{
  detail::require_kind(fit, EstimatorKind::isotropic, "eval_isotropic");
  detail::require_radius(r, "eval_isotropic");
  if (fit.spec.dim != 2)
    throw unsupported_configuration("eval_isotropic: closed forms are implemented for d = 2 only");
  if (r == 0.0)
    return fit.sigma2;
  const auto& k = fit.spec.kernel;
  double sum = 0.0;
  for (double v : fit.pseudo.values)
    sum += terms::isotropic(k.family, k.h, v, r);
  return fit.sigma2 * sum / static_cast<double>(fit.pseudo.size());
}

/// sigma^2 * q_m(r) for the monotone estimator.
inline double eval_monotone(const FittedEstimator& fit, double r)
{
  detail::require_kind(fit, EstimatorKind::monotone, "eval_monotone");
  detail::require_radius(r, "eval_monotone");
  if (r == 0.0)
    return fit.sigma2;
  const auto& k = fit.spec.kernel;
  double sum = 0.0;
  for (double v : fit.pseudo.values)
    sum += terms::monotone(k.family, k.h, v, r);
  return fit.sigma2 * sum / static_cast<double>(fit.pseudo.size());
}

/// sigma^2 * f_m(x) for the general estimator with a Gaussian kernel and
/// diagonal bandwidth matrix: (1/m) sum cos(2 pi x.v_i) exp(-2 pi^2 x'Hx).
inline double eval_general(const FittedEstimator& fit, std::span<const double> x)
{
  detail::require_kind(fit, EstimatorKind::general, "eval_general");
  if (fit.spec.kernel.family != KernelFamily::gaussian)
    throw unsupported_configuration("eval_general: only the gaussian kernel has a closed-form Fourier transform here");
  const std::size_t d = fit.spec.dim;
  if (x.size() != d)
    throw config_error("eval_general: input dimension mismatch");
  const auto H = fit.spec.bandwidth();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double quad = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    if (!std::isfinite(x[c]))
      throw domain_error("eval_general: non-finite input");
    quad += H[c] * x[c] * x[c];
  }
  const double envelope = std::exp(-2.0 * std::numbers::pi * std::numbers::pi * quad);
  double sum = 0.0;
  const std::size_t m = fit.pseudo.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto v = fit.pseudo.point(i);
    double dot = 0.0;
    for (std::size_t c = 0; c < d; ++c)
      dot += x[c] * v[c];
    sum += std::cos(two_pi * dot);
  }
  return fit.sigma2 * envelope * sum / static_cast<double>(m);
}

/// Radial evaluation for any kind; the general estimator is evaluated along
/// the first coordinate axis.
inline double evaluate(const FittedEstimator& fit, double r)
{
  switch (fit.spec.kind) {
  case EstimatorKind::isotropic: return eval_isotropic(fit, r);
  case EstimatorKind::monotone: return eval_monotone(fit, r);
  case EstimatorKind::general: {
    std::vector<double> x(fit.spec.dim, 0.0);
    x[0] = r;
    return eval_general(fit, x);
  }
  }
  return 0.0;
}

/// Evaluation at a point x in R^d; radial kinds use |x|.
inline double evaluate_at(const FittedEstimator& fit, std::span<const double> x)
{
  if (fit.spec.kind == EstimatorKind::general)
    return eval_general(fit, x);
  double s = 0.0;
  for (double c : x)
    s += c * c;
  return evaluate(fit, std::sqrt(s));
}

/// Radial basis Omega_d of the isotropic representation.
inline double omega(std::size_t d, double x)
{
  if (d == 1)
    return std::cos(x);
  if (d == 2)
    return specfun::bessel_j(0, x);
  if (x == 0.0)
    return 1.0;
  const double nu = (static_cast<double>(d) - 2.0) / 2.0;
  return std::tgamma(d / 2.0) * std::pow(2.0 / std::fabs(x), nu) * std::cyl_bessel_j(nu, std::fabs(x));
}

/// Direct adaptive quadrature of the defining reflected integrals (unit
/// variance). Accepts any d for the isotropic kind.
inline double quadrature_oracle(const EstimatorSpec& spec, const PseudoDataset& pseudo, double r,
                                double tol = 1e-13)
{
  spec.kernel.validate();
  if (!(r > 0.0) || !std::isfinite(r))
    throw domain_error("quadrature_oracle: r must be finite and > 0");
  if (spec.kind == EstimatorKind::general)
    throw unsupported_configuration("quadrature_oracle: radial kinds only");
  pseudo.validate(true);

  const KernelFamily f = spec.kernel.family;
  const double h = spec.kernel.h;
  const std::size_t d = spec.dim;
  const bool iso = spec.kind == EstimatorKind::isotropic;
  auto weight = [&](double u) { return iso ? omega(d, r * u) : std::exp(-r * r * u * u); };
  auto gk = [&](auto&& fn, double a, double b) {
    return b > a ? specfun::adaptive_gauss_kronrod(fn, a, b, tol) : 0.0;
  };
  // Gaussian tails beyond 8.5 h carry < 1e-16 of the mass.
  const double reach = f == KernelFamily::gaussian ? 8.5 * h : h;

  double total = 0.0;
  for (double v : pseudo.values) {
    auto direct = [&](double u) { return weight(u) * kernel_unit_density(f, (u - v) / h) / h; };
    auto mirror = [&](double u) { return weight(u) * kernel_unit_density(f, (u + v) / h) / h; };
    const double lo = std::max(0.0, v - reach);
    const double hi = v + reach;
    // split at the mode (and the support edges for compact kernels)
    total += gk(direct, lo, std::max(lo, v)) + gk(direct, std::max(lo, v), hi);
    total += gk(mirror, 0.0, std::max(0.0, reach - v));
  }
  return total / static_cast<double>(pseudo.size());
}

/// Product-Gaussian surrogate density of general pseudo data with diagonal
/// bandwidth matrix H.
inline double general_surrogate_pdf(const PseudoDataset& pseudo, std::span<const double> bandwidth_diag,
                                    std::span<const double> x)
{
  const std::size_t d = pseudo.dim;
  double norm = 1.0;
  for (std::size_t c = 0; c < d; ++c)
    norm *= std::sqrt(2.0 * std::numbers::pi * bandwidth_diag[c]);
  double sum = 0.0;
  for (std::size_t i = 0; i < pseudo.size(); ++i) {
    const auto v = pseudo.point(i);
    double q = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double t = x[c] - v[c];
      q += t * t / bandwidth_diag[c];
    }
    sum += std::exp(-0.5 * q);
  }
  return sum / (norm * static_cast<double>(pseudo.size()));
}

} // namespace pdreg
