#pragma once

#include "pdreg/errors.hpp"
#include "pdreg/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pdreg {

enum class KernelFamily
{
  uniform,
  epanechnikov,
  gaussian
};

inline std::string_view to_string(KernelFamily f)
{
  switch (f) {
  case KernelFamily::uniform: return "uniform";
  case KernelFamily::epanechnikov: return "epanechnikov";
  case KernelFamily::gaussian: return "gaussian";
  }
  return "?";
}

inline KernelFamily parse_kernel_family(std::string_view s)
{
  if (s == "uniform")
    return KernelFamily::uniform;
  if (s == "epanechnikov")
    return KernelFamily::epanechnikov;
  if (s == "gaussian")
    return KernelFamily::gaussian;
  throw config_error("unknown kernel family '" + std::string(s) + "'");
}

/// A univariate smoothing kernel K together with its bandwidth h, so that
/// K_h(t) = K(t / h) / h.
struct KernelSpec
{
  KernelFamily family = KernelFamily::gaussian;
  double h = 1.0;

  void validate() const
  {
    if (!(h > 0.0) || !std::isfinite(h))
      throw config_error("KernelSpec: bandwidth h must be finite and > 0");
  }
};

/// Unit-bandwidth kernel density K(z).
inline double kernel_unit_density(KernelFamily f, double z)
{
  const double az = std::fabs(z);
  switch (f) {
  case KernelFamily::uniform: return az <= 1.0 ? 0.5 : 0.0;
  case KernelFamily::epanechnikov: return az <= 1.0 ? 0.75 * (1.0 - z * z) : 0.0;
  case KernelFamily::gaussian: return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  }
  return 0.0;
}

/// Unit-bandwidth kernel distribution function int_{-inf}^z K.
inline double kernel_unit_cdf(KernelFamily f, double z)
{
  switch (f) {
  case KernelFamily::uniform:
    return std::clamp(0.5 * (z + 1.0), 0.0, 1.0);
  case KernelFamily::epanechnikov: {
    if (z <= -1.0)
      return 0.0;
    if (z >= 1.0)
      return 1.0;
    return 0.5 + 0.75 * (z - z * z * z / 3.0);
  }
  case KernelFamily::gaussian:
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
  }
  return 0.0;
}

/// int_{lo}^{hi} K(z) dz, accurate in the Gaussian tails.
inline double kernel_unit_mass(KernelFamily f, double lo, double hi)
{
  if (f == KernelFamily::gaussian)
    return specfun::norm_cdf_diff(lo, hi);
  return kernel_unit_cdf(f, hi) - kernel_unit_cdf(f, lo);
}

/// Second moment int z^2 K(z) dz of the unit kernel.
inline double kernel_second_moment(KernelFamily f)
{
  switch (f) {
  case KernelFamily::uniform: return 1.0 / 3.0;
  case KernelFamily::epanechnikov: return 0.2;
  case KernelFamily::gaussian: return 1.0;
  }
  return 0.0;
}

/// Half-width of the kernel support (infinite for the Gaussian).
inline double kernel_support_radius(KernelFamily f)
{
  return f == KernelFamily::gaussian ? INFINITY : 1.0;
}

/// K_h(t).
inline double kernel_density(const KernelSpec& spec, double t)
{
  spec.validate();
  return kernel_unit_density(spec.family, t / spec.h) / spec.h;
}

/// One draw from the unit-bandwidth kernel; callers scale by h.
template <class Rng>
double kernel_sample(const KernelSpec& spec, Rng& rng)
{
  switch (spec.family) {
  case KernelFamily::uniform:
    return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  case KernelFamily::epanechnikov: {
    // rejection against the uniform envelope: accept z with probability 1 - z^2
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> accept(0.0, 1.0);
    for (;;) {
      const double z = u(rng);
      if (accept(rng) <= 1.0 - z * z)
        return z;
    }
  }
  case KernelFamily::gaussian:
    return std::normal_distribution<double>(0.0, 1.0)(rng);
  }
  return 0.0;
}

/// Pseudo data: m points of dimension `dim`, stored row-major. Radial
/// estimators use dim = 1 with non-negative values.
struct PseudoDataset
{
  std::vector<double> values;
  std::size_t dim = 1;

  PseudoDataset() = default;
  explicit PseudoDataset(std::vector<double> v, std::size_t d = 1)
    : values(std::move(v)), dim(d)
  {
  }

  std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
  bool empty() const { return values.empty(); }
  std::span<const double> point(std::size_t i) const
  {
    return std::span<const double>(values).subspan(i * dim, dim);
  }

  void validate(bool require_nonnegative) const
  {
    if (dim == 0 || values.empty() || values.size() % dim != 0)
      throw config_error("PseudoDataset: must hold m >= 1 points of dimension >= 1");
    for (double v : values) {
      if (!std::isfinite(v))
        throw domain_error("PseudoDataset: non-finite pseudo value");
      if (require_nonnegative && v < 0.0)
        throw domain_error("PseudoDataset: negative pseudo value " + std::to_string(v));
    }
  }

  friend bool operator==(const PseudoDataset&, const PseudoDataset&) = default;
};

/// Floor applied to surrogate densities before taking logarithms.
inline constexpr double density_floor = 1e-300;

/// Reflected surrogate distribution
/// G(u) = (1/m) sum_i int_0^u [K_h(t - v_i) + K_h(t + v_i)] dt.
inline double surrogate_cdf(const PseudoDataset& pseudo, const KernelSpec& spec, double u)
{
  spec.validate();
  if (!(u >= 0.0))
    throw domain_error("surrogate_cdf: u must be >= 0");
  pseudo.validate(true);
  if (u == 0.0)
    return 0.0;
  const double h = spec.h;
  double sum = 0.0;
  for (double v : pseudo.values) {
    sum += kernel_unit_mass(spec.family, -v / h, (u - v) / h);
    sum += kernel_unit_mass(spec.family, v / h, (u + v) / h);
  }
  return std::min(1.0, sum / static_cast<double>(pseudo.size()));
}

/// Density of the reflected surrogate: (1/m) sum_i [K_h(u - v_i) + K_h(u + v_i)].
inline double surrogate_pdf(const PseudoDataset& pseudo, const KernelSpec& spec, double u)
{
  spec.validate();
  if (!(u >= 0.0))
    throw domain_error("surrogate_pdf: u must be >= 0");
  const double h = spec.h;
  double sum = 0.0;
  for (double v : pseudo.values)
    sum += kernel_unit_density(spec.family, (u - v) / h) + kernel_unit_density(spec.family, (u + v) / h);
  return sum / (h * static_cast<double>(pseudo.size()));
}

} // namespace pdreg
