#pragma once

// Covariance estimation for point-referenced data and the synthetic data
// generators: truth functions, Gaussian process fields, Matheron point
// estimates and the alternating variance / shape refit.

#include "pdreg/dataset.hpp"
#include "pdreg/errors.hpp"
#include "pdreg/estimators.hpp"
#include "pdreg/idea.hpp"
#include "pdreg/modelselect.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pdreg {

enum class TruthFamily
{
  wave_cov,          ///< sin(r) / r
  exp_cov,           ///< exp(-r)
  wave_reg,          ///< sin(2r) / (2r)
  spherical_reg,     ///< 1 - (12 r - r^3) / 20 on [0, 2], 0.2 beyond
  wave_scaled,       ///< sin(c r) / (c r)
  spherical_scaled,  ///< 1 - (b/2)(3 c r - c^3 r^3) on (0, 1/c], 1 - b beyond
  exp_scaled         ///< exp(-c r)
};

struct TruthFunction
{
  TruthFamily family = TruthFamily::wave_cov;
  double b = 1.0;
  double c = 1.0;

  static TruthFunction wave_cov() { return {TruthFamily::wave_cov}; }
  static TruthFunction exp_cov() { return {TruthFamily::exp_cov}; }
  static TruthFunction wave_reg() { return {TruthFamily::wave_reg}; }
  static TruthFunction spherical_reg() { return {TruthFamily::spherical_reg}; }
  static TruthFunction wave(double c) { return {TruthFamily::wave_scaled, 1.0, c}; }
  static TruthFunction spherical(double b, double c) { return {TruthFamily::spherical_scaled, b, c}; }
  static TruthFunction exponential(double c) { return {TruthFamily::exp_scaled, 1.0, c}; }

  void validate() const
  {
    if (family == TruthFamily::wave_scaled || family == TruthFamily::exp_scaled ||
        family == TruthFamily::spherical_scaled) {
      if (!(c > 0.0) || !std::isfinite(c))
        throw config_error("TruthFunction: scale c must be finite and > 0");
    }
    if (family == TruthFamily::spherical_scaled && !(b > 0.0 && b <= 1.0))
      throw config_error("TruthFunction: spherical b must lie in (0, 1]");
  }

  /// Families usable as the covariance of a simulated field.
  bool is_covariance() const { return family != TruthFamily::wave_reg && family != TruthFamily::spherical_reg; }
};

namespace detail {

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

} // namespace detail

inline double truth_eval(const TruthFunction& fn, double r)
{
  if (!(r >= 0.0))
    throw domain_error("truth_eval: r must be >= 0");
  switch (fn.family) {
  case TruthFamily::wave_cov: return detail::sinc(r);
  case TruthFamily::exp_cov: return std::exp(-r);
  case TruthFamily::wave_reg: return detail::sinc(2.0 * r);
  case TruthFamily::spherical_reg:
    if (r == 0.0)
      return 1.0;
    return r <= 2.0 ? 1.0 - (12.0 * r - r * r * r) / 20.0 : 0.2;
  case TruthFamily::wave_scaled: return detail::sinc(fn.c * r);
  case TruthFamily::spherical_scaled: {
    if (r == 0.0)
      return 1.0;
    if (r <= 1.0 / fn.c) {
      const double cr = fn.c * r;
      return 1.0 - 0.5 * fn.b * (3.0 * cr - cr * cr * cr);
    }
    return 1.0 - fn.b;
  }
  case TruthFamily::exp_scaled: return std::exp(-fn.c * r);
  }
  return 0.0;
}

/// w locations in R^d (row-major) with observed values Z(s_i).
struct SpatialField
{
  std::vector<double> locations;
  std::size_t dim = 2;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::span<const double> location(std::size_t i) const
  {
    return std::span<const double>(locations).subspan(i * dim, dim);
  }
  double distance(std::size_t i, std::size_t j) const
  {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = locations[i * dim + c] - locations[j * dim + c];
      s += d * d;
    }
    return std::sqrt(s);
  }

  void validate() const
  {
    if (dim == 0)
      throw config_error("SpatialField: dim must be >= 1");
    if (values.size() < 2)
      throw config_error("SpatialField: needs w >= 2 locations");
    if (locations.size() != values.size() * dim)
      throw config_error("SpatialField: locations and values disagree in length");
    for (double v : locations)
      if (!std::isfinite(v))
        throw domain_error("SpatialField: non-finite location");
    for (double v : values)
      if (!std::isfinite(v))
        throw domain_error("SpatialField: non-finite value");
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j)
        if (distance(i, j) == 0.0)
          throw domain_error("SpatialField: locations " + std::to_string(i) + " and " + std::to_string(j) +
                             " coincide");
  }
};

/// Axis-aligned box [lo_c, hi_c] in each coordinate.
struct Box
{
  std::vector<double> lo;
  std::vector<double> hi;

  static Box square(double lo, double hi, std::size_t d = 2) { return {std::vector<double>(d, lo), std::vector<double>(d, hi)}; }

  void validate() const
  {
    if (lo.empty() || lo.size() != hi.size())
      throw config_error("Box: bounds must be non-empty and of equal length");
    for (std::size_t c = 0; c < lo.size(); ++c)
      if (!(lo[c] < hi[c]) || !std::isfinite(lo[c]) || !std::isfinite(hi[c]))
        throw config_error("Box: need finite lo < hi in every coordinate");
  }
};

/// Mean-zero Gaussian field with covariance truth(|s_a - s_b|) at w uniform
/// locations. The Cholesky factor gets diagonal jitter starting at
/// 1e-10 trace / w and growing tenfold up to 1e-4 trace / w.
inline SpatialField simulate_gp(const TruthFunction& truth, std::size_t w, const Box& domain, Rng& rng)
{
  truth.validate();
  domain.validate();
  if (!truth.is_covariance())
    throw config_error("simulate_gp: truth must be a covariance family");
  if (w < 2)
    throw config_error("simulate_gp: w must be >= 2");

  SpatialField field;
  field.dim = domain.lo.size();
  field.locations.resize(w * field.dim);
  for (std::size_t i = 0; i < w; ++i)
    for (std::size_t c = 0; c < field.dim; ++c)
      field.locations[i * field.dim + c] = std::uniform_real_distribution<double>(domain.lo[c], domain.hi[c])(rng);

  Eigen::MatrixXd cov(w, w);
  for (std::size_t a = 0; a < w; ++a) {
    cov(a, a) = truth_eval(truth, 0.0);
    for (std::size_t b = a + 1; b < w; ++b)
      cov(a, b) = cov(b, a) = truth_eval(truth, field.distance(a, b));
  }
  const double base = cov.trace() / static_cast<double>(w);
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool ok = false;
  for (double jitter = 1e-10; jitter <= 1e-4 * (1.0 + 1e-9); jitter *= 10.0) {
    Eigen::MatrixXd trial = cov;
    trial.diagonal().array() += jitter * base;
    llt.compute(trial);
    if (llt.info() == Eigen::Success) {
      ok = true;
      break;
    }
  }
  if (!ok)
    throw numeric_error("simulate_gp: covariance factorization failed at the largest jitter");

  Eigen::VectorXd z(w);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < w; ++i)
    z(i) = normal(rng);
  const Eigen::VectorXd x = llt.matrixL() * z;
  field.values.assign(x.data(), x.data() + w);
  return field;
}

/// Off-diagonal covariance point estimates. Each entry may stand for
/// several pairs (after binning); `counts` holds that multiplicity.
struct CovPointSet
{
  std::vector<double> distances;
  std::vector<double> estimates;
  std::vector<double> counts;
  double diagonal_variance = 0.0;

  std::size_t size() const { return distances.size(); }

  void validate() const
  {
    if (distances.empty())
      throw config_error("CovPointSet: needs at least one pair");
    if (estimates.size() != distances.size() || counts.size() != distances.size())
      throw config_error("CovPointSet: distances, estimates and counts disagree in length");
    for (std::size_t i = 0; i < size(); ++i) {
      if (!(distances[i] >= 0.0) || !std::isfinite(distances[i]))
        throw domain_error("CovPointSet: distances must be finite and >= 0");
      if (!std::isfinite(estimates[i]))
        throw domain_error("CovPointSet: non-finite estimate");
      if (!(counts[i] > 0.0) || !std::isfinite(counts[i]))
        throw domain_error("CovPointSet: counts must be finite and > 0");
    }
    if (!(diagonal_variance >= 0.0) || !std::isfinite(diagonal_variance))
      throw domain_error("CovPointSet: diagonal variance must be finite and >= 0");
  }

  bool unit_counts() const
  {
    return std::all_of(counts.begin(), counts.end(), [](double c) { return c == 1.0; });
  }
};

/// c_ij = (Z_i - Zbar)(Z_j - Zbar) for all i < j, with the sample variance
/// (1/w) sum (Z_i - Zbar)^2 kept separately.
inline CovPointSet matheron_points(const SpatialField& field)
{
  field.validate();
  const std::size_t w = field.size();
  double mean = 0.0;
  for (double z : field.values)
    mean += z;
  mean /= static_cast<double>(w);
  std::vector<double> dev(w);
  double var = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    dev[i] = field.values[i] - mean;
    var += dev[i] * dev[i];
  }
  CovPointSet out;
  out.diagonal_variance = var / static_cast<double>(w);
  const std::size_t pairs = w * (w - 1) / 2;
  out.distances.reserve(pairs);
  out.estimates.reserve(pairs);
  for (std::size_t i = 0; i < w; ++i) {
    for (std::size_t j = i + 1; j < w; ++j) {
      out.distances.push_back(field.distance(i, j));
      out.estimates.push_back(dev[i] * dev[j]);
    }
  }
  out.counts.assign(pairs, 1.0);
  return out;
}

/// Count-weighted averages of distance and estimate within bins
/// [k width, (k + 1) width).
inline CovPointSet bin_distances(const CovPointSet& points, double bin_width)
{
  points.validate();
  if (!(bin_width > 0.0) || !std::isfinite(bin_width))
    throw config_error("bin_distances: bin width must be finite and > 0");
  struct Acc
  {
    double n = 0.0, r = 0.0, c = 0.0;
  };
  std::map<long long, Acc> bins;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& a = bins[static_cast<long long>(std::floor(points.distances[i] / bin_width))];
    a.n += points.counts[i];
    a.r += points.counts[i] * points.distances[i];
    a.c += points.counts[i] * points.estimates[i];
  }
  CovPointSet out;
  out.diagonal_variance = points.diagonal_variance;
  for (const auto& [key, a] : bins) {
    out.distances.push_back(a.r / a.n);
    out.estimates.push_back(a.c / a.n);
    out.counts.push_back(a.n);
  }
  return out;
}

/// Scales all distances so that the largest equals `target_max`; returns
/// the factor applied.
inline double rescale_distances(CovPointSet& points, double target_max)
{
  points.validate();
  if (!(target_max > 0.0) || !std::isfinite(target_max))
    throw config_error("rescale_distances: target must be finite and > 0");
  const double current = *std::max_element(points.distances.begin(), points.distances.end());
  if (!(current > 0.0))
    throw domain_error("rescale_distances: all distances are zero");
  const double factor = target_max / current;
  for (double& d : points.distances)
    d *= factor;
  return factor;
}

inline constexpr double sigma2_floor = 1e-12;

struct Sigma2Update
{
  double value = 1.0;
  bool degenerate = false;  ///< denominator vanished; value is the previous estimate
};

/// Least-squares scale sum c_ij C0(r_ij) / sum C0(r_ij)^2 (count weighted),
/// floored at sigma2_floor. C0 is `c0` evaluated with its own sigma2.
inline Sigma2Update sigma2_update(const CovPointSet& points, const FittedEstimator& c0, double previous = 1.0)
{
  points.validate();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double g = evaluate(c0, points.distances[i]);
    num += points.counts[i] * points.estimates[i] * g;
    den += points.counts[i] * g * g;
  }
  if (!(den > 0.0) || !std::isfinite(den) || !std::isfinite(num))
    return {previous, true};
  return {std::max(num / den, sigma2_floor), false};
}

struct CovFitOptions
{
  EstimatorKind kind = EstimatorKind::isotropic;
  KernelFamily kernel = KernelFamily::gaussian;
  IdeaConfig idea;                 ///< m and h are replaced by the CV choice when `cv` is set
  std::optional<CvConfig> cv;
  std::size_t outer_iters = 3;
  double rel_tol = 1e-3;
  std::optional<double> bin_width;

  void validate() const
  {
    if (!is_radial(kind))
      throw config_error("fit_covariance: kind must be isotropic or monotone");
    if (outer_iters < 1)
      throw config_error("fit_covariance: outer_iters must be >= 1");
    if (!(rel_tol >= 0.0))
      throw config_error("fit_covariance: rel_tol must be >= 0");
    idea.validate();
    if (cv)
      cv->validate();
    if (bin_width && !(*bin_width > 0.0))
      throw config_error("fit_covariance: bin width must be > 0");
  }
};

struct CovFitResult
{
  FittedEstimator fit;              ///< sigma2 holds the final variance estimate
  std::vector<double> sigma2_history;  ///< initial sample variance, then one entry per outer iteration
  std::vector<IdeaTrace> traces;
  bool degenerate_update = false;
  std::optional<CvResult> cv;
};

/// Alternates a shape fit of C0 on c_ij / sigma2 with the least-squares
/// variance update, starting from the sample variance. Stops after
/// outer_iters rounds or once |d sigma2| / sigma2 < rel_tol.
inline CovFitResult fit_covariance(const CovPointSet& raw, const CovFitOptions& options)
{
  options.validate();
  raw.validate();
  const CovPointSet points = options.bin_width ? bin_distances(raw, *options.bin_width) : raw;
  if (!(points.diagonal_variance > 0.0))
    throw numeric_error("fit_covariance: sample variance is zero; nothing to normalize by");

  CovFitResult out;
  double sigma2 = points.diagonal_variance;
  out.sigma2_history.push_back(sigma2);

  EstimatorSpec spec;
  spec.kind = options.kind;
  spec.kernel = {options.kernel, options.idea.h};
  spec.dim = 2;
  IdeaConfig idea = options.idea;

  for (std::size_t it = 0; it < options.outer_iters; ++it) {
    std::vector<double> y(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      y[i] = points.estimates[i] / sigma2;
    RegressionDataset data = RegressionDataset::radial(points.distances, std::move(y));
    if (!points.unit_counts()) {
      data.weights = points.counts;
      data.validate();
    }

    if (it == 0 && options.cv) {
      out.cv = cross_validate(data, spec, *options.cv, idea);
      idea.h = out.cv->chosen_h;
      idea.m = out.cv->chosen_m;
    }
    IdeaConfig round = idea;
    round.seed = detail::splitmix64(idea.seed + it);
    auto result = run(data, spec, round);
    out.traces.push_back(result.trace);
    out.fit = result.fit;
    out.fit.sigma2 = 1.0;

    const Sigma2Update upd = sigma2_update(points, out.fit, sigma2);
    out.degenerate_update = out.degenerate_update || upd.degenerate;
    const double change = std::fabs(upd.value - sigma2) / sigma2;
    sigma2 = upd.value;
    out.sigma2_history.push_back(sigma2);
    if (change < options.rel_tol)
      break;
  }
  out.fit.sigma2 = sigma2;
  return out;
}

/// Field overload: builds the Matheron point set first.
inline CovFitResult fit_covariance(const SpatialField& field, const CovFitOptions& options)
{
  return fit_covariance(matheron_points(field), options);
}

/// n pairs with r_i ~ U[lo, hi] and y_i = truth(r_i) + noise_sd * N(0, 1).
inline RegressionDataset generate_regression(const TruthFunction& truth, std::size_t n, double lo, double hi,
                                             double noise_sd, Rng& rng)
{
  truth.validate();
  if (n < 1)
    throw config_error("generate_regression: n must be >= 1");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
    throw config_error("generate_regression: noise sd must be finite and >= 0");
  if (!(lo >= 0.0) || !(lo < hi) || !std::isfinite(hi))
    throw config_error("generate_regression: need 0 <= lo < hi");
  std::uniform_real_distribution<double> unif(lo, hi);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> r(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = unif(rng);
    const double eps = normal(rng);
    y[i] = truth_eval(truth, r[i]) + noise_sd * eps;
  }
  return RegressionDataset::radial(std::move(r), std::move(y));
}

/// sqrt(mean (fit(r) - truth(r))^2) over the test inputs.
inline double rmspe(const FittedEstimator& fit, const TruthFunction& truth, std::span<const double> test_inputs)
{
  if (test_inputs.empty())
    throw config_error("rmspe: test set must be non-empty");
  double s = 0.0;
  for (double r : test_inputs) {
    const double e = evaluate(fit, r) - truth_eval(truth, r);
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(test_inputs.size()));
}

} // namespace pdreg
