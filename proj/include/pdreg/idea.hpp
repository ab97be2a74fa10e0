#pragma once

// Iterated density estimation evolutionary algorithm over pseudo data.
//
// Each iteration: score every pseudo dataset by MSE, keep the floor(tau l)
// best (elitism), merge them into the surrogate's pseudo data, and refill
// the population by a smoothed bootstrap |v_I + h e|, e ~ K, from the merged
// set. The loop stops once the divergence between consecutive surrogates
// stays below the threshold for `kl_patience` iterations in a row.

#include "pdreg/dataset.hpp"
#include "pdreg/errors.hpp"
#include "pdreg/estimators.hpp"
#include "pdreg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace pdreg {

using Rng = std::mt19937_64;

struct IdeaConfig
{
  std::size_t m = 5;          ///< pseudo data size per dataset
  double h = 0.1;             ///< kernel bandwidth
  std::size_t l = 0;          ///< population size; 0 means 10 m
  double tau = 0.1;           ///< acceptance rate
  double kl_threshold = 1e-3;
  std::size_t kl_patience = 5;
  std::size_t max_iters = 200;
  std::uint64_t seed = 0;

  std::size_t population_size() const { return l == 0 ? 10 * m : l; }
  std::size_t selected_count() const
  {
    // the epsilon keeps e.g. 0.1 * 30 from flooring to 2
    return static_cast<std::size_t>(std::floor(tau * static_cast<double>(population_size()) + 1e-9));
  }

  void validate() const
  {
    if (m < 1)
      throw config_error("IdeaConfig: m must be >= 1");
    if (!(h > 0.0) || !std::isfinite(h))
      throw config_error("IdeaConfig: h must be finite and > 0");
    if (!(tau > 0.0 && tau < 1.0))
      throw config_error("IdeaConfig: tau must lie in (0, 1)");
    if (population_size() < 1)
      throw config_error("IdeaConfig: population size must be >= 1");
    if (selected_count() < 1)
      throw config_error("IdeaConfig: floor(tau * l) must be >= 1");
    if (kl_patience < 1)
      throw config_error("IdeaConfig: kl_patience must be >= 1");
    if (max_iters < 1)
      throw config_error("IdeaConfig: max_iters must be >= 1");
    if (std::isnan(kl_threshold))
      throw config_error("IdeaConfig: kl_threshold must not be NaN");
  }
};

struct Population
{
  std::vector<PseudoDataset> datasets;
  std::vector<double> scores;  ///< NaN until evaluated
  std::size_t iteration = 0;
};

struct IdeaTraceRecord
{
  std::size_t iter = 0;
  double obj_min = 0.0;
  double obj_selected_max = 0.0;
  double obj_mean = 0.0;
  double obj_max = 0.0;
  double d_kl = 0.0;
};

struct IdeaTrace
{
  std::vector<IdeaTraceRecord> records;
  bool converged = false;

  std::size_t iterations() const { return records.size(); }
  double final_objective() const { return records.empty() ? NAN : records.back().obj_min; }
};

struct Selection
{
  std::vector<std::size_t> order;  ///< population indices of the selected datasets, best first
  std::vector<PseudoDataset> selected;
  std::vector<double> selected_scores;
  PseudoDataset merged;
};

struct IdeaResult
{
  FittedEstimator fit;
  IdeaTrace trace;
};

/// l datasets of m i.i.d. Exp(1) values. For pseudo points of dimension
/// > 1 (general estimator) each coordinate gets a uniformly random sign.
inline Population initialize(const IdeaConfig& config, Rng& rng, std::size_t dim = 1)
{
  config.validate();
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);
  Population pop;
  const std::size_t l = config.population_size();
  pop.datasets.reserve(l);
  for (std::size_t i = 0; i < l; ++i) {
    std::vector<double> v(config.m * dim);
    for (double& x : v) {
      x = expo(rng);
      if (dim > 1 && coin(rng))
        x = -x;
    }
    pop.datasets.emplace_back(std::move(v), dim);
  }
  pop.scores.assign(l, std::numeric_limits<double>::quiet_NaN());
  pop.iteration = 1;
  return pop;
}

/// Mean squared error of a pseudo dataset; caches |x_j| of the data.
class ObjectiveEvaluator
{
public:
  ObjectiveEvaluator(const RegressionDataset& data, EstimatorSpec spec)
    : data_(data), fit_{std::move(spec), {}, 1.0}
  {
    data_.validate();
    fit_.spec.validate();
    if (is_radial(fit_.spec.kind)) {
      radii_.resize(data_.size());
      for (std::size_t j = 0; j < data_.size(); ++j)
        radii_[j] = data_.radius(j);
    } else if (data_.dim != fit_.spec.dim) {
      throw config_error("objective: data dimension does not match the general estimator");
    }
  }

  double operator()(const PseudoDataset& pseudo) const
  {
    fit_.pseudo = pseudo;
    double sse = 0.0;
    double total = 0.0;
    const std::size_t n = data_.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double pred = is_radial(fit_.spec.kind) ? evaluate(fit_, radii_[j]) : eval_general(fit_, data_.input(j));
      if (!std::isfinite(pred))
        throw numeric_error(describe_nonfinite(pseudo, j));
      const double e = data_.y[j] - pred;
      const double w = data_.weight(j);
      sse += w * e * e;
      total += w;
    }
    return sse / total;
  }

private:
  std::string describe_nonfinite(const PseudoDataset& pseudo, std::size_t row) const
  {
    std::ostringstream os;
    os << "objective: non-finite estimator value at observation " << row;
    FittedEstimator single = fit_;
    for (std::size_t i = 0; i < pseudo.size(); ++i) {
      const auto p = pseudo.point(i);
      single.pseudo = PseudoDataset(std::vector<double>(p.begin(), p.end()), pseudo.dim);
      const double v = is_radial(single.spec.kind) ? evaluate(single, radii_[row])
                                                   : eval_general(single, data_.input(row));
      if (!std::isfinite(v)) {
        os << "; offending pseudo datum #" << i << " = " << p[0];
        break;
      }
    }
    return os.str();
  }

  const RegressionDataset& data_;
  mutable FittedEstimator fit_;
  std::vector<double> radii_;
};

/// (1/n) sum_j (y_j - estimator(x_j))^2 with unit variance scale (weighted
/// mean when the data carry weights).
inline double objective(const RegressionDataset& data, const EstimatorSpec& spec, const PseudoDataset& pseudo)
{
  return ObjectiveEvaluator(data, spec)(pseudo);
}

/// Truncation selection of the floor(tau l) lowest scores; ties go to the
/// lower population index.
inline Selection select(const Population& pop, double tau)
{
  const std::size_t l = pop.datasets.size();
  if (l == 0 || pop.scores.size() != l)
    throw config_error("select: population and scores disagree");
  for (double s : pop.scores)
    if (std::isnan(s))
      throw config_error("select: population has unevaluated datasets");
  const auto keep = static_cast<std::size_t>(std::floor(tau * static_cast<double>(l) + 1e-9));
  if (keep < 1 || keep > l)
    throw config_error("select: floor(tau * l) must lie in [1, l]");

  std::vector<std::size_t> idx(l);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pop.scores[a] < pop.scores[b]; });

  Selection sel;
  sel.order.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep));
  const std::size_t dim = pop.datasets.front().dim;
  sel.merged.dim = dim;
  for (std::size_t i : sel.order) {
    sel.selected.push_back(pop.datasets[i]);
    sel.selected_scores.push_back(pop.scores[i]);
    const auto& v = pop.datasets[i].values;
    sel.merged.values.insert(sel.merged.values.end(), v.begin(), v.end());
  }
  return sel;
}

/// Next population: survivors verbatim (with their scores), then
/// l - floor(tau l) fresh datasets from the smoothed bootstrap of `merged`.
/// Radial pseudo data use |v_I + h e|; general pseudo points use
/// v_I + H^{1/2} e without reflection.
inline Population replace(const Selection& sel, const IdeaConfig& config, const EstimatorSpec& spec, Rng& rng)
{
  config.validate();
  const std::size_t l = config.population_size();
  const std::size_t keep = sel.selected.size();
  const std::size_t m = config.m;
  const std::size_t dim = sel.merged.dim;
  const std::size_t pool = sel.merged.size();
  if (keep == 0 || keep > l || pool == 0)
    throw config_error("replace: empty selection");

  Population next;
  next.datasets = sel.selected;
  next.scores = sel.selected_scores;
  next.scores.resize(l, std::numeric_limits<double>::quiet_NaN());

  const bool radial = is_radial(spec.kind);
  std::vector<double> scale(dim, config.h);
  if (!radial) {
    EstimatorSpec working = spec;
    working.kernel.h = config.h;
    const auto H = working.bandwidth();
    for (std::size_t c = 0; c < dim; ++c)
      scale[c] = std::sqrt(H[c]);
  }
  KernelSpec kernel{spec.kernel.family, config.h};
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
  for (std::size_t d = keep; d < l; ++d) {
    std::vector<double> values;
    values.reserve(m * dim);
    for (std::size_t j = 0; j < m; ++j) {
      const auto src = sel.merged.point(pick(rng));
      for (std::size_t c = 0; c < dim; ++c) {
        const double moved = src[c] + scale[c] * kernel_sample(kernel, rng);
        values.push_back(radial ? std::fabs(moved) : moved);
      }
    }
    next.datasets.emplace_back(std::move(values), dim);
  }
  return next;
}

/// (1/|prev|) sum_{v in prev} log(psi_curr(v) / psi_prev(v)), with both
/// reflected surrogate densities floored at density_floor.
inline double kl_step(const PseudoDataset& prev, const PseudoDataset& curr, const KernelSpec& kernel)
{
  if (prev.empty() || curr.empty())
    throw config_error("kl_step: merged sets must be non-empty");
  double sum = 0.0;
  for (double v : prev.values) {
    const double pc = std::max(surrogate_pdf(curr, kernel, v), density_floor);
    const double pp = std::max(surrogate_pdf(prev, kernel, v), density_floor);
    sum += std::log(pc / pp);
  }
  return sum / static_cast<double>(prev.size());
}

/// kl_step for general pseudo points with the product-Gaussian surrogate.
inline double kl_step_general(const PseudoDataset& prev, const PseudoDataset& curr,
                              std::span<const double> bandwidth_diag)
{
  if (prev.empty() || curr.empty())
    throw config_error("kl_step_general: merged sets must be non-empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const auto x = prev.point(i);
    const double pc = std::max(general_surrogate_pdf(curr, bandwidth_diag, x), density_floor);
    const double pp = std::max(general_surrogate_pdf(prev, bandwidth_diag, x), density_floor);
    sum += std::log(pc / pp);
  }
  return sum / static_cast<double>(prev.size());
}

namespace detail {

// Divergence of the first surrogate from the initial Exp(1) sampling law,
// evaluated at the initial draws (first-iteration analogue of kl_step).
inline double kl_from_initial(const Population& initial, const PseudoDataset& curr, const EstimatorSpec& spec)
{
  double sum = 0.0;
  std::size_t count = 0;
  const bool radial = is_radial(spec.kind);
  const auto H = radial ? std::vector<double>{} : spec.bandwidth();
  for (const auto& ds : initial.datasets) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto x = ds.point(i);
      double log_p0 = 0.0;
      for (double c : x)
        log_p0 += radial ? -c : std::log(0.5) - std::fabs(c);
      const double pc = radial ? surrogate_pdf(curr, spec.kernel, x[0]) : general_surrogate_pdf(curr, H, x);
      sum += std::log(std::max(pc, density_floor)) - std::max(log_p0, std::log(density_floor));
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

} // namespace detail

/// Runs the full loop. The returned estimator uses the merged pseudo data
/// of the last selection (size m floor(tau l)) and sigma2 = 1.
inline IdeaResult run(const RegressionDataset& data, const EstimatorSpec& spec, const IdeaConfig& config)
{
  config.validate();
  EstimatorSpec working = spec;
  working.kernel.h = config.h;
  working.validate();
  const std::size_t dim = is_radial(working.kind) ? 1 : working.dim;
  const auto H = working.bandwidth();

  ObjectiveEvaluator score(data, working);
  Rng rng(config.seed);
  Population pop = initialize(config, rng, dim);
  const Population initial = pop;

  IdeaResult result;
  PseudoDataset prev;
  std::size_t hits = 0;
  Selection sel;
  for (std::size_t k = 1;; ++k) {
    for (std::size_t i = 0; i < pop.datasets.size(); ++i)
      if (std::isnan(pop.scores[i]))
        pop.scores[i] = score(pop.datasets[i]);

    sel = select(pop, config.tau);

    double d_kl;
    if (k == 1)
      d_kl = detail::kl_from_initial(initial, sel.merged, working);
    else if (dim == 1)
      d_kl = kl_step(prev, sel.merged, working.kernel);
    else
      d_kl = kl_step_general(prev, sel.merged, H);

    IdeaTraceRecord rec;
    rec.iter = k;
    rec.obj_min = sel.selected_scores.front();
    rec.obj_selected_max = sel.selected_scores.back();
    rec.obj_max = *std::max_element(pop.scores.begin(), pop.scores.end());
    rec.obj_mean = std::accumulate(pop.scores.begin(), pop.scores.end(), 0.0) / static_cast<double>(pop.scores.size());
    rec.d_kl = d_kl;
    result.trace.records.push_back(rec);

    hits = std::fabs(d_kl) < config.kl_threshold ? hits + 1 : 0;
    if (hits >= config.kl_patience) {
      result.trace.converged = true;
      break;
    }
    if (k >= config.max_iters)
      break;

    prev = sel.merged;
    pop = replace(sel, config, working, rng);
    pop.iteration = k + 1;
  }
  result.fit = FittedEstimator{working, sel.merged, 1.0};
  return result;
}

} // namespace pdreg
