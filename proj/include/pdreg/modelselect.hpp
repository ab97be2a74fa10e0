#pragma once

// k-fold cross validation over an (h, m) grid.

#include "pdreg/dataset.hpp"
#include "pdreg/errors.hpp"
#include "pdreg/estimators.hpp"
#include "pdreg/idea.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace pdreg {

struct CvConfig
{
  std::size_t k = 5;
  std::vector<double> h_grid{0.01, 0.02, 0.05, 0.1, 0.16, 0.2, 0.5, 1.0};
  std::vector<std::size_t> m_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint64_t seed = 0;
  std::size_t replications = 1;

  void validate() const
  {
    if (k < 2)
      throw config_error("CvConfig: k must be >= 2");
    if (h_grid.empty() || m_grid.empty())
      throw config_error("CvConfig: grids must be non-empty");
    for (double h : h_grid)
      if (!(h > 0.0) || !std::isfinite(h))
        throw config_error("CvConfig: every h must be finite and > 0");
    for (std::size_t m : m_grid)
      if (m < 1)
        throw config_error("CvConfig: every m must be >= 1");
    if (replications < 1)
      throw config_error("CvConfig: replications must be >= 1");
  }
};

struct CvCell
{
  double h = 0.0;
  std::size_t m = 0;
  double mean_mse = 0.0;
};

struct CvResult
{
  std::vector<CvCell> table;  ///< h-major: index = h_index * |m_grid| + m_index
  double chosen_h = 0.0;
  std::size_t chosen_m = 0;
  double chosen_mse = 0.0;
};

/// Random partition of {0, ..., n-1} into k folds whose sizes differ by at
/// most one; the first n mod k folds get the extra element.
inline std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, Rng& rng)
{
  if (k < 1)
    throw config_error("kfold_split: k must be >= 1");
  if (n < k)
    throw config_error("kfold_split: need n >= k observations");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t cell_seed(std::uint64_t seed, std::size_t rep, std::size_t hi, std::size_t mi, std::size_t fold)
{
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ rep);
  s = splitmix64(s ^ (hi << 20));
  s = splitmix64(s ^ (mi << 40));
  return splitmix64(s ^ fold);
}

} // namespace detail

/// For each grid cell, fits on k - 1 folds and scores MSE on the held-out
/// fold, averaging over folds and replications. Folds are drawn once per
/// replication and shared by all cells. A cell whose fit throws scores +inf.
/// `base` supplies everything but h and m (kl settings, tau, l = 0 for 10 m).
inline CvResult cross_validate(const RegressionDataset& data, const EstimatorSpec& spec_template, const CvConfig& config,
                               const IdeaConfig& base = {})
{
  config.validate();
  data.validate();
  const std::size_t nh = config.h_grid.size();
  const std::size_t nm = config.m_grid.size();
  std::vector<double> total(nh * nm, 0.0);

  for (std::size_t rep = 0; rep < config.replications; ++rep) {
    Rng fold_rng(detail::splitmix64(config.seed + rep));
    const auto folds = kfold_split(data.size(), config.k, fold_rng);
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<std::size_t> train;
      train.reserve(data.size());
      for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f)
          train.insert(train.end(), folds[g].begin(), folds[g].end());
      std::sort(train.begin(), train.end());
      const RegressionDataset train_set = data.subset(train);
      const RegressionDataset valid_set = data.subset(folds[f]);

      for (std::size_t hi = 0; hi < nh; ++hi) {
        for (std::size_t mi = 0; mi < nm; ++mi) {
          double& slot = total[hi * nm + mi];
          if (std::isinf(slot))
            continue;
          try {
            IdeaConfig cfg = base;
            cfg.h = config.h_grid[hi];
            cfg.m = config.m_grid[mi];
            cfg.seed = detail::cell_seed(config.seed, rep, hi, mi, f);
            EstimatorSpec spec = spec_template;
            spec.kernel.h = cfg.h;
            const auto result = run(train_set, spec, cfg);
            const double mse = ObjectiveEvaluator(valid_set, result.fit.spec)(result.fit.pseudo);
            slot += std::isfinite(mse) ? mse : std::numeric_limits<double>::infinity();
          } catch (const std::exception&) {
            slot = std::numeric_limits<double>::infinity();
          }
        }
      }
    }
  }

  CvResult out;
  const double denom = static_cast<double>(config.k * config.replications);
  out.table.reserve(nh * nm);
  for (std::size_t hi = 0; hi < nh; ++hi)
    for (std::size_t mi = 0; mi < nm; ++mi)
      out.table.push_back({config.h_grid[hi], config.m_grid[mi], total[hi * nm + mi] / denom});

  // ties resolve toward smaller m, then smaller h
  const CvCell* best = nullptr;
  for (const auto& cell : out.table) {
    if (best == nullptr || cell.mean_mse < best->mean_mse ||
        (cell.mean_mse == best->mean_mse && (cell.m < best->m || (cell.m == best->m && cell.h < best->h))))
      best = &cell;
  }
  out.chosen_h = best->h;
  out.chosen_m = best->m;
  out.chosen_mse = best->mean_mse;
  return out;
}

} // namespace pdreg
