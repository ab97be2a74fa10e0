#pragma once

#include "pdreg/errors.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace pdreg {

/// n observations (x_i, y_i) with x_i in R^d, stored row-major. Radial data
/// (distances r_i) use d = 1. Optional non-negative weights (empty means
/// all ones) let a binned point set stand in for its members.
struct RegressionDataset
{
  std::vector<double> x;
  std::size_t dim = 1;
  std::vector<double> y;
  std::vector<double> weights;

  RegressionDataset() = default;
  RegressionDataset(std::vector<double> inputs, std::size_t d, std::vector<double> responses)
    : x(std::move(inputs)), dim(d), y(std::move(responses))
  {
    validate();
  }

  /// Radial data set: inputs are distances.
  static RegressionDataset radial(std::vector<double> r, std::vector<double> responses)
  {
    return RegressionDataset(std::move(r), 1, std::move(responses));
  }

  std::size_t size() const { return y.size(); }
  bool weighted() const { return !weights.empty(); }
  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
  std::span<const double> input(std::size_t i) const
  {
    return std::span<const double>(x).subspan(i * dim, dim);
  }
  /// |x_i|.
  double radius(std::size_t i) const
  {
    if (dim == 1)
      return std::fabs(x[i]);
    double s = 0.0;
    for (double c : input(i))
      s += c * c;
    return std::sqrt(s);
  }

  RegressionDataset subset(std::span<const std::size_t> rows) const
  {
    RegressionDataset out;
    out.dim = dim;
    out.x.reserve(rows.size() * dim);
    out.y.reserve(rows.size());
    for (std::size_t i : rows) {
      const auto xi = input(i);
      out.x.insert(out.x.end(), xi.begin(), xi.end());
      out.y.push_back(y[i]);
      if (weighted())
        out.weights.push_back(weights[i]);
    }
    return out;
  }

  void validate() const
  {
    if (dim == 0)
      throw config_error("RegressionDataset: dim must be >= 1");
    if (y.empty())
      throw config_error("RegressionDataset: needs at least one observation");
    if (x.size() != y.size() * dim)
      throw config_error("RegressionDataset: inputs and responses disagree in length");
    for (double v : x)
      if (!std::isfinite(v))
        throw domain_error("RegressionDataset: non-finite input");
    for (double v : y)
      if (!std::isfinite(v))
        throw domain_error("RegressionDataset: non-finite response");
    if (!weights.empty()) {
      if (weights.size() != y.size())
        throw config_error("RegressionDataset: weights and responses disagree in length");
      double total = 0.0;
      for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
          throw domain_error("RegressionDataset: weights must be finite and >= 0");
        total += w;
      }
      if (!(total > 0.0))
        throw domain_error("RegressionDataset: weights sum to zero");
    }
  }
};

} // namespace pdreg
