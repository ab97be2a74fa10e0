#include "pdreg/covpipe.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <numeric>

using namespace pdreg;

TEST(Truth, ReferenceValues)
{
  EXPECT_EQ(truth_eval(TruthFunction::wave_reg(), 0.0), 1.0);
  EXPECT_NEAR(truth_eval(TruthFunction::spherical_reg(), 2.5), 0.2, 1e-15);
  EXPECT_NEAR(truth_eval(TruthFunction::wave_reg(), std::numbers::pi / 2), 0.0, 1e-16);
  EXPECT_NEAR(truth_eval(TruthFunction::spherical_reg(), 2.0), 0.2, 1e-15);
  EXPECT_NEAR(truth_eval(TruthFunction::spherical_reg(), 1.0), 1.0 - 11.0 / 20.0, 1e-15);
  EXPECT_NEAR(truth_eval(TruthFunction::wave_cov(), 1.0), std::sin(1.0), 1e-16);
  EXPECT_NEAR(truth_eval(TruthFunction::exp_cov(), 2.0), std::exp(-2.0), 1e-16);
}

TEST(Truth, ScaledFamilies)
{
  EXPECT_NEAR(truth_eval(TruthFunction::wave(2.0), 1.0), std::sin(2.0) / 2.0, 1e-16);
  EXPECT_NEAR(truth_eval(TruthFunction::exponential(0.25), 4.0), std::exp(-1.0), 1e-16);
  const auto sph = TruthFunction::spherical(0.8, 0.5);
  EXPECT_EQ(truth_eval(sph, 0.0), 1.0);
  EXPECT_NEAR(truth_eval(sph, 1.0), 1.0 - 0.4 * (1.5 - 0.125), 1e-15);
  EXPECT_NEAR(truth_eval(sph, 2.0), 0.2, 1e-15);  // continuous at 1/c
  EXPECT_NEAR(truth_eval(sph, 5.0), 0.2, 1e-15);
  EXPECT_THROW(TruthFunction::spherical(1.5, 1.0).validate(), config_error);
  EXPECT_THROW(TruthFunction::wave(0.0).validate(), config_error);
  EXPECT_THROW(truth_eval(TruthFunction::wave_cov(), -1.0), domain_error);
}

TEST(SimulateGp, Preconditions)
{
  Rng rng(1);
  EXPECT_THROW(simulate_gp(TruthFunction::wave_cov(), 1, Box::square(0, 1), rng), config_error);
  EXPECT_THROW(simulate_gp(TruthFunction::wave_reg(), 10, Box::square(0, 1), rng), config_error);
  EXPECT_THROW(simulate_gp(TruthFunction::wave_cov(), 10, Box::square(1, 0), rng), config_error);
}

TEST(SimulateGp, DeterministicAndInDomain)
{
  Rng a(7), b(7);
  const auto box = Box::square(0.0, 10.0 / std::sqrt(2.0));
  const auto f = simulate_gp(TruthFunction::wave_cov(), 50, box, a);
  const auto g = simulate_gp(TruthFunction::wave_cov(), 50, box, b);
  EXPECT_EQ(f.locations, g.locations);
  EXPECT_EQ(f.values, g.values);
  for (double x : f.locations) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 10.0 / std::sqrt(2.0));
  }
  EXPECT_NO_THROW(f.validate());
}

TEST(SimulateGp, MarginalVariance)
{
  Rng rng(8);
  double s = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto f = simulate_gp(TruthFunction::exp_cov(), 2, Box::square(0, 1), rng);
    s += f.values[0] * f.values[0];
  }
  EXPECT_NEAR(s / 200.0, 1.0, 0.35);
}

TEST(SimulateGp, CovarianceFidelity)
{
  Rng rng(9);
  const int reps = 500;
  const std::size_t w = 5;
  std::vector<double> z(reps * 10), truth(reps * 10);
  for (int r = 0; r < reps; ++r) {
    const auto f = simulate_gp(TruthFunction::wave_cov(), w, Box::square(0, 3), rng);
    int k = 0;
    for (std::size_t i = 0; i < w; ++i)
      for (std::size_t j = i + 1; j < w; ++j, ++k) {
        z[r * 10 + k] = f.values[i] * f.values[j];
        truth[r * 10 + k] = truth_eval(TruthFunction::wave_cov(), f.distance(i, j));
      }
  }
  // E[Z_i Z_j - C(d_ij)] = 0 and Var <= 1 + C^2 <= 2 per product
  for (int k = 0; k < 10; ++k) {
    double mean = 0.0;
    for (int r = 0; r < reps; ++r)
      mean += z[r * 10 + k] - truth[r * 10 + k];
    mean /= reps;
    EXPECT_LT(std::fabs(mean), 5.0 * std::sqrt(2.0 / reps)) << k;
  }
}

TEST(Matheron, ConstantField)
{
  SpatialField f{{0, 0, 1, 0, 0, 1}, 2, {3.0, 3.0, 3.0}};
  const auto p = matheron_points(f);
  EXPECT_EQ(p.size(), 3u);
  for (double c : p.estimates)
    EXPECT_EQ(c, 0.0);
  EXPECT_EQ(p.diagonal_variance, 0.0);
}

TEST(Matheron, TwoPoints)
{
  SpatialField f{{0, 0, 3, 4}, 2, {1.0, -1.0}};
  const auto p = matheron_points(f);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.estimates[0], -1.0);
  EXPECT_EQ(p.distances[0], 5.0);
  EXPECT_EQ(p.diagonal_variance, 1.0);
}

TEST(Matheron, PairCountAndCenteringIdentity)
{
  Rng rng(10);
  const auto f = simulate_gp(TruthFunction::wave_cov(), 200, Box::square(0, 10 / std::sqrt(2.0)), rng);
  const auto p = matheron_points(f);
  EXPECT_EQ(p.size(), 19900u);
  // sum over all ordered pairs including the diagonal is (sum of deviations)^2 = 0
  const double off = std::accumulate(p.estimates.begin(), p.estimates.end(), 0.0);
  EXPECT_NEAR(2.0 * off + 200.0 * p.diagonal_variance, 0.0, 1e-9);
}

TEST(Matheron, RejectsCoincidentLocations)
{
  SpatialField f{{0, 0, 0, 0}, 2, {1.0, 2.0}};
  EXPECT_THROW(matheron_points(f), domain_error);
}

TEST(Sigma2Update, ExactScales)
{
  const FittedEstimator c0{EstimatorSpec{EstimatorKind::monotone, {KernelFamily::gaussian, 0.3}}, PseudoDataset({0.5, 1.4}),
                           1.0};
  CovPointSet p;
  for (double r : {0.2, 0.9, 1.7, 3.0}) {
    p.distances.push_back(r);
    p.estimates.push_back(evaluate(c0, r));
    p.counts.push_back(1.0);
  }
  p.diagonal_variance = 1.0;
  EXPECT_NEAR(sigma2_update(p, c0).value, 1.0, 1e-15);
  for (double& c : p.estimates)
    c *= 2.0;
  EXPECT_NEAR(sigma2_update(p, c0).value, 2.0, 1e-15);
  // scale equivariance
  const double base = sigma2_update(p, c0).value;
  for (double& c : p.estimates)
    c *= 0.37;
  EXPECT_NEAR(sigma2_update(p, c0).value, 0.37 * base, 1e-15);
}

TEST(Sigma2Update, ThreePairHandValue)
{
  const FittedEstimator c0{EstimatorSpec{EstimatorKind::monotone, {KernelFamily::gaussian, 1.0}}, PseudoDataset({0.0}), 1.0};
  CovPointSet p{{0.5, 1.0, 2.0}, {0.9, 0.5, 0.1}, {1, 1, 1}, 1.0};
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double g = 1.0 / std::sqrt(2.0 * p.distances[i] * p.distances[i] + 1.0);
    num += p.estimates[i] * g;
    den += g * g;
  }
  EXPECT_NEAR(sigma2_update(p, c0).value, num / den, 1e-15);
}

TEST(Sigma2Update, FloorAndDegenerate)
{
  const FittedEstimator c0{EstimatorSpec{EstimatorKind::monotone, {KernelFamily::gaussian, 1.0}}, PseudoDataset({0.0}), 1.0};
  CovPointSet p{{0.5}, {-3.0}, {1}, 1.0};
  EXPECT_EQ(sigma2_update(p, c0).value, sigma2_floor);
  // C0 underflows to zero at every distance
  const FittedEstimator flat{EstimatorSpec{EstimatorKind::monotone, {KernelFamily::gaussian, 1e-3}},
                             PseudoDataset({1000.0}), 1.0};
  CovPointSet q{{5.0}, {0.3}, {1}, 1.0};
  const auto upd = sigma2_update(q, flat, 0.8);
  EXPECT_TRUE(upd.degenerate);
  EXPECT_EQ(upd.value, 0.8);
}

TEST(BinDistances, Examples)
{
  CovPointSet p{{0.2, 0.7, 1.1, 2.9}, {1.0, 3.0, -1.0, 2.0}, {1, 1, 1, 1}, 0.5};
  auto one = bin_distances(p, 100.0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(one.estimates[0], 1.25, 1e-15);
  EXPECT_NEAR(one.distances[0], 1.225, 1e-15);
  EXPECT_EQ(one.counts[0], 4.0);
  EXPECT_EQ(one.diagonal_variance, 0.5);

  auto unit = bin_distances(p, 1.0);
  ASSERT_EQ(unit.size(), 3u);
  EXPECT_NEAR(unit.distances[0], 0.45, 1e-15);
  EXPECT_NEAR(unit.estimates[0], 2.0, 1e-15);
  EXPECT_NEAR(unit.estimates[1], -1.0, 1e-15);
  EXPECT_NEAR(unit.estimates[2], 2.0, 1e-15);

  CovPointSet same{{1.5, 1.5}, {2.0, 4.0}, {1, 1}, 1.0};
  EXPECT_NEAR(bin_distances(same, 0.1).estimates[0], 3.0, 1e-15);
  EXPECT_THROW(bin_distances(p, 0.0), config_error);
}

TEST(RescaleDistances, MaxBecomesTarget)
{
  CovPointSet p{{0.5, 2.0, 4.0}, {1, 1, 1}, {1, 1, 1}, 1.0};
  EXPECT_NEAR(rescale_distances(p, 8.0), 2.0, 1e-15);
  EXPECT_EQ(p.distances, (std::vector<double>{1.0, 4.0, 8.0}));
}

TEST(GenerateRegression, NoiseFreeAndDeterministic)
{
  Rng a(3), b(3);
  const auto d = generate_regression(TruthFunction::wave_reg(), 200, 0.0, 10.0, 0.0, a);
  ASSERT_EQ(d.size(), 200u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.y[i], truth_eval(TruthFunction::wave_reg(), d.x[i]));
    EXPECT_GE(d.x[i], 0.0);
    EXPECT_LE(d.x[i], 10.0);
  }
  const auto e = generate_regression(TruthFunction::wave_reg(), 200, 0.0, 10.0, 0.0, b);
  EXPECT_EQ(d.x, e.x);
  EXPECT_THROW(generate_regression(TruthFunction::wave_reg(), 0, 0.0, 10.0, 0.2, a), config_error);
  EXPECT_THROW(generate_regression(TruthFunction::wave_reg(), 5, 0.0, 10.0, -0.2, a), config_error);
}

TEST(GenerateRegression, NoiseLevel)
{
  Rng rng(4);
  const auto d = generate_regression(TruthFunction::spherical_reg(), 20000, 0.0, 10.0, 0.2, rng);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = d.y[i] - truth_eval(TruthFunction::spherical_reg(), d.x[i]);
    s += e * e;
  }
  EXPECT_NEAR(std::sqrt(s / d.size()), 0.2, 0.01);
}

TEST(Rmspe, Examples)
{
  const FittedEstimator fit{EstimatorSpec{EstimatorKind::monotone, {KernelFamily::gaussian, 1.0}}, PseudoDataset({0.0}), 1.0};
  const std::vector<double> inputs{0.5, 1.0, 2.0};
  double s = 0.0;
  for (double r : inputs) {
    const double e = 1.0 / std::sqrt(2.0 * r * r + 1.0) - std::exp(-r);
    s += e * e;
  }
  EXPECT_NEAR(rmspe(fit, TruthFunction::exp_cov(), inputs), std::sqrt(s / 3.0), 1e-15);
  EXPECT_THROW(rmspe(fit, TruthFunction::exp_cov(), {}), config_error);
}

TEST(FitCovariance, OuterLoopContract)
{
  Rng rng(12);
  const auto field = simulate_gp(TruthFunction::exp_cov(), 40, Box::square(0, 5), rng);
  CovFitOptions o;
  o.kind = EstimatorKind::monotone;
  o.idea.m = 3;
  o.idea.h = 0.2;
  o.idea.seed = 3;
  o.outer_iters = 1;
  const auto res = fit_covariance(field, o);
  EXPECT_EQ(res.traces.size(), 1u);
  EXPECT_EQ(res.sigma2_history.size(), 2u);
  EXPECT_EQ(res.fit.sigma2, res.sigma2_history.back());
  EXPECT_EQ(evaluate(res.fit, 0.0), res.fit.sigma2);

  o.outer_iters = 4;
  const auto more = fit_covariance(field, o);
  EXPECT_LE(more.traces.size(), 4u);
  EXPECT_GE(more.traces.size(), 1u);
  o.kind = EstimatorKind::general;
  EXPECT_THROW(fit_covariance(field, o), config_error);
}

TEST(FitCovariance, RoundTripRecoversVariance)
{
  const FittedEstimator truth{EstimatorSpec{EstimatorKind::monotone, {KernelFamily::gaussian, 0.2}},
                              PseudoDataset({0.3, 0.8, 1.1}), 2.0};
  CovPointSet p;
  for (int i = 1; i <= 300; ++i) {
    const double r = 0.02 * i;
    p.distances.push_back(r);
    p.estimates.push_back(evaluate(truth, r));
    p.counts.push_back(1.0);
  }
  p.diagonal_variance = 2.0;
  CovFitOptions o;
  o.kind = EstimatorKind::monotone;
  o.idea.m = 3;
  o.idea.h = 0.2;
  o.idea.seed = 1;
  const auto res = fit_covariance(p, o);
  EXPECT_NEAR(res.fit.sigma2, 2.0, 0.05);
}

TEST(FitCovariance, BinningAndCv)
{
  Rng rng(13);
  const auto field = simulate_gp(TruthFunction::exp_cov(), 60, Box::square(0, 5), rng);
  CovFitOptions o;
  o.kind = EstimatorKind::monotone;
  o.idea.seed = 2;
  o.bin_width = 0.25;
  CvConfig cv;
  cv.h_grid = {0.1, 0.3};
  cv.m_grid = {2, 3};
  cv.k = 3;
  o.cv = cv;
  o.outer_iters = 2;
  const auto res = fit_covariance(field, o);
  ASSERT_TRUE(res.cv.has_value());
  EXPECT_EQ(res.fit.spec.kernel.h, res.cv->chosen_h);
  EXPECT_EQ(res.fit.pseudo.size() % res.cv->chosen_m, 0u);
  EXPECT_TRUE(std::isfinite(res.fit.sigma2));
}

TEST(FitCovariance, ZeroVarianceRejected)
{
  SpatialField f{{0, 0, 1, 0, 0, 1}, 2, {3.0, 3.0, 3.0}};
  CovFitOptions o;
  o.kind = EstimatorKind::monotone;
  EXPECT_THROW(fit_covariance(f, o), numeric_error);
}
