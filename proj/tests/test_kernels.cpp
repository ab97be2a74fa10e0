#include "oracles.hpp"

#include "pdreg/idea.hpp"
#include "pdreg/kernels.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace pdreg;

namespace {

const KernelFamily all_families[] = {KernelFamily::uniform, KernelFamily::epanechnikov, KernelFamily::gaussian};

} // namespace

TEST(KernelDensity, Definitions)
{
  EXPECT_EQ(kernel_density({KernelFamily::uniform, 1.0}, 0.0), 0.5);
  EXPECT_EQ(kernel_density({KernelFamily::epanechnikov, 1.0}, 1.5), 0.0);
  EXPECT_NEAR(kernel_density({KernelFamily::gaussian, 2.0}, 0.0), 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi)), 1e-16);
  EXPECT_NEAR(kernel_density({KernelFamily::epanechnikov, 0.5}, 0.25), 2.0 * 0.75 * 0.75, 1e-15);
}

TEST(KernelDensity, IntegratesToOneAndIsSymmetric)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (auto f : all_families) {
    for (double h : {0.3, 1.0, 2.5}) {
      const KernelSpec k{f, h};
      const double lo = f == KernelFamily::gaussian ? -12 * h : -h;
      const double total = oracle::integrate([&](double t) { return kernel_density(k, t); }, lo, -lo, 0.1 * h);
      EXPECT_NEAR(total, 1.0, 1e-10) << to_string(f) << " h " << h;
      for (int i = 0; i < 100; ++i) {
        const double t = u(rng);
        ASSERT_EQ(kernel_density(k, t), kernel_density(k, -t));
        ASSERT_GE(kernel_density(k, t), 0.0);
      }
    }
  }
}

TEST(KernelDensity, InvalidBandwidth)
{
  EXPECT_THROW(kernel_density({KernelFamily::gaussian, 0.0}, 1.0), config_error);
  EXPECT_THROW(kernel_density({KernelFamily::gaussian, -1.0}, 1.0), config_error);
  EXPECT_THROW(kernel_density({KernelFamily::gaussian, NAN}, 1.0), config_error);
}

TEST(KernelSample, SupportAndMoments)
{
  Rng rng(11);
  for (auto f : all_families) {
    const KernelSpec k{f, 1.0};
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double e = kernel_sample(k, rng);
      if (f != KernelFamily::gaussian) {
        ASSERT_GE(e, -1.0);
        ASSERT_LE(e, 1.0);
      }
      sum += e;
      sq += e * e;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.02) << to_string(f);
    // second moment within 5 standard errors of the kernel's exact value
    EXPECT_NEAR(sq / n, kernel_second_moment(f), 0.025) << to_string(f);
  }
}

TEST(KernelSample, UnitBandwidthRegardlessOfSpec)
{
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i)
    ASSERT_EQ(kernel_sample(KernelSpec{KernelFamily::uniform, 7.0}, a), kernel_sample(KernelSpec{KernelFamily::uniform, 1.0}, b));
}

TEST(SurrogateCdf, Examples)
{
  const PseudoDataset any({0.3, 1.7});
  for (auto f : all_families)
    EXPECT_EQ(surrogate_cdf(any, {f, 0.4}, 0.0), 0.0);
  EXPECT_NEAR(surrogate_cdf(PseudoDataset({0.0}), {KernelFamily::gaussian, 1.0}, 40.0), 1.0, 1e-12);
  EXPECT_NEAR(surrogate_cdf(PseudoDataset({2.0}), {KernelFamily::uniform, 1.0}, 2.0), 0.5, 1e-15);
  EXPECT_THROW(surrogate_cdf(any, {KernelFamily::gaussian, 1.0}, -0.1), domain_error);
}

TEST(SurrogateCdf, MonotoneAndSaturates)
{
  const PseudoDataset p({0.1, 0.5, 2.0, 3.3});
  for (auto f : all_families) {
    double prev = 0.0;
    for (double u = 0.0; u < 20.0; u += 0.01) {
      const double c = surrogate_cdf(p, {f, 0.7}, u);
      ASSERT_GE(c, prev - 1e-15);
      prev = c;
    }
    EXPECT_NEAR(prev, 1.0, 1e-12);
  }
}

TEST(SurrogateCdf, DerivativeIsPdf)
{
  const PseudoDataset p({0.2, 1.1, 2.5});
  const KernelSpec k{KernelFamily::gaussian, 0.6};
  const double step = 1e-4;
  for (double u = step; u < 6.0; u += 0.05) {
    const double fd = (surrogate_cdf(p, k, u + step) - surrogate_cdf(p, k, u - step)) / (2 * step);
    ASSERT_NEAR(fd, surrogate_pdf(p, k, u), 1e-6) << u;
  }
}

TEST(SurrogatePdf, Examples)
{
  EXPECT_NEAR(surrogate_pdf(PseudoDataset({0.0}), {KernelFamily::gaussian, 1.0}, 0.0), 2.0 / std::sqrt(2.0 * std::numbers::pi),
              1e-16);
  EXPECT_EQ(surrogate_pdf(PseudoDataset({5.0}), {KernelFamily::uniform, 1.0}, 5.0), 0.5);
  EXPECT_THROW(surrogate_pdf(PseudoDataset({1.0}), {KernelFamily::uniform, 1.0}, -1.0), domain_error);
}

TEST(SurrogatePdf, IntegratesToOne)
{
  std::mt19937_64 rng(19);
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> uh(0.05, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(1 + trial % 7);
    for (double& x : v)
      x = e(rng);
    const PseudoDataset p(v);
    const KernelSpec k{KernelFamily::gaussian, uh(rng)};
    const double top = *std::max_element(v.begin(), v.end()) + 15.0 * k.h;
    const double total = oracle::integrate([&](double u) { return surrogate_pdf(p, k, u); }, 0.0, top, 0.05);
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(SurrogatePdf, ReflectionVanishesAwayFromBoundary)
{
  const double h = 0.1;
  const PseudoDataset p({1.0, 1.5, 3.0});  // all >= 10 h
  const KernelSpec k{KernelFamily::gaussian, h};
  for (double u = 0.8; u < 3.5; u += 0.01) {
    double plain = 0.0;
    for (double v : p.values)
      plain += oracle::kernel(2, (u - v) / h) / h;
    plain /= 3.0;
    ASSERT_NEAR(surrogate_pdf(p, k, u), plain, 1e-12);
  }
}

TEST(PseudoDataset, Validation)
{
  EXPECT_THROW(PseudoDataset(std::vector<double>{}).validate(true), config_error);
  EXPECT_THROW(PseudoDataset({1.0, -0.5}).validate(true), domain_error);
  EXPECT_NO_THROW(PseudoDataset({1.0, -0.5}).validate(false));
  EXPECT_THROW(PseudoDataset({1.0, NAN}).validate(false), domain_error);
}

TEST(KernelFamily, ParseRoundTrip)
{
  for (auto f : all_families)
    EXPECT_EQ(parse_kernel_family(to_string(f)), f);
  EXPECT_THROW(parse_kernel_family("triangle"), config_error);
}
