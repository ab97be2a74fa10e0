#pragma once

#include "pdreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

namespace pdreg::specfun {

/// How a one-dimensional integral is evaluated.
///
/// Fixed rules (Gauss-Legendre, periodic trapezoid) use `node_count` nodes;
/// adaptive rules refine until the estimated absolute error is below
/// `tolerance` and fail with numeric_error when the budget runs out.
struct QuadratureRule
{
  enum class Kind
  {
    gauss_legendre,
    periodic_trapezoid,
    adaptive_simpson,
    adaptive_gauss_kronrod
  };

  Kind kind = Kind::gauss_legendre;
  int node_count = 64;
  double tolerance = 1e-12;

  static QuadratureRule gauss_legendre(int nodes = 64)
  {
    return checked({Kind::gauss_legendre, nodes, 1e-12});
  }
  /// For periodic integrands; `min_nodes` is a floor, callers that know the
  /// integrand bandwidth may raise the count.
  static QuadratureRule periodic_trapezoid(int min_nodes = 16)
  {
    return checked({Kind::periodic_trapezoid, min_nodes, 1e-12});
  }
  static QuadratureRule adaptive_simpson(double tol = 1e-12)
  {
    return checked({Kind::adaptive_simpson, 8, tol});
  }
  static QuadratureRule adaptive_gauss_kronrod(double tol = 1e-12)
  {
    return checked({Kind::adaptive_gauss_kronrod, 8, tol});
  }

  void validate() const
  {
    if (node_count < 8)
      throw config_error("QuadratureRule: node_count must be >= 8");
    if (!(tolerance > 0.0))
      throw config_error("QuadratureRule: tolerance must be > 0");
  }

private:
  static QuadratureRule checked(QuadratureRule r)
  {
    r.validate();
    return r;
  }
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreTable
{
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreTable make_gauss_legendre(int n)
{
  if (n < 1)
    throw config_error("make_gauss_legendre: n must be positive");
  GaussLegendreTable t;
  t.nodes.resize(n);
  t.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_n starting from the Tricomi approximation.
    long double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = 0;
      for (int j = 1; j <= n; ++j) {
        const long double p2 = p1;
        p1 = p0;
        p0 = ((2.0L * j - 1.0L) * z * p1 - (j - 1.0L) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0L);
      const long double dz = p0 / dp;
      z -= dz;
      if (std::fabs(static_cast<double>(dz)) < 1e-19)
        break;
    }
    // recompute derivative at the converged root
    long double p0 = 1, p1 = 0;
    for (int j = 1; j <= n; ++j) {
      const long double p2 = p1;
      p1 = p0;
      p0 = ((2.0L * j - 1.0L) * z * p1 - (j - 1.0L) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0L);
    const double w = static_cast<double>(2.0L / ((1.0L - z * z) * dp * dp));
    t.nodes[i] = -static_cast<double>(z);
    t.nodes[n - 1 - i] = static_cast<double>(z);
    t.weights[i] = w;
    t.weights[n - 1 - i] = w;
  }
  return t;
}

template <class F>
double integrate_gauss_legendre(const F& f, double a, double b, const GaussLegendreTable& t)
{
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < t.nodes.size(); ++i)
    sum += t.weights[i] * f(mid + half * t.nodes[i]);
  return sum * half;
}

template <class F>
double integrate_gauss_legendre(const F& f, double a, double b, int n)
{
  return integrate_gauss_legendre(f, a, b, make_gauss_legendre(n));
}

namespace detail {

template <class F>
struct SimpsonState
{
  const F& f;
  long evals = 0;
  bool failed = false;
};

template <class F>
double simpson_step(SimpsonState<F>& s,
                    double a, double fa,
                    double m, double fm,
                    double b, double fb,
                    double whole, double tol, int depth)
{
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = s.f(lm);
  const double frm = s.f(rm);
  s.evals += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol || m - a < 1e-15 * std::max(1.0, std::fabs(a))) {
    if (std::fabs(delta) > 15.0 * tol)
      s.failed = true;
    return left + right + delta / 15.0;
  }
  if (depth <= 0) {
    s.failed = true;
    return left + right + delta / 15.0;
  }
  return simpson_step(s, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(s, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson with Richardson correction. Fails with numeric_error
/// when the recursion depth budget is exhausted before the tolerance is met.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48)
{
  if (a == b)
    return 0.0;
  detail::SimpsonState<F> s{f};
  // A coarse pre-split keeps oscillatory integrands from fooling the first
  // error estimate.
  constexpr int panels = 16;
  double total = 0.0;
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double hi = p + 1 == panels ? b : lo + width;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo), fmid = f(mid), fhi = f(hi);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_step(s, lo, flo, mid, fmid, hi, fhi, whole, tol / panels, max_depth);
  }
  if (s.failed)
    throw numeric_error("adaptive_simpson: tolerance not reached within depth budget");
  return total;
}

namespace detail {

struct GkSegment
{
  double a, b, value, error;
  bool operator<(const GkSegment& o) const { return error < o.error; }
};

template <class F>
GkSegment gauss_kronrod15(const F& f, double a, double b)
{
  static constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * wgk[7];
  double g = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = hw * xgk[j];
    const double s = f(c - dx) + f(c + dx);
    k += wgk[j] * s;
    if (j % 2 == 1)
      g += wg[j / 2] * s;
  }
  return {a, b, k * hw, std::fabs((k - g) * hw)};
}

} // namespace detail

/// Globally adaptive G7/K15 quadrature; bisects the segment with the
/// largest error estimate until the summed estimate drops below `tol`.
template <class F>
double adaptive_gauss_kronrod(const F& f, double a, double b, double tol, int max_segments = 20000)
{
  if (a == b)
    return 0.0;
  std::priority_queue<detail::GkSegment> heap;
  constexpr int initial = 8;
  double value = 0.0, error = 0.0;
  const double width = (b - a) / initial;
  for (int i = 0; i < initial; ++i) {
    const double lo = a + i * width;
    const double hi = i + 1 == initial ? b : lo + width;
    auto seg = detail::gauss_kronrod15(f, lo, hi);
    value += seg.value;
    error += seg.error;
    heap.push(seg);
  }
  int segments = initial;
  while (error > tol) {
    if (segments >= max_segments)
      throw numeric_error("adaptive_gauss_kronrod: tolerance " + std::to_string(tol) +
                          " not reached (estimate " + std::to_string(error) + ")");
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b))
      throw numeric_error("adaptive_gauss_kronrod: interval underflow");
    auto left = detail::gauss_kronrod15(f, worst.a, mid);
    auto right = detail::gauss_kronrod15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }
  // re-sum to shed the accumulated update rounding
  double fresh = 0.0;
  while (!heap.empty()) {
    fresh += heap.top().value;
    heap.pop();
  }
  return fresh;
}

/// Mean of f over one period [a, a + period) sampled at `n` equispaced
/// points; spectrally accurate for smooth periodic f.
template <class F>
double periodic_trapezoid_mean(const F& f, double a, double period, int n)
{
  double sum = 0.0;
  for (int k = 0; k < n; ++k)
    sum += f(a + period * k / n);
  return sum / n;
}

/// Integrates f over [a, b] with the given rule. For periodic_trapezoid the
/// integrand must be (b - a)-periodic.
template <class F>
double integrate(const F& f, double a, double b, const QuadratureRule& rule)
{
  rule.validate();
  switch (rule.kind) {
  case QuadratureRule::Kind::gauss_legendre:
    return integrate_gauss_legendre(f, a, b, rule.node_count);
  case QuadratureRule::Kind::periodic_trapezoid:
    return (b - a) * periodic_trapezoid_mean(f, a, b - a, rule.node_count);
  case QuadratureRule::Kind::adaptive_simpson:
    return adaptive_simpson(f, a, b, rule.tolerance);
  case QuadratureRule::Kind::adaptive_gauss_kronrod:
    return adaptive_gauss_kronrod(f, a, b, rule.tolerance);
  }
  throw config_error("integrate: unknown quadrature kind");
}

} // namespace pdreg::specfun
