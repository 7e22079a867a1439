#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "beamwander/errors.hpp"

namespace beamwander {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_intervals = 2000;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment &o) const { return error < o.error; }
};

template <class F> Segment gauss_kronrod_15(F &f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1)
      gauss += kGaussWeights[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b].
///
/// The interval with the largest error estimate is bisected until the summed
/// error satisfies max(abs_tol, rel_tol*|I|) or the interval budget runs out.
/// Interior breakpoints (sorted, inside (a, b)) seed the initial partition.
template <class F>
QuadratureResult integrate_adaptive(F &&f, double a, double b, QuadratureOptions opts = {},
                                    const std::vector<double> &breakpoints = {}) {
  std::vector<double> edges{a};
  for (double p : breakpoints)
    if (p > a && p < b)
      edges.push_back(p);
  edges.push_back(b);

  std::priority_queue<detail::Segment> heap;
  QuadratureResult out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto s = detail::gauss_kronrod_15(f, edges[i], edges[i + 1]);
    out.value += s.value;
    out.abs_error += s.error;
    out.evaluations += 15;
    heap.push(s);
  }

  while (out.abs_error > std::max(opts.abs_tol, opts.rel_tol * std::abs(out.value))) {
    if (static_cast<int>(heap.size()) >= opts.max_intervals)
      return out;
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    out.value += left.value + right.value - worst.value;
    out.abs_error += left.error + right.error - worst.error;
    out.evaluations += 30;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the leaves to shed the drift of the running updates.
  out.value = 0.0;
  out.abs_error = 0.0;
  while (!heap.empty()) {
    out.value += heap.top().value;
    out.abs_error += heap.top().error;
    heap.pop();
  }
  out.converged = true;
  return out;
}

/// Same as integrate_adaptive but raises NumericalError when not converged.
template <class F>
double integrate_or_throw(F &&f, double a, double b, QuadratureOptions opts = {},
                          const std::vector<double> &breakpoints = {}) {
  auto r = integrate_adaptive(std::forward<F>(f), a, b, opts, breakpoints);
  if (!r.converged)
    throw NumericalError("adaptive quadrature did not converge", r.abs_error);
  return r.value;
}

} // namespace beamwander
