// Copyright 2026 The trickle-workbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "trickle/error.hpp"

// Adaptive Gauss-Kronrod integration (21-point Kronrod extension of the
// 10-point Gauss rule, QUADPACK abscissae and weights).
namespace trickle::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
};

namespace detail {

inline constexpr double xgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr double wgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600142844264, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights belong to the odd-indexed Kronrod nodes 1, 3, 5, 7, 9.
inline constexpr double wg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment kronrod21(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * wgk[10];
  double gauss = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double dx = half * xgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += wgk[j] * sum;
    if (j % 2 == 1) gauss += wg[j / 2] * sum;
  }
  const double value = kronrod * half;
  const double err = std::abs((kronrod - gauss) * half);
  return {a, b, value, err};
}

}  // namespace detail

/// Integrates f over the finite interval [a, b]. Throws NumericError when the
/// error estimate does not meet max(abs_tol, rel_tol*|I|) within the interval
/// budget.
template <class F>
Result integrate(const F& f, double a, double b, const Options& opt = {}) {
  Result result;
  if (a == b) return result;
  if (b < a) {
    result = integrate(f, b, a, opt);
    result.value = -result.value;
    return result;
  }
  std::priority_queue<detail::Segment> work;
  auto first = detail::kronrod21(f, a, b);
  result.evaluations = 21;
  double total = first.value;
  double total_error = first.error;
  work.push(first);
  int intervals = 1;
  while (total_error > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (intervals >= opt.max_intervals) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "quadrature did not converge on [" << a << ", " << b
          << "]: estimate " << total << ", error " << total_error << " after "
          << intervals << " intervals";
      throw NumericError(msg.str());
    }
    const auto worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval exhausted in floating point; accept its contribution.
      total_error -= worst.error;
      continue;
    }
    const auto left = detail::kronrod21(f, worst.a, mid);
    const auto right = detail::kronrod21(f, mid, worst.b);
    result.evaluations += 42;
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    work.push(left);
    work.push(right);
    ++intervals;
  }
  // Re-sum from the segments to shed accumulated rounding.
  double sum = 0.0;
  double err = 0.0;
  while (!work.empty()) {
    sum += work.top().value;
    err += work.top().error;
    work.pop();
  }
  result.value = sum;
  result.abs_error = std::max(err, 0.0);
  return result;
}

/// Integrates a non-negative unimodal f over [a, inf) in consecutive panels of
/// width `scale`, widening once the integrand is decreasing, until a panel no
/// longer changes the running total at the requested tolerance.
template <class F>
Result integrate_to_infinity(const F& f, double a, double scale,
                             const Options& opt = {}) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw NumericError("integrate_to_infinity: invalid panel scale");
  Result result;
  double lo = a;
  double width = scale;
  double previous_edge = f(a);
  for (int panel = 0; panel < 20000; ++panel) {
    const double hi = lo + width;
    Options panel_opt = opt;
    panel_opt.abs_tol =
        std::max(opt.abs_tol * 1e-2, opt.rel_tol * 1e-2 * std::abs(result.value));
    const Result part = integrate(f, lo, hi, panel_opt);
    result.value += part.value;
    result.abs_error += part.abs_error;
    result.evaluations += part.evaluations;
    const double edge = f(hi);
    const bool decreasing = edge <= previous_edge;
    const double negligible =
        std::max(opt.abs_tol, opt.rel_tol * std::abs(result.value)) * 1e-3;
    if (decreasing && std::abs(part.value) <= negligible && panel > 0 &&
        (result.value != 0.0 || panel >= 60))
      return result;
    if (decreasing) width *= 1.5;
    previous_edge = edge;
    lo = hi;
  }
  throw NumericError("integrate_to_infinity: tail did not decay");
}

}  // namespace trickle::quad
