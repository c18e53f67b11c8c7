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

#include <cmath>
#include <functional>

#include "trickle/error.hpp"
#include "trickle/quadrature.hpp"

// Numerical checks of the two integral identities behind the normalization
// constant and the moment formula. Each identity is evaluated both as the
// multiple integral and as its one-dimensional reduction.
namespace trickle::identities {

using Kernel = std::function<double(double)>;

namespace detail {

inline quad::Options nested_options() {
  quad::Options o;
  o.abs_tol = 1e-13;
  o.rel_tol = 1e-11;
  return o;
}

// I_0(s) = F(s), I_m(s) = int_0^L I_{m-1}(s + x) dx.
inline double nested_shift(const Kernel& f, int depth, double shift,
                           double cutoff) {
  if (depth == 0) return f(shift);
  auto inner = [&](double x) {
    return nested_shift(f, depth - 1, shift + x, cutoff);
  };
  return quad::integrate(inner, 0.0, cutoff, nested_options()).value;
}

}  // namespace detail

/// (k+1)-fold integral of F(x_1 + ... + x_{k+1}) over the positive orthant,
/// by nested quadrature truncated at `cutoff` per coordinate.
inline double simplex_nested(const Kernel& f, int k, double cutoff) {
  require(k >= 0, "k must be >= 0");
  return detail::nested_shift(f, k + 1, 0.0, cutoff);
}

/// int_0^L x^k / k! F(x) dx.
inline double simplex_reduced(const Kernel& f, int k, double cutoff) {
  require(k >= 0, "k must be >= 0");
  const double log_fact = std::lgamma(k + 1.0);
  auto g = [&](double x) {
    return x <= 0.0 ? (k == 0 ? f(x) : 0.0)
                    : std::exp(k * std::log(x) - log_fact) * f(x);
  };
  return quad::integrate(g, 0.0, cutoff, detail::nested_options()).value;
}

/// int_0^L int_0^L x^j y^k F(x + y) dx dy.
inline double convolution_double(const Kernel& f, int j, int k, double cutoff) {
  require(j >= 0 && k >= 0, "powers must be >= 0");
  auto outer = [&](double y) {
    auto inner = [&](double x) {
      return std::pow(x, j) * std::pow(y, k) * f(x + y);
    };
    return quad::integrate(inner, 0.0, cutoff, detail::nested_options()).value;
  };
  return quad::integrate(outer, 0.0, cutoff, detail::nested_options()).value;
}

/// k! j! / (k+j+1)! * int_0^L z^{k+j+1} F(z) dz.
inline double convolution_reduced(const Kernel& f, int j, int k, double cutoff) {
  require(j >= 0 && k >= 0, "powers must be >= 0");
  const int m = k + j + 1;
  const double log_coeff =
      std::lgamma(k + 1.0) + std::lgamma(j + 1.0) - std::lgamma(m + 1.0);
  auto g = [&](double z) {
    return z <= 0.0 ? 0.0 : std::exp(log_coeff + m * std::log(z)) * f(z);
  };
  return quad::integrate(g, 0.0, cutoff, detail::nested_options()).value;
}

}  // namespace trickle::identities
