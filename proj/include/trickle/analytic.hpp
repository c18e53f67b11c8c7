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
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trickle/error.hpp"
#include "trickle/quadrature.hpp"
#include "trickle/topology.hpp"

// Closed and semi-closed forms for the inter-transmission time T of a single
// cell in steady state (tau_h = 1), under the model in which the attempt
// process is Poisson with rate n. All values are those of this Poisson
// surrogate; they describe the real protocol asymptotically in n.
namespace trickle::analytic {

struct AnalyticParams {
  int k = 1;
  double n = 1.0;  // cell size; real-valued so asymptotic sweeps can use it
  double eta = 0.0;

  void validate() const {
    require(k >= 1, "k must be >= 1");
    require(n >= 1.0, "n must be >= 1");
    require(eta >= 0.0 && eta < 1.0,
            "eta must lie in [0, 1) for analytic forms");
  }

  // Width of the Gaussian factor exp(-n x^2 / (2 (1 - eta))).
  double sigma() const { return std::sqrt((1.0 - eta) / n); }
  double gauss_exponent(double x) const {
    return n * x * x / (2.0 * (1.0 - eta));
  }
  AnalyticParams with_k(int other) const { return {other, n, eta}; }
};

inline nlohmann::json to_json(const AnalyticParams& p) {
  return {{"k", p.k}, {"n", p.n}, {"eta", p.eta},
          {"model", "analytic (Poisson surrogate)"}};
}

namespace detail {

inline quad::Options tight() {
  quad::Options o;
  o.abs_tol = 0.0;
  o.rel_tol = 1e-11;
  return o;
}

inline double log_sum_exp(std::span<const double> terms) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double t : terms) peak = std::max(peak, t);
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - peak);
  return peak + std::log(sum);
}

// k^j log x with the convention 0 * log 0 = 0.
inline double power_log(double x, int power) {
  return power == 0 ? 0.0 : power * std::log(x);
}

}  // namespace detail

/// Rate of successful broadcasts at time t after a broadcast, given that the
/// (k-1)-th previous broadcast happened nu earlier.
inline double hazard(double t, double nu, const AnalyticParams& p) {
  require(t >= 0.0 && nu >= 0.0, "hazard needs t, nu >= 0");
  require(p.eta < 1.0, "hazard is singular at eta = 1");
  const double u = t + nu - p.eta;
  return u < 0.0 ? 0.0 : p.n * u / (1.0 - p.eta);
}

/// Integral of the hazard over [0, t].
inline double cumulative_hazard(double t, double nu, const AnalyticParams& p) {
  const double u = t + nu - p.eta;
  if (u <= 0.0) return 0.0;
  if (nu < p.eta) return p.gauss_exponent(u);
  return p.n * (0.5 * t * t + t * (nu - p.eta)) / (1.0 - p.eta);
}

/// log C_(k,n) from the finite-sum representation. C_(1,n) is 1 by
/// convention, which makes j! C_k / C_(k+j) the j-th moment for k = 1 too.
inline double log_norm_constant(const AnalyticParams& p) {
  p.validate();
  const int k = p.k;
  if (k == 1) return 0.0;
  const double eta = p.eta;
  const double log_scale = std::log(2.0 * (1.0 - eta) / p.n);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(k));
  if (eta > 0.0) terms.push_back((k - 1) * std::log(eta) - std::lgamma(k));
  for (int i = 0; i <= k - 2; ++i) {
    const int eta_power = k - i - 2;
    if (eta == 0.0 && eta_power > 0) continue;
    // binom(k-2, i) / (2 (k-2)!) = 1 / (2 i! (k-2-i)!)
    terms.push_back(-std::log(2.0) - std::lgamma(i + 1.0) -
                    std::lgamma(eta_power + 1.0) +
                    detail::power_log(eta, eta_power) +
                    0.5 * (i + 1) * log_scale + std::lgamma(0.5 * (i + 1)));
  }
  return -detail::log_sum_exp(terms);
}

inline double norm_constant(const AnalyticParams& p) {
  return std::exp(log_norm_constant(p));
}

/// C_(k,n) by adaptive quadrature of its defining integral (k >= 2).
inline double norm_constant_integral(const AnalyticParams& p) {
  p.validate();
  require(p.k >= 2, "integral form of C needs k >= 2");
  const int k = p.k;
  const double log_fact = std::lgamma(k - 1.0);
  auto integrand = [&](double t) {
    return std::exp(detail::power_log(t, k - 2) - log_fact -
                    p.gauss_exponent(t - p.eta));
  };
  const double plateau =
      p.eta > 0.0 ? std::exp((k - 1) * std::log(p.eta) - std::lgamma(k)) : 0.0;
  const double tail =
      quad::integrate_to_infinity(integrand, p.eta, p.sigma(), detail::tight())
          .value;
  return 1.0 / (plateau + tail);
}

// pi^{-1/2} (2n)^{(k-1)/2} Gamma(k/2), the eta = 0 closed form.
inline double norm_constant_eta0(int k, double n) {
  return std::exp(-0.5 * std::log(std::numbers::pi) +
                  0.5 * (k - 1) * std::log(2.0 * n) + std::lgamma(0.5 * k));
}

// (k-1)! / eta^{k-1}, the n -> infinity limit for eta > 0.
inline double norm_constant_limit(int k, double eta) {
  return std::exp(std::lgamma(k) - (k - 1) * std::log(eta));
}

/// k = 1: P[T <= t].
inline double cdf_T1(double t, const AnalyticParams& p) {
  p.validate();
  if (t < p.eta) return 0.0;
  return -std::expm1(-p.gauss_exponent(t - p.eta));
}

inline double pdf_T1(double t, const AnalyticParams& p) {
  p.validate();
  if (t < p.eta) return 0.0;
  const double u = t - p.eta;
  return p.n * u / (1.0 - p.eta) * std::exp(-p.gauss_exponent(u));
}

/// Stationary joint density of k-1 consecutive inter-transmission times.
inline double joint_density(std::span<const double> times,
                            const AnalyticParams& p) {
  p.validate();
  require(p.k >= 2, "joint density needs k >= 2");
  require(times.size() == static_cast<std::size_t>(p.k - 1),
          "joint density needs exactly k-1 times");
  double sum = 0.0;
  for (double t : times) {
    require(t >= 0.0, "times must be >= 0");
    sum += t;
  }
  const double c = norm_constant(p);
  return sum < p.eta ? c : c * std::exp(-p.gauss_exponent(sum - p.eta));
}

/// Density of the sum of k-1 consecutive inter-transmission times.
inline double sum_density(double s, const AnalyticParams& p) {
  p.validate();
  require(p.k >= 2, "sum density needs k >= 2");
  if (s < 0.0) return 0.0;
  double log_value = log_norm_constant(p) - std::lgamma(p.k - 1.0) +
                     detail::power_log(s, p.k - 2);
  if (s >= p.eta) log_value -= p.gauss_exponent(s - p.eta);
  return std::exp(log_value);
}

/// Density of one inter-transmission time. For k >= 2 the integral over the
/// sum of the previous k-1 gaps is evaluated by adaptive quadrature.
inline double marginal_density(double t, const AnalyticParams& p) {
  p.validate();
  if (t < 0.0) return 0.0;
  if (p.k == 1) return pdf_T1(t, p);
  const int k = p.k;
  const double log_prefactor = log_norm_constant(p) - std::lgamma(k - 1.0) +
                               std::log(p.n / (1.0 - p.eta));
  auto integrand = [&](double nu) {
    const double u = t + nu - p.eta;
    if (u <= 0.0 || (nu <= 0.0 && k > 2)) return 0.0;
    return std::exp(log_prefactor + detail::power_log(nu, k - 2) +
                    std::log(u) - p.gauss_exponent(u));
  };
  const double lower = std::max(0.0, p.eta - t);
  return quad::integrate_to_infinity(integrand, lower, p.sigma(),
                                     detail::tight())
      .value;
}

/// P[T <= t], integrating the conditional CDF 1 - exp(-Lambda(t | nu))
/// against the density of the sum of the previous k-1 gaps.
inline double marginal_cdf(double t, const AnalyticParams& p) {
  p.validate();
  if (t <= 0.0) return 0.0;
  if (p.k == 1) return cdf_T1(t, p);
  auto integrand = [&](double nu) {
    const double lambda = cumulative_hazard(t, nu, p);
    if (lambda <= 0.0) return 0.0;
    return -std::expm1(-lambda) * sum_density(nu, p);
  };
  const double lower = std::max(0.0, p.eta - t);
  double total = 0.0;
  if (lower < p.eta)
    total += quad::integrate(integrand, lower, p.eta, detail::tight()).value;
  total += quad::integrate_to_infinity(integrand, std::max(lower, p.eta),
                                       p.sigma(), detail::tight())
               .value;
  return std::min(total, 1.0);
}

/// j-th moment j! C_(k,n) / C_(k+j,n).
inline double moment(int j, const AnalyticParams& p) {
  require(j >= 0, "moment order must be >= 0");
  p.validate();
  if (j == 0) return 1.0;
  return std::exp(std::lgamma(j + 1.0) + log_norm_constant(p) -
                  log_norm_constant(p.with_k(p.k + j)));
}

// eta = 0: j! (2n)^{-j/2} Gamma(k/2) / Gamma((k+j)/2).
inline double moment_eta0(int j, int k, double n) {
  return std::exp(std::lgamma(j + 1.0) - 0.5 * j * std::log(2.0 * n) +
                  std::lgamma(0.5 * k) - std::lgamma(0.5 * (k + j)));
}

// eta > 0, n -> infinity: (k-1)! j! / (k+j-1)! eta^j.
inline double moment_limit(int j, int k, double eta) {
  return std::exp(std::lgamma(k) + std::lgamma(j + 1.0) - std::lgamma(k + j) +
                  j * std::log(eta));
}

/// Expected broadcasts per interval of length tau_h: C_(k+1,n) / C_(k,n).
inline double expected_transmissions(const AnalyticParams& p) {
  p.validate();
  return std::exp(log_norm_constant(p.with_k(p.k + 1)) -
                  log_norm_constant(p));
}

/// Leading-order large-n forms: sqrt(2n) Gamma((k+1)/2) / Gamma(k/2) when
/// eta = 0, and k/eta - (k/eta^2) sqrt(pi (1-eta) / (2n)) otherwise.
inline double expected_transmissions_asymptotic(const AnalyticParams& p) {
  p.validate();
  if (p.eta == 0.0)
    return std::sqrt(2.0 * p.n) *
           std::exp(std::lgamma(0.5 * (p.k + 1)) - std::lgamma(0.5 * p.k));
  return p.k / p.eta - p.k / (p.eta * p.eta) *
                           std::sqrt(std::numbers::pi * (1.0 - p.eta) /
                                     (2.0 * p.n));
}

// ---------------------------------------------------------------------------
// Limit laws.

/// eta = 0 limit density of sqrt(n/2) T via the two-term recursion seeded
/// with f2(t) = 2/sqrt(pi) exp(-t^2) and f3(t) = sqrt(pi) erfc(t).
inline double limit_density_eta0_recursive(int k, double t) {
  require(k >= 2, "limit density needs k >= 2");
  require(t >= 0.0, "t must be >= 0");
  const double f2 = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-t * t);
  if (k == 2) return f2;
  const double f3 = std::sqrt(std::numbers::pi) * std::erfc(t);
  double older = f2;
  double old = f3;
  for (int m = 4; m <= k; ++m) {
    const double ratio = std::exp(std::lgamma(0.5 * m) - std::lgamma(0.5 * (m - 1)));
    const double next = (m - 2.0) / (m - 3.0) * older -
                        ratio * 2.0 * t / (m - 3.0) * old;
    older = old;
    old = next;
  }
  return old;
}

/// eta = 0 limit density by direct quadrature:
///   f(t) = 2 (k-2) / Gamma((k-1)/2) * int_0^inf x^{k-3} exp(-(t+x)^2) dx
/// for k >= 3; k = 2 has the closed form.
inline double limit_density_eta0_direct(int k, double t) {
  require(k >= 2, "limit density needs k >= 2");
  require(t >= 0.0, "t must be >= 0");
  if (k == 2) return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-t * t);
  const double log_prefactor = std::log(2.0 * (k - 2)) - std::lgamma(0.5 * (k - 1));
  auto integrand = [&](double x) {
    if (x <= 0.0 && k > 3) return 0.0;
    const double s = t + x;
    return std::exp(log_prefactor + detail::power_log(x, k - 3) - s * s);
  };
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-13;
  return quad::integrate_to_infinity(integrand, 0.0, 0.25, opt).value;
}

// The recursion loses digits to cancellation as k grows; above k = 12 the
// direct integral is used.
inline double limit_density_eta0(int k, double t) {
  return k <= 12 ? limit_density_eta0_recursive(k, t)
                 : limit_density_eta0_direct(k, t);
}

/// eta > 0 limit density of T: eta-scaled Beta(1, k-1).
inline double limit_density_eta_pos(int k, double eta, double t) {
  require(k >= 2, "limit density needs k >= 2");
  require(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
  if (t < 0.0 || t > eta) return 0.0;
  return (k - 1) / eta * std::pow(1.0 - t / eta, k - 2);
}

inline double limit_cdf_eta_pos(int k, double eta, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= eta) return 1.0;
  return 1.0 - std::pow(1.0 - t / eta, k - 1);
}

/// sup |F(x) - G(x)| over a uniform grid on [lo, hi], refined around the
/// coarse maximizer.
inline double cdf_sup_distance(const std::function<double(double)>& f,
                               const std::function<double(double)>& g,
                               double lo, double hi, int points = 1500) {
  require(hi > lo && points >= 2, "invalid grid for cdf distance");
  const double dx = (hi - lo) / (points - 1);
  double best = 0.0;
  double best_x = lo;
  for (int i = 0; i < points; ++i) {
    const double x = lo + dx * i;
    const double d = std::abs(f(x) - g(x));
    if (d > best) {
      best = d;
      best_x = x;
    }
  }
  const double a = std::max(lo, best_x - dx);
  const double fine = 2.0 * dx / 200.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = std::min(hi, a + fine * i);
    best = std::max(best, std::abs(f(x) - g(x)));
  }
  return best;
}

/// KS distance between the scaled inter-transmission law and Exp(1): the
/// scale is k/eta for eta > 0 and sqrt(n k) for eta = 0.
inline double limit_exponential_checks(int k, double n, double eta) {
  const AnalyticParams p{k, n, eta};
  p.validate();
  require(k >= 2, "exponential limit check needs k >= 2");
  const double scale = eta > 0.0 ? k / eta : std::sqrt(n * k);
  auto scaled = [&](double x) { return marginal_cdf(x / scale, p); };
  auto exp1 = [](double x) { return -std::expm1(-x); };
  return cdf_sup_distance(scaled, exp1, 0.0, 12.0);
}

// ---------------------------------------------------------------------------
// Multi-cell approximation.

/// Expected broadcasts per interval on a side x side toroidal grid, treating
/// the grid as side^2 / S(R) independent cells of S(R) nodes.
inline double multicell_estimate(
    int k, int side, double range, double eta,
    CellConvention convention = CellConvention::include_self) {
  const int s = cell_size(side, range, convention);
  const double nodes = static_cast<double>(side) * side;
  if (s < 2) return nodes;
  return nodes / s * expected_transmissions({k, static_cast<double>(s), eta});
}

/// Large-R forms using S(R) ~ pi R^2.
inline double multicell_estimate_large_range(int k, int side, double range,
                                             double eta) {
  require(range > 0.0, "range must be > 0");
  const double nodes = static_cast<double>(side) * side;
  if (eta == 0.0)
    return std::sqrt(2.0 / std::numbers::pi) * nodes / range *
           std::exp(std::lgamma(0.5 * (k + 1)) - std::lgamma(0.5 * k));
  return nodes / (range * range) * k / (std::numbers::pi * eta);
}

// ---------------------------------------------------------------------------
// Stationarity.

/// Sup-norm deviation between a candidate stationary density and its image
/// under the integral operator of the inter-transmission Markov chain.
///
/// The joint density of k-1 consecutive gaps is taken to depend on their sum
/// only, `density_of_sum`. A point is (t1, s) with s the sum of the gaps
/// t2..t(k-1); the right-hand side integrates over the oldest gap x:
///   int_0^inf g(s + x) lambda(t1 | s + x) exp(-Lambda(t1 | s + x)) dx.
inline double stationarity_residual(
    const AnalyticParams& p,
    const std::function<double(double)>& density_of_sum) {
  p.validate();
  require(p.k >= 2, "stationarity residual needs k >= 2");
  const double sigma = p.sigma();
  const double t_max = p.eta + 8.0 * sigma;
  std::vector<double> s_grid{0.0};
  if (p.k > 2) {
    for (double s : {0.5 * p.eta, p.eta, p.eta + sigma, p.eta + 3.0 * sigma})
      if (s > 0.0) s_grid.push_back(s);
  }
  quad::Options opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-12;
  double worst = 0.0;
  for (double s : s_grid) {
    for (int i = 0; i <= 160; ++i) {
      const double t1 = t_max * i / 160.0;
      auto integrand = [&](double x) {
        const double nu = s + x;
        const double rate = hazard(t1, nu, p);
        if (rate <= 0.0) return 0.0;
        return density_of_sum(nu) * rate *
               std::exp(-cumulative_hazard(t1, nu, p));
      };
      const double x0 = std::max(0.0, p.eta - t1 - s);
      const double xb = p.eta - s;
      double rhs = 0.0;
      if (xb > x0) rhs += quad::integrate(integrand, x0, xb, opt).value;
      rhs += quad::integrate_to_infinity(integrand, std::max(x0, xb), sigma,
                                         opt)
                 .value;
      worst = std::max(worst, std::abs(rhs - density_of_sum(t1 + s)));
    }
  }
  return worst;
}

/// Residual of the closed-form stationary density C (s < eta) or
/// C exp(-n (s - eta)^2 / (2 (1 - eta))) (s >= eta).
inline double stationarity_residual(const AnalyticParams& p) {
  const double c = norm_constant(p);
  return stationarity_residual(p, [c, p](double s) {
    return s < p.eta ? c : c * std::exp(-p.gauss_exponent(s - p.eta));
  });
}

}  // namespace trickle::analytic
