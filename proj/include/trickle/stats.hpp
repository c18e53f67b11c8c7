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
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "trickle/analytic.hpp"
#include "trickle/density_table.hpp"
#include "trickle/error.hpp"
#include "trickle/format.hpp"
#include "trickle/simulator.hpp"
#include "trickle/transmission_log.hpp"

// Estimators over transmission logs and distances to analytic references.
namespace trickle::stats {

struct GapSamples {
  std::vector<double> gaps;
  bool insufficient = false;  // fewer than two broadcasts after warmup
};

/// Successive differences of the cell-wide broadcast times at or after
/// `warmup`.
inline GapSamples inter_transmission_times(const TransmissionLog& log,
                                           double warmup) {
  require(warmup >= 0.0, "warmup must be >= 0");
  GapSamples out;
  double previous = 0.0;
  bool have_previous = false;
  for (const auto& e : log.events) {
    if (e.kind != EventKind::broadcast || e.time < warmup) continue;
    if (have_previous) out.gaps.push_back(e.time - previous);
    previous = e.time;
    have_previous = true;
  }
  out.insufficient = out.gaps.empty();
  return out;
}

inline std::size_t broadcasts_after(const TransmissionLog& log, double warmup) {
  return static_cast<std::size_t>(std::count_if(
      log.events.begin(), log.events.end(), [warmup](const LogEvent& e) {
        return e.kind == EventKind::broadcast && e.time >= warmup;
      }));
}

/// Broadcasts after warmup per interval of length tau_h.
inline double mean_tx_per_interval(const TransmissionLog& log, double tau_h,
                                   double warmup) {
  require(tau_h > 0.0, "tau_h must be > 0");
  require(log.horizon > warmup + tau_h,
          "horizon must exceed warmup + tau_h");
  return static_cast<double>(broadcasts_after(log, warmup)) /
         ((log.horizon - warmup) / tau_h);
}

/// Right-continuous step CDF with a jump at every distinct sample.
inline DensityTable empirical_cdf(std::vector<double> samples) {
  require(!samples.empty(), "empirical CDF of an empty sample");
  std::sort(samples.begin(), samples.end());
  DensityTable table;
  table.kind = TableKind::cdf;
  table.step = true;
  const double m = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    table.abscissae.push_back(samples[i]);
    table.values.push_back(static_cast<double>(i + 1) / m);
  }
  table.params = {{"samples", samples.size()}};
  return table;
}

/// Kolmogorov-Smirnov distance between an empirical step CDF and a reference
/// CDF, checking both sides of every jump. The left side uses the reference
/// just below the jump, so step references are handled exactly.
inline double ks_distance(const DensityTable& empirical,
                          const std::function<double(double)>& reference_cdf) {
  require(empirical.kind == TableKind::cdf && empirical.step,
          "ks_distance needs an empirical step CDF");
  constexpr double lowest = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  double below = 0.0;
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    const double x = empirical.abscissae[i];
    const double at = std::clamp(reference_cdf(x), 0.0, 1.0);
    const double before = std::clamp(reference_cdf(std::nextafter(x, lowest)), 0.0, 1.0);
    worst = std::max({worst, std::abs(empirical.values[i] - at),
                      std::abs(below - before)});
    below = empirical.values[i];
  }
  return worst;
}

inline double exponential_cdf(double x) {
  return x <= 0.0 ? 0.0 : -std::expm1(-x);
}

struct ConvergencePoint {
  int n = 0;
  double eta = 0.0;
  std::vector<double> ks_per_seed;
  double pooled_ks = 0.0;
  std::size_t samples = 0;
};

/// Attempt interarrivals dilated by n, pooled after warmup.
inline std::vector<double> dilated_attempt_gaps(const TransmissionLog& log,
                                                double warmup) {
  const auto times = attempt_times(log);
  const double n = static_cast<double>(log.topology.n_nodes);
  std::vector<double> gaps;
  double previous = 0.0;
  bool have_previous = false;
  for (double t : times) {
    if (t < warmup) continue;
    if (have_previous) gaps.push_back((t - previous) * n);
    previous = t;
    have_previous = true;
  }
  return gaps;
}

/// For each cell size, KS distance between the n-dilated attempt
/// interarrivals and Exp(1), per seed and pooled over seeds.
inline std::vector<ConvergencePoint> poisson_convergence_check(
    const std::vector<int>& n_list, double horizon,
    const std::vector<std::uint64_t>& seeds, double eta, double warmup = 1.0) {
  require(!seeds.empty(), "need at least one seed");
  std::vector<ConvergencePoint> out;
  const TrickleConfig config{1, 1.0, 1.0, eta};
  for (int n : n_list) {
    const Topology topology = build_topology(TopologyParams::single_cell(n));
    ConvergencePoint point;
    point.n = n;
    point.eta = eta;
    std::vector<double> pooled;
    for (std::uint64_t seed : seeds) {
      const auto log = run_simulation(config, topology, horizon, seed);
      auto gaps = dilated_attempt_gaps(log, warmup);
      point.ks_per_seed.push_back(
          gaps.empty() ? 1.0 : ks_distance(empirical_cdf(gaps), exponential_cdf));
      pooled.insert(pooled.end(), gaps.begin(), gaps.end());
    }
    point.samples = pooled.size();
    point.pooled_ks =
        pooled.empty() ? 1.0 : ks_distance(empirical_cdf(pooled), exponential_cdf);
    out.push_back(std::move(point));
  }
  return out;
}

/// Simulated multi-cell count over the independent-cells estimate.
inline double theta_ratio(double sim_mean, int k, int side, double range,
                          double eta,
                          CellConvention convention = CellConvention::include_self) {
  const double estimate =
      analytic::multicell_estimate(k, side, range, eta, convention);
  if (!(estimate > 0.0)) throw NumericError("multi-cell estimate is zero");
  return sim_mean / estimate;
}

// ---------------------------------------------------------------------------
// Aggregation over replicate runs.

struct SummaryStats {
  double mean_tx_per_interval = 0.0;
  std::vector<double> inter_tx_moments;  // j = 1..3
  std::size_t sample_count = 0;
  double warmup = 1.0;
  std::optional<double> ks_to_reference;
};

// Pools broadcast counts and gap power sums across runs; merge() is
// associative, so replicates can be folded in any grouping.
class SummaryAccumulator {
 public:
  explicit SummaryAccumulator(double warmup = 1.0, double tau_h = 1.0)
      : warmup_(warmup), tau_h_(tau_h) {}

  void add(const TransmissionLog& log, bool keep_gaps = false) {
    broadcasts_ += broadcasts_after(log, warmup_);
    intervals_ += (log.horizon - warmup_) / tau_h_;
    const auto samples = inter_transmission_times(log, warmup_);
    for (double g : samples.gaps) {
      ++count_;
      power_sums_[0] += g;
      power_sums_[1] += g * g;
      power_sums_[2] += g * g * g;
    }
    if (keep_gaps) gaps_.insert(gaps_.end(), samples.gaps.begin(), samples.gaps.end());
    ++runs_;
  }

  void merge(const SummaryAccumulator& other) {
    broadcasts_ += other.broadcasts_;
    intervals_ += other.intervals_;
    count_ += other.count_;
    for (int j = 0; j < 3; ++j) power_sums_[j] += other.power_sums_[j];
    gaps_.insert(gaps_.end(), other.gaps_.begin(), other.gaps_.end());
    runs_ += other.runs_;
  }

  SummaryStats finish(const std::function<double(double)>& reference = {}) const {
    SummaryStats s;
    s.warmup = warmup_;
    s.sample_count = count_;
    s.mean_tx_per_interval =
        intervals_ > 0.0 ? static_cast<double>(broadcasts_) / intervals_ : 0.0;
    for (int j = 0; j < 3; ++j)
      s.inter_tx_moments.push_back(
          count_ > 0 ? power_sums_[j] / static_cast<double>(count_) : 0.0);
    if (reference && !gaps_.empty())
      s.ks_to_reference = ks_distance(empirical_cdf(gaps_), reference);
    return s;
  }

  const std::vector<double>& gaps() const { return gaps_; }
  std::size_t runs() const { return runs_; }

 private:
  double warmup_;
  double tau_h_;
  std::size_t broadcasts_ = 0;
  double intervals_ = 0.0;
  std::size_t count_ = 0;
  double power_sums_[3] = {0.0, 0.0, 0.0};
  std::vector<double> gaps_;
  std::size_t runs_ = 0;
};

// One row of the sweep summary table.
struct SummaryRow {
  int k = 1;
  int n_or_side = 1;
  double range = 0.0;
  double eta = 0.0;
  double sim_mean = 0.0;
  std::optional<double> analytic_mean;
  std::optional<double> ratio;
  std::optional<double> ks;
  std::size_t samples = 0;
  std::size_t seed_count = 0;
};

inline void write_summary_header(std::ostream& out) {
  out << "k,n_or_side,R,eta,sim_mean,analytic_mean,ratio,ks,samples,seed_count\n";
}

inline void write_summary_row(std::ostream& out, const SummaryRow& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  out << r.k << ',' << r.n_or_side << ',' << format_double(r.range) << ','
      << format_double(r.eta) << ',' << format_double(r.sim_mean) << ','
      << opt(r.analytic_mean) << ',' << opt(r.ratio) << ',' << opt(r.ks) << ','
      << r.samples << ',' << r.seed_count << '\n';
}

}  // namespace trickle::stats
