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
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "trickle/random.hpp"
#include "trickle/simulator.hpp"
#include "trickle/stats.hpp"

using namespace trickle;
using namespace trickle::stats;

namespace {

TransmissionLog log_with_broadcasts(const std::vector<double>& times, double horizon) {
  TransmissionLog log;
  log.horizon = horizon;
  int node = 0;
  for (double t : times) {
    log.events.push_back({t, node, EventKind::attempt});
    log.events.push_back({t, node, EventKind::broadcast});
    node = (node + 1) % 3;
  }
  return log;
}

std::vector<double> exp_samples(int m, std::uint64_t seed) {
  auto g = node_stream(seed, 0);
  std::vector<double> xs;
  for (int i = 0; i < m; ++i) xs.push_back(-std::log1p(-uniform01(g)));
  return xs;
}

}  // namespace

TEST(InterTransmission, Example) {
  const auto s = inter_transmission_times(log_with_broadcasts({0.4, 1.2, 1.5, 2.0}, 3.0), 1.0);
  ASSERT_EQ(s.gaps.size(), 2u);
  EXPECT_NEAR(s.gaps[0], 0.3, 1e-15);
  EXPECT_NEAR(s.gaps[1], 0.5, 1e-15);
  EXPECT_FALSE(s.insufficient);
}

TEST(InterTransmission, WarmupExcludesEverything) {
  const auto s = inter_transmission_times(log_with_broadcasts({0.2, 0.5}, 3.0), 1.0);
  EXPECT_TRUE(s.gaps.empty());
  EXPECT_TRUE(s.insufficient);
}

TEST(InterTransmission, MergedLogEqualsUnionOfNodeTimes) {
  const auto topo = build_topology(TopologyParams::single_cell(12));
  const auto log = run_simulation(TrickleConfig{2, 1.0, 1.0, 0.3}, topo, 30.0, 5);
  std::vector<double> all;
  for (int i = 0; i < 12; ++i)
    for (const auto& e : log.events)
      if (e.kind == EventKind::broadcast && e.node_id == i && e.time >= 1.0) all.push_back(e.time);
  std::sort(all.begin(), all.end());
  std::vector<double> diffs;
  for (std::size_t i = 1; i < all.size(); ++i) diffs.push_back(all[i] - all[i - 1]);
  EXPECT_EQ(inter_transmission_times(log, 1.0).gaps, diffs);
}

TEST(InterTransmission, MeanGapNearSurrogateValue) {
  // Single cell n = 50, k = 1, eta = 0 over 1000 runs. The reference is the
  // Poisson-surrogate mean sqrt(pi/100).
  const auto topo = build_topology(TopologyParams::single_cell(50));
  std::vector<double> run_means;
  for (int r = 0; r < 1000; ++r) {
    const auto log =
        run_simulation(TrickleConfig{1, 1.0, 1.0, 0.0}, topo, 100.0, replicate_seed(21, 0, r));
    run_means.push_back(oracle::mean(inter_transmission_times(log, 1.0).gaps));
  }
  const double m = oracle::mean(run_means);
  double var = 0.0;
  for (double x : run_means) var += (x - m) * (x - m);
  const double se = std::sqrt(var / (run_means.size() - 1) / run_means.size());
  const double reference = std::sqrt(std::numbers::pi / 100.0);
  RecordProperty("mean_gap", std::to_string(m));
  RecordProperty("standard_error", std::to_string(se));
  EXPECT_NEAR(m, reference, 3.0 * se);
}

TEST(MeanTxPerInterval, Counting) {
  std::vector<double> times;
  for (int i = 0; i < 30; ++i) times.push_back(1.0 + i / 3.0 + 0.01);
  EXPECT_DOUBLE_EQ(mean_tx_per_interval(log_with_broadcasts(times, 11.0), 1.0, 1.0), 3.0);
  EXPECT_THROW(mean_tx_per_interval(log_with_broadcasts(times, 1.5), 1.0, 1.0), ParameterError);
}

TEST(MeanTxPerInterval, NoSuppressionGivesCellSize) {
  const auto topo = build_topology(TopologyParams::single_cell(6));
  const auto log = run_simulation(TrickleConfig{11, 1.0, 1.0, 0.0}, topo, 101.0, 2);
  EXPECT_NEAR(mean_tx_per_interval(log, 1.0, 1.0), 6.0, 0.07);
}

TEST(MeanTxPerInterval, SurrogateIsConservativeAtFifty) {
  const auto topo = build_topology(TopologyParams::single_cell(50));
  SummaryAccumulator acc;
  for (int r = 0; r < 200; ++r)
    acc.add(run_simulation(TrickleConfig{1, 1.0, 1.0, 0.0}, topo, 100.0, replicate_seed(3, 0, r)));
  const double sim = acc.finish().mean_tx_per_interval;
  const double analytic = analytic::expected_transmissions({1, 50, 0.0});
  EXPECT_NEAR(sim, 5.64, 0.1);
  EXPECT_LE(analytic, sim);
}

TEST(MeanTxPerInterval, VarianceHalvesWhenHorizonDoubles) {
  const auto topo = build_topology(TopologyParams::single_cell(20));
  auto variance = [&](double horizon) {
    std::vector<double> xs;
    for (int r = 0; r < 600; ++r)
      xs.push_back(mean_tx_per_interval(
          run_simulation(TrickleConfig{1, 1.0, 1.0, 0.0}, topo, horizon,
                         replicate_seed(static_cast<std::uint64_t>(horizon), 0, r)),
          1.0, 1.0));
    const double m = oracle::mean(xs);
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return v / (xs.size() - 1);
  };
  const double ratio = variance(21.0) / variance(41.0);
  EXPECT_NEAR(ratio, 2.0, 0.6);
}

TEST(EmpiricalCdf, Examples) {
  const auto F = empirical_cdf({3.0, 1.0, 2.0});
  EXPECT_NEAR(F.evaluate(2.0), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(F.evaluate(0.5), 0.0);
  EXPECT_EQ(F.evaluate(3.5), 1.0);
  EXPECT_NEAR(F.evaluate(2.5), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(empirical_cdf({}), ParameterError);
}

TEST(KsDistance, SelfAndDisjoint) {
  const auto F = empirical_cdf({0.3, 0.1, 0.7, 0.2});
  EXPECT_EQ(ks_distance(F, [&](double x) { return F.evaluate(x); }), 0.0);
  const auto G = empirical_cdf({5.0, 6.0});
  EXPECT_EQ(ks_distance(G, [](double x) { return std::clamp(x, 0.0, 1.0); }), 1.0);
}

TEST(KsDistance, MatchesIndependentStatistic) {
  const auto xs = exp_samples(5000, 4);
  EXPECT_NEAR(ks_distance(empirical_cdf(xs), exponential_cdf), oracle::ks(xs, exponential_cdf),
              1e-12);
}

TEST(KsDistance, ExponentialSamplesBelowCriticalValue) {
  int below = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    below += ks_distance(empirical_cdf(exp_samples(10000, seed)), exponential_cdf) < 0.025;
  EXPECT_EQ(below, 20);
}

TEST(KsDistance, InvariantUnderMonotoneRescaling) {
  const auto xs = exp_samples(3000, 8);
  std::vector<double> ys;
  for (double x : xs) ys.push_back(std::sqrt(x) * 3.0);
  const double a = ks_distance(empirical_cdf(xs), exponential_cdf);
  const double b = ks_distance(empirical_cdf(ys), [](double y) { return exponential_cdf(y * y / 9.0); });
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(PoissonConvergence, LargeCellsLookPoisson) {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(replicate_seed(99, 0, s));
  for (double eta : {0.0, 0.5}) {
    const auto pts = poisson_convergence_check({1, 10, 500}, 100.0, seeds, eta);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_GT(pts[0].pooled_ks, 0.2);
    int smaller = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      EXPECT_LT(pts[2].ks_per_seed[s], 0.05);
      smaller += pts[2].ks_per_seed[s] < pts[1].ks_per_seed[s];
    }
    EXPECT_GT(smaller, 5);
  }
}

TEST(ThetaRatio, UnitWhenSimEqualsEstimate) {
  const double est = analytic::multicell_estimate(2, 20, 3.0, 0.5);
  EXPECT_NEAR(theta_ratio(est, 2, 20, 3.0, 0.5), 1.0, 1e-15);
}

TEST(Summary, MergeIsOrderIndependent) {
  const auto topo = build_topology(TopologyParams::single_cell(15));
  std::vector<TransmissionLog> logs;
  for (int r = 0; r < 6; ++r)
    logs.push_back(run_simulation(TrickleConfig{2, 1.0, 1.0, 0.0}, topo, 20.0, 100 + r));
  SummaryAccumulator a, b, c, whole;
  for (int r = 0; r < 6; ++r) {
    whole.add(logs[r]);
    (r < 2 ? a : r < 4 ? b : c).add(logs[r]);
  }
  SummaryAccumulator left = a, right = b;
  left.merge(b);
  left.merge(c);
  right.merge(c);
  SummaryAccumulator right_total = a;
  right_total.merge(right);
  const auto x = left.finish(), y = right_total.finish(), z = whole.finish();
  EXPECT_EQ(x.sample_count, z.sample_count);
  EXPECT_EQ(y.sample_count, z.sample_count);
  EXPECT_NEAR(x.mean_tx_per_interval, z.mean_tx_per_interval, 1e-12);
  EXPECT_NEAR(y.mean_tx_per_interval, z.mean_tx_per_interval, 1e-12);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(x.inter_tx_moments[j], z.inter_tx_moments[j], 1e-12);
  EXPECT_GE(z.mean_tx_per_interval, 0.0);
}

TEST(Summary, CsvRow) {
  std::ostringstream s;
  write_summary_header(s);
  SummaryRow r;
  r.k = 2;
  r.n_or_side = 50;
  r.eta = 0.5;
  r.sim_mean = 3.25;
  r.analytic_mean = 3.0;
  r.ratio = 3.25 / 3.0;
  r.samples = 10;
  r.seed_count = 4;
  write_summary_row(s, r);
  EXPECT_EQ(s.str(),
            "k,n_or_side,R,eta,sim_mean,analytic_mean,ratio,ks,samples,seed_count\n"
            "2,50,0,0.5,3.25,3,1.08333333333333,,10,4\n");
}
