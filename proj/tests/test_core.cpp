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

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "trickle/config.hpp"
#include "trickle/node.hpp"
#include "trickle/random.hpp"

using namespace trickle;

TEST(TrickleConfig, AcceptsValidParameters) {
  EXPECT_NO_THROW((TrickleConfig{1, 1.0, 1.0, 0.0}.validate()));
  EXPECT_NO_THROW((TrickleConfig{3, 0.5, 8.0, 1.0}.validate()));
}

TEST(TrickleConfig, RejectsInvalidParameters) {
  EXPECT_THROW((TrickleConfig{0, 1.0, 1.0, 0.0}.validate()), ParameterError);
  EXPECT_THROW((TrickleConfig{1, 0.0, 1.0, 0.0}.validate()), ParameterError);
  EXPECT_THROW((TrickleConfig{1, 2.0, 1.0, 0.0}.validate()), ParameterError);
  EXPECT_THROW((TrickleConfig{1, 1.0, 1.0, -0.1}.validate()), ParameterError);
  EXPECT_THROW((TrickleConfig{1, 1.0, 1.0, 1.5}.validate()), ParameterError);
}

TEST(InitNode, ListenOnlyBounds) {
  const TrickleConfig cfg{1, 1.0, 1.0, 0.5};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto rng = node_stream(seed, 0);
    const auto s = init_node(cfg, 0, 0.25, rng);
    EXPECT_DOUBLE_EQ(s.interval_start, 0.25);
    EXPECT_GE(s.theta, 0.75);
    EXPECT_LE(s.theta, 1.25);
    EXPECT_EQ(s.tau, 1.0);
    EXPECT_EQ(s.counter, 0);
  }
}

TEST(InitNode, ZeroSkewStartsAtZero) {
  auto rng = node_stream(1, 2);
  EXPECT_EQ(init_node(TrickleConfig{2, 1.0, 4.0, 0.3}, 2, 0.0, rng).interval_start, 0.0);
}

TEST(InitNode, RejectsSkewOutsideRange) {
  auto rng = node_stream(1, 0);
  const TrickleConfig cfg{};
  EXPECT_THROW(init_node(cfg, 0, -0.1, rng), ParameterError);
  EXPECT_THROW(init_node(cfg, 0, 1.0, rng), ParameterError);
}

TEST(InitNode, ThetaOffsetMeanIsHalfInterval) {
  const TrickleConfig cfg{1, 1.0, 1.0, 0.0};
  auto rng = node_stream(42, 0);
  std::vector<double> offsets;
  for (int i = 0; i < 10000; ++i) {
    const auto s = init_node(cfg, 0, 0.0, rng);
    offsets.push_back(s.theta - s.interval_start);
  }
  const double sigma = std::sqrt(1.0 / 12.0 / 10000.0);
  EXPECT_NEAR(oracle::mean(offsets), 0.5, 3.0 * sigma);
}

TEST(PartialInterval, ThetaInRemainingWindow) {
  for (double eta : {0.0, 0.3, 0.8}) {
    const TrickleConfig cfg{1, 1.0, 1.0, eta};
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      auto rng = node_stream(seed, 0);
      const double skew = 0.05 + 0.9 * uniform01(rng);
      const auto s = init_partial_interval(cfg, 0, skew, 0.0, rng);
      EXPECT_NEAR(s.interval_end(), skew, 1e-12);
      EXPECT_GE(s.theta, std::max(0.0, s.interval_start + eta));
      EXPECT_LE(s.theta, s.interval_end());
    }
  }
}

TEST(OnIntervalStart, ResetsCounter) {
  NodeState s;
  s.counter = 7;
  auto rng = node_stream(3, 0);
  EXPECT_EQ(on_interval_start(TrickleConfig{}, s, rng).counter, 0);
}

TEST(OnIntervalStart, FullListenOnlyPinsThetaToEnd) {
  NodeState s;
  s.interval_start = 2.0;
  s.tau = 1.0;
  auto rng = node_stream(3, 0);
  const auto out = on_interval_start(TrickleConfig{1, 1.0, 1.0, 1.0}, s, rng);
  EXPECT_EQ(out.theta, 3.0);
}

TEST(OnIntervalStart, ThetaIsUniformOverInterval) {
  const TrickleConfig cfg{1, 1.0, 1.0, 0.0};
  NodeState s;
  auto rng = node_stream(11, 5);
  std::vector<double> draws;
  for (int i = 0; i < 10000; ++i) draws.push_back(on_interval_start(cfg, s, rng).theta);
  const double d = oracle::ks(draws, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_LT(d, 0.02);
}

TEST(OnHearConsistent, Increments) {
  NodeState s;
  s = on_hear_consistent(s);
  EXPECT_EQ(s.counter, 1);
  s = on_hear_consistent(on_hear_consistent(s));
  EXPECT_EQ(s.counter, 3);
}

TEST(OnHearConsistent, ChangesOnlyCounter) {
  NodeState s;
  s.tau = 2.0;
  s.theta = 1.7;
  s.interval_start = 0.5;
  s.data_version = 4;
  auto t = on_hear_consistent(s);
  t.counter = s.counter;
  EXPECT_EQ(t, s);
}

TEST(OnTimerTheta, SuppressionThreshold) {
  NodeState s;
  EXPECT_TRUE(on_timer_theta(TrickleConfig{1}, s).broadcasts);
  s.counter = 1;
  EXPECT_FALSE(on_timer_theta(TrickleConfig{1}, s).broadcasts);
  const TrickleConfig k3{3};
  s.counter = 2;
  EXPECT_TRUE(on_timer_theta(k3, s).broadcasts);
  s = on_hear_consistent(s);
  EXPECT_FALSE(on_timer_theta(k3, s).broadcasts);
  EXPECT_EQ(on_timer_theta(k3, s).state, s);
}

TEST(OnIntervalEnd, CapsAtTauH) {
  const TrickleConfig cfg{1, 1.0, 1.0, 0.0};
  NodeState s;
  auto rng = node_stream(0, 0);
  const auto out = on_interval_end(cfg, s, rng);
  EXPECT_EQ(out.tau, 1.0);
  EXPECT_EQ(out.interval_start, 1.0);
}

TEST(OnIntervalEnd, Doubles) {
  const TrickleConfig cfg{1, 0.25, 1.0, 0.0};
  NodeState s;
  s.tau = 0.25;
  auto rng = node_stream(0, 0);
  EXPECT_EQ(on_interval_end(cfg, s, rng).tau, 0.5);
}

TEST(OnIntervalEnd, DoublingSequence) {
  const TrickleConfig cfg{1, 1.0, 8.0, 0.0};
  NodeState s;
  s.tau = 1.0;
  auto rng = node_stream(0, 0);
  std::vector<double> taus{s.tau};
  for (int i = 0; i < 5; ++i) {
    s = on_interval_end(cfg, s, rng);
    taus.push_back(s.tau);
  }
  EXPECT_EQ(taus, (std::vector<double>{1, 2, 4, 8, 8, 8}));
  EXPECT_EQ(s.interval_start, 1 + 2 + 4 + 8 + 8);
}

TEST(OnHearInconsistent, ShrinksAndRestarts) {
  const TrickleConfig cfg{1, 0.5, 4.0, 0.0};
  NodeState s;
  s.tau = 4.0;
  s.counter = 3;
  auto rng = node_stream(0, 0);
  const auto out = on_hear_inconsistent(cfg, s, 2.75, rng);
  EXPECT_EQ(out.tau, 0.5);
  EXPECT_EQ(out.interval_start, 2.75);
  EXPECT_EQ(out.counter, 0);
  EXPECT_GE(out.theta, 2.75);
  EXPECT_LE(out.theta, 3.25);
}

TEST(OnHearInconsistent, NothingAtTauL) {
  const TrickleConfig cfg{1, 0.5, 4.0, 0.0};
  NodeState s;
  s.tau = 0.5;
  s.counter = 2;
  s.theta = 0.3;
  auto rng = node_stream(0, 0);
  EXPECT_EQ(on_hear_inconsistent(cfg, s, 0.2, rng), s);
}

// Random walks over the transition functions keep every state invariant.
TEST(NodeProperties, InvariantsUnderRandomEventSequences) {
  std::mt19937_64 driver(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const double tau_l = 0.125 * (1 + driver() % 4);
    const TrickleConfig cfg{static_cast<int>(1 + driver() % 4), tau_l,
                            tau_l * (1 << (driver() % 5)),
                            static_cast<double>(driver() % 5) / 4.0};
    auto rng = node_stream(trial, 0);
    NodeState s = init_node(cfg, 0, 0.0, rng);
    double now = 0.0;
    for (int step = 0; step < 300; ++step) {
      switch (driver() % 4) {
        case 0:
          s = on_hear_consistent(s);
          break;
        case 1: {
          now = s.theta;
          EXPECT_EQ(on_timer_theta(cfg, s).broadcasts, s.counter < cfg.k);
          break;
        }
        case 2:
          now = s.interval_end();
          s = on_interval_end(cfg, s, rng);
          break;
        case 3: {
          now = s.interval_start + (s.interval_end() - s.interval_start) * uniform01(rng);
          s = on_hear_inconsistent(cfg, s, now, rng);
          break;
        }
      }
      ASSERT_GE(s.tau, cfg.tau_l);
      ASSERT_LE(s.tau, cfg.tau_h);
      ASSERT_GE(s.theta, s.interval_start + cfg.eta * s.tau - 1e-12);
      ASSERT_LE(s.theta, s.interval_end() + 1e-12);
      ASSERT_GE(s.counter, 0);
    }
  }
}

TEST(NodeProperties, DeterministicTrajectories) {
  const TrickleConfig cfg{2, 0.5, 4.0, 0.25};
  auto run = [&] {
    auto rng = node_stream(99, 3);
    std::vector<NodeState> trajectory{init_node(cfg, 3, 0.1, rng)};
    for (int i = 0; i < 50; ++i) {
      auto s = trajectory.back();
      s = i % 7 == 3 ? on_hear_inconsistent(cfg, s, s.interval_start + 0.1, rng)
                     : on_interval_end(cfg, s, rng);
      trajectory.push_back(s);
    }
    return trajectory;
  };
  EXPECT_EQ(run(), run());
}

TEST(Random, StreamsDifferAcrossNodesAndSeeds) {
  auto a = node_stream(7, 0);
  auto b = node_stream(7, 1);
  auto c = node_stream(8, 0);
  const auto x = a();
  EXPECT_NE(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(replicate_seed(1, 0, 0), replicate_seed(1, 0, 1));
  EXPECT_NE(replicate_seed(1, 0, 0), replicate_seed(1, 1, 0));
  EXPECT_EQ(replicate_seed(5, 2, 3), replicate_seed(5, 2, 3));
}

TEST(Random, Uniform01Range) {
  auto g = node_stream(0, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(g);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
