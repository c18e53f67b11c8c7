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
#include <cstdint>
#include <random>

#include "trickle/config.hpp"
#include "trickle/error.hpp"
#include "trickle/random.hpp"

// Event-driven Trickle node state machine, generalized with a listen-only
// fraction eta. Every transition is a pure function of the previous state;
// the caller owns the clock and the random stream.
namespace trickle {

struct NodeState {
  int node_id = 0;
  double tau = 1.0;             // current interval length
  double interval_start = 0.0;  // absolute start of the current interval
  int counter = 0;              // consistent messages heard this interval
  double theta = 0.0;           // absolute time of the broadcast attempt
  std::int64_t data_version = 0;

  double interval_end() const { return interval_start + tau; }
  friend bool operator==(const NodeState&, const NodeState&) = default;
};

struct TimerOutcome {
  NodeState state;
  bool broadcasts = false;
};

// Rule 1: reset the counter and draw theta uniformly in
// [interval_start + eta*tau, interval_start + tau].
template <std::uniform_random_bit_generator G>
NodeState on_interval_start(const TrickleConfig& config, NodeState state,
                            G& rng) {
  state.counter = 0;
  const double lo = config.eta * state.tau;
  state.theta = state.interval_start + uniform(rng, lo, state.tau);
  return state;
}

// First full interval starts at `skew` with tau = tau_h (steady state).
template <std::uniform_random_bit_generator G>
NodeState init_node(const TrickleConfig& config, int node_id, double skew,
                    G& rng) {
  config.validate();
  require(skew >= 0.0 && skew < config.tau_h,
          "skew must lie in [0, tau_h)");
  NodeState state;
  state.node_id = node_id;
  state.tau = config.tau_h;
  state.interval_start = skew;
  return on_interval_start(config, state, rng);
}

// The interval in progress at time `now` for a node whose first full
// interval starts at `skew`. Theta is drawn uniformly over the part of the
// rule-1 window that has not yet elapsed: [max(eta*tau, now - start), tau].
template <std::uniform_random_bit_generator G>
NodeState init_partial_interval(const TrickleConfig& config, int node_id,
                                double skew, double now, G& rng) {
  config.validate();
  require(skew > 0.0 && skew < config.tau_h,
          "partial interval needs skew in (0, tau_h)");
  NodeState state;
  state.node_id = node_id;
  state.tau = config.tau_h;
  state.interval_start = now + skew - config.tau_h;
  const double elapsed = now - state.interval_start;
  const double lo = std::max(config.eta * state.tau, elapsed);
  state.theta = state.interval_start + uniform(rng, lo, state.tau);
  return state;
}

// Rule 2.
inline NodeState on_hear_consistent(NodeState state) {
  ++state.counter;
  return state;
}

// Rule 3: transmit only if fewer than k consistent messages were heard.
inline TimerOutcome on_timer_theta(const TrickleConfig& config,
                                   const NodeState& state) {
  return {state, state.counter < config.k};
}

// Rule 4: double tau up to tau_h and start the next interval.
template <std::uniform_random_bit_generator G>
NodeState on_interval_end(const TrickleConfig& config, NodeState state,
                          G& rng) {
  state.interval_start += state.tau;
  state.tau = std::min(2.0 * state.tau, config.tau_h);
  return on_interval_start(config, state, rng);
}

// Rule 5: on an inconsistent message, shrink to tau_l and restart at `now`,
// unless the node already runs at tau_l.
template <std::uniform_random_bit_generator G>
NodeState on_hear_inconsistent(const TrickleConfig& config, NodeState state,
                               double now, G& rng) {
  if (state.tau <= config.tau_l) return state;
  state.tau = config.tau_l;
  state.interval_start = now;
  return on_interval_start(config, state, rng);
}

}  // namespace trickle
