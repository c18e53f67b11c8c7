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

#include <cstdint>
#include <queue>
#include <vector>

#include "trickle/config.hpp"
#include "trickle/error.hpp"
#include "trickle/node.hpp"
#include "trickle/random.hpp"
#include "trickle/topology.hpp"
#include "trickle/transmission_log.hpp"

namespace trickle {

// An externally injected content update: at `time`, `node_id` starts
// carrying `version` and reacts as if it had heard an inconsistent message.
struct VersionInjection {
  double time = 0.0;
  int node_id = 0;
  std::int64_t version = 1;
};

struct SimOptions {
  // Per-node interval skews in [0, tau_h). Empty: draw U[0, tau_h) from each
  // node's own stream.
  std::vector<double> skews;
  std::vector<VersionInjection> injections;
};

// Discrete-event execution of the Trickle rules over a topology. Broadcasts
// are instantaneous and lossless: a broadcast at time t is heard at time t by
// exactly the broadcaster's neighbor set.
//
// Events at equal timestamps run attempts first (their deliveries happen
// synchronously), then interval boundaries, then injections; ties inside a
// class go by ascending node id.
class Simulator {
 public:
  Simulator(const TrickleConfig& config, const Topology& topology,
            std::uint64_t seed, const SimOptions& options = {})
      : config_(config), topology_(topology), seed_(seed) {
    config_.validate();
    const int n = topology_.size();
    require(options.skews.empty() ||
                options.skews.size() == static_cast<std::size_t>(n),
            "skews must have one entry per node");
    rngs_.reserve(static_cast<std::size_t>(n));
    nodes_.resize(static_cast<std::size_t>(n));
    epochs_.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      auto& rng = rngs_.emplace_back(node_stream(seed, static_cast<std::uint64_t>(i)));
      const double skew = options.skews.empty()
                              ? config_.tau_h * uniform01(rng)
                              : options.skews[static_cast<std::size_t>(i)];
      require(skew >= 0.0 && skew < config_.tau_h,
              "skew must lie in [0, tau_h)");
      NodeState state = skew > 0.0
                            ? init_partial_interval(config_, i, skew, 0.0, rng)
                            : init_node(config_, i, 0.0, rng);
      node(i) = state;
      schedule_interval(i);
    }
    for (const auto& inj : options.injections) {
      require(inj.node_id >= 0 && inj.node_id < n,
              "injection node id out of range");
      require(inj.time >= 0.0, "injection time must be >= 0");
      push({inj.time, Class::injection, inj.node_id, 0, inj.version});
    }
  }

  // Processes every event with time <= until.
  void run_until(double until) {
    while (!queue_.empty() && queue_.top().time <= until) {
      const Event e = queue_.top();
      queue_.pop();
      now_ = e.time;
      switch (e.cls) {
        case Class::attempt:
          if (e.epoch == epoch(e.node)) fire_timer(e.node);
          break;
        case Class::boundary:
          if (e.epoch == epoch(e.node)) end_interval(e.node);
          break;
        case Class::injection:
          inject(e.node, e.version);
          break;
      }
    }
    now_ = std::max(now_, until);
  }

  const std::vector<NodeState>& nodes() const { return nodes_; }
  const std::vector<LogEvent>& events() const { return events_; }
  std::vector<LogEvent> take_events() { return std::move(events_); }
  double now() const { return now_; }

 private:
  enum class Class : std::uint8_t { attempt = 0, boundary = 1, injection = 2 };

  struct Event {
    double time;
    Class cls;
    int node;
    std::uint32_t epoch;
    std::int64_t version;
  };

  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.cls != b.cls) return a.cls > b.cls;
      return a.node > b.node;
    }
  };

  NodeState& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  NodeRng& rng(int i) { return rngs_[static_cast<std::size_t>(i)]; }
  std::uint32_t& epoch(int i) { return epochs_[static_cast<std::size_t>(i)]; }

  void push(const Event& e) { queue_.push(e); }

  void schedule_interval(int i) {
    const NodeState& s = node(i);
    push({s.theta, Class::attempt, i, epoch(i), 0});
    push({s.interval_end(), Class::boundary, i, epoch(i), 0});
  }

  void fire_timer(int i) {
    events_.push_back({now_, i, EventKind::attempt});
    const TimerOutcome outcome = on_timer_theta(config_, node(i));
    if (!outcome.broadcasts) return;
    events_.push_back({now_, i, EventKind::broadcast});
    const std::int64_t version = node(i).data_version;
    for (int j : topology_.neighbors(i)) deliver(j, version);
  }

  void deliver(int j, std::int64_t version) {
    NodeState& s = node(j);
    if (s.data_version == version) {
      s = on_hear_consistent(s);
      return;
    }
    if (version > s.data_version) s.data_version = version;
    reset_if_needed(j);
  }

  void inject(int i, std::int64_t version) {
    if (node(i).data_version == version) return;
    node(i).data_version = version;
    reset_if_needed(i);
  }

  void reset_if_needed(int i) {
    const double before = node(i).interval_start;
    const double tau_before = node(i).tau;
    node(i) = on_hear_inconsistent(config_, node(i), now_, rng(i));
    if (node(i).interval_start == before && node(i).tau == tau_before) return;
    ++epoch(i);
    schedule_interval(i);
  }

  void end_interval(int i) {
    node(i) = on_interval_end(config_, node(i), rng(i));
    schedule_interval(i);
  }

  TrickleConfig config_;
  const Topology& topology_;
  std::uint64_t seed_;
  double now_ = 0.0;
  std::vector<NodeState> nodes_;
  std::vector<NodeRng> rngs_;
  std::vector<std::uint32_t> epochs_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::vector<LogEvent> events_;
};

/// Runs the network over [0, horizon] and returns every attempt and
/// broadcast. Identical arguments give identical logs.
inline TransmissionLog run_simulation(const TrickleConfig& config,
                                      const Topology& topology, double horizon,
                                      std::uint64_t seed,
                                      const SimOptions& options = {}) {
  require(horizon > 0.0, "horizon must be > 0");
  Simulator sim(config, topology, seed, options);
  sim.run_until(horizon);
  TransmissionLog log;
  log.events = sim.take_events();
  log.horizon = horizon;
  log.config = config;
  log.topology = topology.params();
  log.seed = seed;
  return log;
}

struct LoadSplit {
  int node0 = 0;
  int node1 = 0;
  int intervals = 0;
};

/// Two-node k=1 network whose intervals are offset by half a period. With
/// eta = 1/2 every attempt of one node falls inside the other's listen-only
/// window, so whichever node transmits first carries the entire load. Node 0
/// is given the later skew, so its partial first interval fires first.
inline LoadSplit two_node_overlap_run(double eta, std::uint64_t seed,
                                      int intervals = 1000) {
  require(intervals >= 1, "intervals must be >= 1");
  TrickleConfig config{1, 1.0, 1.0, eta};
  const Topology topology = build_topology(TopologyParams::single_cell(2));
  SimOptions options;
  options.skews = {0.5, 0.0};
  const auto log = run_simulation(config, topology,
                                  static_cast<double>(intervals), seed, options);
  LoadSplit split;
  split.intervals = intervals;
  for (const auto& e : log.events) {
    if (e.kind != EventKind::broadcast) continue;
    (e.node_id == 0 ? split.node0 : split.node1) += 1;
  }
  return split;
}

}  // namespace trickle
