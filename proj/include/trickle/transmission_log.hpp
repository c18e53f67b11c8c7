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
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trickle/config.hpp"
#include "trickle/error.hpp"
#include "trickle/format.hpp"
#include "trickle/topology.hpp"

namespace trickle {

enum class EventKind : std::uint8_t { attempt, broadcast };

inline const char* to_string(EventKind kind) {
  return kind == EventKind::attempt ? "attempt" : "broadcast";
}

struct LogEvent {
  double time = 0.0;
  int node_id = 0;
  EventKind kind = EventKind::attempt;

  friend bool operator==(const LogEvent&, const LogEvent&) = default;
};

// Timestamped attempts and broadcasts of one run. Every broadcast is
// immediately preceded by the attempt (same node, same time) that caused it.
struct TransmissionLog {
  std::vector<LogEvent> events;
  double horizon = 0.0;
  TrickleConfig config;
  TopologyParams topology;
  std::uint64_t seed = 0;
};

// Throws ParameterError when a broadcast lacks its attempt or time decreases.
inline void validate_log(const TransmissionLog& log) {
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const auto& e = log.events[i];
    if (i > 0 && e.time < log.events[i - 1].time)
      throw ParameterError("malformed log: time decreases at event " +
                           std::to_string(i));
    if (e.kind != EventKind::broadcast) continue;
    const bool paired = i > 0 &&
                        log.events[i - 1].kind == EventKind::attempt &&
                        log.events[i - 1].node_id == e.node_id &&
                        log.events[i - 1].time == e.time;
    if (!paired)
      throw ParameterError("malformed log: broadcast at event " +
                           std::to_string(i) + " has no coincident attempt");
  }
}

// Times of all timer firings, suppressed or not.
inline std::vector<double> attempt_times(const TransmissionLog& log) {
  validate_log(log);
  std::vector<double> times;
  for (const auto& e : log.events)
    if (e.kind == EventKind::attempt) times.push_back(e.time);
  return times;
}

inline std::vector<double> broadcast_times(const TransmissionLog& log) {
  std::vector<double> times;
  for (const auto& e : log.events)
    if (e.kind == EventKind::broadcast) times.push_back(e.time);
  return times;
}

inline void write_log_csv(std::ostream& out, const TransmissionLog& log) {
  out << "time,node_id,kind\n";
  for (const auto& e : log.events)
    out << format_double(e.time, 15) << ',' << e.node_id << ','
        << to_string(e.kind) << '\n';
}

inline nlohmann::json log_metadata(const TransmissionLog& log) {
  nlohmann::json j;
  j["config"] = {{"k", log.config.k},
                 {"tau_l", log.config.tau_l},
                 {"tau_h", log.config.tau_h},
                 {"eta", log.config.eta}};
  j["topology"] = to_json(log.topology);
  j["seed"] = log.seed;
  j["horizon"] = log.horizon;
  j["events"] = log.events.size();
  return j;
}

}  // namespace trickle
