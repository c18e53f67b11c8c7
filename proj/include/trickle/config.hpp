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

#include <string>

#include "trickle/error.hpp"

namespace trickle {

/// Protocol parameters shared by every node of a network.
///
/// `k` is the redundancy constant, `tau_l`/`tau_h` bound the interval length
/// and `eta` is the listen-only fraction: a node never schedules its
/// broadcast in the first `eta * tau` of an interval.
struct TrickleConfig {
  int k = 1;
  double tau_l = 1.0;
  double tau_h = 1.0;
  double eta = 0.0;

  void validate() const {
    require(k >= 1, "k must be >= 1, got " + std::to_string(k));
    require(tau_l > 0.0, "tau_l must be > 0");
    require(tau_h >= tau_l, "tau_h must be >= tau_l");
    require(eta >= 0.0 && eta <= 1.0,
            "eta must lie in [0, 1], got " + std::to_string(eta));
  }

  friend bool operator==(const TrickleConfig&, const TrickleConfig&) = default;
};

}  // namespace trickle
