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
#include <cstdlib>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trickle/error.hpp"

namespace trickle {

enum class TopologyKind { single_cell, grid };

inline std::string to_string(TopologyKind kind) {
  return kind == TopologyKind::single_cell ? "single_cell" : "grid";
}

// Whether the broadcasting node counts towards its own cell size.
enum class CellConvention { include_self, exclude_self };

struct TopologyParams {
  TopologyKind kind = TopologyKind::single_cell;
  int n_nodes = 1;     // single_cell only
  int side = 1;        // grid only: side x side nodes at unit spacing
  double range = 0.0;  // grid only: transmission range R

  static TopologyParams single_cell(int n) {
    return {TopologyKind::single_cell, n, 1, 0.0};
  }
  static TopologyParams grid(int side, double range) {
    return {TopologyKind::grid, side * side, side, range};
  }
};

inline nlohmann::json to_json(const TopologyParams& p) {
  nlohmann::json j;
  j["kind"] = to_string(p.kind);
  if (p.kind == TopologyKind::single_cell) {
    j["n_nodes"] = p.n_nodes;
  } else {
    j["side"] = p.side;
    j["range"] = p.range;
  }
  return j;
}

namespace detail {

// Offsets (dx, dy) in [0, side)^2, excluding (0, 0), whose toroidal Euclidean
// length is at most R.
inline std::vector<std::pair<int, int>> toroidal_offsets(int side,
                                                         double range) {
  std::vector<std::pair<int, int>> offsets;
  const double r2 = range * range * (1.0 + 1e-12);
  for (int oy = 0; oy < side; ++oy) {
    const int wy = std::min(oy, side - oy);
    for (int ox = 0; ox < side; ++ox) {
      if (ox == 0 && oy == 0) continue;
      const int wx = std::min(ox, side - ox);
      if (static_cast<double>(wx * wx + wy * wy) <= r2)
        offsets.emplace_back(ox, oy);
    }
  }
  return offsets;
}

}  // namespace detail

inline double toroidal_distance(int side, int i, int j) {
  const int dx0 = std::abs(i % side - j % side);
  const int dy0 = std::abs(i / side - j / side);
  const int dx = std::min(dx0, side - dx0);
  const int dy = std::min(dy0, side - dy0);
  return std::sqrt(static_cast<double>(dx * dx + dy * dy));
}

class Topology {
 public:
  Topology(TopologyParams params, std::vector<std::vector<int>> neighbors)
      : params_(params), neighbors_(std::move(neighbors)) {}

  const TopologyParams& params() const { return params_; }
  TopologyKind kind() const { return params_.kind; }
  int size() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<int>& neighbors(int node) const {
    return neighbors_[static_cast<std::size_t>(node)];
  }

 private:
  TopologyParams params_;
  std::vector<std::vector<int>> neighbors_;
};

inline Topology build_topology(const TopologyParams& params) {
  std::vector<std::vector<int>> neighbors;
  if (params.kind == TopologyKind::single_cell) {
    require(params.n_nodes >= 1, "single cell needs n_nodes >= 1");
    const int n = params.n_nodes;
    neighbors.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto& set = neighbors[static_cast<std::size_t>(i)];
      set.reserve(static_cast<std::size_t>(n - 1));
      for (int j = 0; j < n; ++j)
        if (j != i) set.push_back(j);
    }
    return Topology(params, std::move(neighbors));
  }
  require(params.side >= 1, "grid side must be >= 1");
  require(params.range >= 0.0, "grid range must be >= 0");
  const int side = params.side;
  const auto offsets = detail::toroidal_offsets(side, params.range);
  TopologyParams normalized = params;
  normalized.n_nodes = side * side;
  neighbors.resize(static_cast<std::size_t>(side * side));
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      auto& set = neighbors[static_cast<std::size_t>(y * side + x)];
      set.reserve(offsets.size());
      for (const auto& [ox, oy] : offsets)
        set.push_back(((y + oy) % side) * side + (x + ox) % side);
      std::sort(set.begin(), set.end());
    }
  }
  return Topology(normalized, std::move(neighbors));
}

/// Broadcasting-cell size S(R): the number of grid nodes within toroidal
/// distance R of a node. The broadcaster itself is counted under
/// `CellConvention::include_self`.
inline int cell_size(int side, double range,
                     CellConvention convention = CellConvention::include_self) {
  require(side >= 1, "grid side must be >= 1");
  require(range >= 0.0, "range must be >= 0");
  const int others =
      static_cast<int>(detail::toroidal_offsets(side, range).size());
  return convention == CellConvention::include_self ? others + 1 : others;
}

}  // namespace trickle
