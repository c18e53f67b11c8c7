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
#include <limits>
#include <random>

namespace trickle {

// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using NodeRng = std::mt19937_64;

// Per-node stream: the run seed xor-ed with the (mixed) node id, then mixed.
inline NodeRng node_stream(std::uint64_t run_seed, std::uint64_t node_id) {
  return NodeRng(mix64(run_seed ^ mix64(node_id)));
}

// Seed of replicate `run` at sweep point `point` under a master seed.
constexpr std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t point,
                                       std::uint64_t run) noexcept {
  return mix64(mix64(mix64(master) ^ (point * 0x632be59bd9b4e019ULL)) ^
               (run * 0x85157af5ULL + 1));
}

// Uniform double in [0, 1) built from the top 53 bits of a 64-bit engine.
// Unlike std::uniform_real_distribution the result is identical across
// standard library implementations.
template <std::uniform_random_bit_generator G>
double uniform01(G& gen) {
  static_assert(G::min() == 0 &&
                    G::max() == std::numeric_limits<std::uint64_t>::max(),
                "uniform01 expects a full-range 64-bit engine");
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

template <std::uniform_random_bit_generator G>
double uniform(G& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

}  // namespace trickle
