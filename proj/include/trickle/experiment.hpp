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
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "trickle/config.hpp"
#include "trickle/density_table.hpp"
#include "trickle/error.hpp"
#include "trickle/topology.hpp"

namespace trickle {

enum class Mode { simulate, analytic, compare };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::analytic: return "analytic";
    case Mode::compare: return "compare";
  }
  return "?";
}

/// Validation failure; `line` is 1-based and 0 when the offending value did
/// not come from a config file.
class SpecError : public ParameterError {
 public:
  SpecError(int line, const std::string& what)
      : ParameterError(line > 0 ? "config:" + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct SweepPoint {
  int k = 1;
  int size = 50;  // n for a single cell, side for a grid
  double range = 0.0;
  double eta = 0.0;
};

struct ExperimentSpec {
  std::string name = "experiment";
  Mode mode = Mode::simulate;
  TrickleConfig config;
  TopologyKind topology = TopologyKind::single_cell;
  std::vector<int> k_list{1};
  std::vector<int> size_list{50};
  std::vector<double> range_list{1.0};
  std::vector<double> eta_list{0.0};
  int runs = 200;
  double horizon = 100.0;
  double warmup = 1.0;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::optional<GridSpec> grid;
  std::string quantity = "density";  // analytic mode: density | cdf | mean
  bool write_logs = false;
  bool full_scale = false;
  int max_n = 100;
  unsigned threads = 0;  // 0: hardware concurrency

  /// Cartesian product, k outermost and eta innermost.
  std::vector<SweepPoint> points() const {
    std::vector<SweepPoint> pts;
    const std::vector<double> ranges =
        topology == TopologyKind::grid ? range_list : std::vector<double>{0.0};
    for (int k : k_list)
      for (int s : size_list)
        for (double r : ranges)
          for (double e : eta_list) pts.push_back({k, s, r, e});
    return pts;
  }

  TrickleConfig config_for(const SweepPoint& p) const {
    TrickleConfig c = config;
    c.k = p.k;
    c.eta = p.eta;
    return c;
  }

  TopologyParams topology_for(const SweepPoint& p) const {
    return topology == TopologyKind::grid ? TopologyParams::grid(p.size, p.range)
                                          : TopologyParams::single_cell(p.size);
  }
};

inline nlohmann::json to_json(const ExperimentSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["mode"] = to_string(s.mode);
  j["topology"] = to_string(s.topology);
  j["k"] = s.k_list;
  j[s.topology == TopologyKind::grid ? "side" : "n"] = s.size_list;
  if (s.topology == TopologyKind::grid) j["range"] = s.range_list;
  j["eta"] = s.eta_list;
  j["tau_h"] = s.config.tau_h;
  j["tau_l"] = s.config.tau_l;
  j["runs"] = s.runs;
  j["horizon"] = s.horizon;
  j["warmup"] = s.warmup;
  j["seed"] = s.seed;
  j["out"] = s.out;
  if (s.grid)
    j["grid"] = format_double(s.grid->start) + ":" + format_double(s.grid->stop) +
                ":" + format_double(s.grid->step);
  j["quantity"] = s.quantity;
  j["write_logs"] = s.write_logs;
  j["full_scale"] = s.full_scale;
  j["max_n"] = s.max_n;
  return j;
}

// ---------------------------------------------------------------------------
// List syntax: a number, an array of numbers, or a string of comma-separated
// items each of the form "a", "a..b" or "a..b:step".

namespace detail {

inline double parse_number(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' '; }),
          s.end());
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParameterError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ParameterError("not a number: '" + s + "'");
  return v;
}

inline void expand_item(std::string_view item, std::vector<double>& out) {
  const auto dots = item.find("..");
  if (dots == std::string_view::npos) {
    out.push_back(parse_number(item));
    return;
  }
  const double lo = parse_number(item.substr(0, dots));
  auto rest = item.substr(dots + 2);
  double step = 1.0;
  if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
    step = parse_number(rest.substr(colon + 1));
    rest = rest.substr(0, colon);
  }
  const double hi = parse_number(rest);
  if (!(step > 0.0)) throw ParameterError("range step must be > 0");
  if (hi < lo) throw ParameterError("range end is below its start");
  const double count = std::floor((hi - lo) / step + 1e-9);
  if (count > 1e6) throw ParameterError("range expands to too many values");
  for (int i = 0; i <= static_cast<int>(count); ++i) out.push_back(lo + step * i);
}

}  // namespace detail

inline std::vector<double> parse_real_list(const nlohmann::json& v) {
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
  } else if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number()) throw ParameterError("list entries must be numbers");
      out.push_back(x.get<double>());
    }
  } else if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::string_view rest(s);
    while (true) {
      const auto comma = rest.find(',');
      detail::expand_item(rest.substr(0, comma), out);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  } else {
    throw ParameterError("expected a number, an array or a range string");
  }
  if (out.empty()) throw ParameterError("list is empty");
  return out;
}

inline std::vector<int> parse_int_list(const nlohmann::json& v) {
  std::vector<int> out;
  for (double x : parse_real_list(v)) {
    if (x != std::floor(x) || std::abs(x) > 1e9)
      throw ParameterError("expected an integer, got " + format_double(x));
    out.push_back(static_cast<int>(x));
  }
  return out;
}

/// 1-based line of the first `"key":` in `text`, or 0.
inline int key_line(std::string_view text, std::string_view key) {
  const std::string needle = "\"" + std::string(key) + "\"";
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    std::size_t after = pos + needle.size();
    while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after])))
      ++after;
    if (after < text.size() && text[after] == ':')
      return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
    pos = after;
  }
  return 0;
}

/// Builds and validates a spec from parsed JSON. `source` is the original
/// text, used only to attach line numbers to errors.
inline ExperimentSpec validate_spec(const nlohmann::json& raw,
                                    std::string_view source = {}) {
  if (!raw.is_object()) throw SpecError(1, "top level must be a JSON object");
  static const char* known[] = {
      "name",    "mode",    "topology", "k",      "n",         "side",
      "range",   "eta",     "tau_h",    "tau_l",  "runs",      "horizon",
      "warmup",  "seed",    "out",      "grid",   "quantity",  "write_logs",
      "full_scale", "max_n", "threads"};
  for (const auto& [key, value] : raw.items()) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known))
      throw SpecError(key_line(source, key), "unknown field '" + key + "'");
  }

  ExperimentSpec s;
  auto fail = [&](const std::string& key, const std::string& msg) -> SpecError {
    return SpecError(key_line(source, key), "field '" + key + "': " + msg);
  };
  auto field = [&](const std::string& key, auto&& apply) {
    if (!raw.contains(key)) return;
    try {
      apply(raw.at(key));
    } catch (const SpecError&) {
      throw;
    } catch (const nlohmann::json::exception&) {
      throw fail(key, "wrong type");
    } catch (const std::exception& e) {
      throw fail(key, e.what());
    }
  };
  auto number = [](const nlohmann::json& v) {
    if (!v.is_number()) throw ParameterError("expected a number");
    return v.get<double>();
  };
  auto integer = [&](const nlohmann::json& v) {
    const double x = number(v);
    if (x != std::floor(x)) throw ParameterError("expected an integer");
    return x;
  };

  field("name", [&](const auto& v) { s.name = v.template get<std::string>(); });
  field("mode", [&](const auto& v) {
    const auto m = v.template get<std::string>();
    if (m == "simulate") s.mode = Mode::simulate;
    else if (m == "analytic") s.mode = Mode::analytic;
    else if (m == "compare") s.mode = Mode::compare;
    else throw ParameterError("must be simulate, analytic or compare");
  });
  if (raw.contains("side")) s.topology = TopologyKind::grid;
  field("topology", [&](const auto& v) {
    const auto t = v.template get<std::string>();
    if (t == "single_cell") s.topology = TopologyKind::single_cell;
    else if (t == "grid") s.topology = TopologyKind::grid;
    else throw ParameterError("must be single_cell or grid");
  });
  if (s.topology == TopologyKind::grid) s.size_list = {30};

  field("k", [&](const auto& v) {
    s.k_list = parse_int_list(v);
    for (int k : s.k_list)
      if (k < 1) throw ParameterError("k must be >= 1");
  });
  const std::string size_key = s.topology == TopologyKind::grid ? "side" : "n";
  const std::string other_key = s.topology == TopologyKind::grid ? "n" : "side";
  if (raw.contains(other_key))
    throw fail(other_key, "not valid for topology " + to_string(s.topology));
  field(size_key, [&](const auto& v) {
    s.size_list = parse_int_list(v);
    for (int x : s.size_list)
      if (x < 1) throw ParameterError(size_key + " must be >= 1");
  });
  field("range", [&](const auto& v) {
    s.range_list = parse_real_list(v);
    for (double r : s.range_list)
      if (!(r > 0.0)) throw ParameterError("range must be > 0");
  });
  field("eta", [&](const auto& v) {
    s.eta_list = parse_real_list(v);
    for (double e : s.eta_list)
      if (!(e >= 0.0 && e <= 1.0)) throw ParameterError("eta must lie in [0,1]");
  });
  field("tau_h", [&](const auto& v) { s.config.tau_h = number(v); });
  field("tau_l", [&](const auto& v) { s.config.tau_l = number(v); });
  field("runs", [&](const auto& v) {
    const double r = integer(v);
    if (r < 1 || r > 1e8) throw ParameterError("runs must be >= 1");
    s.runs = static_cast<int>(r);
  });
  field("horizon", [&](const auto& v) {
    s.horizon = number(v);
    if (!(s.horizon > 0.0)) throw ParameterError("horizon must be > 0");
  });
  field("warmup", [&](const auto& v) {
    s.warmup = number(v);
    if (!(s.warmup >= 0.0)) throw ParameterError("warmup must be >= 0");
  });
  field("seed", [&](const auto& v) {
    if (!v.is_number_unsigned())
      throw ParameterError("seed must be a non-negative integer");
    s.seed = v.template get<std::uint64_t>();
  });
  field("out", [&](const auto& v) { s.out = v.template get<std::string>(); });
  field("grid", [&](const auto& v) { s.grid = GridSpec::parse(v.template get<std::string>()); });
  field("quantity", [&](const auto& v) {
    s.quantity = v.template get<std::string>();
    if (s.quantity != "density" && s.quantity != "cdf" && s.quantity != "mean")
      throw ParameterError("must be density, cdf or mean");
  });
  field("write_logs", [&](const auto& v) { s.write_logs = v.template get<bool>(); });
  field("full_scale", [&](const auto& v) { s.full_scale = v.template get<bool>(); });
  field("max_n", [&](const auto& v) {
    const double m = integer(v);
    if (m < 1) throw ParameterError("max_n must be >= 1");
    s.max_n = static_cast<int>(m);
  });
  field("threads", [&](const auto& v) {
    const double t = integer(v);
    if (t < 0 || t > 4096) throw ParameterError("threads must be in [0, 4096]");
    s.threads = static_cast<unsigned>(t);
  });

  // Cross-field rules.
  try {
    s.config.k = s.k_list.front();
    s.config.validate();
  } catch (const ParameterError& e) {
    throw fail(raw.contains("tau_l") ? "tau_l" : "tau_h", e.what());
  }
  if (s.mode != Mode::analytic) {
    if (!(s.horizon > s.warmup + s.config.tau_h))
      throw fail(raw.contains("horizon") ? "horizon" : "warmup",
                 "horizon must exceed warmup + tau_h");
  }
  if (s.mode != Mode::simulate) {
    for (double e : s.eta_list)
      if (e >= 1.0)
        throw fail("eta", "eta must be < 1 in " + to_string(s.mode) +
                              " mode (analytic formulas are singular at 1)");
  }
  if (s.mode == Mode::analytic && s.topology == TopologyKind::grid &&
      s.quantity != "mean")
    throw fail("quantity", "grid topologies only support quantity 'mean'");
  return s;
}

/// Parses JSON text and validates it; parse errors carry line numbers.
inline ExperimentSpec validate_spec(std::string_view text) {
  nlohmann::json raw;
  try {
    raw = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw SpecError(line, "malformed JSON");
  }
  return validate_spec(raw, text);
}

// ---------------------------------------------------------------------------

/// Runs body(i) for i in [0, count). Each index is handled exactly once;
/// results must be written to per-index slots so output order is fixed.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace trickle
