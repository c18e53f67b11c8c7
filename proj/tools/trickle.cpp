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
// Command-line front end: simulate, analytic, compare and preset runs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "trickle/runner.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNumeric = 2, kAcceptance = 3 };

struct Flags {
  std::optional<std::string> k, n, side, range, eta, grid, out, config;
  std::optional<double> tau_h, tau_l, horizon, warmup;
  std::optional<int> runs, max_n, threads;
  std::optional<std::uint64_t> seed;
  bool full_scale = false;
  bool write_logs = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--k", f.k, "redundancy constant(s), e.g. 3, 1..5, 1,2,4");
  cmd->add_option("--n", f.n, "single-cell size(s)");
  cmd->add_option("--side", f.side, "grid side length(s); selects the grid topology");
  cmd->add_option("--range", f.range, "transmission range(s) on the grid");
  cmd->add_option("--eta", f.eta, "listen-only fraction(s)");
  cmd->add_option("--tau-h", f.tau_h, "maximum interval length");
  cmd->add_option("--tau-l", f.tau_l, "minimum interval length");
  cmd->add_option("--horizon", f.horizon, "virtual time per run");
  cmd->add_option("--runs", f.runs, "replicates per sweep point");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--warmup", f.warmup, "time discarded at the start of each run");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--grid", f.grid, "evaluation grid start:stop:step");
  cmd->add_option("--max-n", f.max_n, "largest n for the fig3/fig6 presets");
  cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
  cmd->add_option("--config", f.config, "JSON file mirroring the experiment spec")
      ->check(CLI::ExistingFile);
  cmd->add_flag("--full-scale", f.full_scale, "full-size runs and grid");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Layers: preset defaults, then the config file, then explicit flags.
trickle::ExperimentSpec build_spec(const Flags& f, nlohmann::json base,
                                   const std::string& mode) {
  std::string text;
  if (f.config) {
    text = slurp(*f.config);
    nlohmann::json file;
    try {
      file = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
      trickle::validate_spec(std::string_view(text));  // throws with a line number
    }
    if (!file.is_object()) throw trickle::SpecError(1, "top level must be a JSON object");
    if (file.contains("side")) base.erase("n");
    if (file.contains("n")) base.erase("side");
    base.update(file);
  }
  auto set = [&](const char* key, const auto& v) {
    if (v) base[key] = *v;
  };
  if (f.side) base.erase("n");
  if (f.n) base.erase("side");
  set("k", f.k);
  set("n", f.n);
  set("side", f.side);
  set("range", f.range);
  set("eta", f.eta);
  set("tau_h", f.tau_h);
  set("tau_l", f.tau_l);
  set("horizon", f.horizon);
  set("runs", f.runs);
  set("seed", f.seed);
  set("warmup", f.warmup);
  set("out", f.out);
  set("grid", f.grid);
  set("max_n", f.max_n);
  set("threads", f.threads);
  if (f.full_scale) base["full_scale"] = true;
  if (f.write_logs) base["write_logs"] = true;
  if (!mode.empty()) base["mode"] = mode;
  return trickle::validate_spec(base, text);
}

void list_files(const trickle::RunReport& r) {
  for (const auto& p : r.files) std::cout << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trickle workbench: simulation and analysis of the Trickle algorithm"};
  app.require_subcommand(1);

  Flags f;
  auto* sim = app.add_subcommand("simulate", "run the discrete-event simulator over a sweep");
  add_common(sim, f);
  sim->add_flag("--write-logs", f.write_logs, "also write the first run's event log per point");

  std::string quantity = "density";
  auto* ana = app.add_subcommand("analytic", "tabulate analytic quantities");
  ana->add_option("quantity", quantity, "density | cdf | mean")
      ->check(CLI::IsMember({"density", "cdf", "mean"}));
  add_common(ana, f);

  auto* cmp = app.add_subcommand("compare", "simulate and check against the analytic model");
  add_common(cmp, f);

  std::string preset;
  auto* pre = app.add_subcommand("preset", "run a named reference experiment");
  pre->add_option("name", preset, "preset name")
      ->required()
      ->check(CLI::IsMember(trickle::preset_names()));
  add_common(pre, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*pre) {
      const int max_n = f.max_n.value_or(100);
      auto spec = build_spec(f, trickle::preset_defaults(preset, f.full_scale, max_n), "");
      if (spec.full_scale != f.full_scale || max_n != spec.max_n)
        spec = build_spec(f, trickle::preset_defaults(preset, spec.full_scale, spec.max_n), "");
      list_files(trickle::run_preset(preset, spec).report);
      return kOk;
    }
    nlohmann::json base = nlohmann::json::object();
    if (*ana) base["quantity"] = quantity;
    const std::string mode = *sim ? "simulate" : *ana ? "analytic" : "compare";
    const auto spec = build_spec(f, base, mode);
    const auto report = trickle::run_experiment(spec);
    list_files(report);
    if (!report.ok()) {
      for (const auto& failure : report.failures) std::cerr << "FAIL " << failure << '\n';
      return kAcceptance;
    }
    return kOk;
  } catch (const trickle::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
