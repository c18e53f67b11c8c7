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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "trickle/experiment.hpp"
#include "trickle/runner.hpp"

using namespace trickle;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("trickle_test_" + name);
  fs::remove_all(dir);
  return dir;
}

int error_line(const std::string& text) {
  try {
    validate_spec(std::string_view(text));
  } catch (const SpecError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(ValidateSpec, Defaults) {
  const auto s = validate_spec(std::string_view("{}"));
  EXPECT_EQ(s.config.tau_h, 1.0);
  EXPECT_EQ(s.config.tau_l, 1.0);
  EXPECT_EQ(s.warmup, 1.0);
  EXPECT_EQ(s.runs, 200);
  EXPECT_EQ(s.seed, 0u);
  EXPECT_EQ(to_json(s)["seed"], 0);
  EXPECT_EQ(s.mode, Mode::simulate);
}

TEST(ValidateSpec, RejectsDomainViolations) {
  EXPECT_THROW(validate_spec(std::string_view(R"({"mode": "analytic", "eta": 1})")), SpecError);
  EXPECT_NO_THROW(validate_spec(std::string_view(R"({"mode": "simulate", "eta": 1})")));
  EXPECT_THROW(validate_spec(std::string_view(R"({"k": 0})")), SpecError);
  EXPECT_THROW(validate_spec(std::string_view(R"({"side": 0, "range": 1})")), SpecError);
  EXPECT_THROW(validate_spec(std::string_view(R"({"eta": -0.1})")), SpecError);
  EXPECT_THROW(validate_spec(std::string_view(R"({"runs": 0})")), SpecError);
  EXPECT_THROW(validate_spec(std::string_view(R"({"horizon": 1.5})")), SpecError);
  EXPECT_THROW(validate_spec(std::string_view(R"({"tau_l": 2})")), SpecError);
  EXPECT_THROW(validate_spec(std::string_view(R"({"seed": -3})")), SpecError);
  EXPECT_THROW(validate_spec(std::string_view(R"({"n": 10, "side": 4})")), SpecError);
}

TEST(ValidateSpec, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("{\n  \"k\": 2,\n  \"bogus\": 1\n}"), 3);
  EXPECT_EQ(error_line("{\n  \"mode\": \"analytic\",\n\n  \"eta\": 1.0\n}"), 4);
  EXPECT_EQ(error_line("{\n  \"k\": 2,\n  \"n\": 5,,\n}"), 3);
  try {
    validate_spec(std::string_view("{\n\"runs\": 0}"));
    FAIL();
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("config:2:"), std::string::npos);
  }
}

TEST(ValidateSpec, SweepIsCartesianProduct) {
  const auto s = validate_spec(std::string_view(R"({"side": 20, "k": "1..5", "range": "2..10:2"})"));
  EXPECT_EQ(s.topology, TopologyKind::grid);
  EXPECT_EQ(s.points().size(), 25u);
  std::set<std::pair<int, double>> seen;
  for (const auto& p : s.points()) seen.insert({p.k, p.range});
  EXPECT_EQ(seen.size(), 25u);
}

TEST(ListSyntax, Forms) {
  EXPECT_EQ(parse_int_list(3), (std::vector<int>{3}));
  EXPECT_EQ(parse_int_list(nlohmann::json::array({1, 4})), (std::vector<int>{1, 4}));
  EXPECT_EQ(parse_int_list("10..50:10"), (std::vector<int>{10, 20, 30, 40, 50}));
  EXPECT_EQ(parse_int_list("1..3,7"), (std::vector<int>{1, 2, 3, 7}));
  EXPECT_EQ(parse_real_list("0,0.5"), (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(parse_real_list("2..8:2").size(), 4u);
  EXPECT_THROW(parse_int_list("1.5"), ParameterError);
  EXPECT_THROW(parse_int_list("5..1"), ParameterError);
  EXPECT_THROW(parse_real_list("a..b"), ParameterError);
  EXPECT_THROW(parse_real_list(nlohmann::json::array()), ParameterError);
}

TEST(ParallelFor, VisitsEachIndexOnce) {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw NumericError("boom");
                            }),
               NumericError);
}

TEST(Runner, SimulateWritesSummaryAndSidecar) {
  const auto dir = scratch_dir("simulate");
  auto j = nlohmann::json::parse(R"({"k": "1,2", "n": 20, "runs": 3, "horizon": 10})");
  j["out"] = dir.string();
  j["write_logs"] = true;
  const auto report = run_experiment(validate_spec(j));
  ASSERT_TRUE(fs::exists(dir / "summary.csv"));
  const auto meta = nlohmann::json::parse(read_file(dir / "summary.json"));
  EXPECT_EQ(meta["spec"]["runs"], 3);
  EXPECT_EQ(meta["file"], "summary.csv");
  const auto csv = read_file(dir / "summary.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "k,n_or_side,R,eta,sim_mean,analytic_mean,ratio,ks,samples,seed_count");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_TRUE(fs::exists(dir / "log_k1_n20_eta0.csv"));
  EXPECT_TRUE(fs::exists(dir / "log_k1_n20_eta0.json"));
  for (const auto& f : report.files) EXPECT_TRUE(fs::exists(f)) << f;
}

TEST(Runner, SidecarSpecReproducesOutput) {
  const auto a = scratch_dir("rerun_a"), b = scratch_dir("rerun_b");
  auto j = nlohmann::json::parse(R"({"mode": "compare", "k": 2, "n": 30, "eta": 0.5,
                                     "runs": 4, "horizon": 12, "seed": 17})");
  j["out"] = a.string();
  run_experiment(validate_spec(j));
  auto again = nlohmann::json::parse(read_file(a / "summary.json"))["spec"];
  again["out"] = b.string();
  run_experiment(validate_spec(again));
  EXPECT_EQ(read_file(a / "summary.csv"), read_file(b / "summary.csv"));
  EXPECT_EQ(read_file(a / "verdict.csv"), read_file(b / "verdict.csv"));
}

TEST(Runner, ThreadCountDoesNotChangeOutput) {
  const auto a = scratch_dir("threads_a"), b = scratch_dir("threads_b");
  auto j = nlohmann::json::parse(R"({"side": 8, "range": "1.5,2.5", "k": "1..3",
                                     "runs": 2, "horizon": 8, "mode": "compare"})");
  j["out"] = a.string();
  j["threads"] = 1;
  run_experiment(validate_spec(j));
  j["out"] = b.string();
  j["threads"] = 4;
  run_experiment(validate_spec(j));
  EXPECT_EQ(read_file(a / "summary.csv"), read_file(b / "summary.csv"));
}

TEST(Runner, CompareFlagsFailures) {
  const auto dir = scratch_dir("compare_fail");
  auto j = nlohmann::json::parse(R"({"mode": "compare", "k": 1, "n": 2, "runs": 5, "horizon": 20})");
  j["out"] = dir.string();
  const auto report = run_experiment(validate_spec(j));
  EXPECT_FALSE(report.ok());
  const auto verdict = read_file(dir / "verdict.csv");
  EXPECT_NE(verdict.find("false"), std::string::npos);
}

TEST(Runner, AnalyticDensityOnFixedGrid) {
  const auto dir = scratch_dir("analytic");
  auto j = nlohmann::json::parse(R"({"mode": "analytic", "k": 3, "n": 50, "eta": 0,
                                     "grid": "0:0.5:1e-3"})");
  j["out"] = dir.string();
  run_experiment(validate_spec(j));
  const auto meta = nlohmann::json::parse(read_file(dir / "density_k3_n50_eta0.json"));
  const double trap = meta["table"]["trapezoid_mass"];
  const double covered = meta["table"]["params"]["grid_mass"];
  EXPECT_NEAR(trap, covered, 1e-5);
  const auto csv = read_file(dir / "density_k3_n50_eta0.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 502);
}

TEST(Runner, AnalyticDensityOnSupportGridIsNormalized) {
  const auto dir = scratch_dir("analytic_support");
  auto j = nlohmann::json::parse(R"({"mode": "analytic", "k": 3, "n": 50, "eta": "0,0.5"})");
  j["out"] = dir.string();
  run_experiment(validate_spec(j));
  for (const char* stem : {"density_k3_n50_eta0", "density_k3_n50_eta0.5"}) {
    const auto meta = nlohmann::json::parse(read_file(dir / (std::string(stem) + ".json")));
    EXPECT_NEAR(meta["table"]["trapezoid_mass"].get<double>(), 1.0, 1e-6) << stem;
  }
}

class PresetReplay : public ::testing::TestWithParam<std::string> {};

TEST_P(PresetReplay, SmallPresetIsByteIdentical) {
  const std::string name = GetParam();
  auto spec_for = [&](const fs::path& out) {
    auto j = preset_defaults(name, false, 30);
    j["runs"] = 2;
    j["horizon"] = 10.0;
    if (j.contains("side")) j["side"] = 10;
    if (name == "lemma1") j["n"] = "1,10";
    j["out"] = out.string();
    return validate_spec(j);
  };
  const auto a = scratch_dir("preset_a_" + name), b = scratch_dir("preset_b_" + name);
  const auto ra = run_preset(name, spec_for(a)).report;
  run_preset(name, spec_for(b));
  ASSERT_FALSE(ra.files.empty());
  for (const auto& f : ra.files) {
    if (f.extension() != ".csv") continue;
    EXPECT_EQ(read_file(f), read_file(b / f.filename())) << f;
  }
}

INSTANTIATE_TEST_SUITE_P(All, PresetReplay, ::testing::ValuesIn(preset_names()));

TEST(Presets, UnknownNameRejected) {
  EXPECT_THROW(preset_defaults("fig11", false), ParameterError);
}

TEST(Presets, FullScaleRestoresLargeSizes) {
  EXPECT_EQ(preset_defaults("fig3", true)["runs"], 1000);
  EXPECT_EQ(preset_defaults("fig9", true)["side"], 50);
  EXPECT_EQ(preset_defaults("fig9", false)["side"], 30);
}
