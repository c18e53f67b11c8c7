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
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trickle/analytic.hpp"
#include "trickle/density_table.hpp"
#include "trickle/experiment.hpp"
#include "trickle/format.hpp"
#include "trickle/random.hpp"
#include "trickle/simulator.hpp"
#include "trickle/stats.hpp"

namespace trickle {

// Acceptance thresholds used by compare mode.
struct Thresholds {
  double mean_rel_gap = 0.10;
  double ks = 0.05;
  double theta_low = 1.0;
  double theta_high = 1.25;
};

struct RunReport {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> failures;  // compare mode only
  bool ok() const { return failures.empty(); }
};

/// Writes `<dir>/<stem>.csv` and its `<dir>/<stem>.json` sidecar.
class OutputWriter {
 public:
  OutputWriter(std::filesystem::path dir, nlohmann::json base_meta)
      : dir_(std::move(dir)), base_(std::move(base_meta)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& stem, const std::string& csv,
             const nlohmann::json& extra = nlohmann::json::object()) {
    const auto csv_path = dir_ / (stem + ".csv");
    const auto json_path = dir_ / (stem + ".json");
    put(csv_path, csv);
    nlohmann::json meta = base_;
    meta["file"] = stem + ".csv";
    for (const auto& [k, v] : extra.items()) meta[k] = v;
    put(json_path, meta.dump(2) + "\n");
    report_.files.push_back(csv_path);
    report_.files.push_back(json_path);
  }

  RunReport& report() { return report_; }

 private:
  static void put(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + path.string());
  }

  std::filesystem::path dir_;
  nlohmann::json base_;
  RunReport report_;
};

// ---------------------------------------------------------------------------
// Building blocks.

/// All replicates of one sweep point, folded in run order.
inline stats::SummaryAccumulator simulate_point(const ExperimentSpec& spec,
                                                const SweepPoint& pt,
                                                std::size_t point_index,
                                                bool keep_gaps,
                                                TransmissionLog* first_log = nullptr) {
  const TrickleConfig config = spec.config_for(pt);
  config.validate();
  const Topology topology = build_topology(spec.topology_for(pt));
  stats::SummaryAccumulator acc(spec.warmup, config.tau_h);
  for (int run = 0; run < spec.runs; ++run) {
    auto log = run_simulation(config, topology, spec.horizon,
                              replicate_seed(spec.seed, point_index, run));
    acc.add(log, keep_gaps);
    if (run == 0 && first_log) *first_log = std::move(log);
  }
  return acc;
}

inline analytic::AnalyticParams analytic_params(const SweepPoint& pt) {
  return {pt.k, static_cast<double>(pt.size), pt.eta};
}

/// Analytic transmissions per interval: the single-cell constant ratio, or
/// the independent-cells estimate on a grid.
inline double analytic_mean(const ExperimentSpec& spec, const SweepPoint& pt) {
  if (spec.topology == TopologyKind::grid)
    return analytic::multicell_estimate(pt.k, pt.size, pt.range, pt.eta);
  return analytic::expected_transmissions(analytic_params(pt));
}

/// Marginal CDF tabulated over the support, for KS against many samples.
inline DensityTable reference_cdf(const analytic::AnalyticParams& p) {
  return analytic::cdf_table(p, analytic::support_grid(p));
}

inline double ks_against(std::vector<double> gaps, const DensityTable& cdf) {
  if (gaps.empty()) return 1.0;
  return stats::ks_distance(stats::empirical_cdf(std::move(gaps)),
                            [&](double t) { return cdf.evaluate(t); });
}

inline std::vector<double> scaled(std::vector<double> v, double factor) {
  for (double& x : v) x *= factor;
  return v;
}

inline nlohmann::json base_meta(const ExperimentSpec& spec, const std::string& preset) {
  nlohmann::json j;
  j["spec"] = to_json(spec);
  if (!preset.empty()) j["preset"] = preset;
  j["generator"] = "trickle-workbench";
  j["model"] = "analytic (Poisson surrogate)";
  return j;
}

inline std::string point_tag(const ExperimentSpec& spec, const SweepPoint& pt) {
  std::string tag = "k" + std::to_string(pt.k);
  tag += spec.topology == TopologyKind::grid ? "_side" : "_n";
  tag += std::to_string(pt.size);
  if (spec.topology == TopologyKind::grid) tag += "_R" + format_double(pt.range);
  tag += "_eta" + format_double(pt.eta);
  return tag;
}

// ---------------------------------------------------------------------------
// Modes.

struct PointOutcome {
  stats::SummaryRow row;
  std::vector<std::string> failures;
  std::vector<std::array<std::string, 4>> checks;  // name, value, threshold, pass
};

inline PointOutcome evaluate_point(const ExperimentSpec& spec, const SweepPoint& pt,
                                   std::size_t index, bool with_ks,
                                   TransmissionLog* first_log,
                                   const Thresholds& th = {}) {
  const bool single = spec.topology == TopologyKind::single_cell;
  const auto acc = simulate_point(spec, pt, index, with_ks && single, first_log);
  PointOutcome out;
  auto& row = out.row;
  row.k = pt.k;
  row.n_or_side = pt.size;
  row.range = single ? 0.0 : pt.range;
  row.eta = pt.eta;
  row.seed_count = static_cast<std::size_t>(spec.runs);
  if (pt.eta < 1.0) {
    const double a = analytic_mean(spec, pt);
    row.analytic_mean = a;
    if (a > 0.0) row.ratio = acc.finish().mean_tx_per_interval / a;
  }
  const double t_scale = 1.0 / spec.config.tau_h;
  if (with_ks && single && pt.eta < 1.0) {
    const auto cdf = reference_cdf(analytic_params(pt));
    row.ks = ks_against(scaled(acc.gaps(), t_scale), cdf);
  }
  const auto s = acc.finish();
  row.sim_mean = s.mean_tx_per_interval;
  row.samples = s.sample_count;
  if (!with_ks || !row.analytic_mean) return out;

  auto check = [&](const std::string& name, double value, double threshold, bool pass) {
    out.checks.push_back({name, format_double(value), format_double(threshold),
                          pass ? "true" : "false"});
    if (!pass) out.failures.push_back(point_tag(spec, pt) + ": " + name);
  };
  if (single) {
    const double gap = row.sim_mean > 0.0
                           ? std::abs(row.sim_mean - *row.analytic_mean) / row.sim_mean
                           : 1.0;
    check("mean_rel_gap", gap, th.mean_rel_gap, gap <= th.mean_rel_gap);
    check("analytic_minus_sim", *row.analytic_mean - row.sim_mean, 0.0,
          *row.analytic_mean <= row.sim_mean);
    if (row.ks) check("ks", *row.ks, th.ks, *row.ks <= th.ks);
  } else {
    const double theta = row.ratio.value_or(0.0);
    check("theta_low", theta, th.theta_low, theta >= th.theta_low);
    if (pt.eta == 0.0) check("theta_high", theta, th.theta_high, theta <= th.theta_high);
  }
  return out;
}

inline RunReport run_sweep(const ExperimentSpec& spec, bool compare,
                           const std::string& preset = {}) {
  const auto pts = spec.points();
  std::vector<PointOutcome> outcomes(pts.size());
  std::vector<TransmissionLog> logs(spec.write_logs ? pts.size() : 0);
  parallel_for(pts.size(), spec.threads, [&](std::size_t i) {
    outcomes[i] = evaluate_point(spec, pts[i], i, compare,
                                 spec.write_logs ? &logs[i] : nullptr);
  });

  OutputWriter w(spec.out, base_meta(spec, preset));
  std::ostringstream summary;
  stats::write_summary_header(summary);
  for (const auto& o : outcomes) stats::write_summary_row(summary, o.row);
  w.write("summary", summary.str(), {{"warmup", spec.warmup}});

  if (compare) {
    std::ostringstream verdict;
    verdict << "k,n_or_side,R,eta,check,value,threshold,pass\n";
    for (const auto& o : outcomes) {
      for (const auto& c : o.checks)
        verdict << o.row.k << ',' << o.row.n_or_side << ',' << format_double(o.row.range)
                << ',' << format_double(o.row.eta) << ',' << c[0] << ',' << c[1] << ','
                << c[2] << ',' << c[3] << '\n';
      for (const auto& f : o.failures) w.report().failures.push_back(f);
    }
    w.write("verdict", verdict.str());
  }
  for (std::size_t i = 0; i < logs.size(); ++i) {
    std::ostringstream csv;
    write_log_csv(csv, logs[i]);
    w.write("log_" + point_tag(spec, pts[i]), csv.str(), {{"log", log_metadata(logs[i])}});
  }
  return w.report();
}

inline RunReport run_analytic(const ExperimentSpec& spec, const std::string& preset = {}) {
  const auto pts = spec.points();
  OutputWriter w(spec.out, base_meta(spec, preset));
  if (spec.quantity == "mean") {
    std::ostringstream csv;
    csv << "k,n_or_side,R,eta,cell_size,analytic_mean,mean_gap\n";
    for (const auto& pt : pts) {
      const bool grid = spec.topology == TopologyKind::grid;
      const int cells = grid ? cell_size(pt.size, pt.range) : pt.size;
      const auto p = analytic_params(pt);
      csv << pt.k << ',' << pt.size << ',' << format_double(grid ? pt.range : 0.0) << ','
          << format_double(pt.eta) << ',' << cells << ','
          << format_double(analytic_mean(spec, pt)) << ','
          << (grid ? std::string() : format_double(analytic::moment(1, p))) << '\n';
    }
    w.write("analytic_mean", csv.str());
    return w.report();
  }
  std::vector<DensityTable> tables(pts.size());
  parallel_for(pts.size(), spec.threads, [&](std::size_t i) {
    const auto p = analytic_params(pts[i]);
    const auto grid = spec.grid ? spec.grid->points() : analytic::support_grid(p);
    tables[i] = spec.quantity == "cdf" ? analytic::cdf_table(p, grid)
                                       : analytic::pdf_table(p, grid);
    tables[i].params["grid_mass"] =
        analytic::marginal_cdf(grid.back(), p) - analytic::marginal_cdf(grid.front(), p);
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::ostringstream csv;
    write_table_csv(csv, tables[i]);
    w.write(spec.quantity + "_" + point_tag(spec, pts[i]), csv.str(),
            {{"table", table_metadata(tables[i])}});
  }
  return w.report();
}

inline RunReport run_experiment(const ExperimentSpec& spec) {
  switch (spec.mode) {
    case Mode::simulate: return run_sweep(spec, false);
    case Mode::compare: return run_sweep(spec, true);
    case Mode::analytic: return run_analytic(spec);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Presets.

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig3", "fig4", "fig5", "fig6", "fig7",
                                              "fig8", "fig9", "fig10", "lemma1"};
  return names;
}

/// Default spec for a preset, as JSON so that flags and config files can be
/// layered on top before validation.
inline nlohmann::json preset_defaults(const std::string& name, bool full_scale,
                                      int max_n = 100) {
  nlohmann::json j;
  j["name"] = name;
  j["mode"] = "compare";
  j["horizon"] = 100.0;
  j["warmup"] = 1.0;
  j["full_scale"] = full_scale;
  j["out"] = "out/" + name;
  const int cell_runs = full_scale ? 1000 : 200;
  if (name == "fig3" || name == "fig6") {
    j["k"] = "1..4";
    j["n"] = "10.." + std::to_string(max_n) + ":10";
    j["max_n"] = max_n;
    j["eta"] = name == "fig3" ? 0.0 : 0.5;
    j["runs"] = cell_runs;
  } else if (name == "fig4" || name == "fig5" || name == "fig7" || name == "fig8") {
    j["k"] = name == "fig4" || name == "fig7" ? 1 : 3;
    j["n"] = 50;
    j["eta"] = name == "fig4" || name == "fig5" ? 0.0 : 0.5;
    j["runs"] = cell_runs;
  } else if (name == "fig9" || name == "fig10") {
    j["topology"] = "grid";
    j["side"] = full_scale ? 50 : 30;
    j["k"] = "1..5";
    j["range"] = full_scale ? "2..10" : "2..8:2";
    j["eta"] = name == "fig9" ? 0.0 : 0.5;
    j["runs"] = 10;
  } else if (name == "lemma1") {
    j["k"] = 1;
    j["n"] = "1,10,50,500";
    j["eta"] = "0,0.5";
    j["runs"] = 10;
  } else {
    throw ParameterError("unknown preset '" + name + "'");
  }
  return j;
}

struct MeanRow {
  int k = 1;
  int n = 1;
  double sim_mean = 0.0;
  double analytic_mean = 0.0;
  double rel_gap = 0.0;  // (sim - analytic) / sim
};

struct Histogram {
  double width = 0.0;
  std::vector<std::size_t> counts;
  std::size_t total = 0;
};

struct DistributionResult {
  SweepPoint point;
  std::size_t samples = 0;
  double ks = 1.0;
  Histogram histogram;
  DensityTable density;
};

struct GridRow {
  int k = 1;
  int side = 1;
  double range = 0.0;
  double eta = 0.0;
  int cell_size = 1;
  double sim_mean = 0.0;
  double estimate = 0.0;
  double ratio = 0.0;
};

struct Lemma1Row {
  int n = 1;
  double eta = 0.0;
  int seed_index = 0;
  double ks = 1.0;
};

inline std::vector<MeanRow> mean_table(const ExperimentSpec& spec) {
  const auto pts = spec.points();
  std::vector<MeanRow> rows(pts.size());
  parallel_for(pts.size(), spec.threads, [&](std::size_t i) {
    const auto s = simulate_point(spec, pts[i], i, false).finish();
    auto& r = rows[i];
    r.k = pts[i].k;
    r.n = pts[i].size;
    r.sim_mean = s.mean_tx_per_interval;
    r.analytic_mean = analytic_mean(spec, pts[i]);
    r.rel_gap = (r.sim_mean - r.analytic_mean) / r.sim_mean;
  });
  return rows;
}

inline std::vector<DistributionResult> distribution_table(const ExperimentSpec& spec) {
  const auto pts = spec.points();
  std::vector<DistributionResult> out(pts.size());
  parallel_for(pts.size(), spec.threads, [&](std::size_t i) {
    const auto p = analytic_params(pts[i]);
    const auto acc = simulate_point(spec, pts[i], i, true);
    const auto gaps = scaled(acc.gaps(), 1.0 / spec.config.tau_h);
    const auto cdf = reference_cdf(p);
    auto& r = out[i];
    r.point = pts[i];
    r.samples = gaps.size();
    r.ks = ks_against(gaps, cdf);

    // Plot range: up to the 1 - 1e-4 quantile of the analytic law.
    double upper = cdf.abscissae.back();
    for (std::size_t j = 0; j < cdf.size(); ++j)
      if (1.0 - cdf.values[j] <= 1e-4) {
        upper = cdf.abscissae[j];
        break;
      }
    constexpr int bins = 100;
    r.histogram.width = upper / bins;
    r.histogram.counts.assign(bins, 0);
    r.histogram.total = gaps.size();
    for (double g : gaps) {
      const auto b = static_cast<std::size_t>(g / r.histogram.width);
      if (b < bins) ++r.histogram.counts[b];
    }
    std::vector<double> grid;
    for (int j = 0; j <= 500; ++j) grid.push_back(upper * j / 500.0);
    if (p.eta > 0.0 && p.eta < upper) {
      auto it = std::lower_bound(grid.begin(), grid.end(), p.eta);
      if (*it != p.eta) grid.insert(it, p.eta);
    }
    r.density = analytic::pdf_table(p, grid);
  });
  return out;
}

inline std::vector<GridRow> grid_table(const ExperimentSpec& spec) {
  const auto pts = spec.points();
  std::vector<GridRow> rows(pts.size());
  parallel_for(pts.size(), spec.threads, [&](std::size_t i) {
    const auto& pt = pts[i];
    auto& r = rows[i];
    r.k = pt.k;
    r.side = pt.size;
    r.range = pt.range;
    r.eta = pt.eta;
    r.cell_size = cell_size(pt.size, pt.range);
    r.sim_mean = simulate_point(spec, pt, i, false).finish().mean_tx_per_interval;
    r.estimate = analytic::multicell_estimate(pt.k, pt.size, pt.range, pt.eta);
    r.ratio = stats::theta_ratio(r.sim_mean, pt.k, pt.size, pt.range, pt.eta);
  });
  return rows;
}

inline std::vector<Lemma1Row> lemma1_table(const ExperimentSpec& spec) {
  const auto pts = spec.points();
  std::vector<std::vector<Lemma1Row>> slots(pts.size());
  parallel_for(pts.size(), spec.threads, [&](std::size_t i) {
    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < spec.runs; ++s) seeds.push_back(replicate_seed(spec.seed, i, s));
    const auto conv = stats::poisson_convergence_check({pts[i].size}, spec.horizon, seeds,
                                                       pts[i].eta, spec.warmup);
    for (int s = 0; s < spec.runs; ++s)
      slots[i].push_back({pts[i].size, pts[i].eta, s, conv.front().ks_per_seed[s]});
  });
  std::vector<Lemma1Row> rows;
  for (auto& s : slots) rows.insert(rows.end(), s.begin(), s.end());
  return rows;
}

struct PresetOutcome {
  RunReport report;
  std::vector<MeanRow> means;
  std::vector<DistributionResult> distributions;
  std::vector<GridRow> grid;
  std::vector<Lemma1Row> lemma1;
};

inline PresetOutcome run_preset(const std::string& name, const ExperimentSpec& spec) {
  PresetOutcome out;
  OutputWriter w(spec.out, base_meta(spec, name));
  if (name == "fig3" || name == "fig6") {
    out.means = mean_table(spec);
    std::ostringstream csv;
    csv << "k,n,sim_mean,analytic_mean,rel_gap\n";
    for (const auto& r : out.means)
      csv << r.k << ',' << r.n << ',' << format_double(r.sim_mean) << ','
          << format_double(r.analytic_mean) << ',' << format_double(r.rel_gap) << '\n';
    w.write(name, csv.str());
  } else if (name == "fig4" || name == "fig5" || name == "fig7" || name == "fig8") {
    out.distributions = distribution_table(spec);
    std::ostringstream ks;
    ks << "k,n,eta,ks,samples,runs\n";
    const bool many = out.distributions.size() > 1;
    for (const auto& d : out.distributions) {
      const std::string suffix = many ? "_" + point_tag(spec, d.point) : "";
      std::ostringstream hist;
      hist << "bin_lo,bin_hi,count,density\n";
      for (std::size_t b = 0; b < d.histogram.counts.size(); ++b) {
        const double lo = d.histogram.width * static_cast<double>(b);
        hist << format_double(lo) << ',' << format_double(lo + d.histogram.width) << ','
             << d.histogram.counts[b] << ','
             << format_double(static_cast<double>(d.histogram.counts[b]) /
                              (static_cast<double>(d.histogram.total) * d.histogram.width))
             << '\n';
      }
      w.write(name + "_histogram" + suffix, hist.str(),
              {{"samples", d.samples}, {"bin_width", d.histogram.width}});
      std::ostringstream dens;
      write_table_csv(dens, d.density);
      w.write(name + "_density" + suffix, dens.str(), {{"table", table_metadata(d.density)}});
      ks << d.point.k << ',' << d.point.size << ',' << format_double(d.point.eta) << ','
         << format_double(d.ks) << ',' << d.samples << ',' << spec.runs << '\n';
    }
    w.write(name + "_ks", ks.str());
  } else if (name == "fig9" || name == "fig10") {
    if (spec.topology != TopologyKind::grid)
      throw ParameterError(name + " needs a grid topology");
    out.grid = grid_table(spec);
    std::ostringstream csv;
    csv << "k,side,R,eta,cell_size,sim_mean,estimate,ratio\n";
    for (const auto& r : out.grid)
      csv << r.k << ',' << r.side << ',' << format_double(r.range) << ','
          << format_double(r.eta) << ',' << r.cell_size << ',' << format_double(r.sim_mean)
          << ',' << format_double(r.estimate) << ',' << format_double(r.ratio) << '\n';
    w.write(name, csv.str(), {{"cell_convention", "include_self"}});
  } else if (name == "lemma1") {
    out.lemma1 = lemma1_table(spec);
    std::ostringstream csv;
    csv << "n,eta,seed_index,ks\n";
    for (const auto& r : out.lemma1)
      csv << r.n << ',' << format_double(r.eta) << ',' << r.seed_index << ','
          << format_double(r.ks) << '\n';
    w.write(name, csv.str(), {{"reference", "Exp(1)"}, {"dilation", "n"}});
  } else {
    throw ParameterError("unknown preset '" + name + "'");
  }
  out.report = w.report();
  return out;
}

}  // namespace trickle
