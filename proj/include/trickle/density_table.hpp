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
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trickle/analytic.hpp"
#include "trickle/error.hpp"
#include "trickle/format.hpp"

namespace trickle {

enum class TableKind { pdf, cdf };

inline const char* to_string(TableKind kind) {
  return kind == TableKind::pdf ? "pdf" : "cdf";
}

// Sampled density or distribution function. Step tables (empirical CDFs) are
// right-continuous; the others interpolate linearly.
struct DensityTable {
  std::vector<double> abscissae;
  std::vector<double> values;
  TableKind kind = TableKind::pdf;
  bool step = false;
  nlohmann::json params = nlohmann::json::object();

  std::size_t size() const { return abscissae.size(); }

  double evaluate(double t) const {
    if (abscissae.empty()) return 0.0;
    auto it = std::upper_bound(abscissae.begin(), abscissae.end(), t);
    if (it == abscissae.begin())
      return kind == TableKind::cdf && !step ? values.front() : 0.0;
    const auto i = static_cast<std::size_t>(it - abscissae.begin()) - 1;
    if (t == abscissae[i]) return values[i];
    if (step || i + 1 == abscissae.size())
      return step || kind == TableKind::cdf ? values[i] : 0.0;
    const double w = (t - abscissae[i]) / (abscissae[i + 1] - abscissae[i]);
    return values[i] + w * (values[i + 1] - values[i]);
  }

  double trapezoid_integral() const {
    double sum = 0.0;
    for (std::size_t i = 1; i < abscissae.size(); ++i)
      sum += 0.5 * (values[i] + values[i - 1]) * (abscissae[i] - abscissae[i - 1]);
    return sum;
  }

  bool monotone(double slack = 1e-12) const {
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] < values[i - 1] - slack) return false;
    return true;
  }
};

// "start:stop:step", inclusive of stop when it falls on the lattice.
struct GridSpec {
  double start = 0.0;
  double stop = 1.0;
  double step = 1e-3;

  static GridSpec parse(std::string_view text) {
    const auto first = text.find(':');
    const auto second = text.find(':', first == std::string_view::npos ? first : first + 1);
    if (first == std::string_view::npos || second == std::string_view::npos)
      throw ParameterError("grid must look like start:stop:step, got '" +
                           std::string(text) + "'");
    GridSpec g;
    try {
      g.start = std::stod(std::string(text.substr(0, first)));
      g.stop = std::stod(std::string(text.substr(first + 1, second - first - 1)));
      g.step = std::stod(std::string(text.substr(second + 1)));
    } catch (const std::exception&) {
      throw ParameterError("grid has a non-numeric field: '" + std::string(text) + "'");
    }
    g.validate();
    return g;
  }

  void validate() const {
    require(step > 0.0, "grid step must be > 0");
    require(stop > start, "grid stop must exceed start");
    require(start >= 0.0, "grid start must be >= 0");
    require((stop - start) / step <= 5e7, "grid has too many points");
  }

  std::vector<double> points() const {
    validate();
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i) xs[i] = start + step * static_cast<double>(i);
    return xs;
  }
};

namespace analytic {

inline DensityTable pdf_table(const AnalyticParams& p, const std::vector<double>& grid) {
  DensityTable table;
  table.kind = TableKind::pdf;
  table.params = to_json(p);
  table.abscissae = grid;
  table.values.reserve(grid.size());
  for (double t : grid) table.values.push_back(marginal_density(t, p));
  return table;
}

inline DensityTable cdf_table(const AnalyticParams& p, const std::vector<double>& grid) {
  DensityTable table;
  table.kind = TableKind::cdf;
  table.params = to_json(p);
  table.abscissae = grid;
  table.values.reserve(grid.size());
  for (double t : grid) table.values.push_back(marginal_cdf(t, p));
  return table;
}

/// CDF by cumulative trapezoid integration of marginal_density. An
/// independent route to cdf_table.
inline DensityTable cdf_table_by_trapezoid(const AnalyticParams& p,
                                           const std::vector<double>& grid) {
  DensityTable pdf = pdf_table(p, grid);
  DensityTable table;
  table.kind = TableKind::cdf;
  table.params = pdf.params;
  table.abscissae = grid;
  table.values.resize(grid.size());
  double acc = grid.empty() ? 0.0 : marginal_cdf(grid.front(), p);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0)
      acc += 0.5 * (pdf.values[i] + pdf.values[i - 1]) * (grid[i] - grid[i - 1]);
    table.values[i] = acc;
  }
  return table;
}

/// Grid covering the support of T, ending once 1 - F < 1e-12. Starts from a
/// uniform step of min(eta + n^{-1/2}, E[T]) / 200 and bisects intervals
/// until the trapezoid rule on the density is accurate to about \p tol in
/// total.
inline std::vector<double> support_grid(const AnalyticParams& p, double tol = 2.5e-7) {
  p.validate();
  const double step = std::min(p.eta + 1.0 / std::sqrt(p.n), moment(1, p)) / 200.0;
  double end = p.eta + 6.0 * p.sigma();
  while (1.0 - marginal_cdf(end, p) > 1e-12) end *= 1.25;
  std::vector<double> base;
  const auto count = static_cast<std::size_t>(std::ceil(end / step)) + 1;
  for (std::size_t i = 0; i < count; ++i) base.push_back(step * static_cast<double>(i));
  // Land exactly on the kink at eta.
  if (p.eta > 0.0) {
    auto it = std::lower_bound(base.begin(), base.end(), p.eta);
    if (it == base.end() || *it != p.eta) base.insert(it, p.eta);
  }

  const double span = base.back();
  std::vector<double> grid{base.front()};
  auto f = [&](double t) { return marginal_density(t, p); };
  // Difference between the one- and two-panel trapezoid rules.
  auto refine = [&](auto&& self, double a, double fa, double b, double fb,
                    int depth) -> void {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double err = 0.25 * (b - a) * std::abs(fa + fb - 2.0 * fm);
    if (err <= tol * (b - a) / span || depth >= 24) {
      grid.push_back(m);
      grid.push_back(b);
      return;
    }
    self(self, a, fa, m, fm, depth + 1);
    self(self, m, fm, b, fb, depth + 1);
  };
  double fa = f(base.front());
  for (std::size_t i = 1; i < base.size(); ++i) {
    const double fb = f(base[i]);
    refine(refine, base[i - 1], fa, base[i], fb, 0);
    fa = fb;
  }
  return grid;
}

}  // namespace analytic

inline void write_table_csv(std::ostream& out, const DensityTable& table) {
  out << "t,value\n";
  for (std::size_t i = 0; i < table.size(); ++i)
    out << format_double(table.abscissae[i], 15) << ','
        << format_double(table.values[i], 15) << '\n';
}

inline nlohmann::json table_metadata(const DensityTable& table) {
  nlohmann::json j;
  j["kind"] = to_string(table.kind);
  j["points"] = table.size();
  j["params"] = table.params;
  if (table.kind == TableKind::pdf) j["trapezoid_mass"] = table.trapezoid_integral();
  return j;
}

}  // namespace trickle
