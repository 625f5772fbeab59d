/*
 * Copyright 2026 The treezone Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "treezone/training/grid.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>

#include "treezone/errors.hpp"
#include "treezone/rng.hpp"
#include "treezone/training/trainer.hpp"

namespace treezone {

GridAxis parse_axis(std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos || eq == 0 || eq + 1 == spec.size()) {
    throw UsageError("grid axis '" + std::string(spec) + "' must look like key=v1,v2,...");
  }
  GridAxis axis{std::string(spec.substr(0, eq)), {}};
  std::string_view rest = spec.substr(eq + 1);
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view v = rest.substr(0, comma);
    if (v.empty()) throw UsageError("grid axis '" + axis.key + "' has an empty value");
    axis.values.emplace_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  TrainConfig probe;
  for (const std::string& v : axis.values) probe.set(axis.key, v);
  return axis;
}

std::uint64_t cell_seed(std::uint64_t base,
                        const std::vector<std::pair<std::string, std::string>>& settings) {
  if (settings.empty()) return base;
  std::string canonical;
  for (const auto& [k, v] : settings) {
    if (k == "seed") return std::stoull(v);
    canonical += k + "=" + v + ";";
  }
  return derive_seed(base, stable_hash(canonical));
}

std::vector<GridRow> expand_grid(const TrainConfig& base, std::span<const GridAxis> axes) {
  std::vector<GridRow> rows(1);
  rows[0].config = base;
  for (const GridAxis& axis : axes) {
    std::vector<GridRow> next;
    next.reserve(rows.size() * axis.values.size());
    for (const GridRow& r : rows) {
      for (const std::string& v : axis.values) {
        GridRow cell = r;
        cell.config.set(axis.key, v);
        cell.settings.emplace_back(axis.key, v);
        next.push_back(std::move(cell));
      }
    }
    rows = std::move(next);
  }
  for (GridRow& r : rows) r.config.seed = cell_seed(base.seed, r.settings);
  return rows;
}

template <std::floating_point T>
std::vector<GridRow> grid_search(const TrainConfig& base, std::span<const GridAxis> axes,
                                 const Treebank& train_set, const Treebank& eval_set,
                                 const EmbeddingStore& store, std::size_t workers) {
  std::vector<GridRow> rows = expand_grid(base, axes);
  const Treebank* extra[] = {&eval_set};
  std::mutex collector;

  const auto n = static_cast<std::ptrdiff_t>(rows.size());
  const int threads = static_cast<int>(std::max<std::size_t>(1, workers));
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    GridRow& row = rows[static_cast<std::size_t>(i)];
    double accuracy = std::nan("");
    double seconds = 0.0;
    std::string error;
    try {
      row.config.validate();
      TrainResult<T> trained = train<T>(row.config, train_set, store, extra);
      accuracy = evaluate(trained.model, eval_set, row.config.zoneout).node_accuracy;
      seconds = trained.report.seconds;
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::lock_guard<std::mutex> lock(collector);
    row.accuracy = accuracy;
    row.seconds = seconds;
    row.error = std::move(error);
  }

  std::stable_sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
    if (a.failed() != b.failed()) return !a.failed();
    return a.accuracy < b.accuracy;
  });
  return rows;
}

namespace {

bool is_zoneout_key(const std::string& k) {
  return k == "zoneout.mask" || k == "zoneout.strategy" || k == "zoneout.rate_c" ||
         k == "zoneout.rate_h";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_grid_table(std::ostream& out, std::span<const GridRow> rows,
                      std::span<const GridAxis> axes) {
  std::vector<std::string> extra;
  for (const GridAxis& a : axes) {
    if (!is_zoneout_key(a.key)) extra.push_back(a.key);
  }
  const bool any_failed =
      std::any_of(rows.begin(), rows.end(), [](const GridRow& r) { return r.failed(); });

  out << "mask\tstrategy\trate_c\trate_h";
  for (const std::string& k : extra) out << '\t' << k;
  out << "\taccuracy";
  if (any_failed) out << "\tstatus";
  out << '\n';

  for (const GridRow& r : rows) {
    const ZoneoutConfig& z = r.config.zoneout;
    const bool off = !z.enabled();
    out << (off ? "n/a" : to_string(z.scope)) << '\t' << (off ? "n/a" : to_string(z.strategy))
        << '\t' << fixed(off ? 0.0 : z.rate_c, 2) << '\t' << fixed(off ? 0.0 : z.rate_h, 2);
    for (const std::string& k : extra) {
      std::string value;
      for (const auto& [key, v] : r.settings) {
        if (key == k) value = v;
      }
      out << '\t' << value;
    }
    out << '\t' << (r.failed() ? std::string("nan") : fixed(r.accuracy, 4));
    if (any_failed) out << '\t' << (r.failed() ? "error: " + r.error : std::string("ok"));
    out << '\n';
  }
}

template std::vector<GridRow> grid_search<float>(const TrainConfig&, std::span<const GridAxis>,
                                                 const Treebank&, const Treebank&,
                                                 const EmbeddingStore&, std::size_t);
template std::vector<GridRow> grid_search<double>(const TrainConfig&, std::span<const GridAxis>,
                                                  const Treebank&, const Treebank&,
                                                  const EmbeddingStore&, std::size_t);

}  // namespace treezone
