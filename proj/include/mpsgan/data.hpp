// Copyright 2026 The mpsgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mpsgan/embedding.hpp"
#include "mpsgan/errors.hpp"
#include "mpsgan/numerics.hpp"
#include "mpsgan/rng.hpp"

namespace mpsgan {

/// Labeled point set; features are one row per point.
struct Dataset {
  Matrix features;
  std::vector<std::size_t> labels;
  std::size_t classes = 0;
  // Global min/max of the raw features before normalization.
  double range_min = 0.0;
  double range_max = 1.0;

  std::size_t size() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(classes, 0);
    for (auto l : labels) ++counts[l];
    return counts;
  }

  Dataset subset(std::span<const std::size_t> rows) const {
    Dataset out{Matrix(rows.size(), dim()), {}, classes, range_min, range_max};
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy_n(features.row(rows[i]).begin(), dim(), out.features.row(i).begin());
      out.labels.push_back(labels[rows[i]]);
    }
    return out;
  }

  /// Rows belonging to class c.
  Matrix class_points(std::size_t c) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < size(); ++i)
      if (labels[i] == c) rows.push_back(i);
    return subset(rows).features;
  }
};

/// In-place global (whole-matrix) min-max normalization to [0, 1].
inline void normalize_global(Dataset& ds) {
  const auto values = ds.features.data();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  ds.range_min = *lo;
  ds.range_max = *hi;
  const double span = ds.range_max - ds.range_min;
  if (!(span > 0.0)) throw ArgumentError("normalize_global: constant features");
  for (double& v : values) v = (v - ds.range_min) / span;
}

/// Two interleaved spirals, n points per class (the shared angle array is
/// drawn first, then the jitter of each arm).
inline Dataset gen_spiral(std::size_t n_per_class, RngStream& rng) {
  if (n_per_class == 0) throw ArgumentError("gen_spiral: n must be positive");
  const std::size_t n = n_per_class;
  std::vector<double> theta(n);
  for (double& t : theta) t = std::sqrt(rng.uniform()) * 2.0 * std::numbers::pi;
  Dataset ds{Matrix(2 * n, 2), std::vector<std::size_t>(2 * n), 2};
  for (std::size_t arm = 0; arm < 2; ++arm) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = arm == 0 ? 2.0 * theta[i] + std::numbers::pi : -2.0 * theta[i] - std::numbers::pi;
      const std::size_t row = arm * n + i;
      ds.features(row, 0) = std::cos(theta[i]) * r;
      ds.features(row, 1) = std::sin(theta[i]) * r;
      ds.labels[row] = arm;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t row = arm * n + i;
      ds.features(row, 0) += rng.normal();
      ds.features(row, 1) += rng.normal();
    }
  }
  for (double& v : ds.features.data()) v /= 20.0;
  normalize_global(ds);
  return ds;
}

/// Two interleaving half circles: the upper arc, and the lower arc shifted by
/// (1, -0.5), with Gaussian noise, shuffled, then min-max normalized.
inline Dataset gen_moons(std::size_t n, double noise, RngStream& rng) {
  if (n == 0) throw ArgumentError("gen_moons: n must be positive");
  if (!(noise >= 0.0)) throw ArgumentError("gen_moons: noise must be >= 0");
  const std::size_t n_out = n / 2;
  const std::size_t n_in = n - n_out;
  auto linspace = [](std::size_t count, std::size_t k) {
    return count <= 1 ? 0.0 : std::numbers::pi * static_cast<double>(k) / static_cast<double>(count - 1);
  };
  Dataset ds{Matrix(n, 2), std::vector<std::size_t>(n), 2};
  for (std::size_t k = 0; k < n_out; ++k) {
    const double t = linspace(n_out, k);
    ds.features(k, 0) = std::cos(t);
    ds.features(k, 1) = std::sin(t);
    ds.labels[k] = 0;
  }
  for (std::size_t k = 0; k < n_in; ++k) {
    const double t = linspace(n_in, k);
    ds.features(n_out + k, 0) = 1.0 - std::cos(t);
    ds.features(n_out + k, 1) = 1.0 - std::sin(t) - 0.5;
    ds.labels[n_out + k] = 1;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  ds = ds.subset(order);
  if (noise > 0.0) {
    for (double& v : ds.features.data()) v += noise * rng.normal();
  }
  normalize_global(ds);
  return ds;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_double(const std::string& cell, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size() && cell.find_first_not_of(" \t\r", used) != std::string::npos) {
      throw std::invalid_argument(cell);
    }
    return v;
  } catch (const std::exception&) {
    throw FormatError("row " + std::to_string(row) + ": cannot parse '" + cell + "' as a number");
  }
}

}  // namespace detail

/// Headered CSV, feature columns then an optional trailing `label` column.
/// Features are read as-is (no normalization).
inline Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  const bool labeled = !header.empty() && header.back() == "label";
  const std::size_t n_features = header.size() - (labeled ? 1 : 0);
  if (n_features == 0) throw FormatError(path + ": no feature columns");

  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw FormatError(path + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " columns, expected " + std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < n_features; ++j) values.push_back(detail::parse_double(cells[j], row));
    if (labeled) {
      const double l = detail::parse_double(cells.back(), row);
      if (l < 0 || l != std::floor(l)) {
        throw FormatError(path + ": row " + std::to_string(row) + " has an invalid label");
      }
      labels.push_back(static_cast<std::size_t>(l));
    }
  }
  Dataset ds;
  const std::size_t rows = values.size() / n_features;
  ds.features = Matrix(rows, n_features, std::move(values));
  if (labeled) {
    ds.labels = std::move(labels);
    ds.classes = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  } else {
    ds.labels.assign(rows, 0);
    ds.classes = 1;
  }
  return ds;
}

/// Writes a headered CSV (x0..x{N-1}[,label]) with round-trip precision.
inline void write_csv(const Dataset& ds, const std::string& path, bool with_labels = true) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  out.precision(17);
  for (std::size_t j = 0; j < ds.dim(); ++j) out << (j ? "," : "") << 'x' << j;
  if (with_labels) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) out << (j ? "," : "") << ds.features(i, j);
    if (with_labels) out << ',' << ds.labels[i];
    out << '\n';
  }
  if (!out) throw std::ios_base::failure("failed writing '" + path + "'");
}

/// Iris measurements with global min-max normalization.
inline Dataset load_iris(const std::string& path) {
  Dataset ds = read_csv(path);
  if (ds.dim() != 4) throw FormatError(path + ": expected 4 feature columns");
  normalize_global(ds);
  return ds;
}

struct Split {
  Dataset train;
  Dataset validation;
};

/// Seeded stratified split; `train_fraction` of each class goes to train.
inline Split stratified_split(const Dataset& ds, RngStream& rng, double train_fraction = 0.8) {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> val_rows;
  for (std::size_t c = 0; c < ds.classes; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == c) rows.push_back(i);
    rng.shuffle(std::span<std::size_t>(rows));
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(rows.size())));
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    val_rows.insert(val_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  return {ds.subset(train_rows), ds.subset(val_rows)};
}

/// Maps unit-interval features onto the embedding support.
inline Dataset to_support(Dataset ds, const Embedding& e) {
  for (double& v : ds.features.data()) {
    v = std::clamp(e.from_unit(v), e.lower(), e.upper());
  }
  return ds;
}

/// Inverse of to_support.
inline Dataset to_unit(Dataset ds, const Embedding& e) {
  for (double& v : ds.features.data()) v = e.to_unit(v);
  return ds;
}

inline void check_unit_range(const Dataset& ds) {
  for (double v : ds.features.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("features must lie in [0, 1]; found " + std::to_string(v));
    }
  }
}

}  // namespace mpsgan
