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
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mpsgan/data.hpp"
#include "mpsgan/embedding.hpp"
#include "mpsgan/errors.hpp"
#include "mpsgan/metrics.hpp"
#include "mpsgan/mps.hpp"
#include "mpsgan/rng.hpp"
#include "mpsgan/sampling.hpp"
#include "mpsgan/training.hpp"

namespace mpsgan {

inline double median(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

struct BinningRow {
  std::size_t bins = 0;
  double x = 0.0;
  double squared_error = 0.0;
  double seconds = 0.0;  // median wall time of one CDF build plus inversion
};

/// Quantile test on the identity reduced density matrix with a Fourier
/// embedding: the density is symmetric about 0.5, so the exact median is 0.5.
inline std::vector<BinningRow> binning_experiment(const std::vector<std::size_t>& bins_list,
                                                  std::size_t reps = 100, std::size_t phys = 10,
                                                  double nu = 0.5) {
  if (reps == 0) throw ArgumentError("binning experiment: reps must be positive");
  const Embedding e(EmbeddingKind::Fourier, phys);
  const Matrix v = Matrix::identity(phys);
  std::vector<BinningRow> rows;
  for (auto bins : bins_list) {
    BinningRow row;
    row.bins = bins;
    std::vector<double> times;
    times.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const double x = inverse_cdf(build_cdf(v, e, bins), nu);
      const auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
      row.x = x;
    }
    row.squared_error = (row.x - 0.5) * (row.x - 0.5);
    row.seconds = median(std::move(times));
    rows.push_back(row);
  }
  return rows;
}

/// Least-squares slope of log(squared error) against log(bins).
inline double loglog_slope(const std::vector<BinningRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = 0;
  for (const auto& r : rows) {
    if (!(r.squared_error > 0.0)) continue;
    const double lx = std::log(static_cast<double>(r.bins));
    const double ly = std::log(r.squared_error);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    n += 1;
  }
  if (n < 2) throw ArgumentError("loglog_slope: need two rows with positive error");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct BondDimRow {
  std::size_t bond = 0;
  std::uint64_t seed = 0;
  double val_accuracy = 0.0;
};

/// Trains one classifier per (bond dimension, seed). `split` is in [0, 1].
inline std::vector<BondDimRow> bond_dim_sweep(const Split& split, const std::vector<std::size_t>& bonds,
                                              const std::vector<std::uint64_t>& seeds, ModelConfig mc,
                                              TrainConfig cfg) {
  const Embedding e(mc.embedding, mc.phys);
  const Dataset train = to_support(split.train, e);
  const Dataset val = to_support(split.validation, e);
  std::vector<BondDimRow> rows;
  for (auto bond : bonds) {
    mc.bond = bond;
    for (auto seed : seeds) {
      cfg.seed = seed;
      auto model = make_model(train, mc, cfg.sigma_init, seed);
      const auto result = train_classifier(std::move(model), train, val, cfg);
      rows.push_back({bond, seed, accuracy(result.model, val)});
    }
  }
  return rows;
}

struct RobustnessRow {
  NoiseMode mode = NoiseMode::EvalNoise;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};

inline std::string_view to_string(NoiseMode m) {
  return m == NoiseMode::EvalNoise ? "eval-noise" : "train-noise";
}

/// Accuracy against embedded-input noise. Eval-noise trains once per seed on
/// clean data; train-noise trains once per (sigma, seed) and evaluates clean.
inline std::vector<RobustnessRow> robustness_sweep(const Split& split, const std::vector<double>& sigmas,
                                                   const std::vector<std::uint64_t>& seeds,
                                                   const std::vector<NoiseMode>& modes,
                                                   const ModelConfig& mc, TrainConfig cfg) {
  const Embedding e(mc.embedding, mc.phys);
  const Dataset train = to_support(split.train, e);
  const Dataset val = to_support(split.validation, e);
  std::vector<RobustnessRow> rows;
  for (auto mode : modes) {
    for (auto seed : seeds) {
      RngStream rng(seed);
      const auto init = make_model(train, mc, cfg.sigma_init, seed);
      if (mode == NoiseMode::EvalNoise) {
        cfg.seed = seed;
        cfg.embed_noise = 0.0;
        const auto clean = train_classifier(init, train, val, cfg).model;
        for (double sigma : sigmas) {
          RngStream noise = rng.derive(static_cast<std::uint64_t>(std::llround(sigma * 1e6)));
          rows.push_back({mode, sigma, seed, perturbed_accuracy(clean, train, val, sigma, noise, mode, cfg)});
        }
      } else {
        for (double sigma : sigmas) {
          RngStream noise = rng.derive(static_cast<std::uint64_t>(std::llround(sigma * 1e6)));
          rows.push_back({mode, sigma, seed, perturbed_accuracy(init, train, val, sigma, noise, mode, cfg)});
        }
      }
    }
  }
  return rows;
}

struct LatentPoint {
  std::size_t cls = 0;
  std::size_t step = 0;
  double t = 0.0;
  std::vector<double> x;  // support space
};

/// Per class, the samples along a straight line between two seeded latent
/// points.
inline std::vector<LatentPoint> latent_trajectories(const MpsEnsemble& m, std::size_t steps,
                                                    RngStream& rng, std::size_t bins = kDefaultBins) {
  const GramMatrix gram = gram_matrix(m.embedding());
  std::vector<LatentPoint> out;
  for (std::size_t c = 0; c < m.classes(); ++c) {
    std::vector<double> a(m.sites()), b(m.sites());
    for (auto& v : a) v = rng.uniform();
    for (auto& v : b) v = rng.uniform();
    const auto path = interpolate_latent(m, c, a, b, steps, gram, bins);
    for (std::size_t s = 0; s < path.size(); ++s) {
      out.push_back({c, s, static_cast<double>(s) / static_cast<double>(steps - 1), path[s]});
    }
  }
  return out;
}

}  // namespace mpsgan
