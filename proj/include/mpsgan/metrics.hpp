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
#include <numeric>
#include <span>
#include <vector>

#include "mpsgan/data.hpp"
#include "mpsgan/errors.hpp"
#include "mpsgan/mps.hpp"
#include "mpsgan/numerics.hpp"
#include "mpsgan/rng.hpp"
#include "mpsgan/sampling.hpp"
#include "mpsgan/training.hpp"

namespace mpsgan {

inline std::vector<double> column_means(const Matrix& pts) {
  std::vector<double> mu(pts.cols(), 0.0);
  for (std::size_t i = 0; i < pts.rows(); ++i)
    for (std::size_t j = 0; j < pts.cols(); ++j) mu[j] += pts(i, j);
  for (double& v : mu) v /= static_cast<double>(pts.rows());
  return mu;
}

/// Sample covariance with the M-1 denominator.
inline Matrix covariance(const Matrix& pts) {
  const auto mu = column_means(pts);
  const std::size_t n = pts.cols();
  Matrix cov(n, n);
  for (std::size_t i = 0; i < pts.rows(); ++i)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) cov(a, b) += (pts(i, a) - mu[a]) * (pts(i, b) - mu[b]);
  const double denom = static_cast<double>(pts.rows() - 1);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) cov(b, a) = cov(a, b) = cov(a, b) / denom;
  return cov;
}

/// ‖μ − μ_g‖² + Tr(Σ + Σ_g − 2 (Σ Σ_g)^{1/2}).
///
/// The trace of the matrix square root is taken from the symmetric product
/// Σ^{1/2} Σ_g Σ^{1/2}, which has the same spectrum as Σ Σ_g.
inline double fid_like(const Matrix& real, const Matrix& generated) {
  if (real.rows() < 2 || generated.rows() < 2) throw ArgumentError("fid_like: need >= 2 points per set");
  if (real.cols() != generated.cols()) throw ArgumentError("fid_like: dimension mismatch");
  const auto mu = column_means(real);
  const auto mu_g = column_means(generated);
  double mean_term = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) mean_term += (mu[j] - mu_g[j]) * (mu[j] - mu_g[j]);
  const Matrix cov = covariance(real);
  const Matrix cov_g = covariance(generated);
  const Matrix root = spd_sqrt(cov);
  Matrix product = root * cov_g * root;
  for (std::size_t a = 0; a < product.rows(); ++a)
    for (std::size_t b = a + 1; b < product.cols(); ++b)
      product(a, b) = product(b, a) = 0.5 * (product(a, b) + product(b, a));
  const auto spectrum = clamp_psd_spectrum(sym_eig(product).values);
  double trace_root = 0.0;
  for (double v : spectrum) trace_root += std::sqrt(v);
  return std::max(0.0, mean_term + trace(cov) + trace(cov_g) - 2.0 * trace_root);
}

inline constexpr std::size_t kDefaultOutlierK = 5;

/// k-NN outlier test against a reference (training) set. The threshold is
/// the largest mean distance from a training point to its k nearest other
/// training points.
class OutlierDetector {
 public:
  OutlierDetector(Matrix train, std::size_t k = kDefaultOutlierK) : train_(std::move(train)), k_(k) {
    if (k_ == 0 || k_ >= train_.rows()) {
      throw ArgumentError("outlier_rate: k must be in [1, |train| - 1]");
    }
    std::vector<double> dist(train_.rows() - 1);
    for (std::size_t i = 0; i < train_.rows(); ++i) {
      std::size_t w = 0;
      for (std::size_t j = 0; j < train_.rows(); ++j) {
        if (j == i) continue;
        dist[w++] = std::sqrt(squared_distance(train_.row(i), train_.row(j)));
      }
      threshold_ = std::max(threshold_, mean_of_k_smallest(dist, k_));
    }
  }

  double threshold() const { return threshold_; }
  std::size_t k() const { return k_; }

  bool is_outlier(std::span<const double> point) const {
    return knn_mean_distance(train_, point, k_) > threshold_;
  }

  double rate(const Matrix& samples) const {
    if (samples.rows() == 0) return 0.0;
    if (samples.cols() != train_.cols()) throw ArgumentError("outlier_rate: dimension mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples.rows(); ++i)
      if (is_outlier(samples.row(i))) ++hits;
    return static_cast<double>(hits) / static_cast<double>(samples.rows());
  }

 private:
  Matrix train_;
  std::size_t k_;
  double threshold_ = 0.0;
};

inline double outlier_rate(const Matrix& train, const Matrix& samples, std::size_t k = kDefaultOutlierK) {
  return OutlierDetector(train, k).rate(samples);
}

/// Draws counts[c] samples of each class with uniform quantile vectors.
/// Returned features are in the embedding support.
inline Dataset generate_samples(const MpsEnsemble& m, const GramMatrix& gram,
                                std::span<const std::size_t> counts, RngStream& rng,
                                std::size_t bins = kDefaultBins) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  Dataset out{Matrix(total, m.sites()), {}, m.classes()};
  out.labels.reserve(total);
  std::vector<double> nu(m.sites());
  std::size_t row = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    const Sampler sampler(m, c, gram, bins);
    for (std::size_t s = 0; s < counts[c]; ++s) {
      for (double& v : nu) v = rng.uniform();
      const auto x = sampler.sample(nu);
      std::copy(x.begin(), x.end(), out.features.row(row++).begin());
      out.labels.push_back(c);
    }
  }
  return out;
}

struct MetricsReport {
  double accuracy = 0.0;
  double fid_like = 0.0;
  double outlier_rate = 0.0;
  std::vector<std::size_t> sample_counts;
};

enum class NoiseMode { EvalNoise, TrainNoise };

/// Accuracy with every embedded component perturbed by Normal(0, sigma²).
inline double eval_noise_accuracy(const MpsEnsemble& m, const Dataset& data, double sigma,
                                  RngStream& rng) {
  if (!(sigma >= 0.0)) throw ArgumentError("perturbed_accuracy: sigma must be >= 0");
  const auto inputs = embed_dataset(m.embedding(), data);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Matrix phi = perturb_embedding(inputs[i], sigma, rng);
    const auto scores = classify_embedded(m, phi);
    double top = -1.0;
    std::size_t best = 0;
    bool any = false;
    for (std::size_t c = 0; c < scores.size(); ++c) {
      const double la = scores[c].log_abs();
      if (std::isfinite(la) && (!any || la > top)) {
        top = la;
        best = c;
        any = true;
      }
    }
    if (any && best == data.labels[i]) ++hits;
  }
  return inputs.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(inputs.size());
}

/// Eval-noise: `model` is evaluated on perturbed embeddings of `val`.
/// Train-noise: `model` (an untrained initialization) is trained on `train`
/// with perturbed embeddings and evaluated on clean `val`.
inline double perturbed_accuracy(const MpsEnsemble& model, const Dataset& train, const Dataset& val,
                                 double sigma, RngStream& rng, NoiseMode mode,
                                 TrainConfig cfg = {}) {
  if (!(sigma >= 0.0)) throw ArgumentError("perturbed_accuracy: sigma must be >= 0");
  if (mode == NoiseMode::EvalNoise) return eval_noise_accuracy(model, val, sigma, rng);
  cfg.embed_noise = sigma;
  cfg.seed = rng();
  const auto trained = train_classifier(model, train, val, cfg);
  return accuracy(trained.model, val);
}

}  // namespace mpsgan
