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
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mpsgan/data.hpp"
#include "mpsgan/embedding.hpp"
#include "mpsgan/errors.hpp"
#include "mpsgan/mps.hpp"
#include "mpsgan/optimizer.hpp"
#include "mpsgan/rng.hpp"

namespace mpsgan {

/// Smallest log-probability used in the loss (about log of the smallest
/// positive double).
inline constexpr double kLogFloor = -745.0;

/// Embedded inputs, one N×d matrix per point.
using EmbeddedSet = std::vector<Matrix>;

inline EmbeddedSet embed_dataset(const Embedding& e, const Dataset& ds) {
  EmbeddedSet out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(embed_vector(e, ds.features.row(i)));
  return out;
}

/// Adds i.i.d. Normal(0, sigma²) noise to every embedded component.
inline Matrix perturb_embedding(Matrix phi, double sigma, RngStream& rng) {
  if (sigma > 0.0) {
    for (double& v : phi.data()) v += sigma * rng.normal();
  }
  return phi;
}

/// -log p(label | x) for one embedded point; when `grad` is non-empty the
/// gradient with respect to delta is accumulated into it (scaled by `weight`).
///
/// Uses d log|y_c| / dA_n[l, r, e] = L_n[l] R_{n+1}[r] φ_e / (L_n M_n R_{n+1})
/// where L and R are the max-normalized prefix/suffix boundary vectors, so the
/// rescale divisors never enter the gradient.
inline double sample_loss(const MpsEnsemble& m, const Matrix& phi, std::size_t label,
                          std::span<double> grad = {}, double weight = 1.0) {
  const std::size_t N = m.sites();
  const std::size_t D = m.bond();
  const std::size_t d = m.phys();
  const std::size_t C = m.classes();
  if (label >= C) throw ArgumentError("label " + std::to_string(label) + " out of range");

  std::vector<std::vector<double>> prefix(N + 1, std::vector<double>(D));
  std::vector<std::vector<double>> suffix(N + 1, std::vector<double>(D));
  std::vector<double> prefix_scale(N);
  std::vector<double> log_abs(C);
  std::vector<std::vector<std::vector<double>>> all_prefix;
  std::vector<std::vector<std::vector<double>>> all_suffix;
  std::vector<std::vector<double>> all_scale;
  const bool want_grad = !grad.empty();
  if (want_grad) {
    all_prefix.reserve(C);
    all_suffix.reserve(C);
    all_scale.reserve(C);
  }

  std::vector<bool> dead(C, false);
  for (std::size_t c = 0; c < C; ++c) {
    prefix[0] = detail::unit_vector(D);
    double log_scale = 0.0;
    for (std::size_t n = 0; n < N && !dead[c]; ++n) {
      detail::left_step(m, c, n, phi.row(n), prefix[n], prefix[n + 1]);
      if (std::all_of(prefix[n + 1].begin(), prefix[n + 1].end(), [](double v) { return v == 0.0; })) {
        dead[c] = true;  // y_c = 0 exactly
        break;
      }
      const double ls = detail::normalize_max(prefix[n + 1]);
      prefix_scale[n] = std::exp(ls);
      log_scale += ls;
    }
    const double mant = dead[c] ? 0.0 : prefix[N][0];
    dead[c] = mant == 0.0;
    log_abs[c] = dead[c] ? -std::numeric_limits<double>::infinity() : std::log(std::abs(mant)) + log_scale;
    if (want_grad && dead[c]) {
      all_prefix.emplace_back();
      all_suffix.emplace_back();
      all_scale.emplace_back();
    } else if (want_grad) {
      suffix[N] = detail::unit_vector(D);
      for (std::size_t n = N; n-- > 1;) {
        detail::right_step(m, c, n, phi.row(n), suffix[n + 1], suffix[n]);
        detail::normalize_max(suffix[n]);
      }
      all_prefix.push_back(prefix);
      all_suffix.push_back(suffix);
      all_scale.push_back(prefix_scale);
    }
  }

  double top = -std::numeric_limits<double>::infinity();
  for (double la : log_abs) top = std::max(top, la);
  if (!std::isfinite(top)) throw DegenerateError("every class score is zero");
  std::vector<double> p(C);
  double z = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    p[c] = std::isfinite(log_abs[c]) ? std::exp(2.0 * (log_abs[c] - top)) : 0.0;
    z += p[c];
  }
  const double log_z = std::log(z);
  for (double& v : p) v /= z;
  double log_p = std::isfinite(log_abs[label]) ? 2.0 * (log_abs[label] - top) - log_z : kLogFloor;
  log_p = std::max(log_p, kLogFloor);

  if (want_grad) {
    for (std::size_t c = 0; c < C; ++c) {
      const double coef = weight * 2.0 * (p[c] - (c == label ? 1.0 : 0.0));
      if (coef == 0.0 || dead[c]) continue;
      for (std::size_t n = 0; n < N; ++n) {
        const auto& l = all_prefix[c][n];
        const auto& r = all_suffix[c][n + 1];
        // L_n M_n R_{n+1} = s_n (L_{n+1} · R_{n+1})
        double y = 0.0;
        for (std::size_t k = 0; k < D; ++k) y += all_prefix[c][n + 1][k] * r[k];
        y *= all_scale[c][n];
        if (y == 0.0) continue;
        const double f = coef / y;
        double* g = grad.data() + m.site_offset(c, n);
        const auto ph = phi.row(n);
        for (std::size_t a = 0; a < D; ++a) {
          if (l[a] == 0.0) continue;
          for (std::size_t b = 0; b < D; ++b) {
            const double lr = f * l[a] * r[b];
            if (lr == 0.0) continue;
            double* gab = g + (a * D + b) * d;
            for (std::size_t e = 0; e < d; ++e) gab[e] += lr * ph[e];
          }
        }
      }
    }
  }
  return -log_p;
}

inline double weight_penalty(const MpsEnsemble& m, double weight_decay) {
  if (weight_decay == 0.0) return 0.0;
  double s = 0.0;
  for (double v : m.delta()) s += v * v;
  return 0.5 * weight_decay * s;
}

/// Mean cross-entropy over `batch` (+ weight_decay/2 · |delta|²).
inline double cross_entropy_loss(const MpsEnsemble& m, const EmbeddedSet& inputs,
                                 std::span<const std::size_t> labels,
                                 std::span<const std::size_t> batch, double weight_decay = 0.0) {
  if (batch.empty()) throw ArgumentError("cross_entropy_loss: empty batch");
  double total = 0.0;
  for (auto i : batch) total += sample_loss(m, inputs[i], labels[i]);
  return total / static_cast<double>(batch.size()) + weight_penalty(m, weight_decay);
}

inline double cross_entropy_loss(const MpsEnsemble& m, const Dataset& data,
                                 double weight_decay = 0.0) {
  const auto inputs = embed_dataset(m.embedding(), data);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  return cross_entropy_loss(m, inputs, data.labels, all, weight_decay);
}

/// Gradient of cross_entropy_loss with respect to delta (the identity base is
/// frozen).
inline std::vector<double> grad_loss(const MpsEnsemble& m, const EmbeddedSet& inputs,
                                     std::span<const std::size_t> labels,
                                     std::span<const std::size_t> batch, double weight_decay = 0.0) {
  if (batch.empty()) throw ArgumentError("grad_loss: empty batch");
  std::vector<double> grad(m.delta().size(), 0.0);
  const double w = 1.0 / static_cast<double>(batch.size());
  for (auto i : batch) sample_loss(m, inputs[i], labels[i], grad, w);
  if (weight_decay != 0.0) {
    const auto delta = m.delta();
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += weight_decay * delta[k];
  }
  return grad;
}

inline std::vector<double> grad_loss(const MpsEnsemble& m, const Dataset& data,
                                     double weight_decay = 0.0) {
  const auto inputs = embed_dataset(m.embedding(), data);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  return grad_loss(m, inputs, data.labels, all, weight_decay);
}

inline double accuracy(const MpsEnsemble& m, const EmbeddedSet& inputs,
                       std::span<const std::size_t> labels) {
  if (inputs.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto p = predict_proba_embedded(m, inputs[i]);
    if (argmax(p) == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(inputs.size());
}

/// Classification accuracy on a support-space dataset.
inline double accuracy(const MpsEnsemble& m, const Dataset& data) {
  return accuracy(m, embed_dataset(m.embedding(), data), data.labels);
}

struct TrainConfig {
  double learning_rate = 0.01;
  double lr_decay = 0.5;           // multiplicative factor on plateau
  std::size_t lr_patience = 10;    // epochs without val-loss improvement
  double weight_decay = 0.0;
  std::size_t epochs = 200;
  std::size_t batch_size = 128;
  double sigma_init = 0.1;
  std::size_t early_stop_patience = 30;  // epochs without val-accuracy improvement
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double embed_noise = 0.0;  // train-noise robustness mode
  double min_learning_rate = 1e-5;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  MpsEnsemble model;
  std::vector<EpochRecord> history;
  double best_val_accuracy = 0.0;
};

/// One shuffled pass of mini-batch updates; returns the summed sample loss.
/// `should_stop`, when set, is polled after every update and ends the pass early.
inline double run_classification_epoch(MpsEnsemble& model, const EmbeddedSet& inputs,
                                       std::span<const std::size_t> labels, Optimizer& opt,
                                       std::size_t batch_size, double weight_decay,
                                       double embed_noise, RngStream& rng, RngStream& noise_rng,
                                       std::size_t epoch = 0,
                                       const std::function<bool()>& should_stop = {}) {
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  double loss_sum = 0.0;
  std::vector<double> grad(model.delta().size());
  for (std::size_t start = 0, batch_index = 0; start < order.size();
       start += batch_size, ++batch_index) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    const std::span<const std::size_t> batch(order.data() + start, stop - start);
    std::fill(grad.begin(), grad.end(), 0.0);
    const double w = 1.0 / static_cast<double>(batch.size());
    auto abort = [&] {
      double norm = 0.0;
      for (double v : model.delta()) norm += v * v;
      throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ", parameter norm " +
                           std::to_string(std::sqrt(norm)));
    };
    double batch_loss = 0.0;
    try {
      for (auto i : batch) {
        if (embed_noise > 0.0) {
          const Matrix noisy = perturb_embedding(inputs[i], embed_noise, noise_rng);
          batch_loss += sample_loss(model, noisy, labels[i], grad, w);
        } else {
          batch_loss += sample_loss(model, inputs[i], labels[i], grad, w);
        }
      }
    } catch (const NumericalError&) {
      abort();
    }
    if (weight_decay != 0.0) {
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += weight_decay * model.delta()[k];
    }
    if (!std::isfinite(batch_loss)) abort();
    loss_sum += batch_loss;
    opt.step(model.delta(), grad);
    if (should_stop && should_stop()) break;
  }
  return loss_sum;
}

/// Mini-batch gradient descent on cross-entropy with learning-rate decay on
/// plateau and early stopping; returns the model with the best validation
/// accuracy. Both datasets must already be in the embedding support.
inline TrainResult train_classifier(MpsEnsemble model, const Dataset& train, const Dataset& val,
                                    const TrainConfig& cfg,
                                    const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  if (train.size() == 0) throw ArgumentError("train_classifier: empty training set");
  if (train.dim() != model.sites()) throw ArgumentError("train_classifier: feature count != site count");
  if (cfg.batch_size == 0) throw ArgumentError("train_classifier: batch size must be positive");
  for (auto l : train.labels)
    if (l >= model.classes()) throw ArgumentError("train_classifier: label out of range");

  RngStream rng(cfg.seed);
  RngStream noise_rng = rng.derive(17);
  const EmbeddedSet train_in = embed_dataset(model.embedding(), train);
  const EmbeddedSet val_in = embed_dataset(model.embedding(), val.size() ? val : train);
  const auto& val_labels = val.size() ? val.labels : train.labels;

  Optimizer opt(cfg.optimizer, cfg.learning_rate);
  TrainResult result{model, {}, -1.0};
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t since_loss_improved = 0;
  std::size_t since_acc_improved = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double loss_sum = run_classification_epoch(model, train_in, train.labels, opt, cfg.batch_size,
                                                     cfg.weight_decay, cfg.embed_noise, rng,
                                                     noise_rng, epoch);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.learning_rate = opt.learning_rate();
    double val_loss = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < val_in.size(); ++i) {
      val_loss += sample_loss(model, val_in[i], val_labels[i]);
      if (argmax(predict_proba_embedded(model, val_in[i])) == val_labels[i]) ++hits;
    }
    rec.val_loss = val_loss / static_cast<double>(val_in.size());
    rec.val_accuracy = static_cast<double>(hits) / static_cast<double>(val_in.size());
    rec.train_accuracy = accuracy(model, train_in, train.labels);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = rec.val_accuracy;
      result.model = model;
      since_acc_improved = 0;
    } else {
      ++since_acc_improved;
    }
    if (rec.val_loss < best_val_loss) {
      best_val_loss = rec.val_loss;
      since_loss_improved = 0;
    } else if (++since_loss_improved >= cfg.lr_patience) {
      opt.set_learning_rate(std::max(cfg.min_learning_rate, opt.learning_rate() * cfg.lr_decay));
      since_loss_improved = 0;
    }
    if (cfg.early_stop_patience > 0 && since_acc_improved >= cfg.early_stop_patience) break;
  }
  if (result.best_val_accuracy < 0.0) result.best_val_accuracy = 0.0;
  return result;
}

/// Model hyper-parameters for building a fresh ensemble from data.
struct ModelConfig {
  EmbeddingKind embedding = EmbeddingKind::Fourier;
  std::size_t phys = 10;
  std::size_t bond = 4;
};

/// Builds an identity-plus-noise ensemble sized for `data`.
inline MpsEnsemble make_model(const Dataset& data, const ModelConfig& mc, double sigma,
                              std::uint64_t seed) {
  const Embedding e(mc.embedding, mc.phys);
  RngStream rng(seed);
  return init_ensemble(std::max<std::size_t>(data.classes, 2), data.dim(), mc.bond, mc.phys, e, sigma,
                       rng);
}

}  // namespace mpsgan
