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
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpsgan/data.hpp"
#include "mpsgan/discriminator.hpp"
#include "mpsgan/errors.hpp"
#include "mpsgan/mps.hpp"
#include "mpsgan/optimizer.hpp"
#include "mpsgan/rng.hpp"
#include "mpsgan/sampling.hpp"
#include "mpsgan/training.hpp"

namespace mpsgan {

struct GanConfig {
  std::size_t disc_pretrain_epochs = 2;
  std::size_t adversarial_epochs = 10;
  double gen_lr = 3e-3;
  double disc_lr = 1e-3;
  double retrain_lr = 3e-3;
  std::optional<double> accuracy_floor;  // unset: validation accuracy of the input model
  std::size_t retrain_budget = 50;       // recovery epochs per accuracy drop
  std::vector<std::size_t> disc_hidden{64, 64};
  std::size_t batch_size = 128;
  std::size_t bins = kDefaultBins;
  std::size_t gen_steps = 1;   // generator updates per batch
  std::size_t disc_steps = 1;  // discriminator updates per batch
  std::size_t batches_per_epoch = 0;  // 0: one full pass over the training data
  std::uint64_t seed = 0;
};

struct GanEpochRecord {
  std::size_t epoch = 0;
  double gen_loss = 0.0;
  double disc_loss = 0.0;
  double val_accuracy = 0.0;
  std::size_t retrain_epochs = 0;
};

struct GanResult {
  MpsEnsemble model;
  Discriminator discriminator;
  std::vector<GanEpochRecord> history;
  double accuracy_floor = 0.0;
};

/// Raised when classification accuracy cannot be restored within the retrain
/// budget; carries the last model that met the floor.
class TrainingFailed : public Error {
 public:
  TrainingFailed(const std::string& what, MpsEnsemble checkpoint)
      : Error(what), checkpoint_(std::move(checkpoint)) {}
  const MpsEnsemble& checkpoint() const { return checkpoint_; }

 private:
  MpsEnsemble checkpoint_;
};

namespace detail {

inline std::vector<std::vector<double>> draw_fakes(const Sampler& sampler, std::size_t count,
                                                   std::size_t sites, RngStream& rng) {
  std::vector<std::vector<double>> out;
  out.reserve(count);
  std::vector<double> nu(sites);
  for (std::size_t s = 0; s < count; ++s) {
    for (double& v : nu) v = rng.uniform();
    out.push_back(sampler.sample(nu));
  }
  return out;
}

}  // namespace detail

/// Adversarial refinement of a pretrained ensemble.
///
/// Phases: (1) the input model is the pretrained classifier and its
/// validation accuracy is the floor, (2) discriminators are pretrained on real
/// vs generated samples, (3) alternating discriminator (binary cross-entropy)
/// and generator (non-saturating -log D through the differentiable sampler)
/// updates, (4) after each epoch the accuracy is checked and, below the floor,
/// the model is retrained on cross-entropy until it recovers.
///
/// Datasets are in the embedding support; the discriminators see support
/// coordinates as well.
inline GanResult train_gan(MpsEnsemble model, const Dataset& train, const Dataset& val,
                           const GanConfig& cfg, const TrainConfig& cls_cfg = {},
                           const std::function<void(const GanEpochRecord&)>& on_epoch = {}) {
  const GramMatrix gram = gram_matrix(model.embedding());
  if (!gram.generation_capable) {
    throw CapabilityError(std::string("embedding '") + std::string(to_string(model.embedding().kind())) +
                          "' is not generation-capable");
  }
  if (train.dim() != model.sites()) throw ArgumentError("train_gan: feature count != site count");
  const std::size_t C = model.classes();
  const std::size_t N = model.sites();

  const EmbeddedSet val_in = embed_dataset(model.embedding(), val);
  const EmbeddedSet train_in = embed_dataset(model.embedding(), train);
  const double floor = cfg.accuracy_floor.value_or(accuracy(model, val_in, val.labels));

  GanResult result{model, {}, {}, floor};
  if (cfg.adversarial_epochs == 0) return result;

  RngStream rng(cfg.seed);
  RngStream disc_init = rng.derive(1);
  RngStream latent = rng.derive(2);
  RngStream cls_rng = rng.derive(3);
  RngStream noise_rng = rng.derive(4);
  result.discriminator = Discriminator(C, N, cfg.disc_hidden, disc_init);
  std::vector<Optimizer> disc_opt(C, Optimizer(OptimizerKind::Adam, cfg.disc_lr, 0.5, 0.999));
  Optimizer gen_opt(OptimizerKind::Adam, cfg.gen_lr, 0.5, 0.999);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  auto real_rows = [&](std::span<const std::size_t> batch, std::size_t c) {
    std::vector<std::vector<double>> rows;
    for (auto i : batch) {
      if (train.labels[i] != c) continue;
      const auto r = train.features.row(i);
      rows.emplace_back(r.begin(), r.end());
    }
    return rows;
  };

  auto batch_count = [&]() {
    const std::size_t full = (train.size() + cfg.batch_size - 1) / cfg.batch_size;
    return cfg.batches_per_epoch ? std::min(full, cfg.batches_per_epoch) : full;
  };

  // Discriminator pretraining.
  for (std::size_t epoch = 0; epoch < cfg.disc_pretrain_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t b = 0; b < batch_count(); ++b) {
      const std::size_t start = b * cfg.batch_size;
      const std::span<const std::size_t> batch(order.data() + start,
                                               std::min(cfg.batch_size, order.size() - start));
      for (std::size_t c = 0; c < C; ++c) {
        const auto real = real_rows(batch, c);
        if (real.empty()) continue;
        const Sampler sampler(result.model, c, gram, cfg.bins);
        const auto fake = detail::draw_fakes(sampler, real.size(), N, latent);
        discriminator_step(result.discriminator.nets[c], disc_opt[c], real, fake);
      }
    }
  }

  MpsEnsemble& gen = result.model;
  MpsEnsemble last_good = gen;
  std::vector<double> grad(gen.delta().size());
  std::vector<std::vector<double>> acts;
  SampleTape tape;

  for (std::size_t epoch = 1; epoch <= cfg.adversarial_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    GanEpochRecord rec;
    rec.epoch = epoch;
    std::size_t gen_count = 0;
    std::size_t disc_count = 0;

    for (std::size_t b = 0; b < batch_count(); ++b) {
      const std::size_t start = b * cfg.batch_size;
      const std::span<const std::size_t> batch(order.data() + start,
                                               std::min(cfg.batch_size, order.size() - start));
      for (std::size_t step = 0; step < cfg.disc_steps; ++step) {
        for (std::size_t c = 0; c < C; ++c) {
          const auto real = real_rows(batch, c);
          if (real.empty()) continue;
          const Sampler sampler(gen, c, gram, cfg.bins);
          const auto fake = detail::draw_fakes(sampler, real.size(), N, latent);
          rec.disc_loss += discriminator_step(result.discriminator.nets[c], disc_opt[c], real, fake);
          ++disc_count;
        }
      }
      for (std::size_t step = 0; step < cfg.gen_steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        std::size_t generated = 0;
        for (std::size_t c = 0; c < C; ++c) {
          std::size_t count = 0;
          for (auto i : batch) count += train.labels[i] == c;
          if (count == 0) continue;
          const Sampler sampler(gen, c, gram, cfg.bins);
          const Mlp& net = result.discriminator.nets[c];
          std::vector<double> scratch(net.params().size());
          std::vector<double> nu(N);
          for (std::size_t s = 0; s < count; ++s) {
            for (double& v : nu) v = latent.uniform();
            const auto x = sampler.sample(nu, &tape);
            const double z = net.logit(x, &acts);
            loss += softplus(-z);
            const auto g_x = net.backward(acts, (sigmoid(z) - 1.0), scratch);
            sampler.backward(tape, g_x, grad);
          }
          generated += count;
        }
        if (generated == 0) continue;
        for (double& g : grad) g /= static_cast<double>(generated);
        gen_opt.step(gen.delta(), grad);
        rec.gen_loss += loss / static_cast<double>(generated);
        ++gen_count;
      }
    }
    if (gen_count) rec.gen_loss /= static_cast<double>(gen_count);
    if (disc_count) rec.disc_loss /= static_cast<double>(disc_count);

    rec.val_accuracy = accuracy(gen, val_in, val.labels);
    if (rec.val_accuracy < floor) {
      Optimizer cls_opt(cls_cfg.optimizer, cfg.retrain_lr);
      auto recovered = [&] {
        rec.val_accuracy = accuracy(gen, val_in, val.labels);
        return rec.val_accuracy >= floor;
      };
      while (rec.val_accuracy < floor && rec.retrain_epochs < cfg.retrain_budget) {
        run_classification_epoch(gen, train_in, train.labels, cls_opt, cls_cfg.batch_size,
                                 cls_cfg.weight_decay, 0.0, cls_rng, noise_rng, epoch, recovered);
        ++rec.retrain_epochs;
      }
      if (rec.val_accuracy < floor) {
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);
        throw TrainingFailed("classification accuracy " + std::to_string(rec.val_accuracy) +
                                 " stayed below floor " + std::to_string(floor) + " after " +
                                 std::to_string(rec.retrain_epochs) + " retraining epochs",
                             last_good);
      }
    }
    last_good = gen;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

}  // namespace mpsgan
