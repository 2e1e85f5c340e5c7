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
#include <span>
#include <vector>

#include "mpsgan/errors.hpp"
#include "mpsgan/optimizer.hpp"
#include "mpsgan/rng.hpp"

namespace mpsgan {

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline constexpr double kLeakySlope = 0.01;

/// Fully connected network with leaky-ReLU hidden layers and one logit
/// output. Parameters live in one flat buffer: per layer W (out×in,
/// row-major) followed by b.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t inputs, std::vector<std::size_t> hidden, RngStream& rng) {
    sizes_.push_back(inputs);
    for (auto h : hidden) sizes_.push_back(h);
    sizes_.push_back(1);
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(total);
      total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    }
    params_.assign(total, 0.0);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const double limit = std::sqrt(6.0 / static_cast<double>(sizes_[l] + sizes_[l + 1]));
      double* w = params_.data() + offsets_[l];
      for (std::size_t k = 0; k < sizes_[l + 1] * sizes_[l]; ++k) w[k] = rng.uniform(-limit, limit);
    }
  }

  std::size_t inputs() const { return sizes_.front(); }
  std::size_t layers() const { return offsets_.size(); }
  std::size_t layer_in(std::size_t l) const { return sizes_[l]; }
  std::size_t layer_out(std::size_t l) const { return sizes_[l + 1]; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  double weight(std::size_t l, std::size_t o, std::size_t i) const {
    return params_[offsets_[l] + o * sizes_[l] + i];
  }
  double bias(std::size_t l, std::size_t o) const {
    return params_[offsets_[l] + sizes_[l + 1] * sizes_[l] + o];
  }
  double& weight(std::size_t l, std::size_t o, std::size_t i) {
    return params_[offsets_[l] + o * sizes_[l] + i];
  }
  double& bias(std::size_t l, std::size_t o) {
    return params_[offsets_[l] + sizes_[l + 1] * sizes_[l] + o];
  }

  /// Output logit; `activations` (if given) receives the input and every
  /// layer's post-activation values for backward().
  double logit(std::span<const double> x, std::vector<std::vector<double>>* activations = nullptr) const {
    if (x.size() != inputs()) throw ArgumentError("mlp: input size mismatch");
    std::vector<double> cur(x.begin(), x.end());
    if (activations) {
      activations->clear();
      activations->push_back(cur);
    }
    for (std::size_t l = 0; l < layers(); ++l) {
      std::vector<double> next(layer_out(l));
      const bool last = l + 1 == layers();
      for (std::size_t o = 0; o < next.size(); ++o) {
        double z = bias(l, o);
        for (std::size_t i = 0; i < cur.size(); ++i) z += weight(l, o, i) * cur[i];
        next[o] = last ? z : (z > 0 ? z : kLeakySlope * z);
      }
      cur = std::move(next);
      if (activations) activations->push_back(cur);
    }
    return cur[0];
  }

  /// Given dL/dlogit, accumulates parameter gradients into `grad` and returns
  /// dL/dx.
  std::vector<double> backward(const std::vector<std::vector<double>>& activations, double g_logit,
                               std::span<double> grad) const {
    std::vector<double> g_out{g_logit};
    for (std::size_t l = layers(); l-- > 0;) {
      const auto& in = activations[l];
      const auto& out = activations[l + 1];
      const bool last = l + 1 == layers();
      std::vector<double> g_z(g_out.size());
      for (std::size_t o = 0; o < g_out.size(); ++o) {
        g_z[o] = last ? g_out[o] : g_out[o] * (out[o] > 0 ? 1.0 : kLeakySlope);
      }
      std::vector<double> g_in(in.size(), 0.0);
      double* gw = grad.data() + offsets_[l];
      double* gb = gw + layer_out(l) * layer_in(l);
      for (std::size_t o = 0; o < g_z.size(); ++o) {
        if (g_z[o] == 0.0) continue;
        gb[o] += g_z[o];
        for (std::size_t i = 0; i < in.size(); ++i) {
          gw[o * in.size() + i] += g_z[o] * in[i];
          g_in[i] += g_z[o] * weight(l, o, i);
        }
      }
      g_out = std::move(g_in);
    }
    return g_out;
  }

  double forward(std::span<const double> x) const { return sigmoid(logit(x)); }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// One binary real-vs-generated network per class.
struct Discriminator {
  std::vector<Mlp> nets;

  Discriminator() = default;
  Discriminator(std::size_t classes, std::size_t inputs, const std::vector<std::size_t>& hidden,
                RngStream& rng) {
    for (std::size_t c = 0; c < classes; ++c) nets.emplace_back(inputs, hidden, rng);
  }
};

/// Probability in (0, 1) that x is a real sample of class c.
inline double discriminator_forward(const Discriminator& disc, std::size_t c,
                                    std::span<const double> x) {
  if (c >= disc.nets.size()) throw ArgumentError("discriminator: class out of range");
  return disc.nets[c].forward(x);
}

/// One binary cross-entropy step on a real and a generated batch for class c;
/// returns the mean loss.
inline double discriminator_step(Mlp& net, Optimizer& opt, std::span<const std::vector<double>> real,
                                 std::span<const std::vector<double>> fake) {
  std::vector<double> grad(net.params().size(), 0.0);
  std::vector<std::vector<double>> acts;
  const double n = static_cast<double>(real.size() + fake.size());
  if (n == 0) return 0.0;
  double loss = 0.0;
  for (const auto& x : real) {
    const double z = net.logit(x, &acts);
    loss += softplus(-z);
    net.backward(acts, (sigmoid(z) - 1.0) / n, grad);
  }
  for (const auto& x : fake) {
    const double z = net.logit(x, &acts);
    loss += softplus(z);
    net.backward(acts, sigmoid(z) / n, grad);
  }
  opt.step(net.params(), grad);
  return loss / n;
}

}  // namespace mpsgan
