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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mpsgan/errors.hpp"
#include "mpsgan/numerics.hpp"

namespace mpsgan {

enum class EmbeddingKind { SinCos = 0, SpinCoherent = 1, Fourier = 2, Legendre = 3 };

inline std::string_view to_string(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::SinCos: return "sincos";
    case EmbeddingKind::SpinCoherent: return "spin-coherent";
    case EmbeddingKind::Fourier: return "fourier";
    case EmbeddingKind::Legendre: return "legendre";
  }
  return "unknown";
}

inline EmbeddingKind parse_embedding_kind(std::string_view name) {
  if (name == "sincos") return EmbeddingKind::SinCos;
  if (name == "spin-coherent" || name == "spincoherent") return EmbeddingKind::SpinCoherent;
  if (name == "fourier") return EmbeddingKind::Fourier;
  if (name == "legendre") return EmbeddingKind::Legendre;
  throw ArgumentError("unknown embedding '" + std::string(name) + "'");
}

/// A local feature map x -> φ(x) ∈ R^d over a closed support interval.
class Embedding {
 public:
  Embedding(EmbeddingKind kind, std::size_t d) : kind_(kind), d_(d) {
    if (d == 0) throw ArgumentError("embedding dimension must be >= 1");
    if (kind == EmbeddingKind::SinCos && d != 2) {
      throw ArgumentError("sincos embedding requires d = 2, got d = " + std::to_string(d));
    }
    if (kind == EmbeddingKind::Legendre) lo_ = -1.0;
  }

  EmbeddingKind kind() const { return kind_; }
  std::size_t dim() const { return d_; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  double width() const { return hi_ - lo_; }

  bool contains(double x) const { return x >= lo_ && x <= hi_; }

  /// Affine map from the unit interval (data space) onto the support.
  double from_unit(double u) const { return lo_ + (hi_ - lo_) * u; }
  double to_unit(double x) const { return (x - lo_) / (hi_ - lo_); }

  /// Writes φ(x) into `out` (size d). No domain check.
  void evaluate(double x, std::span<double> out) const {
    switch (kind_) {
      case EmbeddingKind::SinCos:
        out[0] = std::sin(0.5 * std::numbers::pi * x);
        out[1] = std::cos(0.5 * std::numbers::pi * x);
        break;
      case EmbeddingKind::SpinCoherent: {
        const double c = std::cos(x);
        const double s = std::sin(x);
        for (std::size_t k = 0; k < d_; ++k) {
          out[k] = std::sqrt(binomial(d_ - 1, k)) * std::pow(c, static_cast<double>(d_ - 1 - k)) *
                   std::pow(s, static_cast<double>(k));
        }
        break;
      }
      case EmbeddingKind::Fourier:
        for (std::size_t j = 0; j < d_; ++j) out[j] = std::cos(static_cast<double>(j) * std::numbers::pi * x);
        break;
      case EmbeddingKind::Legendre:
        out[0] = 1.0;
        if (d_ > 1) out[1] = x;
        for (std::size_t j = 2; j < d_; ++j) {
          const double jd = static_cast<double>(j);
          out[j] = ((2.0 * jd - 1.0) * x * out[j - 1] - (jd - 1.0) * out[j - 2]) / jd;
        }
        break;
    }
  }

  /// Writes dφ/dx into `out` (size d).
  void derivative(double x, std::span<double> out) const {
    constexpr double pi = std::numbers::pi;
    switch (kind_) {
      case EmbeddingKind::SinCos:
        out[0] = 0.5 * pi * std::cos(0.5 * pi * x);
        out[1] = -0.5 * pi * std::sin(0.5 * pi * x);
        break;
      case EmbeddingKind::SpinCoherent: {
        const double c = std::cos(x);
        const double s = std::sin(x);
        for (std::size_t k = 0; k < d_; ++k) {
          const double a = static_cast<double>(d_ - 1 - k);
          const double b = static_cast<double>(k);
          const double dc = a == 0.0 ? 0.0 : -a * std::pow(c, a - 1.0) * s * std::pow(s, b);
          const double ds = b == 0.0 ? 0.0 : b * std::pow(s, b - 1.0) * c * std::pow(c, a);
          out[k] = std::sqrt(binomial(d_ - 1, k)) * (dc + ds);
        }
        break;
      }
      case EmbeddingKind::Fourier:
        for (std::size_t j = 0; j < d_; ++j) {
          const double jd = static_cast<double>(j);
          out[j] = -jd * pi * std::sin(jd * pi * x);
        }
        break;
      case EmbeddingKind::Legendre: {
        // P'_j = j P_{j-1} + x P'_{j-1}
        std::vector<double> p(d_);
        evaluate(x, p);
        out[0] = 0.0;
        for (std::size_t j = 1; j < d_; ++j) {
          out[j] = static_cast<double>(j) * p[j - 1] + x * out[j - 1];
        }
        break;
      }
    }
  }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  static double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
  }

  EmbeddingKind kind_;
  std::size_t d_;
  double lo_ = 0.0;
  double hi_ = 1.0;
};

inline std::vector<double> embed_scalar(const Embedding& e, double x) {
  if (!std::isfinite(x) || !e.contains(x)) {
    throw DomainError("value " + std::to_string(x) + " outside embedding support [" +
                      std::to_string(e.lower()) + ", " + std::to_string(e.upper()) + "]");
  }
  std::vector<double> out(e.dim());
  e.evaluate(x, out);
  return out;
}

/// Factored embedding Φ(x): row i holds φ(x_i).
inline Matrix embed_vector(const Embedding& e, std::span<const double> x) {
  Matrix out(x.size(), e.dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !e.contains(x[i])) {
      throw DomainError("component " + std::to_string(i) + " = " + std::to_string(x[i]) +
                        " outside embedding support");
    }
    e.evaluate(x[i], out.row(i));
  }
  return out;
}

/// Gram matrix B = ∫ φ φᵀ dx of an embedding.
struct GramMatrix {
  Matrix b;
  bool diagonal = false;
  bool generation_capable = false;
};

inline constexpr double kGramDiagonalTolerance = 1e-6;

/// Midpoint-rule Gram matrix over the embedding support, or over an explicit
/// interval when one is given.
inline GramMatrix gram_matrix(const Embedding& e, std::size_t quadrature_bins = 100000,
                              std::optional<std::pair<double, double>> interval = std::nullopt) {
  if (quadrature_bins < 100) throw ArgumentError("gram_matrix: at least 100 quadrature bins required");
  const double lo = interval ? interval->first : e.lower();
  const double hi = interval ? interval->second : e.upper();
  const std::size_t d = e.dim();
  const double h = (hi - lo) / static_cast<double>(quadrature_bins);
  GramMatrix g{Matrix(d, d)};
  std::vector<double> phi(d);
  for (std::size_t q = 0; q < quadrature_bins; ++q) {
    e.evaluate(lo + (static_cast<double>(q) + 0.5) * h, phi);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = j; k < d; ++k) g.b(j, k) += phi[j] * phi[k];
  }
  double off = 0.0;
  bool positive = true;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j; k < d; ++k) {
      g.b(j, k) *= h;
      g.b(k, j) = g.b(j, k);
      if (k != j) off = std::max(off, std::abs(g.b(j, k)));
    }
    positive = positive && g.b(j, j) > 0.0;
  }
  g.diagonal = off < kGramDiagonalTolerance;
  g.generation_capable = g.diagonal && positive;
  return g;
}

}  // namespace mpsgan
