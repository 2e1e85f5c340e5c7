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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mpsgan/embedding.hpp"
#include "mpsgan/errors.hpp"
#include "mpsgan/numerics.hpp"
#include "mpsgan/rng.hpp"

namespace mpsgan {

/// A real value stored as mantissa · exp(log_scale).
struct ScaledScalar {
  double mantissa = 0.0;
  double log_scale = 0.0;

  double value() const { return mantissa * std::exp(log_scale); }
  /// log|value|; -inf for a zero mantissa.
  double log_abs() const {
    return mantissa == 0.0 ? -std::numeric_limits<double>::infinity()
                           : std::log(std::abs(mantissa)) + log_scale;
  }
};

/// One open-boundary MPS per class. Site tensors are stored as a frozen
/// identity part I_D/√d (on every physical slice) plus a trainable delta of
/// shape (C, N, D, D, d). The first site only uses bond row 0 and the last
/// site only bond column 0.
class MpsEnsemble {
 public:
  MpsEnsemble(std::size_t classes, std::size_t sites, std::size_t bond, Embedding embedding)
      : classes_(classes), sites_(sites), bond_(bond), embedding_(embedding) {
    if (classes < 2) throw ArgumentError("MpsEnsemble: need at least 2 classes");
    if (sites == 0) throw ArgumentError("MpsEnsemble: need at least 1 site");
    if (bond == 0) throw ArgumentError("MpsEnsemble: bond dimension must be >= 1");
    delta_.assign(classes_ * sites_ * bond_ * bond_ * embedding_.dim(), 0.0);
    base_ = 1.0 / std::sqrt(static_cast<double>(embedding_.dim()));
  }

  std::size_t classes() const { return classes_; }
  std::size_t sites() const { return sites_; }
  std::size_t bond() const { return bond_; }
  std::size_t phys() const { return embedding_.dim(); }
  const Embedding& embedding() const { return embedding_; }
  double base() const { return base_; }

  std::size_t index(std::size_t c, std::size_t n, std::size_t l, std::size_t r,
                    std::size_t e) const {
    return (((c * sites_ + n) * bond_ + l) * bond_ + r) * phys() + e;
  }
  /// Offset of the (D, D, d) block for class c, site n.
  std::size_t site_offset(std::size_t c, std::size_t n) const { return index(c, n, 0, 0, 0); }
  std::size_t site_size() const { return bond_ * bond_ * phys(); }

  /// Full site tensor entry A[c, n, l, r, e] = base·δ_lr + delta.
  double site(std::size_t c, std::size_t n, std::size_t l, std::size_t r, std::size_t e) const {
    return (l == r ? base_ : 0.0) + delta_[index(c, n, l, r, e)];
  }

  std::span<double> delta() { return delta_; }
  std::span<const double> delta() const { return delta_; }

  /// Physical slice A[c, n, :, :, e] as a D×D matrix.
  Matrix slice(std::size_t c, std::size_t n, std::size_t e) const {
    Matrix m(bond_, bond_);
    for (std::size_t l = 0; l < bond_; ++l)
      for (std::size_t r = 0; r < bond_; ++r) m(l, r) = site(c, n, l, r, e);
    return m;
  }

  friend bool operator==(const MpsEnsemble&, const MpsEnsemble&) = default;

 private:
  std::size_t classes_;
  std::size_t sites_;
  std::size_t bond_;
  Embedding embedding_;
  double base_ = 1.0;
  std::vector<double> delta_;
};

/// Identity-plus-noise initialization: delta ~ Normal(0, sigma²).
inline MpsEnsemble init_ensemble(std::size_t classes, std::size_t sites, std::size_t bond,
                                 std::size_t phys, const Embedding& embedding, double sigma,
                                 RngStream& rng) {
  if (phys != embedding.dim()) throw ArgumentError("init_ensemble: d does not match embedding");
  if (!(sigma >= 0.0)) throw ArgumentError("init_ensemble: sigma must be >= 0");
  MpsEnsemble m(classes, sites, bond, embedding);
  if (sigma > 0.0) {
    for (double& v : m.delta()) v = sigma * rng.normal();
  }
  return m;
}

/// Σ_e A[c, n, :, :, e] φ_e.
inline Matrix site_matrix(const MpsEnsemble& m, std::size_t c, std::size_t n,
                          std::span<const double> phi) {
  const std::size_t D = m.bond();
  const std::size_t d = m.phys();
  Matrix out(D, D);
  double phi_sum = 0.0;
  for (double p : phi) phi_sum += p;
  const auto delta = m.delta().subspan(m.site_offset(c, n), m.site_size());
  for (std::size_t l = 0; l < D; ++l) {
    for (std::size_t r = 0; r < D; ++r) {
      const double* a = delta.data() + (l * D + r) * d;
      double acc = l == r ? m.base() * phi_sum : 0.0;
      for (std::size_t e = 0; e < d; ++e) acc += a[e] * phi[e];
      out(l, r) = acc;
    }
  }
  return out;
}

inline std::vector<Matrix> site_matrices(const MpsEnsemble& m, std::size_t c,
                                         std::span<const double> x) {
  if (c >= m.classes()) throw ArgumentError("site_matrices: class out of range");
  if (x.size() != m.sites()) throw ArgumentError("site_matrices: input length != site count");
  const Matrix phi = embed_vector(m.embedding(), x);
  std::vector<Matrix> out;
  out.reserve(m.sites());
  for (std::size_t n = 0; n < m.sites(); ++n) out.push_back(site_matrix(m, c, n, phi.row(n)));
  return out;
}

namespace detail {

/// out[r] = Σ_l in[l] Σ_e A[l, r, e] φ_e   (row vector times site matrix)
inline void left_step(const MpsEnsemble& m, std::size_t c, std::size_t n,
                      std::span<const double> phi, std::span<const double> in,
                      std::span<double> out) {
  const std::size_t D = m.bond();
  const std::size_t d = m.phys();
  double phi_sum = 0.0;
  for (double p : phi) phi_sum += p;
  const double* delta = m.delta().data() + m.site_offset(c, n);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t l = 0; l < D; ++l) {
    const double w = in[l];
    if (w == 0.0) continue;
    out[l] += w * m.base() * phi_sum;
    for (std::size_t r = 0; r < D; ++r) {
      const double* a = delta + (l * D + r) * d;
      double acc = 0.0;
      for (std::size_t e = 0; e < d; ++e) acc += a[e] * phi[e];
      out[r] += w * acc;
    }
  }
}

/// out[l] = Σ_r (Σ_e A[l, r, e] φ_e) in[r]   (site matrix times column vector)
inline void right_step(const MpsEnsemble& m, std::size_t c, std::size_t n,
                       std::span<const double> phi, std::span<const double> in,
                       std::span<double> out) {
  const std::size_t D = m.bond();
  const std::size_t d = m.phys();
  double phi_sum = 0.0;
  for (double p : phi) phi_sum += p;
  const double* delta = m.delta().data() + m.site_offset(c, n);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < D; ++r) {
    const double w = in[r];
    if (w == 0.0) continue;
    out[r] += w * m.base() * phi_sum;
    for (std::size_t l = 0; l < D; ++l) {
      const double* a = delta + (l * D + r) * d;
      double acc = 0.0;
      for (std::size_t e = 0; e < d; ++e) acc += a[e] * phi[e];
      out[l] += w * acc;
    }
  }
}

/// Divides by the largest-magnitude component; returns log of the divisor.
inline double normalize_max(std::span<double> v) {
  double top = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericalError("non-finite value in contraction");
    top = std::max(top, std::abs(x));
  }
  if (top == 0.0) throw DegenerateError("degenerate contraction: intermediate vector is zero");
  for (double& x : v) x /= top;
  return std::log(top);
}

inline std::vector<double> unit_vector(std::size_t n) {
  std::vector<double> v(n, 0.0);
  v[0] = 1.0;
  return v;
}

}  // namespace detail

enum class Rescale { On, Off };

/// Contracts class c's MPS with an embedded input (rows = φ(x_n)).
///
/// Left and right boundary vectors are swept towards the middle; for odd N
/// the extra site joins the left sweep. With Rescale::On every intermediate
/// vector is divided by its largest-magnitude component and the logs of the
/// divisors are accumulated in log_scale.
inline ScaledScalar contract_class(const MpsEnsemble& m, std::size_t c, const Matrix& phi,
                                   Rescale rescale = Rescale::On) {
  const std::size_t N = m.sites();
  const std::size_t D = m.bond();
  const std::size_t left_sites = (N + 1) / 2;
  std::vector<double> left = detail::unit_vector(D);
  std::vector<double> right = detail::unit_vector(D);
  std::vector<double> tmp(D);
  double log_scale = 0.0;

  for (std::size_t n = 0; n < left_sites; ++n) {
    detail::left_step(m, c, n, phi.row(n), left, tmp);
    std::swap(left, tmp);
    if (rescale == Rescale::On) log_scale += detail::normalize_max(left);
  }
  for (std::size_t n = N; n-- > left_sites;) {
    detail::right_step(m, c, n, phi.row(n), right, tmp);
    std::swap(right, tmp);
    if (rescale == Rescale::On) log_scale += detail::normalize_max(right);
  }
  double y = 0.0;
  for (std::size_t k = 0; k < D; ++k) y += left[k] * right[k];
  return {y, log_scale};
}

inline void check_embedded_input(const MpsEnsemble& m, const Matrix& phi) {
  if (phi.rows() != m.sites() || phi.cols() != m.phys()) {
    throw ArgumentError("embedded input shape " + std::to_string(phi.rows()) + "x" +
                        std::to_string(phi.cols()) + " does not match model (N=" +
                        std::to_string(m.sites()) + ", d=" + std::to_string(m.phys()) + ")");
  }
}

/// Per-class scores y_c for an already embedded input.
inline std::vector<ScaledScalar> classify_embedded(const MpsEnsemble& m, const Matrix& phi,
                                                   Rescale rescale = Rescale::On) {
  check_embedded_input(m, phi);
  std::vector<ScaledScalar> out(m.classes());
  for (std::size_t c = 0; c < m.classes(); ++c) out[c] = contract_class(m, c, phi, rescale);
  return out;
}

inline std::vector<ScaledScalar> classify(const MpsEnsemble& m, std::span<const double> x,
                                          Rescale rescale = Rescale::On) {
  if (x.size() != m.sites()) throw ArgumentError("classify: input length != site count");
  return classify_embedded(m, embed_vector(m.embedding(), x), rescale);
}

/// p_c = y_c² / Σ y², evaluated with a shared log-scale shift.
inline std::vector<double> probabilities_from_scores(std::span<const ScaledScalar> scores) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& s : scores) top = std::max(top, s.log_abs());
  if (!std::isfinite(top)) throw DegenerateError("predict_proba: every class score is zero");
  std::vector<double> p(scores.size());
  double z = 0.0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    const double la = scores[c].log_abs();
    p[c] = std::isfinite(la) ? std::exp(2.0 * (la - top)) : 0.0;
    z += p[c];
  }
  for (double& v : p) v /= z;
  return p;
}

inline std::vector<double> predict_proba(const MpsEnsemble& m, std::span<const double> x,
                                         Rescale rescale = Rescale::On) {
  const auto scores = classify(m, x, rescale);
  return probabilities_from_scores(scores);
}

inline std::vector<double> predict_proba_embedded(const MpsEnsemble& m, const Matrix& phi) {
  const auto scores = classify_embedded(m, phi);
  return probabilities_from_scores(scores);
}

inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline std::size_t predict(const MpsEnsemble& m, std::span<const double> x) {
  const auto p = predict_proba(m, x);
  return argmax(p);
}

namespace detail {

/// Divides a matrix by its max-magnitude entry; returns log of the divisor.
inline double normalize_max(Matrix& e) {
  const double top = e.max_abs();
  if (top == 0.0 || !std::isfinite(top)) {
    throw DegenerateError("degenerate contraction: environment is zero or non-finite");
  }
  e *= 1.0 / top;
  return std::log(top);
}

inline std::vector<Matrix> site_slices(const MpsEnsemble& m, std::size_t c, std::size_t n) {
  std::vector<Matrix> out;
  out.reserve(m.phys());
  for (std::size_t e = 0; e < m.phys(); ++e) out.push_back(m.slice(c, n, e));
  return out;
}

/// Σ_{e,e'} B_{ee'} A_eᵀ E A_e'  (left environment through an integrated site)
inline Matrix transfer_left_marginal(std::span<const Matrix> slices, const GramMatrix& gram,
                                     const Matrix& env) {
  const std::size_t d = slices.size();
  const std::size_t D = env.rows();
  std::vector<Matrix> w;
  w.reserve(d);
  for (const auto& a : slices) w.push_back(env * a);
  Matrix out(D, D);
  for (std::size_t e = 0; e < d; ++e) {
    Matrix t(D, D);
    for (std::size_t f = 0; f < d; ++f) {
      if (gram.diagonal && f != e) continue;
      const double bef = gram.b(e, f);
      if (bef == 0.0) continue;
      for (std::size_t k = 0; k < D * D; ++k) t.data()[k] += bef * w[f].data()[k];
    }
    out = out + slices[e].transpose() * t;
  }
  return out;
}

/// Σ_{e,e'} B_{ee'} A_e E A_e'ᵀ  (right environment through an integrated site)
inline Matrix transfer_right_marginal(std::span<const Matrix> slices, const GramMatrix& gram,
                                      const Matrix& env) {
  const std::size_t d = slices.size();
  const std::size_t D = env.rows();
  std::vector<Matrix> w;
  w.reserve(d);
  for (const auto& a : slices) w.push_back(env * a.transpose());
  Matrix out(D, D);
  for (std::size_t e = 0; e < d; ++e) {
    Matrix t(D, D);
    for (std::size_t f = 0; f < d; ++f) {
      if (gram.diagonal && f != e) continue;
      const double bef = gram.b(e, f);
      if (bef == 0.0) continue;
      for (std::size_t k = 0; k < D * D; ++k) t.data()[k] += bef * w[f].data()[k];
    }
    out = out + slices[e] * t;
  }
  return out;
}

inline Matrix unit_projector(std::size_t D) {
  Matrix e(D, D);
  e(0, 0) = 1.0;
  return e;
}

}  // namespace detail

/// Contraction of two copies of class c's MPS with B inserted at every site;
/// equals the integral of the unnormalized density over the support.
inline ScaledScalar mps_norm_sq(const MpsEnsemble& m, std::size_t c, const GramMatrix& gram) {
  if (c >= m.classes()) throw ArgumentError("mps_norm_sq: class out of range");
  if (gram.b.rows() != m.phys()) throw ArgumentError("mps_norm_sq: Gram matrix size != d");
  Matrix env = detail::unit_projector(m.bond());
  double log_scale = 0.0;
  for (std::size_t n = 0; n < m.sites(); ++n) {
    const auto slices = detail::site_slices(m, c, n);
    env = detail::transfer_left_marginal(slices, gram, env);
    log_scale += detail::normalize_max(env);
  }
  return {env(0, 0), log_scale};
}

}  // namespace mpsgan
