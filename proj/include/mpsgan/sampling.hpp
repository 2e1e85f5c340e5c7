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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mpsgan/embedding.hpp"
#include "mpsgan/errors.hpp"
#include "mpsgan/mps.hpp"
#include "mpsgan/numerics.hpp"

namespace mpsgan {

inline constexpr std::size_t kDefaultBins = 1000;

/// Single-site density matrix V with a detached log-scale factor; the
/// unnormalized conditional density is φ(x)ᵀ V φ(x) · exp(log_scale).
struct ReducedDensityMatrix {
  Matrix v;
  double log_scale = 0.0;
};

/// Reduced density matrix for site i of class c.
///
/// Sites in `conditioned` are contracted with φ(x_j) on both copies, site i
/// is left open and every other site is integrated out through the Gram
/// matrix B. The result is symmetrized and divided by its max-magnitude entry.
inline ReducedDensityMatrix reduced_density_matrix(const MpsEnsemble& m, std::size_t c,
                                                   std::size_t i,
                                                   const std::map<std::size_t, double>& conditioned,
                                                   const GramMatrix& gram) {
  const std::size_t N = m.sites();
  const std::size_t D = m.bond();
  const std::size_t d = m.phys();
  if (c >= m.classes()) throw ArgumentError("reduced_density_matrix: class out of range");
  if (i >= N) throw ArgumentError("reduced_density_matrix: site out of range");
  if (gram.b.rows() != d) throw ArgumentError("reduced_density_matrix: Gram matrix size != d");
  for (const auto& [site, value] : conditioned) {
    if (site >= N) throw ArgumentError("conditioned site " + std::to_string(site) + " out of range");
    if (site == i) throw ArgumentError("target site cannot be conditioned");
    if (!m.embedding().contains(value)) throw DomainError("conditioned value outside support");
  }

  double log_scale = 0.0;
  std::vector<double> phi(d);

  Matrix left = detail::unit_projector(D);
  for (std::size_t j = 0; j < i; ++j) {
    if (auto it = conditioned.find(j); it != conditioned.end()) {
      m.embedding().evaluate(it->second, phi);
      const Matrix mj = site_matrix(m, c, j, phi);
      left = mj.transpose() * left * mj;
    } else {
      const auto slices = detail::site_slices(m, c, j);
      left = detail::transfer_left_marginal(slices, gram, left);
    }
    log_scale += detail::normalize_max(left);
  }

  Matrix right = detail::unit_projector(D);
  for (std::size_t j = N; j-- > i + 1;) {
    if (auto it = conditioned.find(j); it != conditioned.end()) {
      m.embedding().evaluate(it->second, phi);
      const Matrix mj = site_matrix(m, c, j, phi);
      right = mj * right * mj.transpose();
    } else {
      const auto slices = detail::site_slices(m, c, j);
      right = detail::transfer_right_marginal(slices, gram, right);
    }
    log_scale += detail::normalize_max(right);
  }

  // V_ef = tr(A_eᵀ L A_f R)
  const auto slices = detail::site_slices(m, c, i);
  Matrix v(d, d);
  for (std::size_t f = 0; f < d; ++f) {
    const Matrix y = left * slices[f] * right;
    for (std::size_t e = 0; e < d; ++e) {
      double acc = 0.0;
      for (std::size_t k = 0; k < D * D; ++k) acc += slices[e].data()[k] * y.data()[k];
      v(e, f) = acc;
    }
  }
  for (std::size_t e = 0; e < d; ++e)
    for (std::size_t f = e + 1; f < d; ++f) v(e, f) = v(f, e) = 0.5 * (v(e, f) + v(f, e));
  log_scale += detail::normalize_max(v);
  return {std::move(v), log_scale};
}

/// φ(x)ᵀ V φ(x) on the mantissa scale.
inline double pdf_eval(const ReducedDensityMatrix& v, const Embedding& e, double x) {
  const auto phi = embed_scalar(e, x);
  double acc = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    double row = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) row += v.v(j, k) * phi[k];
    acc += phi[j] * row;
  }
  return acc;
}

/// Embedding values at the K left bin edges of a uniform grid over the support.
struct BinGrid {
  double lower = 0.0;
  double upper = 1.0;
  double step = 0.0;
  Matrix phi;  // K × d

  std::size_t bins() const { return phi.rows(); }
};

inline BinGrid make_bin_grid(const Embedding& e, std::size_t bins) {
  if (bins < 2) throw ArgumentError("at least 2 bins required");
  BinGrid g{e.lower(), e.upper(), e.width() / static_cast<double>(bins), Matrix(bins, e.dim())};
  for (std::size_t k = 0; k < bins; ++k) {
    e.evaluate(g.lower + static_cast<double>(k) * g.step, g.phi.row(k));
  }
  return g;
}

/// Binned density and its left-Riemann cumulative over the support.
struct CdfTable {
  double lower = 0.0;
  double upper = 1.0;
  double step = 0.0;
  std::vector<double> pdf;  // K values at left bin edges, clamped to >= 0
  std::vector<double> cdf;  // K+1 values, cdf[0] = 0
  std::vector<bool> clamped;

  std::size_t bins() const { return pdf.size(); }
  double total() const { return cdf.back(); }
  double grid_point(std::size_t k) const { return lower + static_cast<double>(k) * step; }
};

namespace detail {

// Symmetric quadratic form using the upper triangle of v.
inline double quadratic_form(const Matrix& v, std::span<const double> phi) {
  double acc = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const double pj = phi[j];
    if (pj == 0.0) continue;
    double row = 0.5 * v(j, j) * pj;
    for (std::size_t l = j + 1; l < phi.size(); ++l) row += v(j, l) * phi[l];
    acc += 2.0 * pj * row;
  }
  return acc;
}

inline void finish_cdf(CdfTable& t) {
  const auto cumulative = integrate_binned(t.pdf, t.step);
  t.cdf.reserve(t.pdf.size() + 1);
  t.cdf.push_back(0.0);
  t.cdf.insert(t.cdf.end(), cumulative.begin(), cumulative.end());
  if (!(t.total() > 0.0)) throw DegenerateError("build_cdf: density has no mass on the support");
}

inline void store_pdf(CdfTable& t, std::size_t k, double value) {
  if (value < 0.0) {
    value = 0.0;
    t.clamped[k] = true;
  }
  t.pdf[k] = value;
}

}  // namespace detail

inline CdfTable build_cdf(const Matrix& v, const BinGrid& grid) {
  const std::size_t K = grid.bins();
  const std::size_t d = grid.phi.cols();
  if (v.rows() != d || v.cols() != d) throw ArgumentError("build_cdf: V size != d");
  CdfTable t{grid.lower, grid.upper, grid.step, std::vector<double>(K), {}, std::vector<bool>(K)};
  for (std::size_t k = 0; k < K; ++k) detail::store_pdf(t, k, detail::quadratic_form(v, grid.phi.row(k)));
  detail::finish_cdf(t);
  return t;
}

/// Streaming variant that evaluates the embedding per bin instead of caching
/// a K × d grid.
inline CdfTable build_cdf(const Matrix& v, const Embedding& e, std::size_t bins = kDefaultBins) {
  if (bins < 2) throw ArgumentError("at least 2 bins required");
  const std::size_t d = e.dim();
  if (v.rows() != d || v.cols() != d) throw ArgumentError("build_cdf: V size != d");
  CdfTable t{e.lower(), e.upper(), e.width() / static_cast<double>(bins), std::vector<double>(bins), {},
             std::vector<bool>(bins)};
  std::vector<double> phi(d);
  for (std::size_t k = 0; k < bins; ++k) {
    e.evaluate(t.grid_point(k), phi);
    detail::store_pdf(t, k, detail::quadratic_form(v, phi));
  }
  detail::finish_cdf(t);
  return t;
}

inline CdfTable build_cdf(const ReducedDensityMatrix& v, const Embedding& e,
                          std::size_t bins = kDefaultBins) {
  return build_cdf(v.v, e, bins);
}

/// Result of inverting a CdfTable, with the bracket needed for gradients.
struct Inversion {
  double x = 0.0;
  std::size_t bracket = 0;
  double target = 0.0;
  bool clamped = false;
};

/// Linear interpolation of the inverse CDF at quantile nu (rescaled by the
/// total mass). Zero-mass brackets are skipped towards increasing x.
inline Inversion invert_cdf(const CdfTable& t, double nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw ArgumentError("inverse_cdf: quantile must be in [0, 1]");
  const std::size_t K = t.bins();
  const double target = nu * t.total();
  auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), target);
  std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - t.cdf.begin() - 1, 0));
  k = std::min(k, K - 1);
  if (t.pdf[k] == 0.0) {
    std::size_t forward = k;
    while (forward < K - 1 && t.pdf[forward] == 0.0) ++forward;
    if (t.pdf[forward] > 0.0) {
      k = forward;
    } else {
      while (k > 0 && t.pdf[k] == 0.0) --k;
    }
  }
  Inversion out;
  out.bracket = k;
  out.target = target;
  out.x = t.grid_point(k) + (target - t.cdf[k]) / t.pdf[k];
  if (out.x < t.lower) {
    out.x = t.lower;
    out.clamped = true;
  } else if (out.x > t.upper) {
    out.x = t.upper;
    out.clamped = true;
  }
  return out;
}

inline double inverse_cdf(const CdfTable& t, double nu) { return invert_cdf(t, nu).x; }

/// Per-bin weights w_k = dx/dp_k of an inversion (zero where the pdf was
/// clamped or the result was clamped to the support).
inline std::vector<double> inversion_pdf_gradient(const CdfTable& t, const Inversion& inv,
                                                  double nu) {
  std::vector<double> w(t.bins(), 0.0);
  if (inv.clamped) return w;
  const std::size_t k = inv.bracket;
  const double pk = t.pdf[k];
  const double a = inv.target - t.cdf[k];
  for (std::size_t i = 0; i < t.bins(); ++i) {
    if (t.clamped[i]) continue;
    double g = (nu * t.step - (i < k ? t.step : 0.0)) / pk;
    if (i == k) g -= a / (pk * pk);
    w[i] = g;
  }
  return w;
}

/// Everything recorded during one forward sample for the backward pass.
struct SampleTape {
  std::vector<double> nu;
  std::vector<double> x;
  std::vector<std::vector<double>> left;  // normalized left vector entering site i
  std::vector<double> left_scale;         // divisor applied after site i
  std::vector<Matrix> u;                  // D × d, U[:, e] = A_eᵀ l
  std::vector<double> v_scale;            // max-entry divisor of V_i
  std::vector<CdfTable> cdf;
  std::vector<Inversion> inversion;
};

/// Exact autoregressive sampler for one class (chain rule over sites, each
/// conditional inverted through a binned CDF).
///
/// Right environments (all later sites integrated out) are built once; left
/// environments are extended incrementally as sites are sampled. Holds a
/// reference to the model, which must outlive the sampler and stay unchanged.
class Sampler {
 public:
  Sampler(const MpsEnsemble& m, std::size_t c, const GramMatrix& gram,
          std::size_t bins = kDefaultBins)
      : model_(m), class_(c), gram_(gram), grid_(make_bin_grid(m.embedding(), bins)) {
    if (c >= m.classes()) throw ArgumentError("sampler: class out of range");
    if (gram.b.rows() != m.phys()) throw ArgumentError("sampler: Gram matrix size != d");
    if (!gram.generation_capable) {
      throw CapabilityError(std::string("embedding '") + std::string(to_string(m.embedding().kind())) +
                            "' is not generation-capable (non-diagonal Gram matrix)");
    }
    const std::size_t N = m.sites();
    slices_.resize(N);
    for (std::size_t n = 0; n < N; ++n) slices_[n] = detail::site_slices(m, c, n);
    right_.resize(N + 1);
    right_scale_.assign(N + 1, 1.0);
    right_[N] = detail::unit_projector(m.bond());
    for (std::size_t n = N; n-- > 1;) {
      right_[n] = detail::transfer_right_marginal(slices_[n], gram, right_[n + 1]);
      right_scale_[n] = std::exp(detail::normalize_max(right_[n]));
    }
  }

  std::size_t bins() const { return grid_.bins(); }
  const BinGrid& grid() const { return grid_; }

  /// Draws the sample whose conditional quantiles are `nu` (support space).
  std::vector<double> sample(std::span<const double> nu, SampleTape* tape = nullptr) const {
    const std::size_t N = model_.sites();
    const std::size_t D = model_.bond();
    const std::size_t d = model_.phys();
    if (nu.size() != N) throw ArgumentError("sample: nu length != site count");
    std::vector<double> x(N);
    std::vector<double> left = detail::unit_vector(D);
    std::vector<double> next(D);
    std::vector<double> phi(d);
    if (tape) {
      *tape = SampleTape{};
      tape->nu.assign(nu.begin(), nu.end());
    }

    for (std::size_t i = 0; i < N; ++i) {
      Matrix u(D, d);
      for (std::size_t a = 0; a < D; ++a) {
        if (left[a] == 0.0) continue;
        for (std::size_t e = 0; e < d; ++e) {
          const Matrix& s = slices_[i][e];
          for (std::size_t b = 0; b < D; ++b) u(b, e) += left[a] * s(a, b);
        }
      }
      Matrix v = u.transpose() * right_[i + 1] * u;
      for (std::size_t e = 0; e < d; ++e)
        for (std::size_t f = e + 1; f < d; ++f) v(e, f) = v(f, e) = 0.5 * (v(e, f) + v(f, e));
      const double v_scale = std::exp(detail::normalize_max(v));
      CdfTable table = build_cdf(v, grid_);
      const Inversion inv = invert_cdf(table, nu[i]);
      x[i] = inv.x;

      if (tape) {
        tape->left.push_back(left);
        tape->u.push_back(std::move(u));
        tape->v_scale.push_back(v_scale);
        tape->cdf.push_back(std::move(table));
        tape->inversion.push_back(inv);
      }
      if (i + 1 < N) {
        model_.embedding().evaluate(x[i], phi);
        detail::left_step(model_, class_, i, phi, left, next);
        const double s = std::exp(detail::normalize_max(next));
        std::swap(left, next);
        if (tape) tape->left_scale.push_back(s);
      } else if (tape) {
        tape->left_scale.push_back(1.0);
      }
    }
    if (tape) tape->x = x;
    return x;
  }

  /// Reverse-mode pass: given dL/dx (support space) for a taped sample,
  /// accumulates dL/d(delta) into `grad_delta` (full model-sized buffer).
  void backward(const SampleTape& tape, std::span<const double> grad_x,
                std::span<double> grad_delta) const {
    const std::size_t N = model_.sites();
    const std::size_t D = model_.bond();
    const std::size_t d = model_.phys();
    if (grad_x.size() != N) throw ArgumentError("backward: grad_x length != site count");
    if (grad_delta.size() != model_.delta().size()) throw ArgumentError("backward: grad buffer size");

    std::vector<double> gx(grad_x.begin(), grad_x.end());
    std::vector<double> g_left(D, 0.0);  // gradient wrt normalized left vector entering site i+1
    std::vector<Matrix> g_right(N + 1, Matrix(D, D));
    std::vector<double> phi(d);
    std::vector<double> dphi(d);
    std::vector<double> g_prev(D);

    for (std::size_t i = N; i-- > 0;) {
      double* gA = grad_delta.data() + model_.site_offset(class_, i);
      const auto& left = tape.left[i];

      // Pull the left-vector gradient back through site i (conditioned on x_i).
      if (i + 1 < N) {
        const double inv_s = 1.0 / tape.left_scale[i];
        model_.embedding().evaluate(tape.x[i], phi);
        model_.embedding().derivative(tape.x[i], dphi);
        std::fill(g_prev.begin(), g_prev.end(), 0.0);
        double gxi = 0.0;
        for (std::size_t l = 0; l < D; ++l) {
          for (std::size_t r = 0; r < D; ++r) {
            const double g_raw = g_left[r] * inv_s;
            if (g_raw == 0.0) continue;
            const double gm = left[l] * g_raw;
            double m_lr = 0.0;
            for (std::size_t e = 0; e < d; ++e) {
              const double a = slices_[i][e](l, r);
              m_lr += a * phi[e];
              if (gm != 0.0) {
                gA[(l * D + r) * d + e] += gm * phi[e];
                gxi += gm * a * dphi[e];
              }
            }
            g_prev[l] += m_lr * g_raw;
          }
        }
        if (!tape.inversion[i].clamped) gx[i] += gxi;
        std::swap(g_left, g_prev);
      }
      // g_left now holds dL/d(left vector entering site i) from later sites.

      const double g = gx[i];
      if (g != 0.0 && !tape.inversion[i].clamped) {
        const CdfTable& table = tape.cdf[i];
        const auto w = inversion_pdf_gradient(table, tape.inversion[i], tape.nu[i]);
        Matrix gv(d, d);
        for (std::size_t k = 0; k < table.bins(); ++k) {
          if (w[k] == 0.0) continue;
          const auto pk = grid_.phi.row(k);
          const double wk = w[k] * g;
          for (std::size_t e = 0; e < d; ++e) {
            const double we = wk * pk[e];
            for (std::size_t f = 0; f < d; ++f) gv(e, f) += we * pk[f];
          }
        }
        gv *= 1.0 / tape.v_scale[i];

        const Matrix& u = tape.u[i];
        const Matrix& r = right_[i + 1];
        // V = Uᵀ R U:  dU = R U Gᵀ + Rᵀ U G,  dR = U G Uᵀ
        const Matrix ru = r * u;
        const Matrix rtu = r.transpose() * u;
        const Matrix gu = ru * gv.transpose() + rtu * gv;
        g_right[i + 1] = g_right[i + 1] + u * gv * u.transpose();

        // U[b, e] = Σ_a l_a A[a, b, e]
        for (std::size_t a = 0; a < D; ++a) {
          double acc = 0.0;
          for (std::size_t b = 0; b < D; ++b) {
            for (std::size_t e = 0; e < d; ++e) {
              const double gub = gu(b, e);
              if (left[a] != 0.0) gA[(a * D + b) * d + e] += left[a] * gub;
              acc += slices_[i][e](a, b) * gub;
            }
          }
          g_left[a] += acc;
        }
      }
    }

    // Right environments: R[j] = T_j(R[j+1]) / s_j for j >= 1.
    for (std::size_t j = 1; j < N; ++j) {
      const Matrix& g = g_right[j];
      if (g.max_abs() == 0.0) continue;
      const double inv_s = 1.0 / right_scale_[j];
      const Matrix& env = right_[j + 1];
      double* gA = grad_delta.data() + model_.site_offset(class_, j);
      Matrix g_env(D, D);
      for (std::size_t e = 0; e < d; ++e) {
        Matrix ge(D, D);
        for (std::size_t f = 0; f < d; ++f) {
          if (gram_.diagonal && f != e) continue;
          const double bef = gram_.b(e, f) * inv_s;
          if (bef == 0.0) continue;
          const Matrix& af = slices_[j][f];
          // T(E) = Σ B_ef A_e E A_fᵀ
          Matrix ga = g * af * env.transpose() + g.transpose() * af * env;
          ga *= bef;
          ge = ge + ga;
          Matrix gw = slices_[j][e].transpose() * g * af;
          gw *= bef;
          g_env = g_env + gw;
        }
        for (std::size_t l = 0; l < D; ++l)
          for (std::size_t r = 0; r < D; ++r) gA[(l * D + r) * d + e] += ge(l, r);
      }
      g_right[j + 1] = g_right[j + 1] + g_env;
    }
  }

 private:
  const MpsEnsemble& model_;
  std::size_t class_;
  GramMatrix gram_;
  BinGrid grid_;
  std::vector<std::vector<Matrix>> slices_;
  std::vector<Matrix> right_;
  std::vector<double> right_scale_;
};

/// Draws one sample of class c with conditional quantiles nu.
inline std::vector<double> sample(const MpsEnsemble& m, std::size_t c, std::span<const double> nu,
                                  const GramMatrix& gram, std::size_t bins = kDefaultBins) {
  return Sampler(m, c, gram, bins).sample(nu);
}

/// Samples along the straight latent segment nu = (1-t)·nu_a + t·nu_b.
inline std::vector<std::vector<double>> interpolate_latent(const MpsEnsemble& m, std::size_t c,
                                                           std::span<const double> nu_a,
                                                           std::span<const double> nu_b,
                                                           std::size_t steps, const GramMatrix& gram,
                                                           std::size_t bins = kDefaultBins) {
  if (steps < 2) throw ArgumentError("interpolate_latent: steps must be >= 2");
  if (nu_a.size() != nu_b.size()) throw ArgumentError("interpolate_latent: endpoint size mismatch");
  const Sampler sampler(m, c, gram, bins);
  std::vector<std::vector<double>> out;
  out.reserve(steps);
  std::vector<double> nu(nu_a.size());
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
    // a + t(b - a) reproduces both endpoints exactly.
    for (std::size_t k = 0; k < nu.size(); ++k) nu[k] = s + 1 == steps ? nu_b[k] : nu_a[k] + t * (nu_b[k] - nu_a[k]);
    out.push_back(sampler.sample(nu));
  }
  return out;
}

}  // namespace mpsgan
