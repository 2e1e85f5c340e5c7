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
#include <string>
#include <utility>
#include <vector>

#include "mpsgan/errors.hpp"

namespace mpsgan {

/// Dense row-major matrix of doubles. Also used for point sets (one point
/// per row).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ArgumentError("Matrix: entry count does not match shape");
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Max absolute entry.
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ArgumentError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline Matrix operator+(Matrix a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ArgumentError("add: shape mismatch");
  for (std::size_t i = 0; i < a.data().size(); ++i) a.data()[i] += b.data()[i];
  return a;
}

inline Matrix operator-(Matrix a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ArgumentError("sub: shape mismatch");
  for (std::size_t i = 0; i < a.data().size(); ++i) a.data()[i] -= b.data()[i];
  return a;
}

inline double trace(const Matrix& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) t += m(i, i);
  return t;
}

struct SymEigResult {
  std::vector<double> values;  // ascending
  Matrix vectors;              // eigenvectors in columns
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
inline SymEigResult sym_eig(const Matrix& m) {
  if (!m.square()) throw ArgumentError("sym_eig: matrix is not square");
  const std::size_t n = m.rows();
  const double scale = m.max_abs();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-10 * scale)
        throw ArgumentError("sym_eig: matrix is not symmetric");

  Matrix a = m;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));
  Matrix q = Matrix::identity(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-30 * scale * scale || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apr = a(p, r);
        if (apr == 0.0) continue;
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akr = a(k, r);
          a(k, p) = c * akp - s * akr;
          a(k, r) = s * akp + c * akr;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double ark = a(r, k);
          a(p, k) = c * apk - s * ark;
          a(r, k) = s * apk + c * ark;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q(k, p);
          const double qkr = q(k, r);
          q(k, p) = c * qkp - s * qkr;
          q(k, r) = s * qkp + c * qkr;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymEigResult out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = q(k, order[j]);
  }
  return out;
}

/// Rebuilds Q f(Λ) Qᵀ from an eigendecomposition.
template <typename F>
Matrix apply_spectral(const SymEigResult& eig, F&& f) {
  const std::size_t n = eig.values.size();
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(eig.values[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double qik = eig.vectors(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += qik * eig.vectors(j, k);
    }
  }
  return out;
}

/// Eigenvalues within -1e-10·λ_max of zero are treated as zero.
inline std::vector<double> clamp_psd_spectrum(std::vector<double> values) {
  const double top = values.empty() ? 0.0 : std::max(0.0, values.back());
  for (double& v : values) {
    if (v >= 0.0) continue;
    if (v < -1e-10 * top) throw DomainError("spd_sqrt: matrix is not positive semi-definite");
    v = 0.0;
  }
  return values;
}

/// Symmetric square root of a positive semi-definite matrix.
inline Matrix spd_sqrt(const Matrix& m) {
  SymEigResult eig = sym_eig(m);
  eig.values = clamp_psd_spectrum(std::move(eig.values));
  return apply_spectral(eig, [](double v) { return std::sqrt(v); });
}

/// Left-Riemann cumulative sums: out[k] = Σ_{i≤k} values[i]·width.
inline std::vector<double> integrate_binned(std::span<const double> values, double width) {
  if (!(width > 0.0)) throw ArgumentError("integrate_binned: width must be positive");
  std::vector<double> out(values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw ArgumentError("integrate_binned: non-finite value");
    acc += values[i] * width;
    out[i] = acc;
  }
  return out;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

/// Mean of the k smallest sorted distances, summed in ascending order.
inline double mean_of_k_smallest(std::vector<double>& distances, std::size_t k) {
  std::partial_sort(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(k),
                    distances.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += distances[i];
  return sum / static_cast<double>(k);
}

/// Mean Euclidean distance from `query` to its k nearest rows of `reference`.
inline double knn_mean_distance(const Matrix& reference, std::span<const double> query,
                                std::size_t k) {
  if (k == 0 || k > reference.rows()) {
    throw ArgumentError("knn_mean_distance: k must be in [1, " +
                        std::to_string(reference.rows()) + "]");
  }
  if (query.size() != reference.cols()) throw ArgumentError("knn_mean_distance: dimension mismatch");
  std::vector<double> dist(reference.rows());
  for (std::size_t i = 0; i < reference.rows(); ++i)
    dist[i] = std::sqrt(squared_distance(reference.row(i), query));
  return mean_of_k_smallest(dist, k);
}

}  // namespace mpsgan
