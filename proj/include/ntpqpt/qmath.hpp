// Copyright 2026 The ntpqpt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense complex kernels for the small Hermitian matrices that appear in
// process tomography (d x d states, d^2 x d^2 process matrices, d^4 x d^4
// tomography maps). Everything here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ntpqpt/errors.hpp"

namespace ntpqpt {

using cplx = std::complex<double>;

/// Row-major dense complex matrix.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}
  CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("CMatrix: entry count does not match shape");
    }
  }
  /// Nested-list construction, e.g. CMatrix{{1, 0}, {0, 1}}.
  CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("CMatrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static CMatrix diagonal(std::span<const double> values) {
    CMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }
  static CMatrix diagonal(std::initializer_list<double> values) {
    return diagonal(std::span<const double>(values.begin(), values.size()));
  }
  /// |ket><ket|
  static CMatrix projector(std::span<const cplx> ket) {
    CMatrix m(ket.size(), ket.size());
    for (std::size_t i = 0; i < ket.size(); ++i)
      for (std::size_t j = 0; j < ket.size(); ++j) m(i, j) = ket[i] * std::conj(ket[j]);
    return m;
  }
  static CMatrix projector(std::initializer_list<cplx> ket) {
    return projector(std::span<const cplx>(ket.begin(), ket.size()));
  }
  /// |i><j| in dimension n.
  static CMatrix unit(std::size_t n, std::size_t i, std::size_t j) {
    CMatrix m(n, n);
    m(i, j) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<cplx> entries() noexcept { return data_; }
  std::span<const cplx> entries() const noexcept { return data_; }

  CMatrix adjoint() const {
    CMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }
  CMatrix transpose() const {
    CMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }
  CMatrix conj() const {
    CMatrix out = *this;
    for (auto& z : out.data_) z = std::conj(z);
    return out;
  }

  cplx trace() const {
    require_square("trace");
    cplx t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }
  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  /// (M + M^dagger) / 2
  CMatrix hermitian_part() const {
    require_square("hermitian_part");
    CMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        out(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
    return out;
  }

  bool is_hermitian(double rel_tol = 1e-12) const {
    if (!is_square()) return false;
    const double scale = std::max(1.0, max_abs());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i; j < cols_; ++j)
        if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > rel_tol * scale) return false;
    return true;
  }

  CMatrix& operator+=(const CMatrix& o) {
    require_same_shape(o, "+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    require_same_shape(o, "-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  CMatrix& operator*=(cplx s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, cplx s) { return a *= s; }
  friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(CMatrix a, double s) { return a *= cplx{s, 0.0}; }
  friend CMatrix operator*(double s, CMatrix a) { return a *= cplx{s, 0.0}; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("CMatrix: product shape mismatch");
    CMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  void require_square(const char* op) const {
    if (!is_square()) throw DimensionError(std::string("CMatrix: ") + op + " needs a square matrix");
  }
  void require_same_shape(const CMatrix& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw DimensionError(std::string("CMatrix: shape mismatch in ") + op);
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Kronecker product a (x) b.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

/// Hilbert-Schmidt inner product Tr[a^dagger b].
inline cplx hs_inner(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("hs_inner: shape mismatch");
  cplx s = 0.0;
  auto ea = a.entries();
  auto eb = b.entries();
  for (std::size_t k = 0; k < ea.size(); ++k) s += std::conj(ea[k]) * eb[k];
  return s;
}

/// Relative Frobenius distance ||a - b|| / max(1, ||b||).
inline double rel_frobenius_distance(const CMatrix& a, const CMatrix& b) {
  return (a - b).frobenius_norm() / std::max(1.0, b.frobenius_norm());
}

struct EigDecomposition {
  std::vector<double> eigenvalues;  // ascending
  CMatrix eigenvectors;             // columns

  /// V diag(f(lambda)) V^dagger
  template <class F>
  CMatrix apply(F&& f) const {
    const std::size_t n = eigenvalues.size();
    CMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      const double w = f(eigenvalues[k]);
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const cplx vik = w * eigenvectors(i, k);
        for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(eigenvectors(j, k));
      }
    }
    return out;
  }
  CMatrix reconstruct() const {
    return apply([](double x) { return x; });
  }
  /// Projector onto the k-th eigenvector.
  CMatrix projector(std::size_t k) const {
    std::vector<cplx> v(eigenvalues.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = eigenvectors(i, k);
    return CMatrix::projector(v);
  }
  double min() const { return eigenvalues.front(); }
  double max() const { return eigenvalues.back(); }
};

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
/// Eigenvalues ascending; degenerate eigenvectors are defined only up to a
/// rotation inside their eigenspace.
inline EigDecomposition herm_eig(const CMatrix& m) {
  if (!m.is_square()) throw RepresentationError("herm_eig: matrix is not square");
  if (!m.is_hermitian()) throw RepresentationError("herm_eig: matrix is not Hermitian");
  const std::size_t n = m.rows();
  CMatrix a = m.hermitian_part();
  CMatrix v = CMatrix::identity(n);

  auto off_norm2 = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return s;
  };
  const double total2 = std::max(std::pow(a.frobenius_norm(), 2), 1e-300);
  constexpr double kEps = 1e-32;  // squared relative off-diagonal target

  for (int sweep = 0; sweep < 100 && off_norm2() > kEps * total2; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double r = std::abs(a(p, q));
        if (r < 1e-300) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Skip rotations that cannot change the diagonal at double precision.
        if (sweep > 3 && std::abs(app) + 1e3 * r == std::abs(app) &&
            std::abs(aqq) + 1e3 * r == std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const cplx phase = a(p, q) / r;  // e^{i phi}
        const double zeta = (aqq - app) / (2.0 * r);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // U restricted to (p,q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
        const cplx upp = c, upq = s;
        const cplx uqp = -s * std::conj(phase), uqq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  EigDecomposition out{std::vector<double>(n), CMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

inline constexpr double kDefaultClampTol = 1e-10;

namespace detail {

inline void check_psd(const EigDecomposition& eig, double clamp_tol, const char* who) {
  if (eig.eigenvalues.empty()) return;
  const double scale = std::max(1.0, eig.max());
  if (eig.min() < -clamp_tol * scale) {
    std::ostringstream os;
    os << who << ": matrix is not positive semidefinite (eigenvalue " << eig.min() << ")";
    throw NotPsdError(os.str(), eig.min());
  }
}

}  // namespace detail

/// Square root of a PSD matrix. Eigenvalues below clamp_tol * max(1, lambda_max)
/// (including small negative round-off) are set to zero; anything more
/// negative than -clamp_tol * max(1, lambda_max) is an error.
inline CMatrix psd_sqrt(const CMatrix& m, double clamp_tol = kDefaultClampTol) {
  const auto eig = herm_eig(m);
  detail::check_psd(eig, clamp_tol, "psd_sqrt");
  const double floor = clamp_tol * std::max(1.0, eig.max());
  return eig.apply([floor](double x) { return x <= floor ? 0.0 : std::sqrt(x); });
}

/// Singular values of a general complex matrix by one-sided (Hestenes) Jacobi
/// orthogonalization of its columns. Unordered.
inline std::vector<double> singular_values(const CMatrix& m) {
  CMatrix a = m.rows() >= m.cols() ? m : m.adjoint();
  const std::size_t rows = a.rows(), cols = a.cols();
  constexpr double kTol = 1e-15;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p)
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0;
        cplx gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += std::norm(a(i, p));
          beta += std::norm(a(i, q));
          gamma += std::conj(a(i, p)) * a(i, q);
        }
        const double g = std::abs(gamma);
        if (g <= kTol * std::sqrt(alpha * beta) || g < 1e-300) continue;
        rotated = true;
        const cplx phase = gamma / g;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t i = 0; i < rows; ++i) {
          const cplx ap = a(i, p), aq = a(i, q) * std::conj(phase);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> out(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += std::norm(a(i, j));
    out[j] = std::sqrt(s);
  }
  return out;
}

/// Zero out negative eigenvalues. Used to repair noisy reconstructions.
inline CMatrix clamp_psd(const CMatrix& m) {
  return herm_eig(m).apply([](double x) { return std::max(x, 0.0); });
}

inline double min_eigenvalue(const CMatrix& m) { return herm_eig(m).min(); }
inline double max_eigenvalue(const CMatrix& m) { return herm_eig(m).max(); }

/// Uhlmann-Jozsa fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, evaluated as the
/// squared trace norm of sqrt(a) sqrt(b). Inputs need not have unit trace.
inline double state_fidelity(const CMatrix& a, const CMatrix& b,
                             double clamp_tol = kDefaultClampTol) {
  if (!a.is_square() || a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("state_fidelity: dimension mismatch");
  const CMatrix prod = psd_sqrt(a, clamp_tol) * psd_sqrt(b, clamp_tol);
  double trace_norm = 0.0;
  for (double s : singular_values(prod)) trace_norm += s;
  return trace_norm * trace_norm;
}

struct PseudoInverse {
  CMatrix inverse;
  std::size_t rank = 0;
};

/// Moore-Penrose inverse through the Hermitian eigendecomposition of A^dagger A.
/// Singular values below rcond * sigma_max are discarded.
inline PseudoInverse pinv(const CMatrix& a, double rcond = 1e-7) {
  const CMatrix ah = a.adjoint();
  const auto eig = herm_eig((ah * a).hermitian_part());
  const double cutoff = rcond * rcond * std::max(eig.max(), 0.0);
  std::size_t rank = 0;
  for (double x : eig.eigenvalues)
    if (x > cutoff && x > 0.0) ++rank;
  const CMatrix gram_inv = eig.apply([&](double x) { return (x > cutoff && x > 0.0) ? 1.0 / x : 0.0; });
  return {gram_inv * ah, rank};
}

/// Lower-triangular L with m = L L^dagger for PSD m. Pivots at or below
/// tol * max|m| are treated as zero, so rank-deficient input is accepted.
inline CMatrix cholesky_semidefinite(const CMatrix& m, double tol = 1e-13) {
  if (!m.is_square()) throw DimensionError("cholesky: matrix is not square");
  const std::size_t n = m.rows();
  const double floor = tol * std::max(m.max_abs(), 1e-300);
  CMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (d <= floor) continue;  // column stays zero
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

}  // namespace ntpqpt
