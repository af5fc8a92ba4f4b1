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

// Channel representations: operator bases, chi (process) matrices, Kraus sets,
// the success-probability operator P and process fidelities.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ntpqpt/errors.hpp"
#include "ntpqpt/qmath.hpp"

namespace ntpqpt {

/// A complete operator basis {A_m} of d x d matrices normalized so that
/// Tr[A_m A_n^dagger] = d delta_mn.
struct OperatorBasis {
  std::size_t dim = 0;
  std::vector<CMatrix> ops;
  std::string label;

  std::size_t size() const noexcept { return ops.size(); }

  /// Throws RepresentationError if the element count, shapes or
  /// normalization are wrong.
  void validate(double tol = 1e-12) const {
    if (dim < 1 || ops.size() != dim * dim)
      throw RepresentationError("OperatorBasis '" + label + "': expected d^2 elements");
    for (const auto& op : ops)
      if (op.rows() != dim || op.cols() != dim)
        throw RepresentationError("OperatorBasis '" + label + "': element is not d x d");
    for (std::size_t m = 0; m < ops.size(); ++m)
      for (std::size_t n = 0; n < ops.size(); ++n) {
        const cplx g = hs_inner(ops[n], ops[m]);  // Tr[A_m A_n^dagger]
        const double want = m == n ? static_cast<double>(dim) : 0.0;
        if (std::abs(g - want) > tol * static_cast<double>(dim))
          throw RepresentationError("OperatorBasis '" + label + "': not normalized to Tr[A_m A_n^+] = d delta_mn");
      }
  }
};

inline bool same_basis(const OperatorBasis& a, const OperatorBasis& b, double tol = 1e-12) {
  if (a.dim != b.dim || a.ops.size() != b.ops.size()) return false;
  for (std::size_t m = 0; m < a.ops.size(); ++m)
    if ((a.ops[m] - b.ops[m]).max_abs() > tol) return false;
  return true;
}

/// {I, sigma_x, sigma_y, sigma_z}
inline OperatorBasis pauli_basis() {
  const cplx i{0.0, 1.0};
  return {2,
          {CMatrix{{1, 0}, {0, 1}}, CMatrix{{0, 1}, {1, 0}}, CMatrix{{0, -i}, {i, 0}},
           CMatrix{{1, 0}, {0, -1}}},
          "pauli"};
}

/// sqrt(d) |i><j| in lexicographic (i, j) order.
inline OperatorBasis elementary_basis(std::size_t d) {
  if (d < 2) throw RepresentationError("elementary_basis: d must be at least 2");
  OperatorBasis b{d, {}, "elementary-scaled"};
  const double s = std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) b.ops.push_back(s * CMatrix::unit(d, i, j));
  return b;
}

/// A (possibly unnormalized) density matrix.
struct DensityMatrix {
  CMatrix mat;

  static DensityMatrix pure(std::span<const cplx> ket) { return {CMatrix::projector(ket)}; }
  static DensityMatrix pure(std::initializer_list<cplx> ket) { return {CMatrix::projector(ket)}; }

  std::size_t dim() const noexcept { return mat.rows(); }
  double trace() const { return mat.trace().real(); }
};

/// Process matrix together with the basis it is expressed in.
struct ChiMatrix {
  OperatorBasis basis;
  CMatrix mat;

  ChiMatrix() = default;
  ChiMatrix(OperatorBasis b, CMatrix m) : basis(std::move(b)), mat(std::move(m)) {
    const std::size_t n = basis.size();
    if (mat.rows() != n || mat.cols() != n)
      throw DimensionError("ChiMatrix: matrix must be d^2 x d^2 for its basis");
    if (!mat.is_hermitian(1e-9)) throw RepresentationError("ChiMatrix: matrix is not Hermitian");
    mat = mat.hermitian_part();
  }

  std::size_t dim() const noexcept { return basis.dim; }
  double trace() const { return mat.trace().real(); }
  double min_eigenvalue() const { return ntpqpt::min_eigenvalue(mat); }
  ChiMatrix scaled(double s) const { return {basis, mat * s}; }
};

/// Kraus operators E_i with sum E_i^dagger E_i <= I.
struct KrausSet {
  std::size_t dim = 0;
  std::vector<CMatrix> ops;

  /// Largest eigenvalue of sum E_i^dagger E_i - I; <= 0 for a physical map.
  double completeness_excess() const {
    CMatrix s(dim, dim);
    for (const auto& e : ops) s += e.adjoint() * e;
    return max_eigenvalue((s - CMatrix::identity(dim)).hermitian_part());
  }
  void validate(double tol = 1e-9) const {
    if (ops.empty() || ops.size() > dim * dim)
      throw RepresentationError("KrausSet: need between 1 and d^2 operators");
    for (const auto& e : ops)
      if (e.rows() != dim || e.cols() != dim) throw DimensionError("KrausSet: operator is not d x d");
    if (completeness_excess() > tol)
      throw RepresentationError("KrausSet: sum E_i^+ E_i exceeds the identity");
  }
  /// sum_i E_i X E_i^dagger
  CMatrix apply(const CMatrix& x) const {
    CMatrix out(dim, dim);
    for (const auto& e : ops) out += e * x * e.adjoint();
    return out;
  }
};

/// Map action sum_mn chi_mn A_m X A_n^dagger on an arbitrary operator X.
inline CMatrix apply_map(const ChiMatrix& chi, const CMatrix& x) {
  const auto& ops = chi.basis.ops;
  const std::size_t d = chi.dim();
  if (x.rows() != d || x.cols() != d) throw DimensionError("apply_map: operator dimension mismatch");
  std::vector<CMatrix> left(ops.size());
  std::vector<CMatrix> right(ops.size());
  for (std::size_t m = 0; m < ops.size(); ++m) {
    left[m] = ops[m] * x;
    right[m] = ops[m].adjoint();
  }
  CMatrix out(d, d);
  for (std::size_t m = 0; m < ops.size(); ++m)
    for (std::size_t n = 0; n < ops.size(); ++n) {
      const cplx c = chi.mat(m, n);
      if (c == cplx{}) continue;
      out += c * (left[m] * right[n]);
    }
  return out;
}

/// E(rho); the output is not renormalized, its trace is the success probability.
inline DensityMatrix apply_channel(const ChiMatrix& chi, const DensityMatrix& rho) {
  if (rho.dim() != chi.dim()) throw DimensionError("apply_channel: state and channel dimensions differ");
  return {apply_map(chi, rho.mat).hermitian_part()};
}

/// a_im = Tr[A_m^dagger E_i] / d, chi_mn = sum_i a_im a_in^*.
inline ChiMatrix chi_from_kraus(const KrausSet& k, const OperatorBasis& basis) {
  if (k.dim != basis.dim) throw DimensionError("chi_from_kraus: dimension mismatch");
  const std::size_t n = basis.size();
  const double d = static_cast<double>(basis.dim);
  CMatrix chi(n, n);
  for (const auto& e : k.ops) {
    std::vector<cplx> a(n);
    for (std::size_t m = 0; m < n; ++m) a[m] = hs_inner(basis.ops[m], e) / d;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) chi(r, c) += a[r] * std::conj(a[c]);
  }
  return {basis, chi};
}

/// Spectral factorization of chi into Kraus operators. Components with
/// eigenvalue below drop_rel * lambda_max are discarded.
inline KrausSet kraus_from_chi(const ChiMatrix& chi, double clamp_tol = kDefaultClampTol,
                               double drop_rel = 1e-12) {
  const auto eig = herm_eig(chi.mat);
  detail::check_psd(eig, clamp_tol, "kraus_from_chi");
  const double lmax = eig.max();
  KrausSet out{chi.dim(), {}};
  const std::size_t n = chi.basis.size();
  // Largest components first.
  for (std::size_t idx = n; idx-- > 0;) {
    const double lam = eig.eigenvalues[idx];
    if (lam <= 0.0 || lam < drop_rel * lmax) continue;
    CMatrix e(chi.dim(), chi.dim());
    for (std::size_t m = 0; m < n; ++m) e += eig.eigenvectors(m, idx) * chi.basis.ops[m];
    out.ops.push_back(std::sqrt(lam) * e);
  }
  return out;
}

/// Re-expresses chi in another normalized basis; the channel action is unchanged.
inline ChiMatrix change_basis(const ChiMatrix& chi, const OperatorBasis& target) {
  target.validate();
  if (target.dim != chi.dim()) throw DimensionError("change_basis: dimension mismatch");
  const std::size_t n = target.size();
  const double d = static_cast<double>(target.dim);
  // A_m = sum_k c_mk B_k
  CMatrix c(n, n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = 0; k < n; ++k) c(m, k) = hs_inner(target.ops[k], chi.basis.ops[m]) / d;
  return {target, (c.transpose() * chi.mat * c.conj()).hermitian_part()};
}

enum class SuccessProfile { kTracePreserving, kUniformLossy, kStateDependent };

inline const char* to_string(SuccessProfile p) {
  switch (p) {
    case SuccessProfile::kTracePreserving: return "trace-preserving";
    case SuccessProfile::kUniformLossy: return "uniform-lossy";
    case SuccessProfile::kStateDependent: return "state-dependent";
  }
  return "unknown";
}

inline constexpr double kProfileTol = 1e-6;

/// P = sum_mn chi_mn A_n^dagger A_m with its spectrum; Tr[E(rho)] = Tr[P rho].
struct ProbabilityOperator {
  CMatrix mat;
  EigDecomposition spectrum;
  SuccessProfile profile = SuccessProfile::kStateDependent;

  explicit ProbabilityOperator(CMatrix p, double tol = kProfileTol)
      : mat(p.hermitian_part()), spectrum(herm_eig(mat)) {
    const auto& ev = spectrum.eigenvalues;
    const bool uniform = ev.back() - ev.front() <= tol;
    if (uniform && std::abs(ev.back() - 1.0) <= tol && std::abs(ev.front() - 1.0) <= tol)
      profile = SuccessProfile::kTracePreserving;
    else if (uniform)
      profile = SuccessProfile::kUniformLossy;
    else
      profile = SuccessProfile::kStateDependent;
  }

  double max_eigenvalue() const { return spectrum.max(); }
  /// Success probability Tr[P rho].
  double success_probability(const DensityMatrix& rho) const {
    return hs_inner(mat, rho.mat).real();
  }
};

inline ProbabilityOperator probability_operator(const ChiMatrix& chi) {
  const auto& ops = chi.basis.ops;
  const std::size_t d = chi.dim();
  CMatrix p(d, d);
  for (std::size_t m = 0; m < ops.size(); ++m)
    for (std::size_t n = 0; n < ops.size(); ++n) {
      const cplx c = chi.mat(m, n);
      if (c == cplx{}) continue;
      p += c * (ops[n].adjoint() * ops[m]);
    }
  return ProbabilityOperator(std::move(p));
}

/// (I (x) E)|Phi><Phi| with |Phi> = sum_j |j>|j> / sqrt(d). The reference
/// system is the first tensor factor.
inline DensityMatrix jamiolkowski_state(const ChiMatrix& chi) {
  const std::size_t d = chi.dim();
  CMatrix out(d * d, d * d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      out += kron(CMatrix::unit(d, a, b), apply_map(chi, CMatrix::unit(d, a, b)));
  return {(out * (1.0 / static_cast<double>(d))).hermitian_part()};
}

/// Generalized process fidelity Tr[sqrt(sqrt(chi) chi_ref sqrt(chi))]^2 /
/// (Tr[chi] Tr[chi_ref]). Invariant under rescaling either argument.
inline double process_fidelity_ntp(const ChiMatrix& chi, const ChiMatrix& chi_ref,
                                   double clamp_tol = kDefaultClampTol) {
  if (!same_basis(chi.basis, chi_ref.basis))
    throw RepresentationError("process_fidelity: chi matrices are expressed in different bases");
  const double ta = chi.trace();
  const double tb = chi_ref.trace();
  if (!(ta > 0.0) || !(tb > 0.0)) throw RepresentationError("process_fidelity: zero-trace chi matrix");
  return state_fidelity(chi.mat * (1.0 / ta), chi_ref.mat * (1.0 / tb), clamp_tol);
}

/// Process fidelity between trace-preserving channels (unit-trace chi).
inline double process_fidelity_tp(const ChiMatrix& a, const ChiMatrix& b,
                                  double clamp_tol = kDefaultClampTol) {
  constexpr double kTraceTol = 1e-6;
  if (std::abs(a.trace() - 1.0) > kTraceTol || std::abs(b.trace() - 1.0) > kTraceTol)
    throw RepresentationError(
        "process_fidelity_tp: chi trace differs from 1; use process_fidelity_ntp for lossy maps");
  return process_fidelity_ntp(a, b, clamp_tol);
}

}  // namespace ntpqpt
