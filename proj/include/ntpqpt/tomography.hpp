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

// Linear-inversion process tomography. A channel is probed with prepared
// input states; each output is reconstructed by (unnormalized) state
// tomography, expanded in a state basis to give the lambda matrix, and the
// chi matrix follows from the generalized inverse of the beta map.

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ntpqpt/channels.hpp"
#include "ntpqpt/errors.hpp"
#include "ntpqpt/polarization.hpp"
#include "ntpqpt/qmath.hpp"

namespace ntpqpt {

namespace detail {

inline std::vector<cplx> vec(const CMatrix& m) { return {m.entries().begin(), m.entries().end()}; }

inline CMatrix unvec(std::span<const cplx> v, std::size_t d) {
  return CMatrix(d, d, std::vector<cplx>(v.begin(), v.end()));
}

inline std::vector<cplx> mat_vec(const CMatrix& a, std::span<const cplx> x) {
  std::vector<cplx> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

}  // namespace detail

/// d^2 matrices rho_k spanning the space of d x d operators.
class StateBasis {
 public:
  static constexpr double kMaxCondition = 1e6;

  StateBasis(std::size_t dim, std::vector<CMatrix> states) : dim_(dim), states_(std::move(states)) {
    if (states_.size() != dim_ * dim_) throw RepresentationError("StateBasis: expected d^2 states");
    const std::size_t n = states_.size();
    CMatrix cols(n, n);  // column k = vec(rho_k)
    for (std::size_t k = 0; k < n; ++k) {
      if (states_[k].rows() != dim_ || states_[k].cols() != dim_)
        throw DimensionError("StateBasis: state is not d x d");
      auto e = states_[k].entries();
      for (std::size_t r = 0; r < n; ++r) cols(r, k) = e[r];
    }
    const auto gram = herm_eig((cols.adjoint() * cols).hermitian_part());
    if (!(gram.min() > 0.0) || gram.max() / gram.min() >= kMaxCondition)
      throw SingularSystemError("StateBasis: states are not linearly independent (Gram condition too large)");
    condition_ = gram.max() / gram.min();
    auto inv = pinv(cols);
    if (inv.rank < n) throw SingularSystemError("StateBasis: states are not linearly independent");
    coord_ = std::move(inv.inverse);
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return states_.size(); }
  const std::vector<CMatrix>& states() const noexcept { return states_; }
  const CMatrix& operator[](std::size_t k) const { return states_[k]; }
  /// Condition number of the Hilbert-Schmidt Gram matrix.
  double gram_condition() const noexcept { return condition_; }

  /// Coefficients c_k with X = sum_k c_k rho_k.
  std::vector<cplx> coordinates(const CMatrix& x) const {
    if (x.rows() != dim_ || x.cols() != dim_) throw DimensionError("StateBasis: operator dimension mismatch");
    return detail::mat_vec(coord_, x.entries());
  }

 private:
  std::size_t dim_;
  std::vector<CMatrix> states_;
  CMatrix coord_;
  double condition_ = 1.0;
};

/// Matrix units |i><j| in lexicographic order.
inline StateBasis canonical_state_basis(std::size_t d) {
  if (d < 2) throw RepresentationError("canonical_state_basis: d must be at least 2");
  std::vector<CMatrix> s;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s.push_back(CMatrix::unit(d, i, j));
  return {d, std::move(s)};
}

/// beta^{mn}_{jk}: A_m rho_j A_n^dagger = sum_k beta^{mn}_{jk} rho_k, stored as a
/// d^4 x d^4 matrix with row (j,k) and column (m,n).
struct BetaTensor {
  OperatorBasis basis;
  std::size_t d2 = 0;
  CMatrix map;

  cplx operator()(std::size_t m, std::size_t n, std::size_t j, std::size_t k) const {
    return map(j * d2 + k, m * d2 + n);
  }
};

/// Generalized inverse of beta: row (m,n), column (j,k).
struct TauTensor {
  OperatorBasis basis;
  std::size_t d2 = 0;
  CMatrix map;

  cplx operator()(std::size_t m, std::size_t n, std::size_t j, std::size_t k) const {
    return map(m * d2 + n, j * d2 + k);
  }
};

inline BetaTensor build_beta(const OperatorBasis& basis, const StateBasis& states) {
  basis.validate();
  if (basis.dim != states.dim()) throw DimensionError("build_beta: operator and state bases differ in dimension");
  const std::size_t d2 = basis.size();
  BetaTensor beta{basis, d2, CMatrix(d2 * d2, d2 * d2)};
  for (std::size_t m = 0; m < d2; ++m)
    for (std::size_t n = 0; n < d2; ++n) {
      const CMatrix an_dag = basis.ops[n].adjoint();
      for (std::size_t j = 0; j < d2; ++j) {
        const auto coeff = states.coordinates(basis.ops[m] * states[j] * an_dag);
        for (std::size_t k = 0; k < d2; ++k) beta.map(j * d2 + k, m * d2 + n) = coeff[k];
      }
    }
  return beta;
}

inline TauTensor invert_beta(const BetaTensor& beta) {
  auto inv = pinv(beta.map);
  if (inv.rank < beta.map.cols())
    throw SingularSystemError("invert_beta: beta map is rank deficient (rank " + std::to_string(inv.rank) +
                              " of " + std::to_string(beta.map.cols()) + ")");
  return {beta.basis, beta.d2, std::move(inv.inverse)};
}

/// Beta and tau for one (operator basis, state basis) pair. Immutable after
/// construction, so a shared instance may be read from several threads.
struct InversionMaps {
  StateBasis states;
  BetaTensor beta;
  TauTensor tau;

  InversionMaps(const OperatorBasis& basis, StateBasis s)
      : states(std::move(s)), beta(build_beta(basis, states)), tau(invert_beta(beta)) {}
};

/// Coincidence counts n_ab for input a and analyzer b, with the expected
/// number of pairs per input setting.
struct CountTable {
  std::size_t dim = 2;
  std::vector<std::string> inputs;
  std::vector<std::string> projectors;
  double exposure = 0.0;
  std::vector<std::vector<double>> counts;

  void validate() const {
    if (!(exposure > 0.0)) throw DataError("CountTable: exposure must be positive");
    if (counts.size() != inputs.size()) throw DataError("CountTable: one count row per input is required");
    for (const auto& row : counts) {
      if (row.size() != projectors.size()) throw DataError("CountTable: missing analyzer cells");
      for (double n : row)
        if (!(n >= 0.0) || !std::isfinite(n)) throw DataError("CountTable: counts must be finite and nonnegative");
    }
  }
  double at(std::size_t a, std::size_t b) const { return counts.at(a).at(b); }
  double at(std::string_view input, std::string_view projector) const {
    return at(index(inputs, input), index(projectors, projector));
  }

 private:
  static std::size_t index(const std::vector<std::string>& labels, std::string_view l) {
    for (std::size_t k = 0; k < labels.size(); ++k)
      if (labels[k] == l) return k;
    throw DataError("CountTable: no entry labelled '" + std::string(l) + "'");
  }
};

/// Prepared input states and analyzer projectors matching a CountTable.
struct Protocol {
  std::vector<std::string> input_labels;
  std::vector<DensityMatrix> inputs;
  std::vector<std::string> analyzer_labels;
  std::vector<CMatrix> analyzers;

  static Protocol polarization(std::vector<std::string> input_labels, std::vector<std::string> analyzer_labels) {
    Protocol p;
    p.inputs = polarization::states(input_labels);
    for (const auto& s : polarization::states(analyzer_labels)) p.analyzers.push_back(s.mat);
    p.input_labels = std::move(input_labels);
    p.analyzer_labels = std::move(analyzer_labels);
    return p;
  }
  /// The six-input, six-analyzer polarization protocol.
  static Protocol six_state() { return polarization(polarization::all_labels(), polarization::all_labels()); }
  static Protocol for_table(const CountTable& t) {
    if (t.dim != 2) throw DataError("Protocol: only polarization-qubit labels are known");
    return polarization(t.inputs, t.projectors);
  }
};

/// Linear state estimator for an informationally complete analyzer set:
/// rho = sum_b (n_b / N) M_b with the canonical dual frame M_b.
class StateEstimator {
 public:
  explicit StateEstimator(std::vector<CMatrix> analyzers) : analyzers_(std::move(analyzers)) {
    if (analyzers_.empty()) throw DataError("StateEstimator: no analyzers");
    dim_ = analyzers_.front().rows();
    const std::size_t n = dim_ * dim_;
    CMatrix frame(n, n);
    for (const auto& pi : analyzers_) {
      if (pi.rows() != dim_ || pi.cols() != dim_) throw DimensionError("StateEstimator: analyzer dimension mismatch");
      auto v = pi.entries();
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) frame(r, c) += v[r] * std::conj(v[c]);
    }
    auto inv = pinv(frame.hermitian_part());
    if (inv.rank < n) throw SingularSystemError("StateEstimator: analyzer set is not informationally complete");
    for (const auto& pi : analyzers_)
      dual_.push_back(detail::unvec(detail::mat_vec(inv.inverse, pi.entries()), dim_).hermitian_part());
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<CMatrix>& dual_frame() const noexcept { return dual_; }

  /// Unnormalized estimate; its trace estimates the success probability.
  DensityMatrix estimate(std::span<const double> counts, double exposure) const {
    if (counts.size() != analyzers_.size())
      throw DataError("state_tomography: expected one count per analyzer");
    if (!(exposure > 0.0)) throw DataError("state_tomography: exposure must be positive");
    CMatrix rho(dim_, dim_);
    for (std::size_t b = 0; b < counts.size(); ++b) rho += (counts[b] / exposure) * dual_[b];
    return {rho.hermitian_part()};
  }

 private:
  std::vector<CMatrix> analyzers_;
  std::vector<CMatrix> dual_;
  std::size_t dim_ = 0;
};

inline DensityMatrix state_tomography(std::span<const double> counts, const std::vector<CMatrix>& analyzers,
                                      double exposure) {
  return StateEstimator(analyzers).estimate(counts, exposure);
}

/// Tomographed output for every input row of a table.
inline std::vector<DensityMatrix> tomograph_outputs(const CountTable& table, const Protocol& protocol) {
  table.validate();
  if (protocol.analyzers.size() != table.projectors.size() || protocol.inputs.size() != table.inputs.size())
    throw DataError("tomograph_outputs: protocol does not match count table shape");
  const StateEstimator est(protocol.analyzers);
  std::vector<DensityMatrix> out;
  out.reserve(table.counts.size());
  for (const auto& row : table.counts) out.push_back(est.estimate(row, table.exposure));
  return out;
}

/// lambda_jk with E(rho_j) = sum_k lambda_jk rho_k, plus the least-squares
/// residual of the overdetermined input system.
struct LambdaMatrix {
  CMatrix mat;
  double residual = 0.0;
};

inline LambdaMatrix lambda_from_outputs(const std::vector<DensityMatrix>& outputs,
                                        const std::vector<DensityMatrix>& inputs, const StateBasis& states) {
  if (outputs.size() != inputs.size()) throw DataError("lambda_from_outputs: one output per input is required");
  const std::size_t n = states.size();
  const std::size_t count = inputs.size();
  CMatrix c(count, n);
  CMatrix o(count, n);
  for (std::size_t a = 0; a < count; ++a) {
    const auto ci = states.coordinates(inputs[a].mat);
    const auto co = states.coordinates(outputs[a].mat);
    for (std::size_t k = 0; k < n; ++k) {
      c(a, k) = ci[k];
      o(a, k) = co[k];
    }
  }
  auto inv = pinv(c);
  if (inv.rank < n)
    throw SingularSystemError("lambda_from_outputs: prepared inputs do not span the operator space");
  LambdaMatrix lam{inv.inverse * o, 0.0};
  lam.residual = (c * lam.mat - o).frobenius_norm();
  return lam;
}

struct LinearInversion {
  ChiMatrix chi;
  double min_eigenvalue = 0.0;
  /// False when chi has eigenvalues below -clamp_tol * max(1, lambda_max).
  bool physical = true;
};

/// chi_mn = sum_jk tau^{mn}_{jk} lambda_jk. Never clamps.
inline LinearInversion linear_inversion(const LambdaMatrix& lambda, const TauTensor& tau,
                                        double clamp_tol = kDefaultClampTol) {
  const std::size_t d2 = tau.d2;
  if (lambda.mat.rows() != d2 || lambda.mat.cols() != d2)
    throw DimensionError("linear_inversion: lambda shape does not match tau");
  const auto chi_vec = detail::mat_vec(tau.map, lambda.mat.entries());
  LinearInversion out{ChiMatrix(tau.basis, detail::unvec(chi_vec, d2)), 0.0, true};
  const auto eig = herm_eig(out.chi.mat);
  out.min_eigenvalue = eig.min();
  out.physical = eig.min() >= -clamp_tol * std::max(1.0, eig.max());
  return out;
}

/// Counts -> output tomography -> lambda -> chi.
inline LinearInversion reconstruct_linear(const CountTable& table, const Protocol& protocol,
                                          const InversionMaps& maps) {
  const auto outputs = tomograph_outputs(table, protocol);
  return linear_inversion(lambda_from_outputs(outputs, protocol.inputs, maps.states), maps.tau);
}

}  // namespace ntpqpt
