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

// Maximum-likelihood process reconstruction. The chi matrix is parameterized
// as chi(t) = T(t)^dagger T(t) with T lower triangular and real on the
// diagonal, so every parameter vector maps to a positive semidefinite chi.
// The weighted least-squares objective
//
//   f(t) = sum_ab [n_ab - N sum_mn K_ab,mn chi_mn(t)]^2 / w_ab,
//   K_ab,mn = Tr[Pi_b A_m rho_a A_n^dagger],   w_ab = max(n_ab, 1),
//
// is minimized with Nelder-Mead from a linear-inversion seed plus random seeds.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ntpqpt/channels.hpp"
#include "ntpqpt/errors.hpp"
#include "ntpqpt/nelder_mead.hpp"
#include "ntpqpt/qmath.hpp"
#include "ntpqpt/simulator.hpp"
#include "ntpqpt/tomography.hpp"

namespace ntpqpt {

/// Real parameter vector of length (d^2)^2 for the factor T(t).
/// Layout: d^2 diagonal entries, then (re, im) of T(i, j) for i > j in
/// row-major order.
struct MleParams {
  std::vector<double> t;

  static std::size_t size_for(std::size_t d2) { return d2 * d2; }
};

inline CMatrix factor_from_params(std::span<const double> t, std::size_t d2) {
  if (t.size() != MleParams::size_for(d2)) throw DimensionError("MleParams: wrong parameter count");
  CMatrix f(d2, d2);
  std::size_t p = 0;
  for (std::size_t i = 0; i < d2; ++i) f(i, i) = t[p++];
  for (std::size_t i = 1; i < d2; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      f(i, j) = cplx{t[p], t[p + 1]};
      p += 2;
    }
  return f;
}

/// T^dagger T
inline CMatrix chi_matrix_from_params(std::span<const double> t, std::size_t d2) {
  const CMatrix f = factor_from_params(t, d2);
  CMatrix out(d2, d2);
  // (T^dagger T)_rc = sum_k conj(T_kr) T_kc, with T_kr = 0 for k < r.
  for (std::size_t r = 0; r < d2; ++r)
    for (std::size_t c = r; c < d2; ++c) {
      cplx s = 0.0;
      for (std::size_t k = std::max(r, c); k < d2; ++k) s += std::conj(f(k, r)) * f(k, c);
      out(r, c) = s;
      out(c, r) = std::conj(s);
    }
  return out;
}

/// Parameters reproducing a PSD chi (negative eigenvalues must already be
/// removed). Uses chi = J L L^dagger J with J the reversal permutation, so
/// T = J L^dagger J is lower triangular.
inline MleParams params_from_chi(const CMatrix& chi) {
  const std::size_t n = chi.rows();
  CMatrix rev(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rev(i, j) = chi(n - 1 - i, n - 1 - j);
  const CMatrix l = cholesky_semidefinite(rev);
  CMatrix t(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t(i, j) = std::conj(l(n - 1 - j, n - 1 - i));
  MleParams p{std::vector<double>(MleParams::size_for(n))};
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) p.t[k++] = t(i, i).real();
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      p.t[k++] = t(i, j).real();
      p.t[k++] = t(i, j).imag();
    }
  return p;
}

enum class ZeroCountPolicy {
  kFloorAtOne,  // w_ab = max(n_ab, 1)
  kDropZero,    // cells with n_ab = 0 are left out
};

/// Precomputed weighted least-squares objective for one count table.
class LikelihoodModel {
 public:
  LikelihoodModel(const CountTable& table, const Protocol& protocol, const OperatorBasis& basis,
                  ZeroCountPolicy policy = ZeroCountPolicy::kFloorAtOne)
      : basis_(basis), d2_(basis.size()), exposure_(table.exposure) {
    table.validate();
    basis.validate();
    if (protocol.inputs.size() != table.inputs.size() || protocol.analyzers.size() != table.projectors.size())
      throw DataError("likelihood: protocol does not match count table shape");
    if (table.dim != basis.dim) throw DataError("likelihood: count table dimension differs from basis");
    for (std::size_t a = 0; a < protocol.inputs.size(); ++a) {
      std::vector<CMatrix> left(d2_), right(d2_);
      for (std::size_t m = 0; m < d2_; ++m) {
        left[m] = basis.ops[m] * protocol.inputs[a].mat;
        right[m] = basis.ops[m].adjoint();
      }
      for (std::size_t b = 0; b < protocol.analyzers.size(); ++b) {
        const double n = table.at(a, b);
        if (policy == ZeroCountPolicy::kDropZero && n == 0.0) continue;
        Cell cell{n, 1.0 / std::max(n, 1.0), std::vector<cplx>(d2_ * d2_)};
        const CMatrix& pi = protocol.analyzers[b];
        for (std::size_t m = 0; m < d2_; ++m) {
          const CMatrix pl = pi * left[m];
          for (std::size_t k = 0; k < d2_; ++k) cell.coeff[m * d2_ + k] = (pl * right[k]).trace();
        }
        cells_.push_back(std::move(cell));
      }
    }
  }

  std::size_t param_count() const noexcept { return MleParams::size_for(d2_); }
  const OperatorBasis& basis() const noexcept { return basis_; }

  /// Objective at an explicit chi.
  double operator()(const CMatrix& chi) const {
    const auto e = chi.entries();
    double f = 0.0;
    for (const auto& cell : cells_) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < e.size(); ++k) s += cell.coeff[k] * e[k];
      const double r = cell.n - exposure_ * s.real();
      f += r * r * cell.inv_weight;
    }
    return f;
  }
  double at_params(std::span<const double> t) const { return (*this)(chi_matrix_from_params(t, d2_)); }

 private:
  struct Cell {
    double n;
    double inv_weight;
    std::vector<cplx> coeff;  // K_ab,mn flattened as m * d2 + n
  };
  OperatorBasis basis_;
  std::size_t d2_;
  double exposure_;
  std::vector<Cell> cells_;
};

inline double likelihood(const MleParams& t, const CountTable& counts, const Protocol& protocol,
                         const OperatorBasis& basis, ZeroCountPolicy policy = ZeroCountPolicy::kFloorAtOne) {
  return LikelihoodModel(counts, protocol, basis, policy).at_params(t.t);
}

/// Rescales chi so that the largest eigenvalue of P is one.
inline std::pair<ChiMatrix, double> normalize_max_p(const ChiMatrix& chi) {
  const double scale = probability_operator(chi).max_eigenvalue();
  if (!(scale > 0.0)) throw RepresentationError("normalize_max_p: P has no positive eigenvalue (zero map)");
  return {chi.scaled(1.0 / scale), scale};
}

struct FitOptions {
  int restarts = 4;  // one linear-inversion seed plus (restarts - 1) random seeds
  std::uint64_t seed = 1;
  NelderMeadOptions optimizer{};
  ZeroCountPolicy zero_counts = ZeroCountPolicy::kFloorAtOne;
  // Trace-preserving penalty continuation.
  double penalty_start = 1.0;
  double penalty_growth = 10.0;
  int max_penalty_stages = 20;
  double constraint_tol = 1e-6;
};

struct FitReport {
  std::string method;
  ChiMatrix chi;
  double objective = 0.0;
  double seed_objective = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  int restarts_used = 0;
  double constraint_residual = 0.0;
  double normalization_scale = 1.0;
  double min_chi_eigenvalue = 0.0;
  std::uint64_t seed = 0;
  /// Unrepaired linear-inversion chi of the post-selected method.
  std::optional<ChiMatrix> raw_chi;
};

namespace detail {

inline MleParams linear_seed(const CountTable& counts, const Protocol& protocol, const OperatorBasis& basis) {
  const InversionMaps maps(basis, canonical_state_basis(basis.dim));
  const auto lin = reconstruct_linear(counts, protocol, maps);
  return params_from_chi(clamp_psd(lin.chi.mat));
}

inline MleParams random_seed(std::size_t n_params, double chi_trace, std::uint64_t seed, std::uint64_t stream) {
  auto rng = make_rng(seed, stream);
  const double sigma = std::sqrt(std::max(chi_trace, 1e-3) / static_cast<double>(n_params));
  std::normal_distribution<double> g(0.0, sigma);
  MleParams p{std::vector<double>(n_params)};
  for (auto& x : p.t) x = g(rng);
  return p;
}

inline double trace_of_params(const MleParams& p, std::size_t d2) {
  return chi_matrix_from_params(p.t, d2).trace().real();
}

struct MultiStart {
  NelderMeadResult best;
  double seed_objective = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
};

template <class Objective>
MultiStart multi_start(const Objective& objective, const MleParams& seed_params, std::size_t d2,
                       const FitOptions& opts) {
  MultiStart out;
  out.seed_objective = objective(seed_params.t);
  const double tr = trace_of_params(seed_params, d2);
  const int restarts = std::max(1, opts.restarts);
  for (int r = 0; r < restarts; ++r) {
    const MleParams start = r == 0 ? seed_params
                                   : random_seed(seed_params.t.size(), tr, opts.seed, static_cast<std::uint64_t>(r));
    auto res = nelder_mead(objective, start.t, opts.optimizer);
    out.iterations += res.iterations;
    out.evaluations += res.evals;
    if (r == 0 || res.f < out.best.f) out.best = std::move(res);
  }
  return out;
}

}  // namespace detail

/// Unconstrained maximum-likelihood fit; the result is rescaled so that
/// lambda_max(P) = 1.
inline FitReport fit_unconstrained(const CountTable& counts, const Protocol& protocol, const OperatorBasis& basis,
                                   const FitOptions& opts = {}) {
  const LikelihoodModel model(counts, protocol, basis, opts.zero_counts);
  const std::size_t d2 = basis.size();
  const auto seed = detail::linear_seed(counts, protocol, basis);
  auto objective = [&](const std::vector<double>& t) { return model.at_params(t); };
  const auto ms = detail::multi_start(objective, seed, d2, opts);
  if (ms.best.f > ms.seed_objective)
    throw NumericalFailure("fit_unconstrained: optimizer ended above the seed objective (" +
                           std::to_string(ms.best.f) + " > " + std::to_string(ms.seed_objective) + ")");
  const ChiMatrix raw(basis, chi_matrix_from_params(ms.best.x, d2));
  auto [chi, scale] = normalize_max_p(raw);
  FitReport rep;
  rep.method = "mle";
  rep.min_chi_eigenvalue = chi.min_eigenvalue();
  rep.chi = std::move(chi);
  rep.objective = ms.best.f;
  rep.seed_objective = ms.seed_objective;
  rep.iterations = ms.iterations;
  rep.evaluations = ms.evaluations;
  rep.restarts_used = std::max(1, opts.restarts);
  rep.normalization_scale = scale;
  rep.seed = opts.seed;
  return rep;
}

/// ||P(chi) - I||_F
inline double trace_preserving_residual(const ChiMatrix& chi) {
  const auto p = probability_operator(chi);
  return (p.mat - CMatrix::identity(chi.dim())).frobenius_norm();
}

/// Maximum-likelihood fit restricted to trace-preserving maps (P = I),
/// enforced by a quadratic penalty whose weight grows until the constraint
/// residual falls below opts.constraint_tol.
inline FitReport fit_trace_preserving(const CountTable& counts, const Protocol& protocol,
                                      const OperatorBasis& basis, const FitOptions& opts = {}) {
  const LikelihoodModel model(counts, protocol, basis, opts.zero_counts);
  const std::size_t d2 = basis.size();
  const std::size_t d = basis.dim;
  std::vector<CMatrix> products;  // A_n^dagger A_m at index m * d2 + n
  for (std::size_t m = 0; m < d2; ++m)
    for (std::size_t n = 0; n < d2; ++n) products.push_back(basis.ops[n].adjoint() * basis.ops[m]);
  auto residual2 = [&](const CMatrix& chi) {
    CMatrix p = CMatrix::identity(d) * -1.0;
    for (std::size_t k = 0; k < products.size(); ++k) {
      const cplx c = chi.entries()[k];
      if (c != cplx{}) p += c * products[k];
    }
    const double r = p.frobenius_norm();
    return r * r;
  };

  // Seed: the PSD-repaired linear inversion rescaled to unit trace.
  MleParams seed = detail::linear_seed(counts, protocol, basis);
  {
    const double tr = detail::trace_of_params(seed, d2);
    if (tr > 0.0)
      for (auto& x : seed.t) x /= std::sqrt(tr);
  }

  double mu = opts.penalty_start;
  FitOptions stage_opts = opts;
  auto penalized = [&](const std::vector<double>& t) {
    const CMatrix chi = chi_matrix_from_params(t, d2);
    return model(chi) + mu * residual2(chi);
  };
  auto ms = detail::multi_start(penalized, seed, d2, stage_opts);
  const double seed_objective = ms.seed_objective;
  std::vector<double> x = ms.best.x;
  std::size_t iterations = ms.iterations, evaluations = ms.evaluations;
  double resid = std::sqrt(residual2(chi_matrix_from_params(x, d2)));
  int stage = 1;
  while (resid >= opts.constraint_tol && stage < opts.max_penalty_stages) {
    mu *= opts.penalty_growth;
    NelderMeadOptions nm = opts.optimizer;
    nm.initial_step = std::min(nm.initial_step, std::max(1e-3, 10.0 * resid));
    auto res = nelder_mead(penalized, x, nm);
    iterations += res.iterations;
    evaluations += res.evals;
    x = std::move(res.x);
    resid = std::sqrt(residual2(chi_matrix_from_params(x, d2)));
    ++stage;
  }
  if (resid >= opts.constraint_tol)
    throw NumericalFailure("fit_trace_preserving: penalty stages exhausted with constraint residual " +
                           std::to_string(resid));
  FitReport rep;
  rep.method = "mle-tp";
  rep.chi = ChiMatrix(basis, chi_matrix_from_params(x, d2));
  rep.min_chi_eigenvalue = rep.chi.min_eigenvalue();
  rep.objective = model(rep.chi.mat);
  rep.seed_objective = seed_objective;
  rep.iterations = iterations;
  rep.evaluations = evaluations;
  rep.restarts_used = std::max(1, opts.restarts);
  rep.constraint_residual = resid;
  rep.seed = opts.seed;
  return rep;
}

/// Post-selected reconstruction: each tomographed output is normalized to unit
/// trace before linear inversion. The result may be non-physical; the report
/// carries the raw chi and its minimum eigenvalue, while `chi` holds the
/// PSD-repaired matrix used for fidelities.
inline FitReport fit_post_selected(const CountTable& counts, const Protocol& protocol, const OperatorBasis& basis,
                                   const FitOptions& opts = {}) {
  auto outputs = tomograph_outputs(counts, protocol);
  for (std::size_t a = 0; a < outputs.size(); ++a) {
    const double tr = outputs[a].trace();
    if (!(tr > 0.0))
      throw DataError("fit_post_selected: output for input '" + counts.inputs[a] + "' has zero trace");
    outputs[a].mat *= cplx{1.0 / tr, 0.0};
  }
  const InversionMaps maps(basis, canonical_state_basis(basis.dim));
  const auto lin = linear_inversion(lambda_from_outputs(outputs, protocol.inputs, maps.states), maps.tau);
  FitReport rep;
  rep.method = "post-selected";
  rep.raw_chi = lin.chi;
  rep.min_chi_eigenvalue = lin.min_eigenvalue;
  rep.chi = lin.physical ? lin.chi : ChiMatrix(basis, clamp_psd(lin.chi.mat));
  rep.objective = LikelihoodModel(counts, protocol, basis, opts.zero_counts)(rep.chi.mat);
  rep.seed_objective = rep.objective;
  rep.constraint_residual = trace_preserving_residual(rep.chi);
  rep.seed = opts.seed;
  return rep;
}

/// Linear inversion packaged as a report (chi is left unrepaired).
inline FitReport fit_linear(const CountTable& counts, const Protocol& protocol, const OperatorBasis& basis,
                            const FitOptions& opts = {}) {
  const InversionMaps maps(basis, canonical_state_basis(basis.dim));
  const auto lin = reconstruct_linear(counts, protocol, maps);
  FitReport rep;
  rep.method = "linear";
  rep.chi = lin.chi;
  rep.min_chi_eigenvalue = lin.min_eigenvalue;
  rep.objective = LikelihoodModel(counts, protocol, basis, opts.zero_counts)(rep.chi.mat);
  rep.seed_objective = rep.objective;
  rep.seed = opts.seed;
  return rep;
}

}  // namespace ntpqpt
