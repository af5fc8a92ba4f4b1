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

// Forward model of a partially transmitting polarizing beam splitter (PPBS)
// probed with the six-state polarization protocol, including Poissonian
// coincidence counting.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ntpqpt/channels.hpp"
#include "ntpqpt/errors.hpp"
#include "ntpqpt/tomography.hpp"

namespace ntpqpt {

/// Transmittivities of the H and V polarizations.
struct PpbsParams {
  double t_h = 1.0;
  double t_v = 1.0;

  /// Sweep convention: T_H = 1, T_V = gamma.
  static PpbsParams from_gamma(double gamma) { return {1.0, gamma}; }

  /// Gamma = T_V / T_H.
  double gamma() const {
    if (!(t_h > 0.0)) throw RepresentationError("PpbsParams: gamma undefined for T_H = 0");
    return t_v / t_h;
  }
  void validate() const {
    if (!(t_h >= 0.0 && t_h <= 1.0) || !(t_v >= 0.0 && t_v <= 1.0))
      throw RepresentationError("PpbsParams: transmittivities must lie in [0, 1]");
  }
};

/// alpha|H> + beta|V> -> alpha sqrt(T_H)|H> + beta sqrt(T_V)|V>
inline KrausSet ppbs_kraus(const PpbsParams& p) {
  p.validate();
  return {2, {CMatrix{{std::sqrt(p.t_h), 0.0}, {0.0, std::sqrt(p.t_v)}}}};
}

/// Closed-form process matrix of the PPBS; rank one, expressed in `basis`
/// (computed in the Pauli basis and transformed if needed).
inline ChiMatrix ppbs_chi(const PpbsParams& p, const OperatorBasis& basis = pauli_basis()) {
  p.validate();
  const double sh = std::sqrt(p.t_h);
  const double sv = std::sqrt(p.t_v);
  CMatrix m(4, 4);
  m(0, 0) = (sh + sv) * (sh + sv) / 4.0;
  m(0, 3) = m(3, 0) = (p.t_h - p.t_v) / 4.0;
  m(3, 3) = (sh - sv) * (sh - sv) / 4.0;
  ChiMatrix chi(pauli_basis(), std::move(m));
  if (same_basis(basis, chi.basis)) return chi;
  return change_basis(chi, basis);
}

/// diag(T_H, T_V)
inline ProbabilityOperator ppbs_probability_operator(const PpbsParams& p) {
  p.validate();
  return ProbabilityOperator(CMatrix::diagonal({p.t_h, p.t_v}));
}

enum class NoiseModel { kNone, kRounded, kPoisson };

inline NoiseModel parse_noise(std::string_view s) {
  if (s == "none") return NoiseModel::kNone;
  if (s == "rounded") return NoiseModel::kRounded;
  if (s == "poisson") return NoiseModel::kPoisson;
  throw RepresentationError("unknown noise model '" + std::string(s) + "' (expected none|rounded|poisson)");
}

inline const char* to_string(NoiseModel n) {
  switch (n) {
    case NoiseModel::kNone: return "none";
    case NoiseModel::kRounded: return "rounded";
    case NoiseModel::kPoisson: return "poisson";
  }
  return "unknown";
}

struct SimConfig {
  PpbsParams params;
  double exposure = 1e4;  // expected pairs per input setting
  std::uint64_t seed = 1;
  NoiseModel noise = NoiseModel::kPoisson;
  // Detector hooks; zero / one reproduce the ideal detection model.
  double dark_counts = 0.0;
  double efficiency = 1.0;

  void validate() const {
    params.validate();
    if (!(exposure > 0.0)) throw RepresentationError("SimConfig: exposure must be positive");
    if (!(dark_counts >= 0.0)) throw RepresentationError("SimConfig: dark counts must be nonnegative");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw RepresentationError("SimConfig: efficiency must be in (0, 1]");
  }
};

/// Independent generator for (seed, stream) pairs.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

/// Mean counts mu_ab = N Tr[Pi_b E(rho_a)].
inline std::vector<std::vector<double>> expected_counts(const ChiMatrix& chi, const Protocol& protocol,
                                                        double exposure) {
  std::vector<std::vector<double>> mu;
  mu.reserve(protocol.inputs.size());
  for (const auto& rho : protocol.inputs) {
    const auto out = apply_channel(chi, rho);
    std::vector<double> row;
    row.reserve(protocol.analyzers.size());
    for (const auto& pi : protocol.analyzers)
      row.push_back(std::max(0.0, exposure * hs_inner(pi, out.mat).real()));
    mu.push_back(std::move(row));
  }
  return mu;
}

/// Counts for an arbitrary channel. With NoiseModel::kNone the table holds
/// the exact (non-integer) means.
inline CountTable simulate_channel_counts(const ChiMatrix& chi, const Protocol& protocol, double exposure,
                                          NoiseModel noise, std::uint64_t seed, std::uint64_t stream = 0,
                                          double dark_counts = 0.0, double efficiency = 1.0) {
  CountTable t{chi.dim(), protocol.input_labels, protocol.analyzer_labels, exposure,
               expected_counts(chi, protocol, exposure)};
  auto rng = make_rng(seed, stream);
  for (auto& row : t.counts)
    for (auto& n : row) {
      const double mu = efficiency * n + dark_counts;
      switch (noise) {
        case NoiseModel::kNone: n = mu; break;
        case NoiseModel::kRounded: n = std::round(mu); break;
        case NoiseModel::kPoisson:
          n = mu > 0.0 ? static_cast<double>(std::poisson_distribution<long long>(mu)(rng)) : 0.0;
          break;
      }
    }
  return t;
}

/// Six inputs x six analyzers through the PPBS.
inline CountTable simulate_counts(const SimConfig& cfg, const Protocol& protocol = Protocol::six_state(),
                                  std::uint64_t stream = 0) {
  cfg.validate();
  return simulate_channel_counts(ppbs_chi(cfg.params), protocol, cfg.exposure, cfg.noise, cfg.seed, stream,
                                 cfg.dark_counts, cfg.efficiency);
}

struct SweepPoint {
  double gamma = 1.0;
  CountTable table;
};

/// One table per gamma (T_H = 1, T_V = gamma), each from its own RNG stream.
inline std::vector<SweepPoint> gamma_sweep(const std::vector<double>& gammas, const SimConfig& tmpl,
                                           const Protocol& protocol = Protocol::six_state()) {
  for (double g : gammas)
    if (!(g > 0.0 && g <= 1.0)) throw RepresentationError("gamma_sweep: gamma must lie in (0, 1]");
  std::vector<SweepPoint> out;
  out.reserve(gammas.size());
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    SimConfig cfg = tmpl;
    cfg.params = PpbsParams::from_gamma(gammas[i]);
    out.push_back({gammas[i], simulate_counts(cfg, protocol, i)});
  }
  return out;
}

}  // namespace ntpqpt
