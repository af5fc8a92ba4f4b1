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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ntpqpt/channels.hpp"
#include "test_support.hpp"

namespace ntpqpt {
namespace {

using testing::ppbs_reference_matrix;
using testing::random_basis;
using testing::random_chi;
using testing::random_density;

const double kR = 1.0 / std::sqrt(2.0);

ChiMatrix identity_chi() { return {pauli_basis(), CMatrix::diagonal({1, 0, 0, 0})}; }
ChiMatrix ppbs(double th, double tv) { return {pauli_basis(), ppbs_reference_matrix(th, tv)}; }
CMatrix ppbs_kraus_op(double th, double tv) { return CMatrix{{std::sqrt(th), 0}, {0, std::sqrt(tv)}}; }

TEST(OperatorBasis, Pauli) {
  const auto b = pauli_basis();
  EXPECT_NO_THROW(b.validate());
  EXPECT_EQ(b.ops[0], CMatrix::identity(2));
  EXPECT_NEAR(std::abs(hs_inner(b.ops[1], b.ops[1]) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(hs_inner(b.ops[3], b.ops[1])), 0.0, 1e-15);
}

TEST(OperatorBasis, ElementaryScaled) {
  const auto b2 = elementary_basis(2);
  EXPECT_NO_THROW(b2.validate());
  EXPECT_EQ(b2.ops[0], std::sqrt(2.0) * CMatrix::unit(2, 0, 0));
  EXPECT_EQ(b2.ops[1], std::sqrt(2.0) * CMatrix::unit(2, 0, 1));
  for (const auto& op : b2.ops) EXPECT_NEAR(hs_inner(op, op).real(), 2.0, 1e-14);
  EXPECT_EQ(elementary_basis(3).size(), 9u);
  EXPECT_NO_THROW(elementary_basis(3).validate());
  EXPECT_THROW(elementary_basis(1), RepresentationError);
}

TEST(OperatorBasis, ValidateRejectsUnnormalized) {
  auto b = pauli_basis();
  b.ops[2] = b.ops[2] * 0.5;
  EXPECT_THROW(b.validate(), RepresentationError);
  b.ops.pop_back();
  EXPECT_THROW(b.validate(), RepresentationError);
}

TEST(ApplyChannel, IdentityChannel) {
  std::mt19937_64 rng(1);
  const DensityMatrix rho{random_density(rng, 2)};
  EXPECT_LT((apply_channel(identity_chi(), rho).mat - rho.mat).max_abs(), 1e-15);
}

TEST(ApplyChannel, ProjectivePpbsOnDiagonal) {
  const DensityMatrix d = DensityMatrix::pure({kR, kR});
  const CMatrix k = ppbs_kraus_op(1.0, 0.0);
  const CMatrix expect = k * d.mat * k.adjoint();  // 0.5 |H><H|
  const auto out = apply_channel(ppbs(1.0, 0.0), d);
  EXPECT_LT((out.mat - expect).max_abs(), 1e-15);
  EXPECT_NEAR(out.mat(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(out.trace(), 0.5, 1e-15);
}

TEST(ApplyChannel, PpbsOnHorizontal) {
  const DensityMatrix h = DensityMatrix::pure({1.0, 0.0});
  for (double th : {0.0, 0.3, 1.0})
    for (double tv : {0.0, 0.6, 1.0}) {
      const auto out = apply_channel(ppbs(th, tv), h);
      EXPECT_LT((out.mat - th * h.mat).max_abs(), 1e-15);
    }
}

TEST(ApplyChannel, DimensionMismatch) {
  EXPECT_THROW(apply_channel(identity_chi(), DensityMatrix{CMatrix::identity(3)}), DimensionError);
}

TEST(ChiFromKraus, Examples) {
  const auto b = pauli_basis();
  EXPECT_LT((chi_from_kraus({2, {CMatrix::identity(2)}}, b).mat - CMatrix::diagonal({1, 0, 0, 0})).max_abs(), 1e-15);
  for (double th : {0.2, 0.7, 1.0})
    for (double tv : {0.0, 0.45, 1.0}) {
      const auto chi = chi_from_kraus({2, {ppbs_kraus_op(th, tv)}}, b);
      EXPECT_LT((chi.mat - ppbs_reference_matrix(th, tv)).max_abs(), 1e-15);
    }
  const KrausSet mix{2, {b.ops[1] * kR, b.ops[3] * kR}};
  const auto chi = chi_from_kraus(mix, b);
  EXPECT_LT((chi.mat - CMatrix::diagonal({0, 0.5, 0, 0.5})).max_abs(), 1e-15);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const DensityMatrix rho{random_density(rng, 2)};
    EXPECT_LT((apply_channel(chi, rho).mat - mix.apply(rho.mat)).max_abs(), 1e-10);
  }
}

TEST(ChiFromKraus, SingleKrausMatchesDirectConjugation) {
  std::mt19937_64 rng(3);
  for (const auto& basis : {pauli_basis(), elementary_basis(2), elementary_basis(3)}) {
    for (int t = 0; t < 10; ++t) {
      const CMatrix k = testing::random_gaussian(rng, basis.dim, basis.dim) * 0.3;
      const auto chi = chi_from_kraus({basis.dim, {k}}, basis);
      const CMatrix rho = random_density(rng, basis.dim);
      EXPECT_LT((apply_channel(chi, {rho}).mat - k * rho * k.adjoint()).max_abs(), 1e-10);
    }
  }
}

TEST(KrausFromChi, Examples) {
  const auto id = kraus_from_chi(identity_chi());
  ASSERT_EQ(id.ops.size(), 1u);
  EXPECT_LT((id.ops[0] - CMatrix::identity(2)).max_abs(), 1e-14);

  const auto k = kraus_from_chi(ppbs(0.8, 0.3));
  ASSERT_EQ(k.ops.size(), 1u);
  // Equal up to a global phase.
  const CMatrix expect = ppbs_kraus_op(0.8, 0.3);
  const cplx phase = k.ops[0](0, 0) / std::abs(k.ops[0](0, 0));
  EXPECT_LT((k.ops[0] * std::conj(phase) - expect).max_abs(), 1e-12);
}

TEST(KrausFromChi, RoundTripBothDirections) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto basis = t % 2 ? pauli_basis() : elementary_basis(2);
    const auto chi = random_chi(rng, basis, 1 + t % 4);
    const auto kraus = kraus_from_chi(chi);
    EXPECT_LE(kraus.ops.size(), 1u + t % 4);
    EXPECT_LT((chi_from_kraus(kraus, basis).mat - chi.mat).max_abs(), 1e-9);
    // Kraus -> chi -> Kraus acts identically.
    const auto k0 = testing::random_lossy_kraus(rng, 2, 1 + t % 4);
    const auto k1 = kraus_from_chi(chi_from_kraus(k0, basis));
    const CMatrix rho = random_density(rng, 2);
    EXPECT_LT((k0.apply(rho) - k1.apply(rho)).max_abs(), 1e-9);
  }
}

TEST(KrausFromChi, RejectsNonPsd) {
  EXPECT_THROW(kraus_from_chi({pauli_basis(), CMatrix::diagonal({1, -0.1, 0, 0})}), NotPsdError);
}

TEST(KrausSet, CompletenessCheck) {
  EXPECT_NO_THROW((KrausSet{2, {ppbs_kraus_op(1.0, 0.2)}}.validate()));
  EXPECT_THROW((KrausSet{2, {CMatrix::identity(2) * 1.1}}.validate()), RepresentationError);
}

TEST(ChangeBasis, PauliToPauliIsIdentity) {
  std::mt19937_64 rng(5);
  const auto chi = random_chi(rng, pauli_basis(), 3);
  EXPECT_LT((change_basis(chi, pauli_basis()).mat - chi.mat).max_abs(), 1e-14);
}

TEST(ChangeBasis, IdentityChannelToElementaryIsBellProjector) {
  const auto chi = change_basis(identity_chi(), elementary_basis(2));
  CMatrix expect(4, 4);
  expect(0, 0) = expect(0, 3) = expect(3, 0) = expect(3, 3) = 0.5;
  EXPECT_LT((chi.mat - expect).max_abs(), 1e-15);
  EXPECT_LT((chi.mat - jamiolkowski_state(identity_chi()).mat).max_abs(), 1e-15);
}

TEST(ChangeBasis, RoundTripAndChannelAction) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    const auto chi = random_chi(rng, pauli_basis(), 1 + t % 4);
    const auto target = t % 2 ? elementary_basis(2) : random_basis(rng, pauli_basis());
    const auto moved = change_basis(chi, target);
    EXPECT_LT((change_basis(moved, pauli_basis()).mat - chi.mat).max_abs(), 1e-10);
    const DensityMatrix rho{random_density(rng, 2)};
    EXPECT_LT((apply_channel(moved, rho).mat - apply_channel(chi, rho).mat).max_abs(), 1e-10);
  }
}

TEST(ChangeBasis, RejectsUnnormalizedTarget) {
  auto bad = pauli_basis();
  bad.ops[1] = bad.ops[1] * 2.0;
  EXPECT_THROW(change_basis(identity_chi(), bad), RepresentationError);
}

TEST(ProbabilityOperator, Examples) {
  const auto id = probability_operator(identity_chi());
  EXPECT_LT((id.mat - CMatrix::identity(2)).max_abs(), 1e-15);
  EXPECT_EQ(id.profile, SuccessProfile::kTracePreserving);

  const auto p = probability_operator(ppbs(0.9, 0.35));
  EXPECT_LT((p.mat - CMatrix::diagonal({0.9, 0.35})).max_abs(), 1e-15);
  EXPECT_EQ(p.profile, SuccessProfile::kStateDependent);
  EXPECT_EQ(probability_operator(ppbs(0.6, 0.6)).profile, SuccessProfile::kUniformLossy);

  const auto half = probability_operator(identity_chi().scaled(0.5));
  EXPECT_LT((half.mat - CMatrix::identity(2) * 0.5).max_abs(), 1e-15);
  EXPECT_EQ(half.profile, SuccessProfile::kUniformLossy);
}

TEST(ProbabilityOperator, ClassificationTolerance) {
  EXPECT_EQ(ProbabilityOperator(CMatrix::diagonal({1.0, 1.0 - 5e-7})).profile, SuccessProfile::kTracePreserving);
  EXPECT_EQ(ProbabilityOperator(CMatrix::diagonal({1.0, 1.0 - 5e-6})).profile, SuccessProfile::kStateDependent);
  EXPECT_EQ(ProbabilityOperator(CMatrix::diagonal({0.7, 0.7 + 5e-7})).profile, SuccessProfile::kUniformLossy);
}

TEST(ProbabilityOperator, TraceRuleAndChiTrace) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto basis = t % 3 == 0 ? elementary_basis(3) : pauli_basis();
    const auto chi = random_chi(rng, basis, 1 + t % 4);
    const auto p = probability_operator(chi);
    const DensityMatrix rho{random_density(rng, basis.dim)};
    EXPECT_NEAR(apply_channel(chi, rho).trace(), p.success_probability(rho), 1e-10);
    EXPECT_NEAR(chi.trace(), p.mat.trace().real() / static_cast<double>(basis.dim), 1e-10);
    EXPECT_LE(p.max_eigenvalue(), 1.0 + 1e-9);
    EXPECT_GE(p.spectrum.min(), -1e-9);
  }
}

TEST(Jamiolkowski, Examples) {
  const auto phi = jamiolkowski_state(identity_chi());
  CMatrix bell(4, 4);
  bell(0, 0) = bell(0, 3) = bell(3, 0) = bell(3, 3) = 0.5;
  EXPECT_LT((phi.mat - bell).max_abs(), 1e-15);

  // (I (x) K)|Phi> with K = diag(1, 0) is |00>/sqrt2.
  const auto proj = jamiolkowski_state(ppbs(1.0, 0.0));
  CMatrix expect(4, 4);
  expect(0, 0) = 0.5;
  EXPECT_LT((proj.mat - expect).max_abs(), 1e-15);
  EXPECT_NEAR(proj.trace(), 0.5, 1e-15);
}

TEST(Jamiolkowski, EqualsElementaryBasisChiUpToSubsystemOrder) {
  std::mt19937_64 rng(8);
  for (std::size_t d : {2u, 3u}) {
    const auto from = d == 2 ? pauli_basis() : elementary_basis(3);
    for (int t = 0; t < 5; ++t) {
      const auto chi = random_chi(rng, from, 1 + t % 3);
      const auto rho = jamiolkowski_state(chi);
      const auto elem = change_basis(chi, elementary_basis(d));
      // rho_E[(a,i),(b,j)] = chi_elem[(i,a),(j,b)]
      double err = 0.0;
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t b = 0; b < d; ++b)
            for (std::size_t j = 0; j < d; ++j)
              err = std::max(err, std::abs(rho.mat(a * d + i, b * d + j) - elem.mat(i * d + a, j * d + b)));
      EXPECT_LT(err, 1e-12);
      EXPECT_NEAR(rho.trace(), chi.trace(), 1e-10);
    }
  }
}

TEST(ProcessFidelity, TracePreservingExamples) {
  std::mt19937_64 rng(9);
  const auto b = pauli_basis();
  const auto unitary = chi_from_kraus({2, {testing::random_unitary(rng, 2)}}, b);
  EXPECT_NEAR(process_fidelity_tp(unitary, unitary), 1.0, 1e-12);
  const ChiMatrix flip{b, CMatrix::diagonal({0, 1, 0, 0})};
  EXPECT_NEAR(process_fidelity_tp(identity_chi(), flip), 0.0, 1e-12);
  const ChiMatrix depol{b, CMatrix::diagonal({0.25, 0.25, 0.25, 0.25})};
  EXPECT_NEAR(process_fidelity_tp(identity_chi(), depol), 0.25, 1e-12);
  EXPECT_THROW(process_fidelity_tp(identity_chi().scaled(0.5), depol), RepresentationError);
}

TEST(ProcessFidelity, GeneralizedExamples) {
  std::mt19937_64 rng(10);
  const auto chi = random_chi(rng, pauli_basis(), 2);
  for (double alpha : {1e-3, 0.1, 0.5, 1.0, 3.0}) EXPECT_NEAR(process_fidelity_ntp(chi.scaled(alpha), chi), 1.0, 1e-9);
  EXPECT_NEAR(process_fidelity_ntp(chi, chi), 1.0, 1e-9);
  // PPBS(T_H = 1, T_V = g) against the identity: chi_00 / Tr chi.
  for (int k = 0; k <= 10; ++k) {
    const double g = k / 10.0;
    const double closed = (1.0 + std::sqrt(g)) * (1.0 + std::sqrt(g)) / (2.0 * (1.0 + g));
    EXPECT_NEAR(process_fidelity_ntp(ppbs(1.0, g), identity_chi()), closed, 1e-9) << "gamma " << g;
  }
  EXPECT_THROW(process_fidelity_ntp(ChiMatrix{pauli_basis(), CMatrix(4, 4)}, chi), RepresentationError);
  EXPECT_THROW(process_fidelity_ntp(change_basis(chi, elementary_basis(2)), chi), RepresentationError);
}

TEST(ProcessFidelity, BasisIndependenceSymmetryScaling) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 30; ++t) {
    const auto a = random_chi(rng, pauli_basis(), 1 + t % 4);
    const auto b = random_chi(rng, pauli_basis(), 1 + (t / 4) % 4);
    const double f = process_fidelity_ntp(a, b);
    EXPECT_NEAR(f, process_fidelity_ntp(b, a), 1e-9);
    const auto basis = t % 2 ? elementary_basis(2) : random_basis(rng, pauli_basis());
    EXPECT_NEAR(process_fidelity_ntp(change_basis(a, basis), change_basis(b, basis)), f, 1e-9);
    EXPECT_NEAR(process_fidelity_ntp(a.scaled(0.01 + t), b.scaled(3.0 / (1 + t))), f, 1e-9);
    // Jamiolkowski-state fidelity of the normalized maps agrees.
    const auto ja = jamiolkowski_state(a).mat * (1.0 / a.trace());
    const auto jb = jamiolkowski_state(b).mat * (1.0 / b.trace());
    EXPECT_NEAR(state_fidelity(ja, jb), f, 1e-9);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0 + 1e-9);
  }
}

}  // namespace
}  // namespace ntpqpt
