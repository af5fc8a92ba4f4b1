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

#include <algorithm>
#include <cmath>
#include <random>

#include "ntpqpt/qmath.hpp"
#include "test_support.hpp"

namespace ntpqpt {
namespace {

using testing::random_density;
using testing::random_hermitian;
using testing::random_ket;
using testing::random_unitary;

TEST(HermEig, DiagonalIsSortedAscending) {
  const auto eig = herm_eig(CMatrix::diagonal({2.0, 1.0}));
  EXPECT_DOUBLE_EQ(eig.eigenvalues[0], 1.0);
  EXPECT_DOUBLE_EQ(eig.eigenvalues[1], 2.0);
  // Eigenvectors are the permuted identity (up to phase).
  EXPECT_NEAR(std::abs(eig.eigenvectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(eig.eigenvectors(0, 1)), 1.0, 1e-15);
}

TEST(HermEig, PauliXSpectrum) {
  const auto eig = herm_eig(CMatrix{{0, 1}, {1, 0}});
  EXPECT_NEAR(eig.eigenvalues[0], -1.0, 1e-14);
  EXPECT_NEAR(eig.eigenvalues[1], 1.0, 1e-14);
  const CMatrix minus = CMatrix::projector({1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)});
  const CMatrix plus = CMatrix::projector({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  EXPECT_LT((eig.projector(0) - minus).max_abs(), 1e-14);
  EXPECT_LT((eig.projector(1) - plus).max_abs(), 1e-14);
}

TEST(HermEig, RandomReconstructionUpTo16) {
  std::mt19937_64 rng(11);
  for (std::size_t n = 1; n <= 16; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const CMatrix m = random_hermitian(rng, n);
      const auto eig = herm_eig(m);
      EXPECT_LE((eig.reconstruct() - m).frobenius_norm(), 1e-10 * m.frobenius_norm()) << "n=" << n;
      const CMatrix vv = eig.eigenvectors.adjoint() * eig.eigenvectors;
      EXPECT_LE((vv - CMatrix::identity(n)).max_abs(), 1e-10);
      for (std::size_t k = 1; k < n; ++k) EXPECT_LE(eig.eigenvalues[k - 1], eig.eigenvalues[k]);
    }
  }
}

TEST(HermEig, DegenerateSpectrumKeepsEigenspaceProjector) {
  std::mt19937_64 rng(5);
  const CMatrix u = random_unitary(rng, 4);
  const CMatrix m = u * CMatrix::diagonal({1.0, 1.0, 3.0, 3.0}) * u.adjoint();
  const auto eig = herm_eig(m.hermitian_part());
  const CMatrix low = eig.projector(0) + eig.projector(1);
  CMatrix expect(4, 4);
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<cplx> col(4);
    for (std::size_t i = 0; i < 4; ++i) col[i] = u(i, k);
    expect += CMatrix::projector(col);
  }
  EXPECT_LT((low - expect).max_abs(), 1e-10);
}

TEST(HermEig, RejectsBadInput) {
  EXPECT_THROW(herm_eig(CMatrix(2, 3)), RepresentationError);
  EXPECT_THROW(herm_eig(CMatrix{{0, 1}, {0, 0}}), RepresentationError);
}

TEST(PsdSqrt, Examples) {
  EXPECT_LT((psd_sqrt(CMatrix::identity(3)) - CMatrix::identity(3)).max_abs(), 1e-15);
  EXPECT_LT((psd_sqrt(CMatrix::diagonal({4, 1, 0, 0})) - CMatrix::diagonal({2, 1, 0, 0})).max_abs(), 1e-15);
  EXPECT_EQ(psd_sqrt(CMatrix::diagonal({1e-15, 1.0}), 1e-12), CMatrix::diagonal({0.0, 1.0}));
  const CMatrix neg = psd_sqrt(CMatrix::diagonal({-1e-15, 1.0}), 1e-12);
  EXPECT_EQ(neg(0, 0), cplx(0.0));
}

TEST(PsdSqrt, SquareReproducesClampedInput) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix rho = random_density(rng, 6, 1 + trial % 6);
    const CMatrix s = psd_sqrt(rho);
    EXPECT_LE((s * s - rho).frobenius_norm(), 1e-9 * rho.frobenius_norm());
  }
}

TEST(PsdSqrt, NegativeEigenvalueIsReported) {
  try {
    psd_sqrt(CMatrix::diagonal({-0.25, 1.0}));
    FAIL() << "expected NotPsdError";
  } catch (const NotPsdError& e) {
    EXPECT_DOUBLE_EQ(e.eigenvalue(), -0.25);
  }
}

TEST(StateFidelity, Examples) {
  const double r = 1.0 / std::sqrt(2.0);
  const CMatrix h = CMatrix::projector({1.0, 0.0});
  const CMatrix v = CMatrix::projector({0.0, 1.0});
  const CMatrix d = CMatrix::projector({r, r});
  EXPECT_NEAR(state_fidelity(h, h), 1.0, 1e-12);
  EXPECT_NEAR(state_fidelity(h, v), 0.0, 1e-12);
  // |<H|D>|^2
  EXPECT_NEAR(state_fidelity(h, d), std::norm(r), 1e-12);
  EXPECT_THROW(state_fidelity(h, CMatrix::identity(3)), DimensionError);
  EXPECT_THROW(state_fidelity(CMatrix::diagonal({-0.5, 1.5}), h), NotPsdError);
}

TEST(StateFidelity, PureStatesMatchOverlap) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_ket(rng, 3);
    const auto b = random_ket(rng, 3);
    cplx overlap = 0.0;
    for (std::size_t i = 0; i < 3; ++i) overlap += std::conj(a[i]) * b[i];
    EXPECT_NEAR(state_fidelity(CMatrix::projector(a), CMatrix::projector(b)), std::norm(overlap), 1e-9);
  }
}

TEST(StateFidelity, SymmetricUnitarilyInvariantAndBounded) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const CMatrix a = random_density(rng, n, 1 + trial % n);
    const CMatrix b = random_density(rng, n);
    const double fab = state_fidelity(a, b);
    EXPECT_NEAR(fab, state_fidelity(b, a), 1e-9);
    const CMatrix u = random_unitary(rng, n);
    const CMatrix ua = (u * a * u.adjoint()).hermitian_part();
    const CMatrix ub = (u * b * u.adjoint()).hermitian_part();
    EXPECT_NEAR(state_fidelity(ua, ub), fab, 1e-9);
    EXPECT_GE(fab, 0.0);
    EXPECT_LE(fab, 1.0 + 1e-9);
  }
}

TEST(SingularValues, MatchEigenvaluesOfGram) {
  std::mt19937_64 rng(37);
  for (std::size_t rows : {3u, 5u}) {
    const CMatrix a = testing::random_gaussian(rng, rows, 4);
    auto sv = singular_values(a);
    std::sort(sv.begin(), sv.end());
    const auto eig = herm_eig((a.adjoint() * a).hermitian_part());
    ASSERT_EQ(sv.size(), std::min<std::size_t>(rows, 4));
    const std::size_t skip = eig.eigenvalues.size() - sv.size();  // zero eigenvalues of a wide matrix
    for (std::size_t k = 0; k < sv.size(); ++k) EXPECT_NEAR(sv[k] * sv[k], eig.eigenvalues[k + skip], 1e-10);
  }
}

TEST(Pinv, PenroseAxioms) {
  std::mt19937_64 rng(29);
  const CMatrix a = testing::random_gaussian(rng, 6, 4);
  const auto p = pinv(a);
  EXPECT_EQ(p.rank, 4u);
  EXPECT_LT((a * p.inverse * a - a).max_abs(), 1e-10);
  EXPECT_LT((p.inverse * a - CMatrix::identity(4)).max_abs(), 1e-10);
  // Rank-deficient input reports its rank.
  CMatrix b(3, 3);
  b(0, 0) = 1.0;
  b(1, 1) = 2.0;
  EXPECT_EQ(pinv(b).rank, 2u);
}

TEST(Cholesky, SemidefiniteFactor) {
  std::mt19937_64 rng(31);
  for (std::size_t rank = 1; rank <= 4; ++rank) {
    const CMatrix m = random_density(rng, 4, rank);
    const CMatrix l = cholesky_semidefinite(m);
    EXPECT_LT((l * l.adjoint() - m).max_abs(), 1e-7) << "rank " << rank;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) EXPECT_EQ(l(i, j), cplx(0.0));
  }
}

}  // namespace
}  // namespace ntpqpt
