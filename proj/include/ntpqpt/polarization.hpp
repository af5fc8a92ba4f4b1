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

// The six polarization states used to prepare and analyze a photonic qubit.
// H = |0>, V = |1>, D/A = (H +- V)/sqrt2, R/L = (H +- iV)/sqrt2.

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "ntpqpt/channels.hpp"
#include "ntpqpt/errors.hpp"

namespace ntpqpt::polarization {

inline constexpr std::array<std::string_view, 6> kLabels = {"H", "V", "D", "A", "R", "L"};

inline std::array<cplx, 2> ket(std::string_view label) {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i{0.0, 1.0};
  if (label == "H") return {1.0, 0.0};
  if (label == "V") return {0.0, 1.0};
  if (label == "D") return {r, r};
  if (label == "A") return {r, -r};
  if (label == "R") return {r, r * i};
  if (label == "L") return {r, -r * i};
  throw DataError("unknown polarization label '" + std::string(label) + "'");
}

inline DensityMatrix state(std::string_view label) {
  const auto k = ket(label);
  return DensityMatrix::pure(std::span<const cplx>(k));
}

inline std::vector<DensityMatrix> states(const std::vector<std::string>& labels) {
  std::vector<DensityMatrix> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(state(l));
  return out;
}

inline std::vector<std::string> all_labels() { return {kLabels.begin(), kLabels.end()}; }

}  // namespace ntpqpt::polarization
