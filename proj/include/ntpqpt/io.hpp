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

// JSON interchange for chi matrices, probability operators, count tables and
// fit reports. Complex entries are [re, im] pairs in row-major order; every
// document carries "schema": 1 and a "kind" tag.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ntpqpt/channels.hpp"
#include "ntpqpt/errors.hpp"
#include "ntpqpt/mle.hpp"
#include "ntpqpt/tomography.hpp"

namespace ntpqpt::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline json to_json(const CMatrix& m) {
  json entries = json::array();
  for (const auto& z : m.entries()) entries.push_back({z.real(), z.imag()});
  return entries;
}

inline CMatrix matrix_from_json(const json& entries, std::size_t rows, std::size_t cols) {
  if (!entries.is_array() || entries.size() != rows * cols)
    throw DataError("matrix entries: expected " + std::to_string(rows * cols) + " [re, im] pairs");
  std::vector<cplx> v;
  v.reserve(entries.size());
  for (const auto& e : entries) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw DataError("matrix entries: each entry must be a [re, im] pair");
    v.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return CMatrix(rows, cols, std::move(v));
}

namespace detail {

inline void require_kind(const json& j, const char* kind) {
  if (!j.is_object()) throw DataError(std::string("expected a JSON object of kind '") + kind + "'");
  if (j.value("schema", 0) != kSchemaVersion) throw DataError("unsupported or missing schema version");
  if (j.value("kind", std::string{}) != kind)
    throw DataError(std::string("expected kind '") + kind + "', got '" + j.value("kind", std::string{}) + "'");
}

template <class T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw DataError(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("field '") + name + "': " + e.what());
  }
}

}  // namespace detail

inline json to_json(const OperatorBasis& b) {
  json j = {{"label", b.label}, {"dim", b.dim}};
  if (b.label != "pauli" && b.label != "elementary-scaled") {
    json ops = json::array();
    for (const auto& op : b.ops) ops.push_back(to_json(op));
    j["ops"] = std::move(ops);
  }
  return j;
}

inline OperatorBasis basis_from_label(const std::string& label, std::size_t dim, const json* ops = nullptr) {
  if (label == "pauli") {
    if (dim != 2) throw DataError("pauli basis requires dim 2");
    return pauli_basis();
  }
  if (label == "elementary-scaled") return elementary_basis(dim);
  if (ops == nullptr || !ops->is_array()) throw DataError("custom basis '" + label + "' needs an 'ops' array");
  OperatorBasis b{dim, {}, label};
  for (const auto& op : *ops) b.ops.push_back(matrix_from_json(op, dim, dim));
  try {
    b.validate();
  } catch (const RepresentationError& e) {
    throw DataError(e.what());
  }
  return b;
}

inline json to_json(const ChiMatrix& chi) {
  return {{"schema", kSchemaVersion}, {"kind", "chi"},           {"basis", chi.basis.label},
          {"dim", chi.dim()},         {"basis_def", to_json(chi.basis)}, {"entries", to_json(chi.mat)}};
}

inline ChiMatrix chi_from_json(const json& j) {
  detail::require_kind(j, "chi");
  const auto dim = detail::field<std::size_t>(j, "dim");
  const auto label = detail::field<std::string>(j, "basis");
  const json* ops = nullptr;
  if (j.contains("basis_def") && j["basis_def"].contains("ops")) ops = &j["basis_def"]["ops"];
  OperatorBasis basis = basis_from_label(label, dim, ops);
  const std::size_t n = basis.size();
  try {
    return ChiMatrix(std::move(basis), matrix_from_json(j.at("entries"), n, n));
  } catch (const RepresentationError& e) {
    throw DataError(std::string("chi: ") + e.what());
  }
}

inline json to_json(const ProbabilityOperator& p) {
  json projectors = json::array();
  for (std::size_t k = 0; k < p.spectrum.eigenvalues.size(); ++k) projectors.push_back(to_json(p.spectrum.projector(k)));
  return {{"schema", kSchemaVersion},
          {"kind", "probability-operator"},
          {"dim", p.mat.rows()},
          {"entries", to_json(p.mat)},
          {"eigenvalues", p.spectrum.eigenvalues},
          {"eigenprojectors", std::move(projectors)},
          {"profile", to_string(p.profile)}};
}

inline ProbabilityOperator probability_operator_from_json(const json& j) {
  detail::require_kind(j, "probability-operator");
  const auto dim = detail::field<std::size_t>(j, "dim");
  return ProbabilityOperator(matrix_from_json(j.at("entries"), dim, dim));
}

inline json to_json(const CountTable& t) {
  json rows = json::array();
  for (const auto& r : t.counts) {
    json row = json::array();
    for (double n : r) {
      if (n == std::floor(n) && std::abs(n) < 9e15)
        row.push_back(static_cast<long long>(n));
      else
        row.push_back(n);
    }
    rows.push_back(std::move(row));
  }
  return {{"schema", kSchemaVersion}, {"kind", "counts"},        {"dim", t.dim},
          {"inputs", t.inputs},       {"projectors", t.projectors}, {"exposure", t.exposure},
          {"counts", std::move(rows)}};
}

inline CountTable count_table_from_json(const json& j) {
  detail::require_kind(j, "counts");
  CountTable t;
  t.dim = detail::field<std::size_t>(j, "dim");
  t.inputs = detail::field<std::vector<std::string>>(j, "inputs");
  t.projectors = detail::field<std::vector<std::string>>(j, "projectors");
  t.exposure = detail::field<double>(j, "exposure");
  t.counts = detail::field<std::vector<std::vector<double>>>(j, "counts");
  t.validate();
  return t;
}

inline json to_json(const FitReport& r) {
  const auto p = probability_operator(r.chi);
  json j = {{"schema", kSchemaVersion},
            {"kind", "fit-report"},
            {"method", r.method},
            {"chi", to_json(r.chi)},
            {"probability_operator", to_json(p)},
            {"objective", r.objective},
            {"seed_objective", r.seed_objective},
            {"iterations", r.iterations},
            {"evaluations", r.evaluations},
            {"restarts_used", r.restarts_used},
            {"constraint_residual", r.constraint_residual},
            {"normalization_scale", r.normalization_scale},
            {"min_chi_eigenvalue", r.min_chi_eigenvalue},
            {"seed", r.seed}};
  if (r.raw_chi) j["raw_chi"] = to_json(*r.raw_chi);
  return j;
}

inline FitReport fit_report_from_json(const json& j) {
  detail::require_kind(j, "fit-report");
  FitReport r;
  r.method = detail::field<std::string>(j, "method");
  r.chi = chi_from_json(j.at("chi"));
  r.objective = detail::field<double>(j, "objective");
  r.seed_objective = detail::field<double>(j, "seed_objective");
  r.iterations = detail::field<std::size_t>(j, "iterations");
  r.evaluations = detail::field<std::size_t>(j, "evaluations");
  r.restarts_used = detail::field<int>(j, "restarts_used");
  r.constraint_residual = detail::field<double>(j, "constraint_residual");
  r.normalization_scale = detail::field<double>(j, "normalization_scale");
  r.min_chi_eigenvalue = detail::field<double>(j, "min_chi_eigenvalue");
  r.seed = detail::field<std::uint64_t>(j, "seed");
  if (j.contains("raw_chi")) r.raw_chi = chi_from_json(j["raw_chi"]);
  return r;
}

/// Chi from either a chi file or the "chi" member of a fit report.
inline ChiMatrix chi_from_file_json(const json& j) {
  if (j.is_object() && j.contains("kind") && j["kind"] == "fit-report") return chi_from_json(j.at("chi"));
  return chi_from_json(j);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace ntpqpt::io
