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

// Batch commands behind the ntpqpt command-line tool: simulate, reconstruct,
// sweep and analyze-p. Each command takes a plain options struct so it can be
// driven from tests as well as from the argument parser in tools/.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ntpqpt/channels.hpp"
#include "ntpqpt/errors.hpp"
#include "ntpqpt/io.hpp"
#include "ntpqpt/mle.hpp"
#include "ntpqpt/simulator.hpp"
#include "ntpqpt/tomography.hpp"

namespace ntpqpt::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kNumericalFailure = 4 };

/// Invalid flag values or combinations.
class UsageError : public Error {
 public:
  using Error::Error;
};

using json = io::json;

/// Provenance record written next to every output as <output>.manifest.json.
/// Output files reference it by name; the timestamp lives only here so that
/// data files stay byte-identical across reruns.
struct RunManifest {
  std::string command;
  json config = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string tool_version = kToolVersion;
  std::string timestamp;

  json to_json() const {
    return {{"schema", io::kSchemaVersion}, {"kind", "manifest"},  {"command", command},
            {"config", config},             {"seed", seed},        {"inputs", inputs},
            {"outputs", outputs},           {"tool_version", tool_version}, {"timestamp", timestamp}};
  }
};

inline std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

inline std::string manifest_ref_for(const std::string& output) {
  return std::filesystem::path(manifest_path_for(output)).filename().string();
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline void write_manifest(std::string command, json config, std::uint64_t seed, std::vector<std::string> inputs,
                           std::vector<std::string> outputs) {
  RunManifest m;
  m.command = std::move(command);
  m.config = std::move(config);
  m.seed = seed;
  m.inputs = std::move(inputs);
  m.outputs = std::move(outputs);
  m.timestamp = utc_timestamp();
  for (const auto& out : m.outputs) io::write_json_file(manifest_path_for(out), m.to_json());
}

/// Policy for loaded chi matrices whose P has an eigenvalue above one.
enum class PPolicy { kWarn, kFail, kClamp };

inline PPolicy parse_p_policy(const std::string& s) {
  if (s == "warn") return PPolicy::kWarn;
  if (s == "fail") return PPolicy::kFail;
  if (s == "clamp") return PPolicy::kClamp;
  throw UsageError("--p-policy must be warn|fail|clamp");
}

inline ChiMatrix apply_p_policy(ChiMatrix chi, PPolicy policy, std::ostream& err) {
  constexpr double kTol = 1e-9;
  const double lmax = probability_operator(chi).max_eigenvalue();
  if (lmax <= 1.0 + kTol) return chi;
  std::ostringstream msg;
  msg << "largest eigenvalue of P is " << std::setprecision(17) << lmax << " > 1";
  switch (policy) {
    case PPolicy::kFail: throw DataError(msg.str());
    case PPolicy::kWarn: err << "warning: " << msg.str() << "\n"; return chi;
    case PPolicy::kClamp:
      err << "warning: " << msg.str() << "; rescaling so that it equals 1\n";
      return normalize_max_p(chi).first;
  }
  return chi;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::optional<double> t_h;
  std::optional<double> t_v;
  std::optional<double> gamma;
  double exposure = 1e4;
  std::uint64_t seed = 1;
  std::string noise = "poisson";
  std::vector<std::string> inputs = polarization::all_labels();
  std::vector<std::string> analyzers = polarization::all_labels();
  double dark_counts = 0.0;
  double efficiency = 1.0;
  std::string out;
};

inline SimConfig sim_config(const SimulateOptions& o) {
  SimConfig cfg;
  if (o.gamma) {
    if (o.t_v) throw UsageError("--gamma and --t-v are mutually exclusive");
    if (!(*o.gamma > 0.0 && *o.gamma <= 1.0)) throw UsageError("--gamma must lie in (0, 1]");
    const double th = o.t_h.value_or(1.0);
    cfg.params = {th, *o.gamma * th};
  } else {
    cfg.params = {o.t_h.value_or(1.0), o.t_v.value_or(1.0)};
  }
  if (!(cfg.params.t_h >= 0.0 && cfg.params.t_h <= 1.0) || !(cfg.params.t_v >= 0.0 && cfg.params.t_v <= 1.0))
    throw UsageError("transmittivities must lie in [0, 1]");
  if (!(o.exposure > 0.0)) throw UsageError("--exposure must be positive");
  if (!(o.dark_counts >= 0.0)) throw UsageError("--dark-counts must be nonnegative");
  if (!(o.efficiency > 0.0 && o.efficiency <= 1.0)) throw UsageError("--efficiency must lie in (0, 1]");
  try {
    cfg.noise = parse_noise(o.noise);
  } catch (const RepresentationError& e) {
    throw UsageError(e.what());
  }
  cfg.exposure = o.exposure;
  cfg.seed = o.seed;
  cfg.dark_counts = o.dark_counts;
  cfg.efficiency = o.efficiency;
  return cfg;
}

inline CountTable cmd_simulate(const SimulateOptions& o) {
  const SimConfig cfg = sim_config(o);
  Protocol protocol;
  try {
    protocol = Protocol::polarization(o.inputs, o.analyzers);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  const CountTable table = simulate_counts(cfg, protocol);
  if (!o.out.empty()) {
    json j = io::to_json(table);
    j["manifest"] = manifest_ref_for(o.out);
    io::write_json_file(o.out, j);
    write_manifest("simulate",
                  {{"t_h", cfg.params.t_h},
                   {"t_v", cfg.params.t_v},
                   {"exposure", cfg.exposure},
                   {"noise", to_string(cfg.noise)},
                   {"inputs", o.inputs},
                   {"analyzers", o.analyzers},
                   {"dark_counts", cfg.dark_counts},
                   {"efficiency", cfg.efficiency}},
                  cfg.seed,
                  {},
                  {o.out});
  }
  return table;
}

// ---------------------------------------------------------------------------
// reconstruct

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"linear", "mle", "mle-tp", "post-selected"};
  return m;
}

struct OptimizerFlags {
  int restarts = 4;
  std::size_t max_evals = 50000;
  double diameter_tol = 1e-9;
  std::string zero_counts = "floor";  // floor | drop
  std::optional<double> constraint_tol;
  std::optional<double> penalty_start;
};

inline FitOptions fit_options(const OptimizerFlags& f, std::uint64_t seed) {
  if (f.restarts < 1) throw UsageError("--restarts must be at least 1");
  if (f.max_evals < 1) throw UsageError("--max-evals must be positive");
  if (!(f.diameter_tol > 0.0)) throw UsageError("--diameter-tol must be positive");
  FitOptions o;
  o.seed = seed;
  o.restarts = f.restarts;
  o.optimizer.max_evals = f.max_evals;
  o.optimizer.diameter_tol = f.diameter_tol;
  if (f.zero_counts == "floor")
    o.zero_counts = ZeroCountPolicy::kFloorAtOne;
  else if (f.zero_counts == "drop")
    o.zero_counts = ZeroCountPolicy::kDropZero;
  else
    throw UsageError("--zero-counts must be floor|drop");
  if (f.constraint_tol) {
    if (!(*f.constraint_tol > 0.0)) throw UsageError("--constraint-tol must be positive");
    o.constraint_tol = *f.constraint_tol;
  }
  if (f.penalty_start) {
    if (!(*f.penalty_start > 0.0)) throw UsageError("--penalty-start must be positive");
    o.penalty_start = *f.penalty_start;
  }
  return o;
}

inline json fit_options_json(const FitOptions& o) {
  return {{"restarts", o.restarts},
          {"max_evals", o.optimizer.max_evals},
          {"diameter_tol", o.optimizer.diameter_tol},
          {"zero_counts", o.zero_counts == ZeroCountPolicy::kFloorAtOne ? "floor" : "drop"},
          {"constraint_tol", o.constraint_tol},
          {"penalty_start", o.penalty_start}};
}

inline FitReport run_method(const std::string& method, const CountTable& counts, const Protocol& protocol,
                            const OperatorBasis& basis, const FitOptions& opts) {
  if (method == "linear") return fit_linear(counts, protocol, basis, opts);
  if (method == "mle") return fit_unconstrained(counts, protocol, basis, opts);
  if (method == "mle-tp") return fit_trace_preserving(counts, protocol, basis, opts);
  if (method == "post-selected") return fit_post_selected(counts, protocol, basis, opts);
  throw UsageError("unknown method '" + method + "' (expected linear|mle|mle-tp|post-selected)");
}

/// Fidelity of a reconstruction against a reference; non-PSD chi (linear
/// inversion) is clamped first.
inline double fidelity_vs(const ChiMatrix& chi, const ChiMatrix& reference) {
  const ChiMatrix ref = same_basis(chi.basis, reference.basis) ? reference : change_basis(reference, chi.basis);
  const ChiMatrix psd = chi.min_eigenvalue() < 0.0 ? ChiMatrix(chi.basis, clamp_psd(chi.mat)) : chi;
  return process_fidelity_ntp(psd, ref);
}

struct ReconstructOptions {
  std::string counts;
  std::string method = "mle";
  std::optional<std::string> reference;
  std::optional<double> reference_gamma;
  std::string basis = "pauli";
  std::uint64_t seed = 1;
  OptimizerFlags optimizer;
  std::string p_policy = "warn";
  std::string out;
};

struct ReconstructResult {
  FitReport report;
  std::optional<double> fidelity;
};

inline ReconstructResult cmd_reconstruct(const ReconstructOptions& o, std::ostream& err = std::cerr) {
  if (o.counts.empty()) throw UsageError("--counts is required");
  bool known = false;
  for (const auto& m : known_methods()) known = known || m == o.method;
  if (!known) throw UsageError("unknown method '" + o.method + "' (expected linear|mle|mle-tp|post-selected)");
  if (o.method != "mle-tp" && (o.optimizer.constraint_tol || o.optimizer.penalty_start))
    throw UsageError("--constraint-tol/--penalty-start only apply to --method mle-tp");
  if (o.reference && o.reference_gamma) throw UsageError("--reference and --reference-gamma are mutually exclusive");
  if (o.reference_gamma && !(*o.reference_gamma > 0.0 && *o.reference_gamma <= 1.0))
    throw UsageError("--reference-gamma must lie in (0, 1]");
  const FitOptions opts = fit_options(o.optimizer, o.seed);
  const PPolicy policy = parse_p_policy(o.p_policy);

  const CountTable counts = io::count_table_from_json(io::read_json_file(o.counts));
  OperatorBasis basis;
  try {
    basis = io::basis_from_label(o.basis, counts.dim);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  const Protocol protocol = Protocol::for_table(counts);

  ReconstructResult res{run_method(o.method, counts, protocol, basis, opts), std::nullopt};
  std::vector<std::string> inputs{o.counts};
  if (o.reference) {
    inputs.push_back(*o.reference);
    const ChiMatrix ref = apply_p_policy(io::chi_from_file_json(io::read_json_file(*o.reference)), policy, err);
    res.fidelity = fidelity_vs(res.report.chi, ref);
  } else if (o.reference_gamma) {
    res.fidelity = fidelity_vs(res.report.chi, ppbs_chi(PpbsParams::from_gamma(*o.reference_gamma)));
  }

  if (!o.out.empty()) {
    json j = io::to_json(res.report);
    if (res.fidelity) j["fidelity"] = *res.fidelity;
    j["counts_file"] = o.counts;
    j["manifest"] = manifest_ref_for(o.out);
    io::write_json_file(o.out, j);
    json cfg = {{"method", o.method}, {"basis", o.basis}, {"optimizer", fit_options_json(opts)}, {"p_policy", o.p_policy}};
    if (o.reference) cfg["reference"] = *o.reference;
    if (o.reference_gamma) cfg["reference_gamma"] = *o.reference_gamma;
    write_manifest("reconstruct", std::move(cfg), o.seed, std::move(inputs), {o.out});
  }
  return res;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::vector<double> gammas;
  std::vector<std::string> methods{"mle"};
  int repeats = 1;
  double exposure = 1e4;
  std::uint64_t seed = 1;
  std::string noise = "poisson";
  OptimizerFlags optimizer;
  unsigned jobs = 1;
  std::string out;  // empty: no file
};

struct SweepRow {
  double gamma = 0.0;
  std::string method;
  double fidelity = 0.0;
  double p_eig_1 = 0.0;  // largest eigenvalue of P
  double p_eig_2 = 0.0;  // second largest
  double objective = 0.0;
  double min_chi_eigenvalue = 0.0;
  std::uint64_t seed = 0;
  int repeat = 0;
};

/// Seed of the dataset for (gamma index, repeat); shared by every method.
inline std::uint64_t derived_seed(std::uint64_t seed, std::size_t gamma_index, int repeat) {
  auto rng = make_rng(seed, (static_cast<std::uint64_t>(gamma_index) << 20) | static_cast<std::uint64_t>(repeat));
  return rng();
}

/// Parses "0.1,0.2,0.5" or a range "start:stop:step" (inclusive).
inline std::vector<double> parse_gammas(const std::string& text) {
  std::vector<double> out;
  auto to_double = [](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError("cannot parse gamma value '" + s + "'");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("gamma range must be start:stop:step");
    const double a = to_double(parts[0]), b = to_double(parts[1]), h = to_double(parts[2]);
    if (!(h > 0.0) || b < a) throw UsageError("gamma range needs step > 0 and stop >= start");
    const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(std::round((a + static_cast<double>(k) * h) * 1e12) / 1e12);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');)
      if (!p.empty()) out.push_back(to_double(p));
  }
  return out;
}

inline std::vector<SweepRow> run_sweep(const SweepOptions& o) {
  if (o.methods.empty()) throw UsageError("sweep needs at least one method");
  for (const auto& m : o.methods) {
    bool known = false;
    for (const auto& k : known_methods()) known = known || k == m;
    if (!known) throw UsageError("unknown method '" + m + "'");
  }
  if (o.gammas.empty()) throw UsageError("sweep needs at least one gamma");
  for (double g : o.gammas)
    if (!(g > 0.0 && g <= 1.0)) throw UsageError("gamma values must lie in (0, 1]");
  if (o.repeats < 1) throw UsageError("--repeats must be at least 1");
  if (!(o.exposure > 0.0)) throw UsageError("--exposure must be positive");
  NoiseModel noise;
  try {
    noise = parse_noise(o.noise);
  } catch (const RepresentationError& e) {
    throw UsageError(e.what());
  }
  const FitOptions base_opts = fit_options(o.optimizer, o.seed);
  const OperatorBasis basis = pauli_basis();
  const Protocol protocol = Protocol::six_state();

  struct Task {
    std::size_t gamma_index;
    int repeat;
  };
  std::vector<Task> tasks;
  for (std::size_t g = 0; g < o.gammas.size(); ++g)
    for (int r = 0; r < o.repeats; ++r) tasks.push_back({g, r});

  auto run_task = [&](const Task& t) {
    const double gamma = o.gammas[t.gamma_index];
    const std::uint64_t seed = derived_seed(o.seed, t.gamma_index, t.repeat);
    SimConfig cfg;
    cfg.params = PpbsParams::from_gamma(gamma);
    cfg.exposure = o.exposure;
    cfg.seed = seed;
    cfg.noise = noise;
    const CountTable table = simulate_counts(cfg, protocol);
    const ChiMatrix reference = ppbs_chi(cfg.params, basis);
    std::vector<SweepRow> rows;
    for (const auto& method : o.methods) {
      FitOptions opts = base_opts;
      opts.seed = seed;
      const FitReport rep = run_method(method, table, protocol, basis, opts);
      const auto p = probability_operator(rep.chi);
      const auto& ev = p.spectrum.eigenvalues;
      rows.push_back({gamma, method, fidelity_vs(rep.chi, reference), ev[ev.size() - 1],
                      ev.size() > 1 ? ev[ev.size() - 2] : ev[0], rep.objective, rep.min_chi_eigenvalue, seed,
                      t.repeat});
    }
    return rows;
  };

  // Results land in task order regardless of completion order.
  std::vector<std::vector<SweepRow>> per_task(tasks.size());
  const std::size_t jobs = std::max<std::size_t>(1, o.jobs);
  for (std::size_t start = 0; start < tasks.size(); start += jobs) {
    std::vector<std::future<std::vector<SweepRow>>> futures;
    const std::size_t stop = std::min(tasks.size(), start + jobs);
    for (std::size_t i = start; i < stop; ++i)
      futures.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_task, tasks[i]));
    for (std::size_t i = start; i < stop; ++i) per_task[i] = futures[i - start].get();
  }

  // Row order: gamma, then method, then repeat.
  std::vector<SweepRow> rows;
  for (std::size_t g = 0; g < o.gammas.size(); ++g)
    for (std::size_t m = 0; m < o.methods.size(); ++m)
      for (int r = 0; r < o.repeats; ++r) rows.push_back(per_task[g * static_cast<std::size_t>(o.repeats) + static_cast<std::size_t>(r)][m]);
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& manifest_ref = {}) {
  std::ostringstream os;
  os << std::setprecision(17);
  if (!manifest_ref.empty()) os << "# manifest: " << manifest_ref << "\n";
  os << "gamma,method,fidelity,p_eig_1,p_eig_2,objective,min_chi_eigenvalue,seed\n";
  for (const auto& r : rows)
    os << r.gamma << ',' << r.method << ',' << r.fidelity << ',' << r.p_eig_1 << ',' << r.p_eig_2 << ','
       << r.objective << ',' << r.min_chi_eigenvalue << ',' << r.seed << '\n';
  return os.str();
}

inline std::vector<SweepRow> cmd_sweep(const SweepOptions& o, std::ostream& out = std::cout) {
  auto rows = run_sweep(o);
  if (o.out.empty()) {
    out << sweep_csv(rows);
  } else {
    io::write_text_file(o.out, sweep_csv(rows, manifest_ref_for(o.out)));
    const FitOptions opts = fit_options(o.optimizer, o.seed);
    write_manifest("sweep",
                    {{"gammas", o.gammas},
                     {"methods", o.methods},
                     {"repeats", o.repeats},
                     {"exposure", o.exposure},
                     {"noise", o.noise},
                     {"optimizer", fit_options_json(opts)}},
                    o.seed,
                    {},
                    {o.out});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// analyze-p

struct AnalyzePOptions {
  std::string chi;
  std::string p_policy = "warn";
  std::string out;  // optional JSON copy of P
};

inline void print_matrix(std::ostream& os, const CMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << "  ";
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const cplx z = m(i, j);
      os << std::showpos << std::fixed << std::setprecision(6) << z.real() << z.imag() << "i"
         << std::noshowpos << (j + 1 < m.cols() ? "  " : "");
    }
    os << "\n";
  }
  os.unsetf(std::ios::floatfield);
}

inline ProbabilityOperator cmd_analyze_p(const AnalyzePOptions& o, std::ostream& out = std::cout,
                                         std::ostream& err = std::cerr) {
  if (o.chi.empty()) throw UsageError("--chi is required");
  const PPolicy policy = parse_p_policy(o.p_policy);
  const ChiMatrix chi = apply_p_policy(io::chi_from_file_json(io::read_json_file(o.chi)), policy, err);
  const auto p = probability_operator(chi);
  const double d = static_cast<double>(chi.dim());
  const double tr_chi = chi.trace();
  const double tr_p_over_d = p.mat.trace().real() / d;

  out << "P =\n";
  print_matrix(out, p.mat);
  out << std::setprecision(10);
  out << "eigenvalues:";
  for (auto it = p.spectrum.eigenvalues.rbegin(); it != p.spectrum.eigenvalues.rend(); ++it) out << ' ' << *it;
  out << "\n";
  for (std::size_t k = p.spectrum.eigenvalues.size(); k-- > 0;) {
    out << "eigenprojector for p = " << p.spectrum.eigenvalues[k] << ":\n";
    print_matrix(out, p.spectrum.projector(k));
  }
  out << std::setprecision(10);
  out << "classification: " << to_string(p.profile) << "\n";
  if (p.profile == SuccessProfile::kUniformLossy) out << "p = " << p.spectrum.eigenvalues.back() << "\n";
  const bool consistent = std::abs(tr_chi - tr_p_over_d) <= 1e-9 * std::max(1.0, std::abs(tr_chi));
  out << "Tr[chi] = " << tr_chi << ", Tr[P]/d = " << tr_p_over_d << " (" << (consistent ? "consistent" : "INCONSISTENT")
      << ")\n";

  if (!o.out.empty()) {
    json j = io::to_json(p);
    j["chi_file"] = o.chi;
    j["trace_chi"] = tr_chi;
    j["trace_p_over_d"] = tr_p_over_d;
    j["manifest"] = manifest_ref_for(o.out);
    io::write_json_file(o.out, j);
    write_manifest("analyze-p", {{"p_policy", o.p_policy}}, 0, {o.chi}, {o.out});
  }
  return p;
}

// ---------------------------------------------------------------------------

/// Runs a command body and converts exceptions into the stable exit codes:
/// 2 usage, 3 data, 4 numerical failure.
template <class F>
int guarded(F&& body, std::ostream& err = std::cerr) {
  try {
    body();
    return kOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const SingularSystemError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const NotPsdError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const RepresentationError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace ntpqpt::cli
