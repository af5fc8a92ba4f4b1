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

// ntpqpt: simulate, reconstruct and analyze lossy single-qubit processes.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ntpqpt/commands.hpp"

namespace {

using namespace ntpqpt::cli;

template <class T>
void optional_option(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

void add_optimizer_flags(CLI::App* app, OptimizerFlags& f) {
  app->add_option("--restarts", f.restarts, "Optimizer starts (1 linear-inversion seed + random seeds)")
      ->capture_default_str();
  app->add_option("--max-evals", f.max_evals, "Objective evaluations per Nelder-Mead run")->capture_default_str();
  app->add_option("--diameter-tol", f.diameter_tol, "Simplex diameter at convergence")->capture_default_str();
  app->add_option("--zero-counts", f.zero_counts, "Zero-count cells: floor (weight 1) or drop")
      ->check(CLI::IsMember({"floor", "drop"}))
      ->capture_default_str();
  optional_option(app, "--constraint-tol", f.constraint_tol, "mle-tp: target ||P - I||_F");
  optional_option(app, "--penalty-start", f.penalty_start, "mle-tp: initial penalty weight");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Process tomography of non-trace-preserving qubit channels"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.set_config("--config", "", "TOML/INI file mirroring the command-line flags (flags win)");
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate six-state PPBS coincidence counts");
  optional_option(simulate, "--t-h", sim.t_h, "Transmittivity of H (default 1)");
  optional_option(simulate, "--t-v", sim.t_v, "Transmittivity of V (default 1)");
  optional_option(simulate, "--gamma", sim.gamma, "Ratio T_V/T_H in (0, 1]; T_H defaults to 1");
  simulate->add_option("--exposure", sim.exposure, "Expected pairs per input setting")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "RNG seed")->envname("NTPQPT_SEED")->capture_default_str();
  simulate->add_option("--noise", sim.noise, "poisson | none (exact means) | rounded")->capture_default_str();
  simulate->add_option("--inputs", sim.inputs, "Prepared input labels (H V D A R L)")->delimiter(',');
  simulate->add_option("--analyzers", sim.analyzers, "Analyzer labels (H V D A R L)")->delimiter(',');
  simulate->add_option("--dark-counts", sim.dark_counts, "Mean dark counts per cell")->capture_default_str();
  simulate->add_option("--efficiency", sim.efficiency, "Detection efficiency")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output CountTable JSON")->required();

  ReconstructOptions rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct chi from a CountTable");
  reconstruct->add_option("--counts", rec.counts, "CountTable JSON")->required();
  reconstruct->add_option("--method", rec.method, "linear | mle | mle-tp | post-selected")->capture_default_str();
  optional_option(reconstruct, "--reference", rec.reference, "Reference chi JSON for the fidelity");
  optional_option(reconstruct, "--reference-gamma", rec.reference_gamma, "Use the ideal PPBS chi (T_H=1, T_V=gamma)");
  reconstruct->add_option("--basis", rec.basis, "pauli | elementary-scaled")->capture_default_str();
  reconstruct->add_option("--seed", rec.seed, "RNG seed")->envname("NTPQPT_SEED")->capture_default_str();
  reconstruct->add_option("--p-policy", rec.p_policy, "Reference chi with lambda_max(P) > 1: warn | fail | clamp")
      ->capture_default_str();
  reconstruct->add_option("--out", rec.out, "Output FitReport JSON");
  add_optimizer_flags(reconstruct, rec.optimizer);

  SweepOptions sw;
  std::string gamma_list;
  auto* sweep = app.add_subcommand("sweep", "Gamma sweep: simulate and reconstruct, one CSV row per run");
  sweep->add_option("--gammas", gamma_list, "Comma list (0.1,0.5,1) or range start:stop:step")->required();
  sweep->add_option("--methods", sw.methods, "Comma list of methods")->delimiter(',')->capture_default_str();
  sweep->add_option("--repeats", sw.repeats, "Datasets per gamma")->capture_default_str();
  sweep->add_option("--exposure", sw.exposure, "Expected pairs per input setting")->capture_default_str();
  sweep->add_option("--seed", sw.seed, "Base RNG seed")->envname("NTPQPT_SEED")->capture_default_str();
  sweep->add_option("--noise", sw.noise, "poisson | none | rounded")->capture_default_str();
  sweep->add_option("--jobs", sw.jobs, "Parallel workers")->capture_default_str();
  sweep->add_option("--out", sw.out, "CSV output (stdout if omitted)");
  add_optimizer_flags(sweep, sw.optimizer);

  AnalyzePOptions ap;
  auto* analyze = app.add_subcommand("analyze-p", "Probability operator P of a chi matrix");
  analyze->add_option("--chi", ap.chi, "chi JSON")->required();
  analyze->add_option("--p-policy", ap.p_policy, "lambda_max(P) > 1: warn | fail | clamp")->capture_default_str();
  analyze->add_option("--out", ap.out, "Optional JSON copy of P");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*simulate) return guarded([&] { cmd_simulate(sim); });
  if (*reconstruct)
    return guarded([&] {
      const auto res = cmd_reconstruct(rec);
      std::cout << "method: " << res.report.method << "\nobjective: " << res.report.objective << "\n";
      if (res.fidelity) std::cout << "fidelity: " << *res.fidelity << "\n";
      if (rec.out.empty()) std::cout << ntpqpt::io::to_json(res.report).dump(2) << "\n";
    });
  if (*sweep)
    return guarded([&] {
      sw.gammas = parse_gammas(gamma_list);
      cmd_sweep(sw);
    });
  if (*analyze) return guarded([&] { cmd_analyze_p(ap); });
  return kUsage;
}
