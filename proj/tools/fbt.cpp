// Copyright 2026 The FBT Authors
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
// fbt: simulate datasets, run online fits, benchmark, score and project.
// Reports go to stdout, diagnostics (JSON lines) to stderr.
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fbt/analysis.hpp"
#include "fbt/bayes.hpp"
#include "fbt/config.hpp"
#include "fbt/error.hpp"
#include "fbt/physicality.hpp"
#include "fbt/rb.hpp"
#include "fbt/records.hpp"
#include "fbt/simulator.hpp"
#include "json.hpp"

namespace {

using namespace fbt;
using ojson = nlohmann::ordered_json;

ojson ptm_json(const PauliTransferMatrix& ptm) { return ojson::parse(ptm_to_json(ptm)); }

void write_truth(const std::string& path, const GateSet& truth, const DatasetHeader& h) {
  ojson j;
  j["version"] = h.version;
  j["seed"] = h.seed;
  j["config_hash"] = h.config_hash;
  ojson gates = ojson::array();
  for (const NoisyGate& g : truth.gates) {
    gates.push_back({{"name", g.name}, {"noise", ptm_json(g.noise)}});
  }
  j["gates"] = std::move(gates);
  j["meas"] = ptm_json(truth.meas_noise);
  j["prep"] = ptm_json(truth.prep_noise);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

// Records are checked against the gate set before fitting so errors can name
// the file line.
void check_records(const Dataset& ds, const GateSet& gs) {
  const int offset = ds.header ? 2 : 1;
  for (size_t i = 0; i < ds.records.size(); ++i) {
    const std::string where = "line " + std::to_string(i + offset) + ": ";
    try {
      ds.records[i].validate(gs.povm.num_outcomes());
      validate_sequence(ds.records[i].sequence, gs.num_gates());
    } catch (const Error& e) {
      throw DataError(where + e.what());
    }
  }
}

struct FitOutcome {
  RunResult run;
  FitReport report;
};

FitOutcome run_fit(const FitConfig& cfg, const std::vector<ExperimentRecord>& records) {
  GaussianBelief prior = default_prior(cfg.gateset, cfg.prior);
  if (cfg.rb_prior) {
    RbPriorOptions o;
    o.n_samples = cfg.rb_prior->n_samples;
    o.floor_sigma = cfg.rb_prior->floor_sigma;
    o.projection.convention = cfg.convention;
    o.seed = derive_seed(cfg.seed, 0x5242);
    prior = rb_prior_update(prior, cfg.gateset, cfg.rb_prior->fidelity, cfg.rb_prior->sigma, o);
    const GateSet pm = prior.mean_gateset(cfg.gateset);
    double f = 0.0;
    for (const NoisyGate& g : pm.gates) f += fidelity(g.noise, cfg.convention);
    std::cerr << ojson{{"event", "rb_prior"},
                       {"prior_mean_fidelity", f / pm.num_gates()},
                       {"trace", prior.trace()}}
                     .dump()
              << '\n';
  }
  FitOutcome out;
  const double initial = prior.trace();
  out.run = run_online(std::move(prior), records, cfg.gateset, cfg.engine,
                       [&](const UpdateDiagnostics& d) {
                         if (cfg.emit_diagnostics) std::cerr << diagnostics_to_json_line(d) << '\n';
                       });
  FitReport& r = out.report;
  r.mean = out.run.belief.mean_gateset(cfg.gateset);
  r.estimate = pmap_estimate(out.run.belief, cfg.gateset);
  MetricsOptions mo;
  mo.n_samples = cfg.metrics_samples;
  mo.convention = cfg.convention;
  mo.seed = derive_seed(cfg.seed, 0x4d45);
  r.metrics = gate_metrics_with_intervals(out.run.belief, cfg.gateset, mo);
  if (cfg.gateset.n_qubits == 2) r.bell = bell_state_tomography(r.estimate);
  r.assignment = readout_assignment_matrix(r.estimate.meas_noise, r.estimate.povm);
  r.diagnostics = out.run.diagnostics;
  r.dominance_step = out.run.dominance_step;
  r.initial_trace = initial;
  r.final_trace = out.run.belief.trace();
  r.convention = cfg.convention;
  r.version = kVersion;
  r.seed = cfg.seed;
  r.config_hash = cfg.config_hash;
  return out;
}

void finish_fit(const FitConfig& cfg, const FitOutcome& out) {
  write_report_bundle(cfg.output_dir, out.report);
  save_belief((std::filesystem::path(cfg.output_dir) / "belief.bin").string(), out.run.belief);
  ojson s;
  s["output_dir"] = cfg.output_dir;
  s["settings"] = out.run.diagnostics.size();
  s["initial_trace"] = out.report.initial_trace;
  s["final_trace"] = out.report.final_trace;
  s["dominance_step"] = out.run.dominance_step;
  ojson f = ojson::object();
  for (const NoisyGate& g : out.report.estimate.gates) {
    f[g.name] = fidelity(g.noise, cfg.convention);
  }
  s["fidelity"] = std::move(f);
  s["fidelity_convention"] = to_string(cfg.convention);
  std::cout << s.dump(2) << '\n';
}

int cmd_simulate(const std::string& config_path, std::optional<uint64_t> seed,
                 const std::string& output) {
  SimulateConfig cfg = simulate_config_from_json(read_text_file(config_path));
  if (seed) cfg.seed = *seed;
  if (!output.empty()) {
    cfg.output = output;
    cfg.truth_output = output + ".truth.json";
  }
  const GateSet truth = apply_truth(cfg.gateset, cfg.truth);
  const TrueDevice device(truth, derive_seed(cfg.seed, 1), cfg.shots);
  Rng rng(derive_seed(cfg.seed, 2));
  const auto seqs =
      generate_tomography_settings(cfg.max_length, cfg.n_settings, cfg.gateset.num_gates(), rng);
  Dataset ds;
  ds.header = DatasetHeader{"fbt-dataset", kVersion, cfg.seed, cfg.config_hash, {}};
  ds.records = device.measure_all(seqs, cfg.shots);
  write_dataset_file(cfg.output, ds);
  write_truth(cfg.truth_output, truth, *ds.header);
  std::cout << ojson{{"output", cfg.output},
                     {"truth", cfg.truth_output},
                     {"records", ds.records.size()},
                     {"seed", cfg.seed},
                     {"config_hash", cfg.config_hash}}
                   .dump(2)
            << '\n';
  return 0;
}

struct FitFlags {
  std::string config;
  std::string dataset;
  std::string gateset = "native_two_qubit";
  std::vector<double> rb_prior;
  std::optional<double> dominance_ratio;
  std::optional<int> n_samples;
  std::optional<uint64_t> seed;
  std::string output_dir;
  bool emit_diagnostics = false;
  bool no_fast_path = false;
};

int cmd_fit(const FitFlags& fl) {
  FitConfig cfg;
  if (!fl.config.empty()) {
    cfg = fit_config_from_json(read_text_file(fl.config));
  } else {
    if (fl.dataset.empty()) throw ConfigError("fit needs --config or --dataset");
    cfg.gateset = gateset_from_json("{\"builtin\": \"" + fl.gateset + "\"}");
    cfg.config_hash = fnv1a_hex(fl.gateset + "|" + fl.dataset);
  }
  if (!fl.dataset.empty()) cfg.dataset = fl.dataset;
  if (fl.rb_prior.size() == 2) cfg.rb_prior = RbPriorConfig{fl.rb_prior[0], fl.rb_prior[1]};
  if (fl.dominance_ratio) cfg.engine.dominance_ratio = *fl.dominance_ratio;
  if (fl.n_samples) cfg.engine.sampling.n_samples = *fl.n_samples;
  if (fl.seed) cfg.seed = cfg.engine.seed = *fl.seed;
  if (!fl.output_dir.empty()) cfg.output_dir = fl.output_dir;
  if (fl.emit_diagnostics) cfg.emit_diagnostics = true;
  if (fl.no_fast_path) cfg.engine.enable_fast_path = false;

  const Dataset ds = read_dataset_file(cfg.dataset);
  check_records(ds, cfg.gateset);
  finish_fit(cfg, run_fit(cfg, ds.records));
  return 0;
}

int cmd_rb(const std::string& config_path, std::optional<uint64_t> seed, bool repurpose,
           const std::string& dataset_in, const std::string& output_dir) {
  RbConfig cfg = rb_config_from_json(read_text_file(config_path));
  if (seed) cfg.seed = cfg.fit.seed = cfg.fit.engine.seed = *seed;
  if (repurpose) cfg.repurpose = true;
  if (!output_dir.empty()) cfg.fit.output_dir = output_dir;
  const CliffordGroup& group = CliffordGroup::two_qubit();

  RbDataset rb;
  if (!dataset_in.empty()) {
    const Dataset ds = read_dataset_file(dataset_in);
    check_records(ds, cfg.gateset);
    rb.records = ds.records;
    if (ds.header) rb.lengths = ds.header->clifford_lengths;
  } else {
    Rng rng(derive_seed(cfg.seed, 3));
    const auto seqs = sample_rb_sequences(cfg.sequences_per_length, cfg.lengths, rng);
    const TrueDevice device(apply_truth(cfg.gateset, cfg.truth), derive_seed(cfg.seed, 4),
                            cfg.shots);
    rb = simulate_rb_dataset(device, seqs, cfg.shots);
    Dataset ds;
    ds.header = DatasetHeader{"rb", kVersion, cfg.seed, cfg.config_hash, cfg.lengths};
    ds.records = rb.records;
    write_dataset_file(cfg.output, ds);
  }
  const RbFit fit = fit_rb_decay(rb, group.mean_word_length());
  ojson j;
  j["records"] = rb.records.size();
  j["A"] = fit.a;
  j["B"] = fit.b;
  j["p"] = fit.p;
  j["r_c"] = fit.r_c;
  j["r_c_err"] = fit.r_c_err;
  j["mean_primitives_per_clifford"] = fit.mean_primitives;
  j["primitive_fidelity"] = fit.primitive_fidelity;
  j["primitive_fidelity_err"] = fit.primitive_fidelity_err;
  if (dataset_in.empty()) j["output"] = cfg.output;
  std::cout << j.dump(2) << '\n';
  if (cfg.repurpose) finish_fit(cfg.fit, run_fit(cfg.fit, rb_to_fbt_records(rb)));
  return 0;
}

int cmd_metrics(const std::string& belief_path, const std::string& gateset_name, int samples,
                uint64_t seed) {
  const GateSet gs = gateset_from_json("{\"builtin\": \"" + gateset_name + "\"}");
  const GaussianBelief belief = load_belief(belief_path, ParameterPacking::for_gateset(gs));
  MetricsOptions mo;
  mo.n_samples = samples;
  mo.seed = seed;
  const MetricsResult m = gate_metrics_with_intervals(belief, gs, mo);
  ojson out = ojson::array();
  auto iv = [](const Interval& i) {
    return ojson{{"mean", i.mean}, {"lo", i.lo}, {"hi", i.hi}};
  };
  for (const GateMetrics& g : m.gates) {
    out.push_back({{"gate", g.name},
                   {"infidelity", iv(g.infidelity)},
                   {"incoherence", iv(g.incoherence)},
                   {"unitarity", iv(g.unitarity)}});
  }
  std::cout << ojson{{"gates", out}, {"projection_failures", m.projection_failures}}.dump(2)
            << '\n';
  return 0;
}

int cmd_project(const std::string& ptm_path) {
  const PauliTransferMatrix in = ptm_from_json(read_text_file(ptm_path));
  const auto [out, rep] = project_cptp(in);
  std::cerr << ojson{{"iterations", rep.iterations},
                     {"final_distance", rep.final_distance},
                     {"min_choi_eig", rep.min_choi_eig},
                     {"converged", rep.converged}}
                   .dump()
            << '\n';
  std::cout << ptm_to_json(out) << '\n';
  return rep.converged ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast Bayesian tomography of gate sets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fbt::kVersion));

  auto* sim = app.add_subcommand("simulate", "simulate a tomography dataset from a config");
  std::string sim_config, sim_output;
  std::optional<uint64_t> sim_seed;
  sim->add_option("config", sim_config, "simulation config (JSON)")->required();
  sim->add_option("--seed", sim_seed, "override the config seed");
  sim->add_option("--output,-o", sim_output, "dataset path (JSON lines)");

  auto* fit = app.add_subcommand("fit", "run the online fit and write a report bundle");
  FitFlags ff;
  fit->add_option("--config,-c", ff.config, "fit config (JSON)");
  fit->add_option("--dataset,-d", ff.dataset, "dataset path (overrides config)");
  fit->add_option("--gateset", ff.gateset, "builtin gate set when no config is given");
  fit->add_option("--rb-prior", ff.rb_prior, "RB prior: mean fidelity and sigma")
      ->expected(2);
  fit->add_option("--dominance-ratio", ff.dominance_ratio);
  fit->add_option("--n-samples", ff.n_samples, "noise samples per sampled update");
  fit->add_option("--seed", ff.seed);
  fit->add_option("--output-dir,-o", ff.output_dir);
  fit->add_flag("--emit-diagnostics", ff.emit_diagnostics, "stream per-step JSON to stderr");
  fit->add_flag("--no-fast-path", ff.no_fast_path, "keep sampling after dominance");

  auto* rb = app.add_subcommand("rb", "randomized benchmarking: generate, fit, repurpose");
  std::string rb_config, rb_dataset, rb_outdir;
  std::optional<uint64_t> rb_seed;
  bool rb_repurpose = false;
  rb->add_option("config", rb_config, "RB config (JSON)")->required();
  rb->add_option("--seed", rb_seed);
  rb->add_option("--dataset", rb_dataset, "fit an existing RB dataset instead of simulating");
  rb->add_flag("--repurpose", rb_repurpose, "also fit the gate set to the RB records");
  rb->add_option("--output-dir,-o", rb_outdir, "report directory for --repurpose");

  auto* met = app.add_subcommand("metrics", "gate metrics with intervals from a saved belief");
  std::string met_belief, met_gateset = "native_two_qubit";
  int met_samples = 200;
  uint64_t met_seed = 1;
  met->add_option("belief", met_belief, "belief.bin from a fit")->required();
  met->add_option("--gateset", met_gateset);
  met->add_option("--samples", met_samples);
  met->add_option("--seed", met_seed);

  auto* proj = app.add_subcommand("project", "project a PTM onto CPTP");
  std::string proj_ptm;
  proj->add_option("ptm", proj_ptm, "PTM JSON {n_qubits, entries}")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(sim_config, sim_seed, sim_output);
    if (*fit) return cmd_fit(ff);
    if (*rb) return cmd_rb(rb_config, rb_seed, rb_repurpose, rb_dataset, rb_outdir);
    if (*met) return cmd_metrics(met_belief, met_gateset, met_samples, met_seed);
    if (*proj) return cmd_project(proj_ptm);
  } catch (const fbt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const fbt::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const fbt::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const fbt::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
