#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pseur/experiments.hpp"

namespace {

using namespace pseur;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct CommonArgs {
  std::string scenario_path;
  int example = 0;
  std::string methods = "OPTIMAL,PSEUR,IPN-CC,IPN-MEPS,SMI";
  int trials = 100;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string points;
  std::string plan_path;
  int snapshots = 30;
  double snr_db = 10.0;
  int threads = 0;
  double smi_loading = 0.0;
  std::string noise_mode = "mean";
};

NoisePowerMode parse_noise_mode(const std::string& name) {
  if (name == "mean") return NoisePowerMode::Mean;
  if (name == "paper-squared") return NoisePowerMode::PaperSquared;
  throw std::invalid_argument("--noise-mode: expected 'mean' or "
                              "'paper-squared', got '" + name + "'");
}

void add_common(CLI::App* cmd, CommonArgs& args, bool sweep) {
  cmd->add_option("--scenario", args.scenario_path,
                  "Scenario config file (JSON)");
  cmd->add_option("--example", args.example,
                  "Built-in simulation scenario (1..4)")
      ->check(CLI::Range(1, 4));
  cmd->add_option("--methods", args.methods,
                  "Comma-separated methods "
                  "(OPTIMAL,PSEUR,IPN-CC,IPN-MEPS,SMI)");
  cmd->add_option("--trials", args.trials, "Monte-Carlo trials per point");
  cmd->add_option("--seed", args.seed, "Base seed");
  cmd->add_option("--out", args.out_path, "Output CSV path");
  cmd->add_option("--snapshots", args.snapshots, "Snapshots per trial");
  cmd->add_option("--threads", args.threads,
                  "Worker threads (0 = hardware)");
  cmd->add_option("--smi-loading", args.smi_loading,
                  "Diagonal loading for the SMI baseline");
  cmd->add_option("--noise-mode", args.noise_mode,
                  "Noise-floor estimator: mean | paper-squared")
      ->check(CLI::IsMember({"mean", "paper-squared"}));
  if (sweep) {
    cmd->add_option("--points", args.points,
                    "Comma-separated sweep values (overrides the default "
                    "axis)");
    cmd->add_option("--plan", args.plan_path,
                    "Plan config file (JSON); explicit flags take "
                    "precedence");
  } else {
    cmd->add_option("--snr", args.snr_db, "SOI SNR in dB");
  }
}

std::vector<double> parse_points(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.empty()) continue;
    values.push_back(std::stod(field));
  }
  if (values.empty()) {
    throw std::invalid_argument("--points: no values parsed");
  }
  return values;
}

Scenario resolve_scenario(const CommonArgs& args, double snr_db) {
  if (!args.scenario_path.empty()) {
    return scenario_from_file(args.scenario_path);
  }
  return example_scenario(args.example > 0 ? args.example : 1, snr_db);
}

ExperimentPlan build_plan(const CommonArgs& args, SweepAxis axis,
                          const CLI::App* cmd) {
  ExperimentPlan plan;
  if (!args.plan_path.empty()) {
    plan = plan_from_file(args.plan_path);
  } else {
    plan.scenario = resolve_scenario(args, 10.0);
    plan.axis = axis;
    plan.values = axis == SweepAxis::SnrDb ? default_snr_axis()
                                           : default_snapshot_axis();
  }
  plan.axis = axis;
  if (args.plan_path.empty() || cmd->count("--trials")) {
    plan.trials = args.trials;
  }
  if (args.plan_path.empty() || cmd->count("--seed")) {
    plan.base_seed = args.seed;
  }
  if (args.plan_path.empty() || cmd->count("--snapshots")) {
    plan.snapshots = args.snapshots;
  }
  if (args.plan_path.empty() || cmd->count("--threads")) {
    plan.threads = args.threads;
  }
  if (!args.points.empty()) {
    plan.values = parse_points(args.points);
  }
  if (args.plan_path.empty() || cmd->count("--methods")) {
    plan.methods.clear();
    std::stringstream ss(args.methods);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) plan.methods.push_back(method_from_name(name));
    }
  }
  plan.config.smi_loading = args.smi_loading;
  plan.config.noise_mode = parse_noise_mode(args.noise_mode);
  if (!args.scenario_path.empty() && !args.plan_path.empty()) {
    plan.scenario = scenario_from_file(args.scenario_path);
  }
  return plan;
}

void emit(const std::vector<ResultRow>& rows, const std::string& out_path) {
  const std::string csv = sweep_csv(rows);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    export_csv(csv, out_path);
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  }
}

int run_sweep_command(const CommonArgs& args, SweepAxis axis,
                      const CLI::App* cmd) {
  emit(run_sweep(build_plan(args, axis, cmd)), args.out_path);
  return kExitOk;
}

int run_trial_command(const CommonArgs& args, const CLI::App* cmd) {
  ExperimentPlan plan = build_plan(args, SweepAxis::SnrDb, cmd);
  plan.values = {args.snr_db};
  const auto rows = run_sweep(plan);
  if (!args.out_path.empty()) {
    export_csv(sweep_csv(rows), args.out_path);
  }
  for (const auto& row : rows) {
    std::printf("%-10s  SINR %+9.3f dB  dev %8.3f dB  failures %d/%d\n",
                row.method.c_str(), row.mean_sinr_db, row.mean_dev_db,
                row.failures, row.trials);
  }
  return kExitOk;
}

int run_beampattern_command(const CommonArgs& args, const CLI::App* cmd) {
  Scenario scenario = resolve_scenario(args, args.snr_db);
  if (cmd->count("--seed")) scenario.seed = args.seed;
  const SnapshotBatch batch = synthesize(scenario, args.snapshots);
  const double presumed = scenario.soi().direction_deg;

  std::string method = "PSEUR";
  if (cmd->count("--methods")) {
    std::stringstream ss(args.methods);
    std::getline(ss, method, ',');
  }

  PipelineConfig config;
  config.smi_loading = args.smi_loading;
  config.noise_mode = parse_noise_mode(args.noise_mode);
  config.source_count = static_cast<int>(scenario.sources.size());
  BeamformerWeights weights;
  switch (method_from_name(method)) {
    case Method::Optimal:
      weights = baseline_optimal(batch.truth);
      break;
    case Method::Pseur:
      weights =
          run_pseur_pipeline(batch, presumed, scenario.array, config).weights;
      break;
    case Method::CaponIpn:
      weights = baseline_capon_ipn(batch, presumed, scenario.array);
      break;
    case Method::MepsIpn:
      weights = baseline_meps_ipn(batch, presumed, scenario.array);
      break;
    case Method::Smi:
      weights = baseline_smi(batch, steering_vector(presumed, scenario.array),
                             config.smi_loading);
      break;
  }

  const Beampattern pattern =
      beampattern(weights, angle_grid(scenario.array), scenario.array);
  const std::string csv = beampattern_csv(pattern);
  if (args.out_path.empty()) {
    std::cout << csv;
  } else {
    export_csv(csv, args.out_path);
    std::cout << "wrote beampattern (" << pattern.theta_deg.size()
              << " angles) to " << args.out_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Uniform-linear-array adaptive beamforming: two-level spectral "
      "interference-plus-noise reconstruction, closed-form baselines and "
      "Monte-Carlo sweeps"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* snr = app.add_subcommand("sweep-snr", "Output SINR versus SNR");
  add_common(snr, args, true);
  auto* snap =
      app.add_subcommand("sweep-snapshots", "Output SINR versus snapshots");
  add_common(snap, args, true);
  auto* trial = app.add_subcommand("trial", "Score one sweep point");
  add_common(trial, args, false);
  auto* pattern =
      app.add_subcommand("beampattern", "Export |w^H a(theta)| in dB");
  add_common(pattern, args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (snr->parsed()) return run_sweep_command(args, SweepAxis::SnrDb, snr);
    if (snap->parsed()) {
      return run_sweep_command(args, SweepAxis::Snapshots, snap);
    }
    if (trial->parsed()) return run_trial_command(args, trial);
    if (pattern->parsed()) return run_beampattern_command(args, pattern);
    std::cerr << "no subcommand selected\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
