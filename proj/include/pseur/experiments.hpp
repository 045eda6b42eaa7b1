#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pseur/beamforming.hpp"

namespace pseur {

struct PipelineConfig {
  int source_count = 0;  // 0: eigenvalue-gap detection
  double correlation_halfwidth_deg = 3.0;
  double desired_halfwidth_deg = kDesiredSectorHalfWidthDeg;
  int sector_samples = 14;    // quadrature points over the sector union
  int spectrum_samples = 188; // baseline reconstructions
  NoisePowerMode noise_mode = NoisePowerMode::Mean;
  double rank_threshold = 1e-8;
  double well_conditioned_fraction = 0.5;
  double soi_accept_ratio = 0.3;
  bool per_sector_levels = false;
  double smi_loading = 0.0;
};

struct PipelineResult {
  BeamformerWeights weights;
  double assumed_soi_deg = 0.0;
  bool soi_refined = false;
  std::vector<double> interferer_doas_deg;
  std::vector<double> interferer_powers;
  std::vector<AngularSector> sectors;  // merged reconstruction sectors
  double noise_power_estimate = 0.0;
  ReconstructionProduct recon;  // empty when degraded
  bool degraded = false;
  std::string warning;
};

/// End-to-end two-level reconstruction beamformer: sample covariance,
/// eigendecomposition, noise floor, per-interferer direction/uncertainty/
/// power estimates, sector sampling, reconstruction and the distortionless
/// weights. Deterministic for a fixed batch and config. When every
/// interference power estimate clamps to zero the result degrades to the
/// white-noise beamformer w = a / M with a warning.
PipelineResult run_pseur_pipeline(const SnapshotBatch& batch,
                                  double presumed_soi_deg,
                                  const ArraySpec& spec,
                                  const PipelineConfig& config = {});

enum class Method { Optimal, Pseur, CaponIpn, MepsIpn, Smi };

const char* method_name(Method method);
Method method_from_name(const std::string& name);

enum class SweepAxis { SnrDb, Snapshots };

struct ExperimentPlan {
  Scenario scenario;  // template; the SOI power provides the fixed SNR
  int snapshots = 30;
  SweepAxis axis = SweepAxis::SnrDb;
  std::vector<double> values;  // strictly increasing
  int trials = 100;
  std::vector<Method> methods = {Method::Optimal, Method::Pseur,
                                 Method::CaponIpn, Method::MepsIpn,
                                 Method::Smi};
  std::uint64_t base_seed = 1;
  int threads = 0;  // 0: hardware concurrency
  PipelineConfig config;
};

struct ResultRow {
  double sweep_value = 0.0;
  std::string method;
  double mean_sinr_db = 0.0;
  double std_db = 0.0;
  double mean_dev_db = 0.0;  // versus the optimal beamformer, paired
  int trials = 0;
  int failures = 0;
};

/// Runs trials x sweep values x methods. Each trial draws one batch from a
/// counter-derived seed (base_seed XOR trial index) and scores every method
/// on it, so comparisons are paired. Trials may execute concurrently;
/// aggregation always reduces in trial order, so output is byte-stable.
/// Hard per-trial failures are counted per row and the sweep continues.
std::vector<ResultRow> run_sweep(const ExperimentPlan& plan);

/// CSV export: UTF-8, header row, fixed 6-decimal numerics, deterministic
/// row order. Loading a written file reproduces it byte for byte.
std::string sweep_csv(const std::vector<ResultRow>& rows);
std::string beampattern_csv(const Beampattern& pattern);
void export_csv(const std::string& content, const std::string& path);
std::vector<ResultRow> load_sweep_csv(const std::string& path);
Beampattern load_beampattern_csv(const std::string& path);

/// Plan JSON: scenario (inline object or "example": 1..4), axis, values,
/// trials, methods, seed, snapshots, threads.
ExperimentPlan plan_from_json(const std::string& json_text);
ExperimentPlan plan_from_file(const std::string& path);

/// Default sweep grids: SNR -20..30 dB in 5 dB steps; snapshots 10..100 in
/// steps of 10.
std::vector<double> default_snr_axis();
std::vector<double> default_snapshot_axis();

}  // namespace pseur
