#include "pseur/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace pseur {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double parse_double(const std::string& field, const std::string& context) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(context + ": bad numeric field '" + field +
                                "'");
  }
  if (pos != field.size()) {
    throw std::invalid_argument(context + ": bad numeric field '" + field +
                                "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

struct TrialScore {
  std::vector<std::optional<double>> sinr_db;  // per method
  double optimal_db = 0.0;
};

}  // namespace

PipelineResult run_pseur_pipeline(const SnapshotBatch& batch,
                                  double presumed_soi_deg,
                                  const ArraySpec& spec,
                                  const PipelineConfig& config) {
  const int m = spec.elements;
  if (batch.data.rows() != m) {
    throw std::invalid_argument("run_pseur_pipeline: batch/array mismatch");
  }

  PipelineResult result;
  const CMatrix cov = sample_covariance(batch);
  const EigenSystem eig = hermitian_eig(cov);

  const int sources = config.source_count > 0
                          ? config.source_count
                          : detect_source_count(eig.values);
  const int k = std::clamp(sources, 1, m - 1);
  const SubspacePartition part = partition_subspaces(eig, k);

  double noise_power = estimate_noise_power(part, config.noise_mode);
  // A noiseless batch yields an exactly-zero noise floor; keep the spectrum
  // floor strictly positive.
  noise_power = std::max(noise_power, 1e-12 * std::max(eig.values[0], 1e-300));
  result.noise_power_estimate = noise_power;

  const RVector grid = angle_grid(spec);
  const RVector spectrum = music_null_spectrum(part.noise_basis, grid, spec);
  const DirectionSelection sel = select_directions(
      spectrum, grid, presumed_soi_deg, k, config.desired_halfwidth_deg,
      config.soi_accept_ratio);
  result.assumed_soi_deg = sel.soi_deg;
  result.soi_refined = sel.soi_refined;
  result.interferer_doas_deg = sel.interferer_deg;
  if (sel.interferer_deg.empty()) {
    throw std::runtime_error(
        "run_pseur_pipeline: no interferer directions resolved");
  }

  const CVector assumed = steering_vector(sel.soi_deg, spec);

  std::vector<AngularSector> sectors;
  std::vector<double> powers;
  for (double doa : sel.interferer_deg) {
    std::vector<double> per_snapshot(batch.snapshots);
    for (int n = 0; n < batch.snapshots; ++n) {
      per_snapshot[n] = snapshot_doa(batch.data.col(n), doa,
                                     config.correlation_halfwidth_deg, spec);
    }
    AngularSector sector = uncertainty_width(
        per_snapshot, doa, config.correlation_halfwidth_deg,
        spec.grid_step_deg, config.well_conditioned_fraction);
    // The per-snapshot estimator is grid-quantized; a sector narrower than
    // one grid step claims more certainty than the estimates carry.
    sector.half_width_deg = std::max(sector.half_width_deg,
                                     spec.grid_step_deg);
    sectors.push_back(sector);
    powers.push_back(
        interference_power(batch, steering_vector(doa, spec), noise_power)
            .power);
  }
  result.interferer_powers = powers;

  SpectrumLevels levels;
  try {
    levels = spectrum_levels(noise_power, powers);
  } catch (const std::runtime_error& e) {
    result.degraded = true;
    result.warning = std::string(e.what()) +
                     "; degraded to the white-noise beamformer";
    result.weights.w = assumed / static_cast<double>(m);
    result.weights.method = "PSEUR";
    result.weights.assumed_soi = assumed;
    result.sectors = sectors;
    return result;
  }

  TwoLevelSpectrum spectrum_model;
  spectrum_model.low_level = levels.low;
  spectrum_model.high_level = levels.high;
  spectrum_model.sectors = sectors;
  std::vector<double> sector_levels;
  if (config.per_sector_levels) {
    for (double p : powers) sector_levels.push_back(p + levels.low);
  }
  merge_sectors(spectrum_model.sectors,
                config.per_sector_levels ? &sector_levels : nullptr);
  if (config.per_sector_levels) {
    spectrum_model.sector_levels = sector_levels;
  }
  result.sectors = spectrum_model.sectors;

  const SectorSamples samples = sector_sampling(
      spectrum_model.sectors, config.sector_samples, spec.grid_step_deg);
  CMatrix sector_cov;
  if (config.per_sector_levels) {
    std::vector<double> weights(samples.angles_deg.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      weights[i] =
          spectrum_model.sector_levels[samples.sector_index[i]] - levels.low;
    }
    sector_cov = weighted_partial_covariance(samples, weights, spec);
  } else {
    sector_cov = partial_covariance(samples, spec);
  }

  const EigenSystem sector_eig = hermitian_eig(sector_cov);
  result.recon = reconstruct(spectrum_model, sector_eig, m,
                             static_cast<int>(samples.angles_deg.size()),
                             samples.spacing_rad, config.rank_threshold);
  result.weights = mvdr_weights(result.recon.ipn_inverse, assumed, "PSEUR");
  return result;
}

const char* method_name(Method method) {
  switch (method) {
    case Method::Optimal:
      return "OPTIMAL";
    case Method::Pseur:
      return "PSEUR";
    case Method::CaponIpn:
      return "IPN-CC";
    case Method::MepsIpn:
      return "IPN-MEPS";
    case Method::Smi:
      return "SMI";
  }
  throw std::invalid_argument("method_name: unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "OPTIMAL") return Method::Optimal;
  if (name == "PSEUR") return Method::Pseur;
  if (name == "IPN-CC") return Method::CaponIpn;
  if (name == "IPN-MEPS") return Method::MepsIpn;
  if (name == "SMI") return Method::Smi;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::vector<double> default_snr_axis() {
  std::vector<double> v;
  for (double snr = -20.0; snr <= 30.0 + 1e-9; snr += 5.0) v.push_back(snr);
  return v;
}

std::vector<double> default_snapshot_axis() {
  std::vector<double> v;
  for (double n = 10.0; n <= 100.0 + 1e-9; n += 10.0) v.push_back(n);
  return v;
}

namespace {

void validate_plan(const ExperimentPlan& plan) {
  if (plan.trials < 1) {
    throw std::invalid_argument("plan: trials must be at least 1");
  }
  if (plan.values.empty()) {
    throw std::invalid_argument("plan: sweep values must be non-empty");
  }
  for (std::size_t i = 1; i < plan.values.size(); ++i) {
    if (!(plan.values[i] > plan.values[i - 1])) {
      throw std::invalid_argument(
          "plan: sweep values must be strictly increasing");
    }
  }
  if (plan.methods.empty()) {
    throw std::invalid_argument("plan: at least one method required");
  }
  if (plan.axis == SweepAxis::Snapshots) {
    for (double v : plan.values) {
      if (v < 1.0 || v != std::floor(v)) {
        throw std::invalid_argument(
            "plan: snapshot counts must be positive integers");
      }
    }
  }
  validate_scenario(plan.scenario);
}

TrialScore score_trial(const ExperimentPlan& plan, double sweep_value,
                       int trial) {
  Scenario scenario = plan.scenario;
  int snapshots = plan.snapshots;
  if (plan.axis == SweepAxis::SnrDb) {
    scenario.sources.front().power =
        scenario.noise_power * std::pow(10.0, sweep_value / 10.0);
  } else {
    snapshots = static_cast<int>(sweep_value);
  }
  scenario.seed = plan.base_seed ^ static_cast<std::uint64_t>(trial);

  const SnapshotBatch batch = synthesize(scenario, snapshots);
  const double presumed = plan.scenario.soi().direction_deg;
  PipelineConfig config = plan.config;
  if (config.source_count == 0) {
    // Source count comes from the scenario; the eigenvalue-gap detector
    // stays available for callers without one.
    config.source_count = static_cast<int>(scenario.sources.size());
  }

  TrialScore score;
  score.optimal_db = output_sinr_db(baseline_optimal(batch.truth), batch.truth);
  score.sinr_db.resize(plan.methods.size());
  for (std::size_t mi = 0; mi < plan.methods.size(); ++mi) {
    try {
      switch (plan.methods[mi]) {
        case Method::Optimal:
          score.sinr_db[mi] = score.optimal_db;
          break;
        case Method::Pseur:
          score.sinr_db[mi] = output_sinr_db(
              run_pseur_pipeline(batch, presumed, scenario.array, config)
                  .weights,
              batch.truth);
          break;
        case Method::CaponIpn:
          score.sinr_db[mi] = output_sinr_db(
              baseline_capon_ipn(batch, presumed, scenario.array,
                                 config.spectrum_samples,
                                 config.desired_halfwidth_deg),
              batch.truth);
          break;
        case Method::MepsIpn:
          score.sinr_db[mi] = output_sinr_db(
              baseline_meps_ipn(batch, presumed, scenario.array,
                                config.spectrum_samples,
                                config.desired_halfwidth_deg),
              batch.truth);
          break;
        case Method::Smi:
          score.sinr_db[mi] = output_sinr_db(
              baseline_smi(batch, steering_vector(presumed, scenario.array),
                           config.smi_loading),
              batch.truth);
          break;
      }
    } catch (const std::exception&) {
      score.sinr_db[mi] = std::nullopt;  // counted as a trial failure
    }
  }
  return score;
}

}  // namespace

std::vector<ResultRow> run_sweep(const ExperimentPlan& plan) {
  validate_plan(plan);
  const int threads = plan.threads > 0
                          ? plan.threads
                          : std::max(1u, std::thread::hardware_concurrency());

  std::vector<ResultRow> rows;
  for (double value : plan.values) {
    std::vector<TrialScore> scores(plan.trials);
    if (threads == 1 || plan.trials == 1) {
      for (int t = 0; t < plan.trials; ++t) {
        scores[t] = score_trial(plan, value, t);
      }
    } else {
      std::vector<std::thread> pool;
      std::atomic<int> next{0};
      for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
          for (int t = next.fetch_add(1); t < plan.trials;
               t = next.fetch_add(1)) {
            scores[t] = score_trial(plan, value, t);
          }
        });
      }
      for (auto& th : pool) th.join();
    }

    // Reduce in trial order so concurrency cannot perturb the output.
    for (std::size_t mi = 0; mi < plan.methods.size(); ++mi) {
      ResultRow row;
      row.sweep_value = value;
      row.method = method_name(plan.methods[mi]);
      row.trials = plan.trials;
      double sum = 0.0, sum_sq = 0.0, dev = 0.0;
      int ok = 0;
      for (int t = 0; t < plan.trials; ++t) {
        const auto& s = scores[t].sinr_db[mi];
        if (!s) {
          ++row.failures;
          continue;
        }
        sum += *s;
        sum_sq += (*s) * (*s);
        dev += scores[t].optimal_db - *s;
        ++ok;
      }
      if (ok > 0) {
        row.mean_sinr_db = sum / ok;
        row.mean_dev_db = dev / ok;
        if (ok > 1) {
          const double var =
              std::max(0.0, (sum_sq - sum * sum / ok) / (ok - 1));
          row.std_db = std::sqrt(var);
        }
      } else {
        row.mean_sinr_db = row.std_db = row.mean_dev_db =
            std::numeric_limits<double>::quiet_NaN();
      }
      rows.push_back(std::move(row));
    }
  }
  // Rows per sweep value are reordered by method name for a stable schema.
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     if (a.sweep_value != b.sweep_value) {
                       return a.sweep_value < b.sweep_value;
                     }
                     return a.method < b.method;
                   });
  return rows;
}

std::string sweep_csv(const std::vector<ResultRow>& rows) {
  std::string out =
      "sweep_value,method,mean_sinr_db,std_db,mean_dev_db,trials,failures\n";
  for (const auto& r : rows) {
    out += fixed6(r.sweep_value);
    out += ',';
    out += r.method;
    out += ',';
    out += fixed6(r.mean_sinr_db);
    out += ',';
    out += fixed6(r.std_db);
    out += ',';
    out += fixed6(r.mean_dev_db);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += std::to_string(r.failures);
    out += '\n';
  }
  return out;
}

std::string beampattern_csv(const Beampattern& pattern) {
  std::string out = "theta_deg,gain_db\n";
  for (Eigen::Index i = 0; i < pattern.theta_deg.size(); ++i) {
    out += fixed6(pattern.theta_deg[i]);
    out += ',';
    out += fixed6(pattern.gain_db[i]);
    out += '\n';
  }
  return out;
}

void export_csv(const std::string& content, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("export_csv: cannot open '" + path +
                             "' for writing");
  }
  out << content;
  if (!out) {
    throw std::runtime_error("export_csv: write failed for '" + path + "'");
  }
}

std::vector<ResultRow> load_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_sweep_csv: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line) ||
      line !=
          "sweep_value,method,mean_sinr_db,std_db,mean_dev_db,trials,"
          "failures") {
    throw std::runtime_error("load_sweep_csv: bad header in '" + path + "'");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 7) {
      throw std::runtime_error("load_sweep_csv: bad row in '" + path + "'");
    }
    ResultRow r;
    r.sweep_value = parse_double(fields[0], "load_sweep_csv");
    r.method = fields[1];
    r.mean_sinr_db = parse_double(fields[2], "load_sweep_csv");
    r.std_db = parse_double(fields[3], "load_sweep_csv");
    r.mean_dev_db = parse_double(fields[4], "load_sweep_csv");
    r.trials = static_cast<int>(parse_double(fields[5], "load_sweep_csv"));
    r.failures = static_cast<int>(parse_double(fields[6], "load_sweep_csv"));
    rows.push_back(std::move(r));
  }
  return rows;
}

Beampattern load_beampattern_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_beampattern_csv: cannot open '" + path +
                             "'");
  }
  std::string line;
  if (!std::getline(in, line) || line != "theta_deg,gain_db") {
    throw std::runtime_error("load_beampattern_csv: bad header in '" + path +
                             "'");
  }
  std::vector<double> theta, gain;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) {
      throw std::runtime_error("load_beampattern_csv: bad row in '" + path +
                               "'");
    }
    theta.push_back(parse_double(fields[0], "load_beampattern_csv"));
    gain.push_back(parse_double(fields[1], "load_beampattern_csv"));
  }
  Beampattern pattern;
  pattern.theta_deg = Eigen::Map<RVector>(theta.data(), theta.size());
  pattern.gain_db = Eigen::Map<RVector>(gain.data(), gain.size());
  return pattern;
}

ExperimentPlan plan_from_json(const std::string& json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("plan config: ") + e.what());
  }
  try {
    ExperimentPlan plan;
    if (doc.contains("example")) {
      plan.scenario = example_scenario(doc.at("example").get<int>());
    } else if (doc.contains("scenario")) {
      plan.scenario = scenario_from_json(doc.at("scenario").dump());
    } else {
      throw std::invalid_argument(
          "plan config: needs 'scenario' or 'example'");
    }
    const std::string axis = doc.value("axis", std::string("snr_db"));
    if (axis == "snr_db") {
      plan.axis = SweepAxis::SnrDb;
      plan.values = default_snr_axis();
    } else if (axis == "snapshots") {
      plan.axis = SweepAxis::Snapshots;
      plan.values = default_snapshot_axis();
    } else {
      throw std::invalid_argument("plan config: unknown axis '" + axis + "'");
    }
    if (doc.contains("values")) {
      plan.values = doc.at("values").get<std::vector<double>>();
    }
    plan.snapshots = doc.value("snapshots", plan.snapshots);
    plan.trials = doc.value("trials", plan.trials);
    plan.base_seed = doc.value("seed", plan.base_seed);
    plan.threads = doc.value("threads", plan.threads);
    if (doc.contains("methods")) {
      plan.methods.clear();
      for (const auto& name : doc.at("methods")) {
        plan.methods.push_back(method_from_name(name.get<std::string>()));
      }
    }
    return plan;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("plan config: ") + e.what());
  }
}

ExperimentPlan plan_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("plan config: cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return plan_from_json(buffer.str());
}

}  // namespace pseur
