#include "pseur/array_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pseur {

namespace {

using nlohmann::json;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

CVector steering_vector(double theta_deg, const ArraySpec& spec) {
  if (spec.elements < 1) {
    throw std::invalid_argument("steering_vector: empty array");
  }
  const double step =
      -kTwoPi * spec.spacing_wavelengths * std::sin(deg2rad(theta_deg));
  CVector a(spec.elements);
  for (int m = 0; m < spec.elements; ++m) {
    a[m] = std::polar(1.0, step * m);
  }
  return a;
}

CVector perturbed_signature(double theta_deg, const RVector& gains,
                            const RVector& phases, const ArraySpec& spec) {
  if (gains.size() != spec.elements || phases.size() != spec.elements) {
    throw std::invalid_argument(
        "perturbed_signature: gain/phase vectors must match element count");
  }
  const double step =
      kTwoPi * spec.spacing_wavelengths * std::sin(deg2rad(theta_deg));
  CVector a(spec.elements);
  for (int m = 0; m < spec.elements; ++m) {
    a[m] = (1.0 + gains[m]) * std::polar(1.0, -(step * m + phases[m]));
  }
  return a;
}

CVector scattered_signature_from_paths(double theta_deg, const ArraySpec& spec,
                                       const std::vector<double>& path_deg,
                                       const std::vector<double>& path_phase) {
  if (path_deg.size() != path_phase.size()) {
    throw std::invalid_argument(
        "scattered_signature: one phase per path required");
  }
  CVector signature = steering_vector(theta_deg, spec);
  for (std::size_t i = 0; i < path_deg.size(); ++i) {
    signature +=
        std::polar(1.0, path_phase[i]) * steering_vector(path_deg[i], spec);
  }
  return signature;
}

CVector scattered_signature(double theta_deg, const ArraySpec& spec, int paths,
                            double spread_deg, Rng& rng) {
  if (paths < 0) {
    throw std::invalid_argument("scattered_signature: negative path count");
  }
  std::vector<double> path_deg(paths), path_phase(paths);
  for (int i = 0; i < paths; ++i) {
    path_deg[i] = theta_deg + spread_deg * rng.gaussian();
    path_phase[i] = rng.uniform(0.0, kTwoPi);
  }
  return scattered_signature_from_paths(theta_deg, spec, path_deg, path_phase);
}

std::vector<double> drift_directions(double center_deg, double sweep_deg,
                                     int snapshots) {
  if (snapshots < 1) {
    throw std::invalid_argument("drift_directions: need at least one snapshot");
  }
  std::vector<double> out(snapshots);
  const double n_total = static_cast<double>(snapshots);
  for (int n = 1; n <= snapshots; ++n) {
    out[n - 1] = center_deg + (sweep_deg / n_total) * (n - 0.5 * n_total);
  }
  return out;
}

CMatrix analytic_covariance(const Scenario& scenario) {
  validate_scenario(scenario);
  const int m = scenario.array.elements;
  CMatrix r = scenario.noise_power * CMatrix::Identity(m, m);
  for (const auto& src : scenario.sources) {
    const CVector a = steering_vector(src.direction_deg, scenario.array);
    r += src.power * (a * a.adjoint());
  }
  return r;
}

void validate_scenario(const Scenario& scenario) {
  const auto& sources = scenario.sources;
  if (scenario.array.elements < 2) {
    throw std::invalid_argument("scenario: array needs at least 2 elements");
  }
  if (!(scenario.array.grid_step_deg > 0.0)) {
    throw std::invalid_argument("scenario: grid step must be positive");
  }
  if (sources.empty() || sources.front().kind != SourceKind::Soi) {
    throw std::invalid_argument("scenario: first source must be the SOI");
  }
  int soi_count = 0;
  for (const auto& src : sources) {
    if (src.kind == SourceKind::Soi) ++soi_count;
    if (!(src.power > 0.0)) {
      throw std::invalid_argument("scenario: source powers must be positive");
    }
    if (!(src.direction_deg > -90.0 && src.direction_deg < 90.0)) {
      throw std::invalid_argument(
          "scenario: source directions must lie in (-90, 90) degrees");
    }
  }
  if (soi_count != 1) {
    throw std::invalid_argument("scenario: exactly one SOI required");
  }
  if (!(scenario.noise_power >= 0.0)) {
    throw std::invalid_argument("scenario: noise power must be non-negative");
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = i + 1; j < sources.size(); ++j) {
      if (sources[i].direction_deg == sources[j].direction_deg) {
        throw std::invalid_argument(
            "scenario: source directions must be pairwise distinct");
      }
    }
  }
  const double soi_deg = sources.front().direction_deg;
  for (std::size_t k = 1; k < sources.size(); ++k) {
    if (std::abs(sources[k].direction_deg - soi_deg) <=
        kDesiredSectorHalfWidthDeg) {
      throw std::invalid_argument(
          "scenario: interferer inside the desired sector around the SOI");
    }
  }
  if (!scenario.interferer_drift_deg.empty() &&
      scenario.interferer_drift_deg.size() != sources.size() - 1) {
    throw std::invalid_argument(
        "scenario: drift list length must match the interferer count");
  }
}

SnapshotBatch synthesize(const Scenario& scenario, int snapshots) {
  validate_scenario(scenario);
  if (snapshots < 1) {
    throw std::invalid_argument("synthesize: need at least one snapshot");
  }
  const int m = scenario.array.elements;
  const int k_total = static_cast<int>(scenario.sources.size());
  Rng rng(scenario.seed);

  // Per-run mismatch realization, fixed across snapshots.
  const MismatchSpec& mm = scenario.mismatch;
  std::vector<double> true_dirs(k_total);
  for (int k = 0; k < k_total; ++k) {
    true_dirs[k] = scenario.sources[k].direction_deg;
  }
  RVector gains, phases;
  CVector soi_signature;
  switch (mm.kind) {
    case MismatchKind::None:
      soi_signature = steering_vector(true_dirs[0], scenario.array);
      break;
    case MismatchKind::LookDirection:
      for (int k = 0; k < k_total; ++k) {
        true_dirs[k] += rng.uniform(-mm.look_bound_deg, mm.look_bound_deg);
      }
      soi_signature = steering_vector(true_dirs[0], scenario.array);
      break;
    case MismatchKind::GainPhase: {
      gains = RVector(m);
      phases = RVector(m);
      for (int i = 0; i < m; ++i) gains[i] = mm.gain_sigma * rng.gaussian();
      for (int i = 0; i < m; ++i) phases[i] = mm.phase_sigma * rng.gaussian();
      soi_signature =
          perturbed_signature(true_dirs[0], gains, phases, scenario.array);
      break;
    }
    case MismatchKind::CoherentScattering:
      soi_signature = scattered_signature(
          true_dirs[0], scenario.array, mm.scatter_paths, mm.scatter_spread_deg,
          rng);
      break;
  }

  // Interferer trajectories (deterministic given the scenario).
  RMatrix directions(k_total, snapshots);
  directions.row(0).setConstant(true_dirs[0]);
  for (int k = 1; k < k_total; ++k) {
    const double sweep = scenario.interferer_drift_deg.empty()
                             ? 0.0
                             : scenario.interferer_drift_deg[k - 1];
    const auto traj = drift_directions(true_dirs[k], sweep, snapshots);
    for (int n = 0; n < snapshots; ++n) directions(k, n) = traj[n];
  }

  // Interferer signatures stay on the clean manifold (the mismatch models
  // perturb the desired-signal signature only): one signature per snapshot
  // under drift, shared otherwise.
  std::vector<std::vector<CVector>> interferer_sigs(k_total - 1);
  CMatrix ipn = scenario.noise_power * CMatrix::Identity(m, m);
  for (int k = 1; k < k_total; ++k) {
    const bool moving = directions(k, 0) != directions(k, snapshots - 1);
    auto& sigs = interferer_sigs[k - 1];
    if (!moving) {
      sigs.push_back(steering_vector(directions(k, 0), scenario.array));
      ipn += scenario.sources[k].power * (sigs[0] * sigs[0].adjoint());
    } else {
      sigs.reserve(snapshots);
      for (int n = 0; n < snapshots; ++n) {
        sigs.push_back(steering_vector(directions(k, n), scenario.array));
        ipn += (scenario.sources[k].power / snapshots) *
               (sigs[n] * sigs[n].adjoint());
      }
    }
  }

  SnapshotBatch batch;
  batch.snapshots = snapshots;
  batch.data = CMatrix::Zero(m, snapshots);
  const double noise_scale = std::sqrt(scenario.noise_power);

  for (int n = 0; n < snapshots; ++n) {
    CVector x = CVector::Zero(m);
    for (int k = 0; k < k_total; ++k) {
      const Complex s = std::sqrt(scenario.sources[k].power) *
                        rng.circular_gaussian();
      const auto& sig = (k == 0) ? soi_signature
                                 : (interferer_sigs[k - 1].size() == 1
                                        ? interferer_sigs[k - 1][0]
                                        : interferer_sigs[k - 1][n]);
      x += sig * s;
    }
    for (int i = 0; i < m; ++i) {
      x[i] += noise_scale * rng.circular_gaussian();
    }
    batch.data.col(n) = x;
  }

  batch.truth.source_directions_deg = directions;
  batch.truth.soi_signature = soi_signature;
  batch.truth.soi_power = scenario.sources.front().power;
  batch.truth.ipn_covariance = 0.5 * (ipn + CMatrix(ipn.adjoint()));
  return batch;
}

Scenario scenario_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario config: ") + e.what());
  }
  try {
    Scenario sc;
    if (doc.contains("array")) {
      const auto& arr = doc.at("array");
      sc.array.elements = arr.value("elements", sc.array.elements);
      sc.array.spacing_wavelengths =
          arr.value("spacing_wavelengths", sc.array.spacing_wavelengths);
      sc.array.grid_step_deg =
          arr.value("grid_step_deg", sc.array.grid_step_deg);
    }
    sc.noise_power = doc.value("noise_power", sc.noise_power);
    sc.seed = doc.value("seed", sc.seed);
    if (!doc.contains("sources") || !doc.at("sources").is_array()) {
      throw std::invalid_argument("scenario config: missing sources array");
    }
    for (const auto& s : doc.at("sources")) {
      SourceSpec src;
      src.direction_deg = s.at("direction_deg").get<double>();
      src.power = sc.noise_power * db_to_linear(s.at("power_db").get<double>());
      const std::string kind = s.value("kind", std::string("interferer"));
      if (kind == "soi") {
        src.kind = SourceKind::Soi;
      } else if (kind == "interferer") {
        src.kind = SourceKind::Interferer;
      } else {
        throw std::invalid_argument("scenario config: unknown source kind '" +
                                    kind + "'");
      }
      sc.sources.push_back(src);
    }
    if (doc.contains("interferer_drift_deg")) {
      sc.interferer_drift_deg =
          doc.at("interferer_drift_deg").get<std::vector<double>>();
    }
    if (doc.contains("mismatch")) {
      const auto& mm = doc.at("mismatch");
      const std::string type = mm.value("type", std::string("none"));
      if (type == "none") {
        sc.mismatch.kind = MismatchKind::None;
      } else if (type == "look_direction") {
        sc.mismatch.kind = MismatchKind::LookDirection;
        sc.mismatch.look_bound_deg =
            mm.value("bound_deg", sc.mismatch.look_bound_deg);
      } else if (type == "gain_phase") {
        sc.mismatch.kind = MismatchKind::GainPhase;
        sc.mismatch.gain_sigma = mm.value("gain_sigma", sc.mismatch.gain_sigma);
        sc.mismatch.phase_sigma =
            mm.value("phase_sigma_rad", sc.mismatch.phase_sigma);
      } else if (type == "coherent_scattering") {
        sc.mismatch.kind = MismatchKind::CoherentScattering;
        sc.mismatch.scatter_paths =
            mm.value("paths", sc.mismatch.scatter_paths);
        sc.mismatch.scatter_spread_deg =
            mm.value("spread_deg", sc.mismatch.scatter_spread_deg);
      } else {
        throw std::invalid_argument("scenario config: unknown mismatch type '" +
                                    type + "'");
      }
    }
    validate_scenario(sc);
    return sc;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario config: ") + e.what());
  }
}

Scenario scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("scenario config: cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json(buffer.str());
}

Scenario example_scenario(int example, double snr_db) {
  if (example < 1 || example > 4) {
    throw std::invalid_argument("example_scenario: example must be 1..4");
  }
  Scenario sc;
  sc.array = ArraySpec{20, 0.5, 0.9};
  sc.noise_power = 1.0;
  sc.sources = {
      {10.0, db_to_linear(snr_db), SourceKind::Soi},
      {-50.0, db_to_linear(30.0), SourceKind::Interferer},
      {30.0, db_to_linear(30.0), SourceKind::Interferer},
  };
  switch (example) {
    case 1:
      sc.mismatch.kind = MismatchKind::None;
      break;
    case 2:
      sc.mismatch.kind = MismatchKind::LookDirection;
      sc.mismatch.look_bound_deg = 5.0;
      break;
    case 3:
      sc.mismatch.kind = MismatchKind::GainPhase;
      sc.mismatch.gain_sigma = 0.05;
      sc.mismatch.phase_sigma = 0.025 * kPi;
      break;
    case 4:
      sc.mismatch.kind = MismatchKind::CoherentScattering;
      sc.mismatch.scatter_paths = 4;
      sc.mismatch.scatter_spread_deg = 2.0;
      break;
  }
  return sc;
}

}  // namespace pseur
