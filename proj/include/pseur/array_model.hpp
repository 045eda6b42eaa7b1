#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pseur/rng.hpp"
#include "pseur/types.hpp"

namespace pseur {

/// Half-width of the protected sector around the presumed look direction.
/// Baseline reconstructions exclude it; scenario validation requires every
/// interferer to sit outside it.
inline constexpr double kDesiredSectorHalfWidthDeg = 6.0;

struct ArraySpec {
  int elements = 20;
  double spacing_wavelengths = 0.5;  // d / lambda
  double grid_step_deg = 0.9;
};

enum class SourceKind { Soi, Interferer };

struct SourceSpec {
  double direction_deg = 0.0;  // in (-90, 90)
  double power = 1.0;          // linear
  SourceKind kind = SourceKind::Interferer;
};

enum class MismatchKind { None, LookDirection, GainPhase, CoherentScattering };

struct MismatchSpec {
  MismatchKind kind = MismatchKind::None;
  double look_bound_deg = 5.0;           // LookDirection: offset ~ U[-b, b]
  double gain_sigma = 0.05;              // GainPhase: amplitude error std
  double phase_sigma = 0.025 * kPi;      // GainPhase: phase error std (rad)
  int scatter_paths = 4;                 // CoherentScattering
  double scatter_spread_deg = 2.0;       // CoherentScattering: path std
};

struct Scenario {
  ArraySpec array;
  std::vector<SourceSpec> sources;  // first entry is the SOI
  double noise_power = 1.0;
  MismatchSpec mismatch;
  std::vector<double> interferer_drift_deg;  // total sweep per interferer
  std::uint64_t seed = 1;

  const SourceSpec& soi() const { return sources.front(); }
  int interferer_count() const { return static_cast<int>(sources.size()) - 1; }
};

struct SnapshotTruth {
  RMatrix source_directions_deg;  // K x N, row 0 = SOI
  CVector soi_signature;          // actual (possibly mismatched) signature
  double soi_power = 0.0;
  CMatrix ipn_covariance;         // interference-plus-noise, time-averaged
};

struct SnapshotBatch {
  int snapshots = 0;
  CMatrix data;  // M x N, one column per snapshot
  SnapshotTruth truth;
};

/// Plane-wave array response, element m = exp(-j m 2*pi*(d/lambda) sin(theta)).
CVector steering_vector(double theta_deg, const ArraySpec& spec);

/// Response with per-element gain errors (1 + alpha_m) and phase errors
/// beta_m, in the same phase convention as steering_vector.
CVector perturbed_signature(double theta_deg, const RVector& gains,
                            const RVector& phases, const ArraySpec& spec);

/// Direct path plus coherently scattered rays at the given directions and
/// phases: a(theta) + sum_i exp(j phase_i) a(path_i).
CVector scattered_signature_from_paths(double theta_deg, const ArraySpec& spec,
                                       const std::vector<double>& path_deg,
                                       const std::vector<double>& path_phase);

/// Draws `paths` ray directions ~ N(theta_deg, spread_deg^2) and phases
/// ~ U[0, 2 pi), fixed per draw.
CVector scattered_signature(double theta_deg, const ArraySpec& spec, int paths,
                            double spread_deg, Rng& rng);

/// Linear drift across the observation interval: value n (1-based) is
/// center + (sweep/N) * (n - N/2). Total excursion equals `sweep_deg`.
std::vector<double> drift_directions(double center_deg, double sweep_deg,
                                     int snapshots);

/// Analytic covariance of the declared scenario with exact signatures and no
/// mismatch: sum of power * a a^H over sources plus noise_power * I.
CMatrix analytic_covariance(const Scenario& scenario);

/// Throws std::invalid_argument when the scenario breaks its contract
/// (one leading SOI, distinct directions, positive powers, SOI separated from
/// every interferer by more than the desired-sector half-width).
void validate_scenario(const Scenario& scenario);

/// Draws a synthetic batch: mismatch realization per run, then i.i.d.
/// circular Gaussian signals and noise per snapshot. Deterministic for a
/// fixed (scenario, seed); truth carries the actual signature, power and
/// time-averaged interference-plus-noise covariance.
SnapshotBatch synthesize(const Scenario& scenario, int snapshots);

/// Scenario JSON: keys mirror the Scenario fields, angles in degrees and
/// source powers in dB relative to the noise power.
Scenario scenario_from_json(const std::string& json_text);
Scenario scenario_from_file(const std::string& path);

/// Simulation-section scenarios 1..4: M=20 half-wavelength array, SOI at 10
/// deg, interferers at -50/30 deg with 30 dB INR, unit noise; example number
/// selects the mismatch model (none, look direction, gain/phase, scattering).
Scenario example_scenario(int example, double snr_db = 10.0);

}  // namespace pseur
