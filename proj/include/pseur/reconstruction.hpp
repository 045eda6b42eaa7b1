#pragma once

#include <vector>

#include "pseur/array_model.hpp"
#include "pseur/estimation.hpp"
#include "pseur/linalg.hpp"

namespace pseur {

/// Piecewise-constant angular power density: a floor `low_level` everywhere
/// and `high_level` over the interference sectors. `sector_levels`, when
/// non-empty, carries one high level per sector (optional extension; the
/// published form uses the single global level).
struct TwoLevelSpectrum {
  double low_level = 0.0;   // power per radian
  double high_level = 0.0;  // power per radian
  std::vector<AngularSector> sectors;
  std::vector<double> sector_levels;
};

struct InterferencePower {
  double power = 0.0;  // linear, clamped at zero
  bool clamped = false;
};

struct SectorSamples {
  std::vector<double> angles_deg;
  std::vector<int> sector_index;  // parallel to angles_deg
  double spacing_rad = 0.0;       // shared quadrature weight
};

struct ReconstructionProduct {
  TwoLevelSpectrum spectrum;
  CMatrix partial_cov;        // rank-truncated sector covariance
  EigenSystem partial_eig;    // retained eigenpairs of partial_cov
  CMatrix ipn;                // reconstructed interference-plus-noise matrix
  CMatrix ipn_inverse;        // Woodbury inverse of `ipn`
  int sample_count = 0;
  double sample_spacing_rad = 0.0;
};

/// Quasi-orthogonality power estimate for the source at steering vector
/// `steering`: mean of |a^H x|^2 over snapshots, noise-compensated and
/// normalized by ||a||^4. Negative raw estimates clamp to zero and are
/// flagged.
InterferencePower interference_power(const SnapshotBatch& batch,
                                     const CVector& steering,
                                     double noise_power_estimate);

struct SpectrumLevels {
  double low = 0.0;
  double high = 0.0;
};

/// Floor level = noise power / (2 pi); high level = strongest interferer
/// power + floor. Throws std::runtime_error when every interferer power is
/// zero (the reconstruction would degenerate to a scaled identity).
SpectrumLevels spectrum_levels(double noise_power_estimate,
                               const std::vector<double>& interferer_powers);

/// Merges overlapping sectors into a disjoint union, preserving order by
/// angle. Per-sector levels, if given, merge by maximum.
void merge_sectors(std::vector<AngularSector>& sectors,
                   std::vector<double>* levels = nullptr);

/// Distributes `samples` quadrature points over the disjoint sectors
/// proportionally to width with at least 3 per sector, midpoint-placed.
/// Shared spacing = total width / samples (radians). A zero-width union
/// degenerates to one center point per sector with spacing = grid step.
SectorSamples sector_sampling(const std::vector<AngularSector>& sectors,
                              int samples, double grid_step_deg);

/// Quadrature covariance sum_i a(theta_i) a^H(theta_i) * spacing.
CMatrix partial_covariance(const SectorSamples& samples, const ArraySpec& spec);

/// As above with one weight per sample (used by the per-sector level
/// extension).
CMatrix weighted_partial_covariance(const SectorSamples& samples,
                                    const std::vector<double>& weights,
                                    const ArraySpec& spec);

/// Assembles the reconstructed interference-plus-noise covariance
///   ipn = 2*pi*low * I + (high - low) * partial_cov
/// from the retained eigenpairs of the sector covariance, along with its
/// Woodbury inverse. `rank_threshold` controls the relative eigenvalue
/// cutoff.
ReconstructionProduct reconstruct(const TwoLevelSpectrum& spectrum,
                                  const EigenSystem& partial_eig, int elements,
                                  int sample_count, double sample_spacing_rad,
                                  double rank_threshold = 1e-8);

}  // namespace pseur
