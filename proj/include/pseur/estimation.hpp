#pragma once

#include <vector>

#include "pseur/array_model.hpp"
#include "pseur/linalg.hpp"
#include "pseur/types.hpp"

namespace pseur {

struct SubspacePartition {
  CMatrix signal_basis;   // M x K
  CMatrix noise_basis;    // M x (M - K)
  RVector signal_values;  // descending
  RVector noise_values;   // descending
};

/// Angular interval (center - half_width, center + half_width) in degrees.
struct AngularSector {
  double center_deg = 0.0;
  double half_width_deg = 0.0;

  double lo() const { return center_deg - half_width_deg; }
  double hi() const { return center_deg + half_width_deg; }
  double width() const { return 2.0 * half_width_deg; }
};

enum class NoisePowerMode { Mean, PaperSquared };

/// (1/N) sum x(t_n) x^H(t_n); rejects an empty batch.
CMatrix sample_covariance(const SnapshotBatch& batch);

/// Splits the first `source_count` eigenpairs into the signal subspace and
/// the remainder into the noise subspace.
SubspacePartition partition_subspaces(const EigenSystem& eig, int source_count);

/// Mean of the noise eigenvalues, or mean of their squares in PaperSquared
/// mode (kept for fidelity experiments; the two coincide only at unit noise).
double estimate_noise_power(const SubspacePartition& partition,
                            NoisePowerMode mode = NoisePowerMode::Mean);

/// Scan grid covering [-90, 90] degrees at the spec's step.
RVector angle_grid(const ArraySpec& spec);

/// MUSIC null spectrum ||a^H(theta) U_n||_F^2 evaluated on the grid.
RVector music_null_spectrum(const CMatrix& noise_basis, const RVector& grid_deg,
                            const ArraySpec& spec);

/// The `source_count` deepest local minima of the null spectrum, sorted by
/// angle. Throws std::runtime_error when the grid is under-resolved.
std::vector<double> music_doas(const CMatrix& noise_basis,
                               const RVector& grid_deg, const ArraySpec& spec,
                               int source_count);

/// Per-snapshot correlation estimate: argmax |x^H a(theta)| over the sector
/// grid [center - halfwidth, center + halfwidth], ties resolved toward the
/// sector center.
double snapshot_doa(const CVector& snapshot, double center_deg,
                    double halfwidth_deg, const ArraySpec& spec);

/// Inverts the linear drift model per snapshot:
/// sweep(t_n) = (2N / (2 t_n - N)) * (doa(t_n) - center). Only the
/// well-conditioned snapshots with |2 t_n - N| >= fraction * N are returned
/// (the amplification factor stays <= 2/fraction); the midpoint snapshot of
/// an even-length batch is always excluded, so no division by zero occurs.
std::vector<double> drift_inversion(const std::vector<double>& doas_deg,
                                    double center_deg,
                                    double well_conditioned_fraction = 0.5);

/// Sector half-width = min(median |sweep(t_n)| / 2, scan_halfwidth). Falls
/// back to one grid step when every snapshot is excluded.
AngularSector uncertainty_width(const std::vector<double>& doas_deg,
                                double center_deg, double scan_halfwidth_deg,
                                double grid_step_deg,
                                double well_conditioned_fraction = 0.5);

/// Eigenvalue-gap source counter: eigenvalues above 10x the median count as
/// sources. Clamped to [1, M-1].
int detect_source_count(const RVector& eigenvalues);

/// Pipeline-facing split of the MUSIC spectrum into an assumed SOI direction
/// and interferer directions. The SOI is the in-sector argmin when its dip is
/// significant (value < accept_ratio x grid median), the presumed direction
/// otherwise; interferers are the deepest local minima outside the desired
/// sector, sorted by angle.
struct DirectionSelection {
  double soi_deg = 0.0;
  bool soi_refined = false;
  std::vector<double> interferer_deg;
};

DirectionSelection select_directions(const RVector& null_spectrum,
                                     const RVector& grid_deg,
                                     double presumed_soi_deg, int source_count,
                                     double desired_halfwidth_deg,
                                     double accept_ratio);

}  // namespace pseur
