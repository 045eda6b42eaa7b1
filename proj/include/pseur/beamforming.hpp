#pragma once

#include <string>
#include <vector>

#include "pseur/array_model.hpp"
#include "pseur/estimation.hpp"
#include "pseur/reconstruction.hpp"

namespace pseur {

struct BeamformerWeights {
  CVector w;
  std::string method;
  CVector assumed_soi;  // steering vector the distortionless constraint uses
};

struct Beampattern {
  RVector theta_deg;
  RVector gain_db;  // 20 log10 |w^H a(theta)|, 0 dB at the assumed direction
};

/// Distortionless weights w = R_inv a / (a^H R_inv a). R_inv must be
/// Hermitian positive definite; a non-positive quadratic form is rejected.
BeamformerWeights mvdr_weights(const CMatrix& r_inv, const CVector& assumed_soi,
                               std::string method = "MVDR");

/// Output SINR in dB against the ground truth:
/// 10 log10( soi_power |w^H sig|^2 / (w^H R_ipn w) ).
double output_sinr_db(const BeamformerWeights& weights,
                      const SnapshotTruth& truth);

Beampattern beampattern(const BeamformerWeights& weights, const RVector& grid,
                        const ArraySpec& spec);

/// Closed-form magnitude of the beam response inside a reconstruction sector,
/// from the retained eigenpairs and the two spectrum levels. Valid only for
/// angles inside a sector; other angles are rejected.
double notch_prediction(const ReconstructionProduct& recon,
                        const CVector& assumed_soi, double theta_deg,
                        const ArraySpec& spec);

/// Angular power density used by the baseline reconstructions: the Capon
/// spectrum 1 / (a^H R^{-1} a), or the maximum-entropy form
/// 1 / (eps |a^H R^{-1} u1|^2) with eps = 1 / (u1^T R^{-1} u1).
RVector spatial_spectrum(const CMatrix& cov_inverse, const RVector& grid,
                         const ArraySpec& spec, bool max_entropy = false);

/// Reference beamformer built from the true interference-plus-noise
/// covariance and the true signature; attains the maximum output SINR.
BeamformerWeights baseline_optimal(const SnapshotTruth& truth);

/// Sample-matrix-inversion beamformer with optional diagonal loading.
/// Rejects the unloaded case when the sample covariance cannot be full rank.
BeamformerWeights baseline_smi(const SnapshotBatch& batch,
                               const CVector& assumed_soi,
                               double loading = 0.0);

/// Capon-spectrum reconstruction over the complement of the desired sector,
/// sampled at `spectrum_samples` points.
BeamformerWeights baseline_capon_ipn(const SnapshotBatch& batch,
                                     double presumed_soi_deg,
                                     const ArraySpec& spec,
                                     int spectrum_samples = 188,
                                     double desired_halfwidth_deg =
                                         kDesiredSectorHalfWidthDeg);

/// Maximum-entropy power spectrum variant of the same reconstruction.
BeamformerWeights baseline_meps_ipn(const SnapshotBatch& batch,
                                    double presumed_soi_deg,
                                    const ArraySpec& spec,
                                    int spectrum_samples = 188,
                                    double desired_halfwidth_deg =
                                        kDesiredSectorHalfWidthDeg);

}  // namespace pseur
