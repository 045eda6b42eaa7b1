#include "pseur/beamforming.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace pseur {

namespace {

constexpr double kGainFloor = 1e-30;

// Inverse of the sample covariance, diagonal-loading by 1e-8 * trace / M
// when the batch cannot support a full-rank estimate.
CMatrix spectrum_inverse(const SnapshotBatch& batch) {
  CMatrix r = sample_covariance(batch);
  const Eigen::Index m = r.rows();
  if (batch.data.cols() < m) {
    r.diagonal().array() += 1e-8 * r.trace().real() / static_cast<double>(m);
  }
  Eigen::LDLT<CMatrix> ldlt(r);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    r.diagonal().array() += 1e-8 * r.trace().real() / static_cast<double>(m);
    ldlt.compute(r);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("baseline: sample covariance not invertible");
    }
  }
  CMatrix inv = ldlt.solve(CMatrix::Identity(m, m));
  return 0.5 * (inv + CMatrix(inv.adjoint()));
}

// Uniform midpoint samples over [-90, lo) U (hi, 90], allocated to the two
// intervals proportionally to width; returns angles and the shared spacing
// in radians.
std::pair<std::vector<double>, double> complement_samples(
    double presumed_soi_deg, double desired_halfwidth_deg, int total) {
  const double lo = presumed_soi_deg - desired_halfwidth_deg;
  const double hi = presumed_soi_deg + desired_halfwidth_deg;
  const double w_left = std::max(lo - (-90.0), 0.0);
  const double w_right = std::max(90.0 - hi, 0.0);
  const double width = w_left + w_right;
  if (!(width > 0.0) || total < 2) {
    throw std::invalid_argument(
        "baseline: empty interference region or too few samples");
  }
  int n_left = static_cast<int>(std::lround(total * w_left / width));
  const int min_left = w_left > 0.0 ? 1 : 0;
  const int max_left = total - (w_right > 0.0 ? 1 : 0);
  n_left = std::min(std::max(n_left, min_left), max_left);
  const int n_right = total - n_left;

  std::vector<double> angles;
  angles.reserve(total);
  for (int i = 0; i < n_left; ++i) {
    angles.push_back(-90.0 + (i + 0.5) * w_left / n_left);
  }
  for (int i = 0; i < n_right; ++i) {
    angles.push_back(hi + (i + 0.5) * w_right / n_right);
  }
  return {std::move(angles), deg2rad(width) / total};
}

double spectrum_density(const CMatrix& r_inv, const CVector& a,
                        bool max_entropy, double eps) {
  if (max_entropy) {
    const Complex proj = a.dot(r_inv.col(0));  // a^H R^{-1} u_1
    return 1.0 / (eps * std::max(std::norm(proj), kGainFloor));
  }
  return 1.0 / std::max((a.dot(r_inv * a)).real(), kGainFloor);
}

BeamformerWeights spectrum_reconstruction_weights(
    const SnapshotBatch& batch, double presumed_soi_deg, const ArraySpec& spec,
    int spectrum_samples, double desired_halfwidth_deg, bool max_entropy,
    const char* method) {
  const CMatrix r_inv = spectrum_inverse(batch);
  const auto [angles, spacing] = complement_samples(
      presumed_soi_deg, desired_halfwidth_deg, spectrum_samples);

  const int m = spec.elements;
  const double eps = 1.0 / r_inv(0, 0).real();
  CMatrix ipn = CMatrix::Zero(m, m);
  for (double theta : angles) {
    const CVector a = steering_vector(theta, spec);
    const double density = spectrum_density(r_inv, a, max_entropy, eps);
    ipn += density * spacing * (a * a.adjoint());
  }
  ipn = 0.5 * (ipn + CMatrix(ipn.adjoint()));

  Eigen::LDLT<CMatrix> ldlt(ipn);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("baseline: reconstructed covariance singular");
  }
  CMatrix ipn_inv = ldlt.solve(CMatrix::Identity(m, m));
  ipn_inv = 0.5 * (ipn_inv + CMatrix(ipn_inv.adjoint()));
  return mvdr_weights(ipn_inv, steering_vector(presumed_soi_deg, spec),
                      method);
}

}  // namespace

BeamformerWeights mvdr_weights(const CMatrix& r_inv, const CVector& assumed_soi,
                               std::string method) {
  if (r_inv.rows() != r_inv.cols() || r_inv.rows() != assumed_soi.size()) {
    throw std::invalid_argument("mvdr_weights: dimension mismatch");
  }
  const CVector r_a = r_inv * assumed_soi;
  const Complex quad = assumed_soi.dot(r_a);  // a^H R_inv a
  if (!std::isfinite(quad.real()) || quad.real() <= 0.0 ||
      std::abs(quad.imag()) > 1e-8 * std::abs(quad.real())) {
    throw std::runtime_error(
        "mvdr_weights: matrix is not positive definite at the look direction");
  }
  BeamformerWeights out;
  out.w = r_a / quad.real();
  out.method = std::move(method);
  out.assumed_soi = assumed_soi;
  return out;
}

RVector spatial_spectrum(const CMatrix& cov_inverse, const RVector& grid,
                         const ArraySpec& spec, bool max_entropy) {
  const double eps = 1.0 / cov_inverse(0, 0).real();
  RVector density(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    density[i] = spectrum_density(
        cov_inverse, steering_vector(grid[i], spec), max_entropy, eps);
  }
  return density;
}

double output_sinr_db(const BeamformerWeights& weights,
                      const SnapshotTruth& truth) {
  const double signal =
      truth.soi_power * std::norm(weights.w.dot(truth.soi_signature));
  const double residual =
      (weights.w.dot(truth.ipn_covariance * weights.w)).real();
  if (!(residual > 0.0)) {
    throw std::runtime_error("output_sinr_db: non-positive residual power");
  }
  return 10.0 * std::log10(std::max(signal, kGainFloor) / residual);
}

Beampattern beampattern(const BeamformerWeights& weights, const RVector& grid,
                        const ArraySpec& spec) {
  Beampattern pattern;
  pattern.theta_deg = grid;
  pattern.gain_db.resize(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double mag = std::abs(weights.w.dot(steering_vector(grid[i], spec)));
    pattern.gain_db[i] = 20.0 * std::log10(std::max(mag, kGainFloor));
  }
  return pattern;
}

double notch_prediction(const ReconstructionProduct& recon,
                        const CVector& assumed_soi, double theta_deg,
                        const ArraySpec& spec) {
  bool inside = false;
  for (const auto& sector : recon.spectrum.sectors) {
    if (theta_deg >= sector.lo() && theta_deg <= sector.hi()) {
      inside = true;
      break;
    }
  }
  if (!inside) {
    throw std::invalid_argument(
        "notch_prediction: angle lies outside every reconstruction sector");
  }
  const EigenSystem& retained = recon.partial_eig;
  if (retained.rank() == 0) {
    throw std::invalid_argument("notch_prediction: empty eigensystem");
  }
  const double low = recon.spectrum.low_level;
  const double delta = recon.spectrum.sector_levels.empty()
                           ? recon.spectrum.high_level - low
                           : 1.0;

  const CVector coeffs = retained.vectors.adjoint() * assumed_soi;
  const CVector basis_fit =
      retained.vectors.adjoint() * steering_vector(theta_deg, spec);
  Complex acc(0.0, 0.0);
  for (Eigen::Index r = 0; r < retained.rank(); ++r) {
    acc += std::conj(basis_fit[r]) * coeffs[r] /
           (kTwoPi * low + retained.values[r] * delta);
  }
  return kTwoPi * low * std::abs(acc) / assumed_soi.squaredNorm();
}

BeamformerWeights baseline_optimal(const SnapshotTruth& truth) {
  const Eigen::Index m = truth.ipn_covariance.rows();
  Eigen::LDLT<CMatrix> ldlt(truth.ipn_covariance);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("baseline_optimal: truth covariance singular");
  }
  CMatrix inv = ldlt.solve(CMatrix::Identity(m, m));
  inv = 0.5 * (inv + CMatrix(inv.adjoint()));
  return mvdr_weights(inv, truth.soi_signature, "OPTIMAL");
}

BeamformerWeights baseline_smi(const SnapshotBatch& batch,
                               const CVector& assumed_soi, double loading) {
  if (loading < 0.0) {
    throw std::invalid_argument("baseline_smi: negative loading");
  }
  const Eigen::Index m = batch.data.rows();
  if (loading == 0.0 && batch.data.cols() < m) {
    throw std::invalid_argument(
        "baseline_smi: sample covariance is singular with fewer snapshots "
        "than elements; set a loading level > 0");
  }
  CMatrix r = sample_covariance(batch);
  r.diagonal().array() += loading;
  Eigen::LDLT<CMatrix> ldlt(r);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("baseline_smi: covariance not invertible");
  }
  CMatrix inv = ldlt.solve(CMatrix::Identity(m, m));
  inv = 0.5 * (inv + CMatrix(inv.adjoint()));
  return mvdr_weights(inv, assumed_soi, "SMI");
}

BeamformerWeights baseline_capon_ipn(const SnapshotBatch& batch,
                                     double presumed_soi_deg,
                                     const ArraySpec& spec,
                                     int spectrum_samples,
                                     double desired_halfwidth_deg) {
  return spectrum_reconstruction_weights(batch, presumed_soi_deg, spec,
                                         spectrum_samples,
                                         desired_halfwidth_deg, false,
                                         "IPN-CC");
}

BeamformerWeights baseline_meps_ipn(const SnapshotBatch& batch,
                                    double presumed_soi_deg,
                                    const ArraySpec& spec,
                                    int spectrum_samples,
                                    double desired_halfwidth_deg) {
  return spectrum_reconstruction_weights(batch, presumed_soi_deg, spec,
                                         spectrum_samples,
                                         desired_halfwidth_deg, true,
                                         "IPN-MEPS");
}

}  // namespace pseur
