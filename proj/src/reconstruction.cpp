#include "pseur/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pseur {

InterferencePower interference_power(const SnapshotBatch& batch,
                                     const CVector& steering,
                                     double noise_power_estimate) {
  const Eigen::Index m = steering.size();
  if (batch.data.rows() != m) {
    throw std::invalid_argument(
        "interference_power: steering vector does not match batch");
  }
  const double norm2 = steering.squaredNorm();
  if (std::abs(norm2 - static_cast<double>(m)) > 1e-6 * m) {
    throw std::invalid_argument(
        "interference_power: steering vector must have squared norm M");
  }
  const Eigen::Index n = batch.data.cols();
  double mean_abs2 = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    mean_abs2 += std::norm(steering.dot(batch.data.col(j)));
  }
  mean_abs2 /= static_cast<double>(n);

  const double md = static_cast<double>(m);
  const double raw = (mean_abs2 - noise_power_estimate * md) / (md * md);
  InterferencePower out;
  out.clamped = raw < 0.0;
  out.power = std::max(raw, 0.0);
  return out;
}

SpectrumLevels spectrum_levels(double noise_power_estimate,
                               const std::vector<double>& interferer_powers) {
  if (!(noise_power_estimate > 0.0)) {
    throw std::invalid_argument(
        "spectrum_levels: noise power estimate must be positive");
  }
  if (interferer_powers.empty()) {
    throw std::invalid_argument("spectrum_levels: no interferers");
  }
  const double strongest =
      *std::max_element(interferer_powers.begin(), interferer_powers.end());
  if (!(strongest > 0.0)) {
    throw std::runtime_error(
        "spectrum_levels: no interference detected; reconstruction would "
        "degenerate to a scaled identity");
  }
  SpectrumLevels levels;
  levels.low = noise_power_estimate / kTwoPi;
  levels.high = strongest + levels.low;
  return levels;
}

void merge_sectors(std::vector<AngularSector>& sectors,
                   std::vector<double>* levels) {
  if (sectors.size() < 2) return;
  std::vector<std::size_t> order(sectors.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sectors[a].lo() < sectors[b].lo();
  });

  std::vector<AngularSector> merged;
  std::vector<double> merged_levels;
  for (std::size_t oi : order) {
    const AngularSector& s = sectors[oi];
    const double level = levels ? (*levels)[oi] : 0.0;
    if (!merged.empty() && s.lo() <= merged.back().hi()) {
      const double lo = merged.back().lo();
      const double hi = std::max(merged.back().hi(), s.hi());
      merged.back().center_deg = 0.5 * (lo + hi);
      merged.back().half_width_deg = 0.5 * (hi - lo);
      if (levels) {
        merged_levels.back() = std::max(merged_levels.back(), level);
      }
    } else {
      merged.push_back(s);
      if (levels) merged_levels.push_back(level);
    }
  }
  sectors = std::move(merged);
  if (levels) *levels = std::move(merged_levels);
}

SectorSamples sector_sampling(const std::vector<AngularSector>& sectors,
                              int samples, double grid_step_deg) {
  const int count = static_cast<int>(sectors.size());
  if (count < 1) {
    throw std::invalid_argument("sector_sampling: no sectors");
  }
  double total_width = 0.0;
  for (const auto& s : sectors) {
    if (s.half_width_deg < 0.0) {
      throw std::invalid_argument("sector_sampling: negative sector width");
    }
    total_width += s.width();
  }

  SectorSamples out;
  if (total_width == 0.0) {
    for (int s = 0; s < count; ++s) {
      out.angles_deg.push_back(sectors[s].center_deg);
      out.sector_index.push_back(s);
    }
    out.spacing_rad = deg2rad(grid_step_deg);
    return out;
  }

  if (samples < 3 * count) {
    throw std::invalid_argument(
        "sector_sampling: need at least 3 samples per sector");
  }

  // Proportional allocation, largest remainder, then a floor of 3 each.
  std::vector<int> alloc(count);
  std::vector<std::pair<double, int>> remainder(count);
  int assigned = 0;
  for (int s = 0; s < count; ++s) {
    const double share = samples * sectors[s].width() / total_width;
    alloc[s] = static_cast<int>(std::floor(share + 1e-12));
    remainder[s] = {share - alloc[s], s};
    assigned += alloc[s];
  }
  std::sort(remainder.begin(), remainder.end(), [](const auto& a,
                                                   const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; assigned < samples; ++i) {
    ++alloc[remainder[i % count].second];
    ++assigned;
  }
  for (int s = 0; s < count; ++s) {
    while (alloc[s] < 3) {
      const int donor = static_cast<int>(std::distance(
          alloc.begin(), std::max_element(alloc.begin(), alloc.end())));
      --alloc[donor];
      ++alloc[s];
    }
  }

  for (int s = 0; s < count; ++s) {
    const double width = sectors[s].width();
    const double lo = sectors[s].lo();
    for (int i = 0; i < alloc[s]; ++i) {
      const double theta =
          (width == 0.0) ? sectors[s].center_deg
                         : lo + (i + 0.5) * width / alloc[s];
      out.angles_deg.push_back(theta);
      out.sector_index.push_back(s);
    }
  }
  out.spacing_rad = deg2rad(total_width) / samples;
  return out;
}

CMatrix partial_covariance(const SectorSamples& samples,
                           const ArraySpec& spec) {
  if (samples.angles_deg.empty()) {
    throw std::invalid_argument("partial_covariance: no samples");
  }
  const int m = spec.elements;
  CMatrix r = CMatrix::Zero(m, m);
  for (double theta : samples.angles_deg) {
    const CVector a = steering_vector(theta, spec);
    r += samples.spacing_rad * (a * a.adjoint());
  }
  return 0.5 * (r + CMatrix(r.adjoint()));
}

CMatrix weighted_partial_covariance(const SectorSamples& samples,
                                    const std::vector<double>& weights,
                                    const ArraySpec& spec) {
  if (samples.angles_deg.empty()) {
    throw std::invalid_argument("weighted_partial_covariance: no samples");
  }
  if (weights.size() != samples.angles_deg.size()) {
    throw std::invalid_argument(
        "weighted_partial_covariance: one weight per sample required");
  }
  const int m = spec.elements;
  CMatrix r = CMatrix::Zero(m, m);
  for (std::size_t i = 0; i < samples.angles_deg.size(); ++i) {
    const CVector a = steering_vector(samples.angles_deg[i], spec);
    r += weights[i] * samples.spacing_rad * (a * a.adjoint());
  }
  return 0.5 * (r + CMatrix(r.adjoint()));
}

ReconstructionProduct reconstruct(const TwoLevelSpectrum& spectrum,
                                  const EigenSystem& partial_eig, int elements,
                                  int sample_count, double sample_spacing_rad,
                                  double rank_threshold) {
  if (!(spectrum.low_level > 0.0)) {
    throw std::invalid_argument("reconstruct: low level must be positive");
  }
  const bool per_sector = !spectrum.sector_levels.empty();
  if (!per_sector && !(spectrum.high_level > spectrum.low_level)) {
    throw std::invalid_argument(
        "reconstruct: high level must exceed the low level");
  }
  // With per-sector levels the caller folds (level - low) into the sector
  // covariance before the eigendecomposition, so the update factor is one.
  const double factor =
      per_sector ? 1.0 : (spectrum.high_level - spectrum.low_level);

  EigenSystem retained = truncate_eigensystem(partial_eig, rank_threshold);
  if (retained.rank() > 0 && retained.dimension() != elements) {
    throw std::invalid_argument(
        "reconstruct: eigensystem dimension does not match element count");
  }
  if (retained.rank() == 0 && retained.dimension() != elements) {
    retained.vectors = CMatrix(elements, 0);
  }

  ReconstructionProduct product;
  product.spectrum = spectrum;
  product.partial_eig = retained;
  product.sample_count = sample_count;
  product.sample_spacing_rad = sample_spacing_rad;

  if (retained.rank() == 0) {
    product.partial_cov = CMatrix::Zero(elements, elements);
  } else {
    CMatrix rebuilt = retained.vectors *
                      retained.values.asDiagonal() *
                      retained.vectors.adjoint();
    product.partial_cov = 0.5 * (rebuilt + CMatrix(rebuilt.adjoint()));
  }

  CMatrix ipn = factor * product.partial_cov;
  ipn.diagonal().array() += kTwoPi * spectrum.low_level;
  product.ipn = 0.5 * (ipn + CMatrix(ipn.adjoint()));
  product.ipn_inverse = woodbury_inverse(
      spectrum.low_level, spectrum.low_level + factor, retained);
  return product;
}

}  // namespace pseur
