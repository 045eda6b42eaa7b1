#include "pseur/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pseur {

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Eigen::Index> local_minima(const RVector& s) {
  std::vector<Eigen::Index> idx;
  const Eigen::Index n = s.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool left_ok = (i == 0) || (s[i] < s[i - 1]);
    const bool right_ok = (i == n - 1) || (s[i] <= s[i + 1]);
    if (left_ok && right_ok) idx.push_back(i);
  }
  return idx;
}

}  // namespace

CMatrix sample_covariance(const SnapshotBatch& batch) {
  if (batch.snapshots < 1 || batch.data.cols() < 1) {
    throw std::invalid_argument("sample_covariance: empty batch");
  }
  CMatrix r = (batch.data * batch.data.adjoint()) /
              static_cast<double>(batch.data.cols());
  return 0.5 * (r + CMatrix(r.adjoint()));
}

SubspacePartition partition_subspaces(const EigenSystem& eig,
                                      int source_count) {
  const Eigen::Index m = eig.rank();
  if (source_count < 1 || source_count >= m) {
    throw std::invalid_argument(
        "partition_subspaces: source count must satisfy 1 <= K < M");
  }
  SubspacePartition part;
  part.signal_basis = eig.vectors.leftCols(source_count);
  part.noise_basis = eig.vectors.rightCols(m - source_count);
  part.signal_values = eig.values.head(source_count);
  part.noise_values = eig.values.tail(m - source_count);
  return part;
}

double estimate_noise_power(const SubspacePartition& partition,
                            NoisePowerMode mode) {
  const Eigen::Index n = partition.noise_values.size();
  if (n < 1) {
    throw std::invalid_argument("estimate_noise_power: empty noise subspace");
  }
  if (mode == NoisePowerMode::Mean) {
    return partition.noise_values.mean();
  }
  return partition.noise_values.array().square().mean();
}

RVector angle_grid(const ArraySpec& spec) {
  if (!(spec.grid_step_deg > 0.0)) {
    throw std::invalid_argument("angle_grid: step must be positive");
  }
  const int count =
      static_cast<int>(std::floor(180.0 / spec.grid_step_deg + 1e-9)) + 1;
  RVector grid(count);
  for (int i = 0; i < count; ++i) {
    grid[i] = -90.0 + i * spec.grid_step_deg;
  }
  return grid;
}

RVector music_null_spectrum(const CMatrix& noise_basis, const RVector& grid_deg,
                            const ArraySpec& spec) {
  if (noise_basis.rows() != spec.elements) {
    throw std::invalid_argument(
        "music_null_spectrum: noise basis rows must equal element count");
  }
  RVector s(grid_deg.size());
  for (Eigen::Index i = 0; i < grid_deg.size(); ++i) {
    const CVector a = steering_vector(grid_deg[i], spec);
    s[i] = (noise_basis.adjoint() * a).squaredNorm();
  }
  return s;
}

std::vector<double> music_doas(const CMatrix& noise_basis,
                               const RVector& grid_deg, const ArraySpec& spec,
                               int source_count) {
  if (source_count < 1) {
    throw std::invalid_argument("music_doas: source count must be positive");
  }
  const RVector s = music_null_spectrum(noise_basis, grid_deg, spec);
  auto minima = local_minima(s);
  if (static_cast<int>(minima.size()) < source_count) {
    throw std::runtime_error(
        "music_doas: under-resolved sources (fewer local minima than sources)");
  }
  std::sort(minima.begin(), minima.end(),
            [&s](Eigen::Index a, Eigen::Index b) {
              if (s[a] != s[b]) return s[a] < s[b];
              return a < b;
            });
  minima.resize(source_count);
  std::vector<double> doas(source_count);
  for (int k = 0; k < source_count; ++k) doas[k] = grid_deg[minima[k]];
  std::sort(doas.begin(), doas.end());
  return doas;
}

double snapshot_doa(const CVector& snapshot, double center_deg,
                    double halfwidth_deg, const ArraySpec& spec) {
  if (!(halfwidth_deg >= 0.0)) {
    throw std::invalid_argument("snapshot_doa: negative scan half-width");
  }
  const double step = spec.grid_step_deg;
  const int reach = static_cast<int>(std::floor(halfwidth_deg / step + 1e-9));
  double best_value = -1.0;
  double best_theta = center_deg;
  bool any = false;
  for (int k = -reach; k <= reach; ++k) {
    const double theta = center_deg + k * step;
    if (theta < -90.0 || theta > 90.0) continue;
    any = true;
    const double value =
        std::abs(snapshot.dot(steering_vector(theta, spec)));
    const bool closer =
        std::abs(theta - center_deg) < std::abs(best_theta - center_deg);
    if (value > best_value || (value == best_value && closer)) {
      best_value = value;
      best_theta = theta;
    }
  }
  if (!any) {
    throw std::invalid_argument("snapshot_doa: empty sector grid");
  }
  return best_theta;
}

std::vector<double> drift_inversion(const std::vector<double>& doas_deg,
                                    double center_deg,
                                    double well_conditioned_fraction) {
  const int n = static_cast<int>(doas_deg.size());
  if (n < 1) {
    throw std::invalid_argument("drift_inversion: empty estimate list");
  }
  std::vector<double> sweeps;
  sweeps.reserve(n);
  const double cutoff = well_conditioned_fraction * n;
  for (int t = 1; t <= n; ++t) {
    const double denom = 2.0 * t - n;
    if (std::abs(denom) < cutoff) continue;
    sweeps.push_back((2.0 * n / denom) * (doas_deg[t - 1] - center_deg));
  }
  return sweeps;
}

AngularSector uncertainty_width(const std::vector<double>& doas_deg,
                                double center_deg, double scan_halfwidth_deg,
                                double grid_step_deg,
                                double well_conditioned_fraction) {
  if (doas_deg.size() < 2) {
    throw std::invalid_argument("uncertainty_width: need at least 2 snapshots");
  }
  auto sweeps = drift_inversion(doas_deg, center_deg, well_conditioned_fraction);
  AngularSector sector;
  sector.center_deg = center_deg;
  if (sweeps.empty()) {
    sector.half_width_deg = grid_step_deg;
    return sector;
  }
  for (double& v : sweeps) v = std::abs(v);
  sector.half_width_deg =
      std::min(0.5 * median_of(std::move(sweeps)), scan_halfwidth_deg);
  return sector;
}

int detect_source_count(const RVector& eigenvalues) {
  const Eigen::Index m = eigenvalues.size();
  if (m < 2) {
    throw std::invalid_argument("detect_source_count: need at least 2 values");
  }
  std::vector<double> v(eigenvalues.data(), eigenvalues.data() + m);
  const double med = median_of(std::move(v));
  int count = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (eigenvalues[i] > 10.0 * med) ++count;
  }
  return std::clamp(count, 1, static_cast<int>(m) - 1);
}

DirectionSelection select_directions(const RVector& null_spectrum,
                                     const RVector& grid_deg,
                                     double presumed_soi_deg, int source_count,
                                     double desired_halfwidth_deg,
                                     double accept_ratio) {
  if (null_spectrum.size() != grid_deg.size() || grid_deg.size() < 3) {
    throw std::invalid_argument("select_directions: spectrum/grid mismatch");
  }
  DirectionSelection sel;
  sel.soi_deg = presumed_soi_deg;

  // SOI refinement: argmin inside the desired sector, accepted only when the
  // dip is clearly below the ambient spectrum level.
  std::vector<double> all(null_spectrum.data(),
                          null_spectrum.data() + null_spectrum.size());
  const double ambient = median_of(std::move(all));
  double best = -1.0;
  for (Eigen::Index i = 0; i < grid_deg.size(); ++i) {
    if (std::abs(grid_deg[i] - presumed_soi_deg) > desired_halfwidth_deg) {
      continue;
    }
    if (best < 0.0 || null_spectrum[i] < best) {
      best = null_spectrum[i];
      if (null_spectrum[i] < accept_ratio * ambient) {
        sel.soi_deg = grid_deg[i];
        sel.soi_refined = true;
      }
    }
  }

  // Interferers: deepest local minima outside the desired sector.
  auto minima = local_minima(null_spectrum);
  std::erase_if(minima, [&](Eigen::Index i) {
    return std::abs(grid_deg[i] - presumed_soi_deg) <= desired_halfwidth_deg;
  });
  std::sort(minima.begin(), minima.end(),
            [&](Eigen::Index a, Eigen::Index b) {
              if (null_spectrum[a] != null_spectrum[b]) {
                return null_spectrum[a] < null_spectrum[b];
              }
              return a < b;
            });
  const int wanted = std::max(source_count - 1, 0);
  if (static_cast<int>(minima.size()) > wanted) minima.resize(wanted);
  for (auto i : minima) sel.interferer_deg.push_back(grid_deg[i]);
  std::sort(sel.interferer_deg.begin(), sel.interferer_deg.end());
  return sel;
}

}  // namespace pseur
