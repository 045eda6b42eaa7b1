#include "pseur/linalg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pseur {

double hermitian_asymmetry(const CMatrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix& a, double relative_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return hermitian_asymmetry(a) <= relative_tol * scale;
}

void require_hermitian(const CMatrix& a, const char* context,
                       double relative_tol) {
  if (a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << context << ": matrix is " << a.rows() << "x" << a.cols()
        << ", expected square";
    throw std::invalid_argument(msg.str());
  }
  if (!is_hermitian(a, relative_tol)) {
    std::ostringstream msg;
    msg << context << ": matrix is not Hermitian (max asymmetry "
        << hermitian_asymmetry(a) << ", max entry " << a.cwiseAbs().maxCoeff()
        << ")";
    throw std::invalid_argument(msg.str());
  }
}

EigenSystem hermitian_eig(const CMatrix& a) {
  require_hermitian(a, "hermitian_eig");
  if (a.rows() < 1) {
    throw std::invalid_argument("hermitian_eig: empty matrix");
  }
  // Symmetrize before factorizing so round-off asymmetry cannot leak through.
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
  }

  const Eigen::Index n = a.rows();
  EigenSystem out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();

  // Deterministic phase: rotate each column so its largest-magnitude entry
  // is real positive (first index wins ties).
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const double mag = std::abs(out.vectors(r, c));
      if (mag > best) {
        best = mag;
        imax = r;
      }
    }
    if (best > 0.0) {
      const Complex phase = out.vectors(imax, c) / best;
      out.vectors.col(c) *= std::conj(phase);
    }
  }
  return out;
}

EigenSystem truncate_eigensystem(const EigenSystem& eig,
                                 double relative_threshold) {
  EigenSystem out;
  const Eigen::Index n = eig.values.size();
  if (n == 0) {
    out.values = eig.values;
    out.vectors = eig.vectors;
    return out;
  }
  const double cutoff = relative_threshold * std::max(eig.values[0], 0.0);
  Eigen::Index keep = 0;
  while (keep < n && eig.values[keep] > 0.0 && eig.values[keep] >= cutoff) {
    ++keep;
  }
  out.values = eig.values.head(keep);
  out.vectors = eig.vectors.leftCols(keep);
  return out;
}

double bessel_j0(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("bessel_j0: non-finite argument");
  }
  x = std::abs(x);
  if (x < 12.0) {
    // sum_k (-1)^k (x^2/4)^k / (k!)^2
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 64; ++k) {
      term *= -q / (static_cast<double>(k) * static_cast<double>(k));
      sum += term;
      if (std::abs(term) < 1e-18) break;
    }
    return sum;
  }
  // Hankel expansion: J0(x) = sqrt(2/(pi x)) [P cos(chi) - Q sin(chi)],
  // chi = x - pi/4. Terms follow s_m = s_{m-1} * (-(2m-1)^2) / (8 m x);
  // even m feed P, odd m feed Q, truncated at the smallest term.
  double s = 1.0;
  double p = 1.0;
  double q = 0.0;
  for (int m = 1; m <= 60; ++m) {
    const double odd = 2.0 * m - 1.0;
    const double next = s * (-odd * odd) / (8.0 * m * x);
    if (std::abs(next) >= std::abs(s)) break;  // divergence onset
    s = next;
    if (m % 2 == 1) {
      q += (((m - 1) / 2) % 2 == 0 ? 1.0 : -1.0) * s;
    } else {
      p += ((m / 2) % 2 == 0 ? 1.0 : -1.0) * s;
    }
    if (std::abs(s) < 1e-18) break;
  }
  const double chi = x - 0.25 * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

RMatrix bessel_matrix(int elements) {
  if (elements < 1) {
    throw std::invalid_argument("bessel_matrix: need at least one element");
  }
  std::vector<double> lags(elements);
  for (int k = 0; k < elements; ++k) {
    lags[k] = bessel_j0(static_cast<double>(k) * kPi);
  }
  RMatrix b(elements, elements);
  for (int r = 0; r < elements; ++r) {
    for (int c = 0; c < elements; ++c) {
      b(r, c) = lags[std::abs(r - c)];
    }
  }
  return b;
}

CMatrix woodbury_inverse(double low_level, double high_level,
                         const EigenSystem& retained) {
  if (!(low_level > 0.0) || !(high_level > low_level)) {
    throw std::invalid_argument(
        "woodbury_inverse: requires high_level > low_level > 0");
  }
  if (retained.vectors.cols() != retained.values.size()) {
    throw std::invalid_argument(
        "woodbury_inverse: eigensystem value/vector count mismatch");
  }
  const Eigen::Index m = retained.dimension();
  const double scale = 1.0 / (kTwoPi * low_level);
  const Eigen::Index r = retained.rank();
  if (r == 0) {
    return scale * CMatrix::Identity(m, m);
  }
  for (Eigen::Index i = 0; i < r; ++i) {
    if (!(retained.values[i] > 0.0)) {
      throw std::invalid_argument(
          "woodbury_inverse: retained eigenvalues must be positive");
    }
  }
  const CMatrix& basis = retained.vectors;
  const double ratio = kTwoPi * low_level / (high_level - low_level);
  CMatrix core = basis.adjoint() * basis;  // = I for orthonormal input
  for (Eigen::Index i = 0; i < r; ++i) {
    core(i, i) += ratio / retained.values[i];
  }
  const CMatrix solved = Eigen::LDLT<CMatrix>(core).solve(basis.adjoint());
  CMatrix out = -basis * solved;
  out.diagonal().array() += 1.0;
  out *= scale;
  return 0.5 * (out + CMatrix(out.adjoint()));
}

}  // namespace pseur
