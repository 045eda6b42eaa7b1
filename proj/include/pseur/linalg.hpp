#pragma once

#include "pseur/types.hpp"

namespace pseur {

/// Eigendecomposition of a Hermitian matrix. Eigenvalues are real and sorted
/// descending; eigenvectors are orthonormal columns with a deterministic
/// phase: the largest-magnitude entry of each column is real and positive,
/// which keeps downstream CSV output reproducible.
struct EigenSystem {
  RVector values;   // descending
  CMatrix vectors;  // one orthonormal column per value, row count = n

  Eigen::Index rank() const { return values.size(); }
  Eigen::Index dimension() const { return vectors.rows(); }
};

/// max_ij |A - A^H| (entrywise magnitude).
double hermitian_asymmetry(const CMatrix& a);

/// True when max|A - A^H| <= tol * max|A|.
bool is_hermitian(const CMatrix& a, double relative_tol = 1e-12);

/// Throws std::invalid_argument when the matrix fails the Hermitian check.
void require_hermitian(const CMatrix& a, const char* context,
                       double relative_tol = 1e-12);

/// Full eigendecomposition of a Hermitian matrix (see EigenSystem for the
/// ordering and phase conventions). Rejects non-Hermitian input.
EigenSystem hermitian_eig(const CMatrix& a);

/// Keep only eigenpairs with value >= relative_threshold * max value
/// (and > 0). The truncated system keeps the original row dimension.
EigenSystem truncate_eigensystem(const EigenSystem& eig,
                                 double relative_threshold);

/// Bessel function of the first kind, order zero. Power series for |x| < 12,
/// Hankel asymptotic expansion beyond; absolute error below 1e-10 over the
/// range needed for arrays of up to a few hundred elements.
double bessel_j0(double x);

/// Symmetric matrix with entry (l, m) = J0(|l - m| * pi). Equals
/// 1/(2*pi) times the integral of a(theta) a^H(theta) over a full period
/// for a half-wavelength-spaced array.
RMatrix bessel_matrix(int elements);

/// Inverse of  2*pi*low_level*I + (high_level - low_level) * V diag(w) V^H
/// via the Woodbury identity, where `retained` holds the (truncated)
/// eigensystem {w, V}. Low-rank work only: one R x R solve.
/// Requires high_level > low_level > 0 and strictly positive retained values.
CMatrix woodbury_inverse(double low_level, double high_level,
                         const EigenSystem& retained);

}  // namespace pseur
