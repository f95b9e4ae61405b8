#pragma once

#include <cstddef>
#include <optional>

#include "gram_spectra/dense_matrix.hpp"

namespace gram_spectra::linalg {

/// Thin SVD: A = U diag(s) Vᵀ with U (rows×k), V (cols×k), k = min(rows, cols).
struct SvdResult {
  DenseMatrix u;
  Vector s;  // non-increasing, non-negative
  DenseMatrix v;
};

/// Extreme singular values and condition number of one matrix.
struct SpectralSummary {
  double s_max = 0.0;
  double s_min = 0.0;  // the min(rows, cols)-th singular value
  double kappa = 1.0;  // s_max / s_min, +inf when s_min == 0
  Vector spectrum;     // non-increasing
};

/// Symmetric eigendecomposition; column i of `vectors` pairs with values[i].
struct EigenDecomposition {
  Vector values;  // non-increasing
  DenseMatrix vectors;
};

/// Full thin SVD.
///
/// Householder QR with column pivoting reduces the matrix to a square
/// triangular factor R; one-sided Jacobi rotations then orthogonalize the rows
/// of R (equivalently the columns of Rᵀ). Jacobi keeps small singular values
/// accurate to high relative precision, which is what the condition-number
/// statistics depend on. Wide inputs are handled through the transpose.
///
/// Throws ValidationError on non-finite input.
SvdResult svd(const DenseMatrix& a);

/// Singular values only, same algorithm without accumulating U or V.
Vector singular_values(const DenseMatrix& a);

SpectralSummary spectral_summary(const DenseMatrix& a);

/// Builds a summary from a non-increasing spectrum.
SpectralSummary summarize_spectrum(Vector spectrum);

/// Cyclic Jacobi eigensolver. Input must be symmetric to 1e-12 relative.
EigenDecomposition sym_eig(const DenseMatrix& s);

/// Eigenvalues only.
Vector sym_eigenvalues(const DenseMatrix& s);

/// PSD square root. Eigenvalues down to -1e-10 * max|λ| are clamped to zero;
/// anything more negative is rejected.
DenseMatrix sqrt_psd(const DenseMatrix& s);

/// max(rows, cols) · machine epsilon · s_max.
double default_rank_tol(std::size_t rows, std::size_t cols, double s_max);

/// Moore–Penrose pseudo-inverse; singular values below rank_tol are dropped.
DenseMatrix pinv(const DenseMatrix& a, std::optional<double> rank_tol = std::nullopt);

std::size_t numerical_rank(const DenseMatrix& a, std::optional<double> rank_tol = std::nullopt);

double spectral_norm(const DenseMatrix& a);

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
double symmetric_spectral_norm(const DenseMatrix& s);

}  // namespace gram_spectra::linalg
