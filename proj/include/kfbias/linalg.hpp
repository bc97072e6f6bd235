#pragma once

#include <Eigen/Dense>
#include <string>

namespace kfbias {

/// Dense real matrices/vectors used throughout the library. Row-major ordering
/// is honored wherever matrices cross a serialization boundary; in memory the
/// storage layout is Eigen's default.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Returns (m + m^T)/2 after checking that the asymmetry max|m - m^T| does not
/// exceed `tol`. Throws std::invalid_argument naming `what` otherwise.
Matrix symmetrize(const Matrix& m, double tol = 1e-8,
                  const std::string& what = "matrix");

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

/// True if the symmetric matrix is positive semidefinite within `tol`
/// (smallest eigenvalue >= -tol).
bool is_psd(const Matrix& m, double tol = 1e-9);

/// True if max|a - b| <= tol.
bool approx_equal(const Matrix& a, const Matrix& b, double tol);

/// Spectral radius (largest |eigenvalue|) of a square, possibly
/// non-symmetric matrix.
double spectral_radius(const Matrix& m);

}  // namespace kfbias
