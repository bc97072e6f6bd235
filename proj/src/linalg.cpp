#include "kfbias/linalg.hpp"

#include <stdexcept>

namespace kfbias {

Matrix symmetrize(const Matrix& m, double tol, const std::string& what) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(what + ": expected a square matrix, got " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol) {
    throw std::invalid_argument(what + ": asymmetry " + std::to_string(asym) +
                                " exceeds tolerance " + std::to_string(tol));
  }
  return 0.5 * (m + m.transpose());
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues().minCoeff();
}

bool is_psd(const Matrix& m, double tol) {
  return min_eigenvalue(m) >= -tol;
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.size() == 0) return true;
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

double spectral_radius(const Matrix& m) {
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace kfbias
