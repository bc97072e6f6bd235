#include "kfbias/fusion.hpp"

#include <stdexcept>

namespace kfbias {

namespace {

Matrix inverse_spd(const Matrix& m, const std::string& what) {
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw std::invalid_argument(what + ": not positive definite");
  }
  return ldlt.solve(Matrix::Identity(m.rows(), m.cols()));
}

}  // namespace

EquivalentSensor fuse_identical_h(const SensorSuite& suite) {
  if (suite.sensors.empty()) {
    throw std::invalid_argument("suite.sensors: at least one sensor required");
  }
  const Matrix& h0 = suite.sensors.front().h;
  Matrix info = Matrix::Zero(h0.rows(), h0.rows());
  std::vector<Matrix> r_inv;
  r_inv.reserve(suite.sensors.size());
  for (const auto& s : suite.sensors) {
    if (s.h.rows() != h0.rows() || s.h.cols() != h0.cols() ||
        (s.h - h0).cwiseAbs().maxCoeff() > 0.0) {
      throw std::invalid_argument(
          "fuse_identical_h: sensor '" + s.name +
          "' does not share the common measurement map");
    }
    r_inv.push_back(inverse_spd(s.r, "sensor '" + s.name + "'.r"));
    info += r_inv.back();
  }
  EquivalentSensor eq;
  eq.fused.name = "fused";
  eq.fused.h = h0;
  eq.fused.r = inverse_spd(info, "fuse_identical_h: summed information");
  eq.weights.reserve(suite.sensors.size());
  for (const auto& ri : r_inv) eq.weights.push_back(eq.fused.r * ri);
  return eq;
}

EquivalentSensor fuse_observable(const SensorSuite& suite) {
  if (suite.sensors.empty()) {
    throw std::invalid_argument("suite.sensors: at least one sensor required");
  }
  const auto n = suite.sensors.front().h.cols();
  Matrix info = Matrix::Zero(n, n);
  std::vector<Matrix> hr;  // H_i^T R_i^-1 per sensor
  hr.reserve(suite.sensors.size());
  for (const auto& s : suite.sensors) {
    if (s.h.cols() != n) {
      throw std::invalid_argument(
          "fuse_observable: inconsistent state dimensions across sensors");
    }
    const Matrix ri = inverse_spd(s.r, "sensor '" + s.name + "'.r");
    hr.push_back(s.h.transpose() * ri);
    info += hr.back() * s.h;
  }
  Eigen::FullPivLU<Matrix> lu(info);
  if (!lu.isInvertible()) {
    throw std::invalid_argument(
        "fuse_observable: summed information H^T R^-1 H is singular; the "
        "suite does not observe the full state in one step");
  }
  EquivalentSensor eq;
  eq.fused.name = "fused";
  eq.fused.h = Matrix::Identity(n, n);
  eq.fused.r = symmetrize(lu.inverse(), 1e-8, "fuse_observable: r_e");
  eq.weights.reserve(suite.sensors.size());
  for (const auto& m : hr) eq.weights.push_back(eq.fused.r * m);
  return eq;
}

Matrix equivalent_bias_covariance(const std::vector<Matrix>& weights,
                                  const Matrix& joint) {
  if (weights.empty()) {
    throw std::invalid_argument("equivalent_bias_covariance: no weights");
  }
  Eigen::Index cols = 0;
  const auto rows = weights.front().rows();
  for (const auto& w : weights) {
    if (w.rows() != rows) {
      throw std::invalid_argument(
          "equivalent_bias_covariance: weight row counts differ");
    }
    cols += w.cols();
  }
  if (joint.rows() != cols || joint.cols() != cols) {
    throw std::invalid_argument(
        "equivalent_bias_covariance: joint covariance dimension must match "
        "total weight columns");
  }
  Matrix c = Matrix::Zero(rows, cols);
  Eigen::Index at = 0;
  for (const auto& w : weights) {
    c.middleCols(at, w.cols()) = w;
    at += w.cols();
  }
  const Matrix joint_sym = symmetrize(joint, 1e-8, "joint bias covariance");
  Matrix out = c * joint_sym * c.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace kfbias
