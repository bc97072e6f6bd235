#include "kfbias/model.hpp"

#include <stdexcept>

namespace kfbias {

void StateSpaceModel::validate() const {
  if (f.rows() != f.cols()) {
    throw std::invalid_argument("model.f: must be square");
  }
  const auto n = f.rows();
  if (q.rows() != n || q.cols() != n) {
    throw std::invalid_argument("model.q: dimensions must match model.f");
  }
  const Matrix qs = symmetrize(q, 1e-8, "model.q");
  if (!is_psd(qs)) {
    throw std::invalid_argument("model.q: must be positive semidefinite");
  }
  if (g.rows() != n) {
    throw std::invalid_argument("model.g: row count must match state dim");
  }
  if (u.size() != g.cols()) {
    throw std::invalid_argument("model.u: length must match model.g columns");
  }
}

void Sensor::validate(int state_dim) const {
  if (h.cols() != state_dim) {
    throw std::invalid_argument("sensor '" + name +
                                "'.h: column count must equal state dim");
  }
  if (h.rows() < 1) {
    throw std::invalid_argument("sensor '" + name + "'.h: needs >= 1 row");
  }
  if (r.rows() != h.rows() || r.cols() != h.rows()) {
    throw std::invalid_argument("sensor '" + name +
                                "'.r: dimensions must match sensor.h rows");
  }
  const Matrix rs = symmetrize(r, 1e-8, "sensor '" + name + "'.r");
  // SPD: every eigenvalue strictly positive.
  if (min_eigenvalue(rs) <= 0.0) {
    throw std::invalid_argument("sensor '" + name +
                                "'.r: must be positive definite");
  }
}

void SensorSuite::validate(int state_dim) const {
  if (sensors.empty()) {
    throw std::invalid_argument("suite.sensors: at least one sensor required");
  }
  for (const auto& s : sensors) s.validate(state_dim);
}

void TrackingParams::validate() const {
  if (sampling_period_s <= 0.0) {
    throw std::invalid_argument("params.sampling_period_s: must be > 0");
  }
  if (accel_noise_var < 0.0) {
    throw std::invalid_argument("params.accel_noise_var: must be >= 0");
  }
  if (power_a2 < 0.0) {
    throw std::invalid_argument("params.power_a2: must be >= 0");
  }
  if (confidence_gamma <= 0.0) {
    throw std::invalid_argument("params.confidence_gamma: must be > 0");
  }
}

StateSpaceModel build_dwna_model(double sampling_period_s,
                                 double accel_noise_var) {
  if (sampling_period_s <= 0.0) {
    throw std::invalid_argument("sampling_period_s: must be > 0");
  }
  if (accel_noise_var < 0.0) {
    throw std::invalid_argument("accel_noise_var: must be >= 0");
  }
  const double t = sampling_period_s;
  StateSpaceModel m;
  m.f = Matrix{{1.0, t}, {0.0, 1.0}};
  Vector gamma(2);
  gamma << 0.5 * t * t, t;
  m.q = accel_noise_var * gamma * gamma.transpose();
  m.g = Matrix::Zero(2, 1);
  m.u = Vector::Zero(1);
  m.validate();
  return m;
}

Sensor stack_suite(const SensorSuite& suite) {
  if (suite.sensors.empty()) {
    throw std::invalid_argument("suite.sensors: at least one sensor required");
  }
  Eigen::Index rows = 0;
  const auto cols = suite.sensors.front().h.cols();
  for (const auto& s : suite.sensors) {
    if (s.h.cols() != cols) {
      throw std::invalid_argument(
          "suite.sensors: inconsistent state dimensions across sensors");
    }
    rows += s.h.rows();
  }
  Sensor stacked;
  stacked.name = "stacked";
  stacked.h = Matrix::Zero(rows, cols);
  stacked.r = Matrix::Zero(rows, rows);
  Eigen::Index at = 0;
  for (const auto& s : suite.sensors) {
    stacked.h.middleRows(at, s.h.rows()) = s.h;
    stacked.r.block(at, at, s.r.rows(), s.r.cols()) = s.r;
    at += s.h.rows();
  }
  return stacked;
}

Vector corrupt_measurement(const Vector& z, const Vector& bias) {
  if (z.size() != bias.size()) {
    throw std::invalid_argument(
        "corrupt_measurement: bias length must match measurement length");
  }
  return z + bias;
}

}  // namespace kfbias
