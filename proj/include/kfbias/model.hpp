#pragma once

#include <string>
#include <vector>

#include "kfbias/linalg.hpp"

namespace kfbias {

/// Discrete-time linear plant x_{k+1} = F x_k + G u_k + w_k, w_k ~ N(0, Q).
struct StateSpaceModel {
  Matrix f;  ///< state transition (n x n)
  Matrix g;  ///< control input map (n x m), unused columns allowed
  Matrix q;  ///< process noise covariance (n x n, symmetric PSD)
  Vector u;  ///< deterministic control input (m), zero for the tracking plant

  int dim() const { return static_cast<int>(f.rows()); }

  /// Checks dimensions and that q is symmetric PSD. Throws
  /// std::invalid_argument naming the offending member.
  void validate() const;
};

/// One linear sensor z_k = H x_k + v_k, v_k ~ N(0, R).
struct Sensor {
  Matrix h;          ///< measurement map (m x n)
  Matrix r;          ///< measurement noise covariance (m x m, SPD)
  std::string name;  ///< label used in reports and error messages

  int dim() const { return static_cast<int>(h.rows()); }

  /// Checks dimensions and that r is symmetric positive definite.
  void validate(int state_dim) const;
};

/// A bank of sensors observing the same plant.
struct SensorSuite {
  std::vector<Sensor> sensors;

  /// Validates every sensor against the given state dimension.
  void validate(int state_dim) const;
};

/// Scalar parameters shared across a tracking study.
struct TrackingParams {
  double sampling_period_s = 1.0;  ///< T, seconds between filter steps
  double accel_noise_var = 0.25;   ///< variance of the white acceleration noise
  double power_a2 = 3000.0;        ///< attacker power budget a^2
  double confidence_gamma = 9.21;  ///< gate for confidence-ellipse volumes

  void validate() const;
};

/// Builds the discrete white-noise-acceleration plant for one Cartesian axis:
/// state [position; velocity], F = [[1, T], [0, 1]],
/// Q = accel_var * Gamma Gamma^T with Gamma = [T^2/2; T], no control input.
StateSpaceModel build_dwna_model(double sampling_period_s,
                                 double accel_noise_var);

/// Vertically stacks the suite into one synthetic sensor: H rows concatenated,
/// R block-diagonal. Measurement order follows the suite order.
Sensor stack_suite(const SensorSuite& suite);

/// Adds an injected bias to a clean measurement (dimensions must match).
Vector corrupt_measurement(const Vector& z, const Vector& bias);

}  // namespace kfbias
