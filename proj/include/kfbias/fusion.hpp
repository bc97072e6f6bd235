#pragma once

#include <vector>

#include "kfbias/linalg.hpp"
#include "kfbias/model.hpp"

namespace kfbias {

/// One synthetic sensor equivalent (in the information sense) to a bank of
/// sensors processed together, plus the per-sensor combination weights C_i
/// such that the fused measurement is z_e = sum_i C_i z_i.
struct EquivalentSensor {
  Sensor fused;                 ///< h_e, r_e of the equivalent measurement
  std::vector<Matrix> weights;  ///< C_i, one per source sensor
};

/// Fuses sensors that share one measurement map H:
///   r_e = (sum_i R_i^-1)^-1,  C_i = r_e R_i^-1  (weights sum to identity).
/// Throws std::invalid_argument if the maps differ.
EquivalentSensor fuse_identical_h(const SensorSuite& suite);

/// Fuses a suite whose stacked map observes the full state:
///   h_e = I,  r_e = (sum_i H_i^T R_i^-1 H_i)^-1,  C_i = r_e H_i^T R_i^-1
/// (so sum_i C_i H_i = I). Throws std::invalid_argument when the summed
/// information matrix is singular (state not fully observable in one step).
EquivalentSensor fuse_observable(const SensorSuite& suite);

/// Covariance of the fused injected bias sum_i C_i b_i when the per-sensor
/// biases have joint covariance `joint` (blocks ordered like the weights):
///   Sigma_e = C joint C^T with C = [C_1 ... C_M].
Matrix equivalent_bias_covariance(const std::vector<Matrix>& weights,
                                  const Matrix& joint);

}  // namespace kfbias
