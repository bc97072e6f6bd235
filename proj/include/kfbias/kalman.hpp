#pragma once

#include <vector>

#include "kfbias/linalg.hpp"
#include "kfbias/model.hpp"

namespace kfbias {

/// Filter estimate and its covariance.
struct FilterState {
  Vector x;  ///< state estimate
  Matrix p;  ///< estimate error covariance (symmetric PSD)
};

/// History of a covariance/gain iteration. The last entries hold the values
/// at the final iterate; when `steady` is true they are the fixed point to
/// within the requested tolerance.
struct GainSchedule {
  std::vector<Matrix> gains;        ///< W_k per step
  std::vector<Matrix> covariances;  ///< filtered P_k per step
  bool steady = false;              ///< converged within tolerance
  double last_residual = 0.0;       ///< max|P_k - P_{k-1}| at the last step

  const Matrix& steady_gain() const { return gains.back(); }
  const Matrix& steady_covariance() const { return covariances.back(); }
};

/// Options for the steady-state covariance iteration.
struct SteadyStateOptions {
  double tol = 1e-10;   ///< convergence threshold on max|P_k - P_{k-1}|
  int max_iter = 10000; ///< iteration cap; exceeding it sets steady = false
  Matrix p0;            ///< initial covariance; empty = 100 * identity
};

/// Time update: x' = F x + G u, P' = F P F^T + Q.
FilterState predict(const FilterState& state, const StateSpaceModel& model);

/// Measurement update in Joseph-stabilized form:
///   W = P H^T (H P H^T + R)^-1,
///   P+ = (I - W H) P (I - W H)^T + W R W^T.
/// Keeps the covariance symmetric PSD under roundoff.
FilterState update(const FilterState& state, const Sensor& sensor,
                   const Vector& z);

/// Same measurement update computed through the information-form identity
///   P+ = (P^-1 + H^T R^-1 H)^-1,  x+ = P+ (P^-1 x + H^T R^-1 z).
/// Requires P invertible. Agrees with update() to numerical precision; used
/// to cross-check the covariance algebra.
FilterState information_update(const FilterState& state, const Sensor& sensor,
                               const Vector& z);

/// Kalman gain for a predicted covariance: W = P- H^T (H P- H^T + R)^-1.
Matrix kalman_gain(const Matrix& p_pred, const Sensor& sensor);

/// Iterates the filtered-covariance Riccati map from opts.p0 until the
/// max-abs entry change drops below opts.tol or max_iter is reached.
/// Returns the per-step gain/covariance history; non-convergence is reported
/// through the `steady` flag rather than an exception.
GainSchedule steady_state(const StateSpaceModel& model, const Sensor& sensor,
                          const SteadyStateOptions& opts = {});

}  // namespace kfbias
