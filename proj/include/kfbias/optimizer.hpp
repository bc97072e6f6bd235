#pragma once

#include <vector>

#include "kfbias/attack.hpp"
#include "kfbias/linalg.hpp"

namespace kfbias {

/// Which scalar functional of the post-attack covariance is maximized.
enum class Objective { trace, det };

/// Power/correlation allocation returned by the solvers. Component order for
/// position banks is one entry per sensor; for position-velocity banks it is
/// [p_1, v_1, p_2, v_2, ...].
struct AllocationResult {
  Vector sigma;              ///< per-component bias standard deviations
  Matrix rho;                ///< correlation matrix across components
  double objective = 0.0;    ///< achieved objective value
  Objective kind = Objective::trace;

  /// diag(sigma) * rho * diag(sigma).
  Matrix covariance() const;
};

/// Extra trace induced through the fused sensor: tr(W Sigma_e W^T).
double trace_objective(const Matrix& gain, const Matrix& sigma_e);

/// Post-attack confidence-ellipse determinant: det(P + W Sigma_e W^T).
double det_objective(const Matrix& p, const Matrix& gain,
                     const Matrix& sigma_e);

/// Optimal trace attack on a bank of position sensors fused with scalar
/// weights c_i: sigma_i = c_i * a / ||c||, all correlations +1, objective
/// a^2 ||c||^2. Requires c_i >= 0.
AllocationResult trace_position(const Vector& coeffs, double a2);

/// Best trace attack when the per-sensor biases must stay independent: the
/// whole budget goes to the sensor with the largest weight (ties resolved
/// toward the lowest index); objective a^2 max_i c_i^2.
AllocationResult trace_position_independent(const Vector& coeffs, double a2);

/// Quadratic-form coefficients of the single position-velocity sensor trace
/// objective, read off the steady gain W = [[w11, w12], [w21, w22]]:
///   obj = beta1 sp^2 + beta2 sv^2 + 2 rho sp sv (alpha1 + alpha2).
struct PvCoefficients {
  double beta1 = 0.0;   ///< w11^2 + w21^2
  double beta2 = 0.0;   ///< w12^2 + w22^2
  double alpha1 = 0.0;  ///< w11 * w12
  double alpha2 = 0.0;  ///< w21 * w22

  double alpha_sum() const { return alpha1 + alpha2; }
  /// Sign of the optimal position-velocity correlation.
  double rho_sign() const { return alpha_sum() < 0.0 ? -1.0 : 1.0; }
};

PvCoefficients pv_coefficients(const Matrix& gain);

/// Closed-form trace attack on one position-velocity sensor under the budget
/// sp^2 + T^2 sv^2 = a^2: with phi = atan2(beta2 - beta1 T^2, 2 T |alpha|),
/// theta* = pi/4 - phi/2, sigma = (a sin(theta*), (a/T) cos(theta*)) and the
/// correlation sign(alpha1 + alpha2).
AllocationResult trace_pv_single(const Matrix& gain, double sampling_period_s,
                                 double a2);

/// Closed-form trace attack on a fused bank of position-velocity sensors with
/// diagonal fusion weights diag(cp_i, cv_i). Within each group the budget
/// splits proportionally to the weights; the group split reuses the
/// single-sensor angle with effective coefficients beta1 ||cp||^2,
/// beta2 ||cv||^2, |alpha| ||cp|| ||cv||. All correlations have magnitude 1.
AllocationResult trace_pv_multi(const Matrix& gain, const Vector& cp,
                                const Vector& cv, double sampling_period_s,
                                double a2);

/// Water-filling split of `budget` across eigen-directions with curvatures
/// xi_i >= 0: powers_i = (1/level - 1/xi_i)+ with the level chosen by a
/// monotone 1-D root solve (bisection to 1e-12 relative, then an exact solve
/// on the detected active set).
struct WaterfillResult {
  Vector powers;       ///< nonnegative, sums to the budget
  double level = 0.0;  ///< Lagrange level (common marginal utility)
};

WaterfillResult waterfill_powers(const Vector& xi, double budget);

/// Determinant attack on one position-velocity sensor: water-fills the budget
/// over the eigen-directions of S^-1 W^T P^-1 W S^-1 with S = diag(1, T)
/// absorbing the velocity weighting of the power budget.
AllocationResult det_pv_single_waterfill(const Matrix& p, const Matrix& gain,
                                         double sampling_period_s, double a2);

/// Determinant attack on a fused position bank. The fused bias variance is
/// rank one, so det(P + Sigma_e W W^T) is monotone in Sigma_e and the trace
/// allocation is optimal; the reported objective is the determinant.
AllocationResult det_position(const Matrix& p, const Matrix& gain,
                              const Vector& coeffs, double a2);

/// Tuning for the multi-sensor determinant search.
struct DetMultiOptions {
  double grid_fraction = 0.05;  ///< power simplex resolution = budget * this
  double rho_scan_step = 0.25;  ///< coarse correlation scan step
  int sweep_passes = 3;         ///< alternating power/correlation passes
  int refine_iters = 200;       ///< coordinate-refinement iteration cap
  int scan_points = 201;        ///< points per 1-D refinement scan
  double rel_tol = 1e-10;       ///< stop when an iteration improves less
};

/// Determinant attack on a fused bank of position-velocity sensors with
/// diagonal weights. Searches per-component powers (simplex grid) and the six
/// pairwise correlations (coordinate scans with PSD rejection), seeded with
/// the exact reduction: reachable fused covariances are exactly
/// { Sigma_e PSD : tr(M^-1 Sigma_e) <= a^2 }, M = diag(||cp||^2, ||cv||^2/T^2),
/// so a water-fill in that space gives the global optimum, which the local
/// search then verifies/refines in allocation space. Deterministic.
AllocationResult det_pv_multi(const Matrix& p, const Matrix& gain,
                              const Vector& cp, const Vector& cv,
                              double sampling_period_s, double a2,
                              const DetMultiOptions& opts = {});

/// Result of choosing one injection time within a weighted horizon.
struct MultiTimeAllocation {
  int offset = 0;             ///< best time K + offset, offset in 0..N
  Vector direction;           ///< unit bias direction at the chosen time
  std::vector<double> kappa;  ///< per-offset payoff coefficients
  double objective = 0.0;     ///< sum_j alpha_j tr(A_{K+j}) achieved
  AttackPlan plan;            ///< realized plan (whole budget at the offset)
};

/// Places the whole budget at the horizon offset maximizing the weighted
/// payoff kappa_m = lambda_max(S^-1 M_m S^-1), M_m = sum_{j>=m} alpha_j
/// D_{j-m}^T D_{j-m}, along the corresponding eigen-direction (S = identity
/// for trace power, diag(1, T, ...) for position-velocity power). For scalar
/// measurements kappa_m reduces to sum_{j>=m} alpha_j ||D_{j-m}||^2. Ties go
/// to the earliest offset.
MultiTimeAllocation multitime_single_shot(const Matrix& transition,
                                          const Matrix& gain,
                                          const std::vector<double>& weights,
                                          double a2, PowerDef power_def,
                                          double sampling_period_s,
                                          int start_k = 0);

/// Direct evaluator for multi-time plans: sum_j weights_j tr(A_{K+j}) with
/// A computed by the one-step recursion. Used to cross-check the kappa-based
/// selection.
double multitime_objective(const std::vector<Matrix>& sigmas,
                           const std::vector<double>& weights,
                           const Matrix& transition, const Matrix& gain);

}  // namespace kfbias
