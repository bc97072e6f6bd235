#pragma once

#include <cstdint>
#include <vector>

#include "kfbias/attack.hpp"
#include "kfbias/kalman.hpp"
#include "kfbias/linalg.hpp"
#include "kfbias/model.hpp"

namespace kfbias {

/// Monte Carlo configuration.
struct SimConfig {
  int horizon = 100;          ///< number of filter steps simulated
  int runs = 10000;           ///< Monte Carlo sample size N_m
  std::uint64_t seed = 12345; ///< master seed; runs use derived substreams
  double confidence_gamma = 9.21;  ///< ellipse gate

  /// Throws std::invalid_argument naming the offending field; `plan_end`
  /// is the last step the attack plan touches.
  void validate(int plan_end) const;
};

/// Per-step series and end-of-run summaries from a Monte Carlo experiment.
/// All series have `horizon` entries indexed by step k.
struct SimReport {
  std::vector<double> q_norm;       ///< mean attacked NEES (per-run average)
  std::vector<double> q_nominal;    ///< mean clean NEES
  std::vector<double> q_theory;     ///< n_x + tr(P^-1 A_k)
  std::vector<double> q_band;       ///< 3 sigma band for q_norm around theory
  std::vector<double> trace_total;  ///< tr(P + A_k)
  std::vector<double> det_total;    ///< det(P + A_k)
  std::vector<double> volume;       ///< confidence-ellipse volume of P + A_k
  std::vector<Vector> ellipse_center;  ///< Monte Carlo mean attacked error
  std::vector<Vector> ellipse_axes;    ///< semi-axis lengths of gamma(P+A_k)
  std::vector<double> ellipse_angle;   ///< orientation of the major axis, rad
  Matrix empirical_emse;  ///< sample covariance of (attacked - clean) estimate
  Matrix theory_emse;     ///< A at the final step
  int dim = 0;            ///< state dimension n_x
};

/// Volume of the gamma-gated confidence ellipsoid of `total` (n x n):
///   V = c_n gamma^(n/2) sqrt(det(total)), c_n = pi^(n/2) / Gamma(n/2 + 1).
double ellipse_volume(const Matrix& total, double gamma);

/// Semi-axis lengths (descending) and major-axis orientation (radians,
/// measured in the first two coordinates) of the gamma-gated ellipsoid.
struct EllipseGeometry {
  Vector axes;
  double angle = 0.0;
};

EllipseGeometry ellipse_geometry(const Matrix& total, double gamma);

/// Runs paired clean/attacked filters over a common noise realization.
/// The filter runs at the steady gain of (model, sensor); per-step injected
/// bias covariances are taken from `plan` (zero outside it). Truth starts at
/// N(0, P_steady) so the clean error is stationary from step 0.
SimReport run_monte_carlo(const StateSpaceModel& model, const Sensor& sensor,
                          const GainSchedule& schedule, const AttackPlan& plan,
                          const SimConfig& cfg);

/// One cell of the shape-sweep surface.
struct SweepResult {
  std::vector<double> kappa_grid;
  std::vector<double> rho_grid;
  /// volume[i][j] for rho_grid[i] x kappa_grid[j]; -inf marks infeasible.
  std::vector<std::vector<double>> volume;
  double best_kappa = 0.0;
  double best_rho = 0.0;
  double best_volume = 0.0;
};

/// Sweeps the budget split kappa = sigma_p / (T sigma_v) and the correlation
/// rho for a single position-velocity sensor at full budget, reporting the
/// post-attack ellipse volume det-surface. At each cell
/// sigma_p^2 = a2 kappa^2 / (1 + kappa^2), T^2 sigma_v^2 = a2 / (1 + kappa^2).
SweepResult kappa_sweep(const Matrix& p, const Matrix& gain,
                        double sampling_period_s, double a2, double gamma,
                        const std::vector<double>& kappa_grid,
                        const std::vector<double>& rho_grid);

}  // namespace kfbias
