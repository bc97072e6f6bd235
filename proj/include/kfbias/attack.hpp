#pragma once

#include <cstdint>
#include <vector>

#include "kfbias/linalg.hpp"

namespace kfbias {

/// How the power of a bias covariance is measured against the budget.
enum class PowerDef {
  trace,        ///< trace(Sigma)
  pv_weighted,  ///< sum of sigma_p^2 + T^2 sigma_v^2 over [p; v] blocks
};

/// Power of a bias covariance under the given definition. For pv_weighted the
/// layout is [p_1, v_1, p_2, v_2, ...]: odd components carry weight T^2.
double bias_power(const Matrix& sigma, PowerDef def, double sampling_period_s);

/// Bias covariance expressed as per-component standard deviations plus a
/// correlation matrix; the implied covariance diag(s) rho diag(s) must be PSD.
struct BiasCovariance {
  Vector sigma;  ///< per-component standard deviations (>= 0)
  Matrix rho;    ///< correlation matrix (symmetric, unit diagonal, |.| <= 1)

  /// diag(sigma) * rho * diag(sigma).
  Matrix covariance() const;

  /// Validates shapes, sigma >= 0, rho entries/diagonal, and PSD-ness of the
  /// implied covariance. Throws std::invalid_argument.
  void validate() const;

  /// Builds and validates.
  static BiasCovariance from_parts(const Vector& sigma, const Matrix& rho);

  /// Factors a PSD covariance into (sigma, rho); zero-variance components get
  /// zero off-diagonal correlation.
  static BiasCovariance from_covariance(const Matrix& cov);
};

/// An injection plan: bias covariances for times K, K+1, ..., K+N together
/// with the objective weights over the same horizon.
struct AttackPlan {
  int start_k = 0;                        ///< first injection step K
  std::vector<BiasCovariance> covariances;  ///< Sigma_K .. Sigma_{K+N}
  std::vector<double> weights;            ///< alpha_0 .. alpha_N (sum to 1)
  double budget = 0.0;                    ///< power budget a^2
  PowerDef power_def = PowerDef::trace;

  int horizon() const { return static_cast<int>(covariances.size()) - 1; }

  /// Checks weights (nonnegative, sum to 1 within 1e-12), per-step covariance
  /// validity, and that each step's power stays within the budget.
  void validate(double sampling_period_s) const;
};

/// Per-step breakdown of the extra estimation error at the end of a plan.
struct EmseReport {
  std::vector<Matrix> propagation;  ///< D_m for m = 0..N
  Matrix total;                     ///< A_{K+N} = sum_m D_m Sigma_{K+N-m} D_m^T
};

/// One-step transition of the injected estimate bias: B = (I - W H) F.
Matrix bias_transition(const Matrix& gain, const Matrix& h, const Matrix& f);

/// D_m = B^m W for a steady gain/transition pair. D_0 = W.
Matrix propagation_matrix(const Matrix& transition, const Matrix& gain, int m);

/// Time-varying form: `transitions` and `gains` hold B_k and W_k for the
/// steps K..K+N in chronological order (last entry = step K+N);
/// D_m = B_{K+N} B_{K+N-1} ... B_{K+N-m+1} W_{K+N-m}.
Matrix propagation_matrix(const std::vector<Matrix>& transitions,
                          const std::vector<Matrix>& gains, int m);

/// Extra MSE matrix at step K+N for per-step bias covariances
/// sigmas = [Sigma_K, ..., Sigma_{K+N}] under a steady gain:
///   A_{K+N} = sum_{m=0}^{N} D_m Sigma_{K+N-m} D_m^T.
EmseReport emse_at_horizon(const std::vector<Matrix>& sigmas,
                           const Matrix& transition, const Matrix& gain);

/// Time-varying overload (schedules aligned with `sigmas`).
EmseReport emse_at_horizon(const std::vector<Matrix>& sigmas,
                           const std::vector<Matrix>& transitions,
                           const std::vector<Matrix>& gains);

/// A_k for k = K..K+steps via the one-step recursion
///   A_{next} = B A B^T + W Sigma_{next} W^T,  A_{K-1} = 0,
/// with Sigma = 0 after the plan ends. Returns steps+1 matrices. Exercising
/// this against emse_at_horizon validates the closed form.
std::vector<Matrix> emse_series(const std::vector<Matrix>& sigmas,
                                const Matrix& transition, const Matrix& gain,
                                int steps);

/// Max-abs difference between the closed-form EMSE and the one-step
/// recursion over `trials` random plans of the given horizon (seeded RNG).
double error_recursion_check(const Matrix& transition, const Matrix& gain,
                             int measurement_dim, int horizon, int trials,
                             std::uint64_t seed);

/// Nearest valid correlation matrix in the projection sense: eigenvalues
/// clipped at zero, re-symmetrized, diagonal renormalized to exactly one.
/// Intended for evaluating externally reported correlation sets that are not
/// PSD-feasible; never applied silently to user input.
Matrix nearest_psd_correlation(const Matrix& rho);

}  // namespace kfbias
