#include "kfbias/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace kfbias {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Matrix inverse_sym(const Matrix& m) {
  return m.ldlt().solve(Matrix::Identity(m.rows(), m.cols()));
}

/// Deterministic 1-D maximizer: nested uniform scans with zoom. Strict
/// improvement only, so the earliest grid point wins ties. `f` may return
/// -inf on infeasible points.
template <typename F>
std::pair<double, double> scan_maximize(F&& f, double lo, double hi,
                                        int points, int levels = 3) {
  double best_x = lo;
  double best_v = kNegInf;
  double a = lo, b = hi;
  for (int lvl = 0; lvl < levels; ++lvl) {
    const double step = (b - a) / static_cast<double>(points - 1);
    for (int k = 0; k < points; ++k) {
      const double x = a + step * k;
      const double v = f(x);
      if (v > best_v) {
        best_v = v;
        best_x = x;
      }
    }
    if (step <= 0.0) break;
    a = std::max(lo, best_x - step);
    b = std::min(hi, best_x + step);
  }
  return {best_x, best_v};
}

}  // namespace

Matrix AllocationResult::covariance() const {
  return sigma.asDiagonal() * rho * sigma.asDiagonal();
}

double trace_objective(const Matrix& gain, const Matrix& sigma_e) {
  return (gain * sigma_e * gain.transpose()).trace();
}

double det_objective(const Matrix& p, const Matrix& gain,
                     const Matrix& sigma_e) {
  return (p + gain * sigma_e * gain.transpose()).determinant();
}

AllocationResult trace_position(const Vector& coeffs, double a2) {
  if (coeffs.size() < 1) {
    throw std::invalid_argument("trace_position: empty weight vector");
  }
  if ((coeffs.array() < 0.0).any()) {
    throw std::invalid_argument("trace_position: weights must be >= 0");
  }
  if (a2 < 0.0) {
    throw std::invalid_argument("trace_position: budget must be >= 0");
  }
  const auto n = coeffs.size();
  AllocationResult out;
  out.kind = Objective::trace;
  const double norm = coeffs.norm();
  if (norm == 0.0 || a2 == 0.0) {
    out.sigma = Vector::Zero(n);
    out.rho = Matrix::Identity(n, n);
    out.objective = 0.0;
    return out;
  }
  out.sigma = coeffs * (std::sqrt(a2) / norm);
  out.rho = Matrix::Ones(n, n);
  // Fused bias variance is (sum c_i sigma_i)^2 = a^2 ||c||^2.
  out.objective = a2 * norm * norm;
  return out;
}

AllocationResult trace_position_independent(const Vector& coeffs, double a2) {
  if (coeffs.size() < 1) {
    throw std::invalid_argument(
        "trace_position_independent: empty weight vector");
  }
  if ((coeffs.array() < 0.0).any()) {
    throw std::invalid_argument(
        "trace_position_independent: weights must be >= 0");
  }
  const auto n = coeffs.size();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (coeffs(i) > coeffs(best)) best = i;  // strict: ties keep lowest index
  }
  AllocationResult out;
  out.kind = Objective::trace;
  out.sigma = Vector::Zero(n);
  out.sigma(best) = std::sqrt(a2);
  out.rho = Matrix::Identity(n, n);
  out.objective = a2 * coeffs(best) * coeffs(best);
  return out;
}

PvCoefficients pv_coefficients(const Matrix& gain) {
  if (gain.rows() != 2 || gain.cols() != 2) {
    throw std::invalid_argument("pv_coefficients: expected a 2x2 gain");
  }
  PvCoefficients c;
  c.beta1 = gain(0, 0) * gain(0, 0) + gain(1, 0) * gain(1, 0);
  c.beta2 = gain(0, 1) * gain(0, 1) + gain(1, 1) * gain(1, 1);
  c.alpha1 = gain(0, 0) * gain(0, 1);
  c.alpha2 = gain(1, 0) * gain(1, 1);
  return c;
}

namespace {

/// Shared angle solve: maximize b1 sp^2 + b2 sv^2 + 2 a12 sp sv over
/// sp^2 + T^2 sv^2 = a2 with a12 >= 0; sp = a sin(theta), sv = (a/T) cos(theta).
double optimal_theta(double b1, double b2, double a12, double t) {
  const double phi = std::atan2(b2 - b1 * t * t, 2.0 * t * a12);
  return std::numbers::pi / 4.0 - 0.5 * phi;
}

}  // namespace

AllocationResult trace_pv_single(const Matrix& gain, double sampling_period_s,
                                 double a2) {
  if (sampling_period_s <= 0.0) {
    throw std::invalid_argument("trace_pv_single: sampling period must be > 0");
  }
  if (a2 < 0.0) {
    throw std::invalid_argument("trace_pv_single: budget must be >= 0");
  }
  const PvCoefficients c = pv_coefficients(gain);
  const double t = sampling_period_s;
  const double a = std::sqrt(a2);
  const double theta =
      optimal_theta(c.beta1, c.beta2, std::abs(c.alpha_sum()), t);
  const double sp = a * std::sin(theta);
  const double sv = (a / t) * std::cos(theta);
  AllocationResult out;
  out.kind = Objective::trace;
  out.sigma = Vector(2);
  out.sigma << sp, sv;
  const double rho = c.rho_sign();
  out.rho = Matrix{{1.0, rho}, {rho, 1.0}};
  out.objective = trace_objective(gain, out.covariance());
  return out;
}

AllocationResult trace_pv_multi(const Matrix& gain, const Vector& cp,
                                const Vector& cv, double sampling_period_s,
                                double a2) {
  if (cp.size() != cv.size() || cp.size() < 1) {
    throw std::invalid_argument(
        "trace_pv_multi: weight vectors must be non-empty and equal length");
  }
  if ((cp.array() < 0.0).any() || (cv.array() < 0.0).any()) {
    throw std::invalid_argument("trace_pv_multi: weights must be >= 0");
  }
  if (sampling_period_s <= 0.0) {
    throw std::invalid_argument("trace_pv_multi: sampling period must be > 0");
  }
  const PvCoefficients c = pv_coefficients(gain);
  const double t = sampling_period_s;
  const double a = std::sqrt(a2);
  const double np = cp.norm();
  const double nv = cv.norm();
  // Within each group the Cauchy-Schwarz-optimal split is proportional to the
  // weights, leaving a single-sensor problem in the group amplitudes with
  // effective coefficients beta1 ||cp||^2, beta2 ||cv||^2, |alpha| ||cp|| ||cv||.
  const double theta = optimal_theta(c.beta1 * np * np, c.beta2 * nv * nv,
                                     std::abs(c.alpha_sum()) * np * nv, t);
  const double group_p = a * std::sin(theta);        // sqrt of position power
  const double group_v = (a / t) * std::cos(theta);  // sqrt of velocity power / t
  const auto m = cp.size();
  Vector u(2 * m);  // signed amplitude vector; Sigma = u u^T
  const double s = c.rho_sign();
  for (Eigen::Index i = 0; i < m; ++i) {
    u(2 * i) = (np > 0.0 ? cp(i) / np : 0.0) * group_p;
    u(2 * i + 1) = s * (nv > 0.0 ? cv(i) / nv : 0.0) * group_v;
  }
  const Matrix cov = u * u.transpose();
  const BiasCovariance bc = BiasCovariance::from_covariance(cov);
  Matrix cmat = Matrix::Zero(2, 2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    cmat(0, 2 * i) = cp(i);
    cmat(1, 2 * i + 1) = cv(i);
  }
  AllocationResult out;
  out.kind = Objective::trace;
  out.sigma = bc.sigma;
  out.rho = bc.rho;
  out.objective =
      trace_objective(gain, Matrix(cmat * cov * cmat.transpose()));
  return out;
}

WaterfillResult waterfill_powers(const Vector& xi, double budget) {
  const auto n = xi.size();
  if (n < 1) {
    throw std::invalid_argument("waterfill_powers: empty curvature vector");
  }
  if ((xi.array() < -1e-12).any()) {
    throw std::invalid_argument("waterfill_powers: curvatures must be >= 0");
  }
  if (budget < 0.0) {
    throw std::invalid_argument("waterfill_powers: budget must be >= 0");
  }
  const Vector x = xi.cwiseMax(0.0);
  const double xmax = x.maxCoeff();
  WaterfillResult out;
  out.powers = Vector::Zero(n);
  if (budget == 0.0 || xmax == 0.0) {
    if (budget > 0.0 && xmax == 0.0) {
      // Objective is flat; split evenly for determinism.
      out.powers.setConstant(budget / static_cast<double>(n));
    }
    out.level = xmax;
    return out;
  }
  const auto total_at = [&](double level) {
    double tot = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (x(i) > 0.0) tot += std::max(1.0 / level - 1.0 / x(i), 0.0);
    }
    return tot;
  };
  // total_at is decreasing in the level; bracket then bisect in log space.
  double hi = xmax;                 // total_at(hi) = 0 <= budget
  double lo = 1.0 / (budget + static_cast<double>(n) / xmax);  // total >= budget
  while (total_at(lo) < budget) lo *= 0.5;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (total_at(mid) > budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double level = std::sqrt(lo * hi);
  // Exact solve on the detected active set so the budget binds to machine
  // precision: sum_{active} (1/level - 1/xi_i) = budget.
  double inv_sum = 0.0;
  int active = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x(i) > 0.0 && 1.0 / level - 1.0 / x(i) > 0.0) {
      inv_sum += 1.0 / x(i);
      ++active;
    }
  }
  if (active > 0) {
    const double exact = static_cast<double>(active) / (budget + inv_sum);
    // Accept the polish only if it preserves the active set.
    bool consistent = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool was = x(i) > 0.0 && 1.0 / level - 1.0 / x(i) > 0.0;
      const bool now = x(i) > 0.0 && 1.0 / exact - 1.0 / x(i) > 0.0;
      if (was != now) consistent = false;
    }
    if (consistent) level = exact;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x(i) > 0.0) out.powers(i) = std::max(1.0 / level - 1.0 / x(i), 0.0);
  }
  out.level = level;
  return out;
}

AllocationResult det_pv_single_waterfill(const Matrix& p, const Matrix& gain,
                                         double sampling_period_s, double a2) {
  if (gain.rows() != 2 || gain.cols() != 2) {
    throw std::invalid_argument("det_pv_single_waterfill: expected 2x2 gain");
  }
  if (sampling_period_s <= 0.0) {
    throw std::invalid_argument(
        "det_pv_single_waterfill: sampling period must be > 0");
  }
  const double t = sampling_period_s;
  const Matrix xi_raw = gain.transpose() * inverse_sym(p) * gain;
  Vector s_inv(2);
  s_inv << 1.0, 1.0 / t;  // S^-1 with S = diag(1, T)
  const Matrix xi_scaled = symmetrize(
      s_inv.asDiagonal() * xi_raw * s_inv.asDiagonal(), 1e-8, "scaled Xi");
  Eigen::SelfAdjointEigenSolver<Matrix> es(xi_scaled);
  const WaterfillResult wf = waterfill_powers(es.eigenvalues(), a2);
  const Matrix scaled_cov = es.eigenvectors() * wf.powers.asDiagonal() *
                            es.eigenvectors().transpose();
  const Matrix cov = symmetrize(
      s_inv.asDiagonal() * scaled_cov * s_inv.asDiagonal(), 1e-8,
      "waterfill covariance");
  const BiasCovariance bc = BiasCovariance::from_covariance(cov);
  AllocationResult out;
  out.kind = Objective::det;
  out.sigma = bc.sigma;
  out.rho = bc.rho;
  out.objective = det_objective(p, gain, cov);
  return out;
}

AllocationResult det_position(const Matrix& p, const Matrix& gain,
                              const Vector& coeffs, double a2) {
  AllocationResult out = trace_position(coeffs, a2);
  out.kind = Objective::det;
  // Rank-one fused variance: the determinant is monotone in Sigma_e, so the
  // trace-optimal split is determinant-optimal too.
  Matrix sigma_e(1, 1);
  sigma_e(0, 0) = a2 * coeffs.squaredNorm();
  out.objective = det_objective(p, gain, sigma_e);
  return out;
}

namespace {

/// Search state for the multi-sensor determinant problem.
struct DetMultiProblem {
  Matrix p, gain;  // 2x2
  Vector cp, cv;   // size M
  double t = 1.0;
  double a2 = 0.0;
  Matrix cmat;     // 2 x 2M fused-weight matrix
  Vector wt;       // per-component budget weights (1, t^2, 1, t^2, ...)

  int dim() const { return static_cast<int>(2 * cp.size()); }

  double eval_cov(const Matrix& cov) const {
    const double scale = std::max(1.0, cov.diagonal().maxCoeff());
    if (!is_psd(cov, 1e-9 * scale)) return kNegInf;
    return det_objective(p, gain, Matrix(cmat * cov * cmat.transpose()));
  }

  double eval(const Vector& sigma, const Matrix& rho) const {
    return eval_cov(sigma.asDiagonal() * rho * sigma.asDiagonal());
  }
};

struct DetCandidate {
  Vector sigma;
  Matrix rho;
  double value = kNegInf;
};

void consider(const DetMultiProblem& prob, DetCandidate& best,
              const Vector& sigma, const Matrix& rho) {
  const double v = prob.eval(sigma, rho);
  if (v > best.value) best = DetCandidate{sigma, rho, v};
}

/// Enumerate weighted powers on the simplex sum = a2 at the given resolution
/// and keep the best under the candidate's correlations.
void power_grid_sweep(const DetMultiProblem& prob, DetCandidate& best,
                      int steps) {
  if (prob.dim() != 4) return;  // combinatorial grid only for two sensors
  const double h = prob.a2 / steps;
  for (int i1 = 0; i1 <= steps; ++i1) {
    for (int i2 = 0; i2 + i1 <= steps; ++i2) {
      for (int i3 = 0; i3 + i2 + i1 <= steps; ++i3) {
        const int i4 = steps - i1 - i2 - i3;
        Vector sigma(4);
        sigma << std::sqrt(i1 * h / prob.wt(0)), std::sqrt(i2 * h / prob.wt(1)),
            std::sqrt(i3 * h / prob.wt(2)), std::sqrt(i4 * h / prob.wt(3));
        consider(prob, best, sigma, best.rho);
      }
    }
  }
}

void rho_scan_sweep(const DetMultiProblem& prob, DetCandidate& best,
                    double step) {
  const int n = prob.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      DetCandidate trial = best;
      for (double r = -1.0; r <= 1.0 + 1e-12; r += step) {
        trial.rho(i, j) = trial.rho(j, i) = std::min(r, 1.0);
        consider(prob, best, trial.sigma, trial.rho);
      }
    }
  }
}

void coordinate_refine(const DetMultiProblem& prob, DetCandidate& best,
                       const DetMultiOptions& opts) {
  const int n = prob.dim();
  for (int iter = 0; iter < opts.refine_iters; ++iter) {
    const double before = best.value;
    // Correlation coordinates.
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        auto f = [&](double r) {
          Matrix rho = best.rho;
          rho(i, j) = rho(j, i) = r;
          return prob.eval(best.sigma, rho);
        };
        const auto [x, v] = scan_maximize(f, -1.0, 1.0, opts.scan_points);
        if (v > best.value) {
          best.rho(i, j) = best.rho(j, i) = x;
          best.value = v;
        }
      }
    }
    // Pairwise power transfers on the weighted simplex.
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double total = prob.wt(i) * best.sigma(i) * best.sigma(i) +
                             prob.wt(j) * best.sigma(j) * best.sigma(j);
        if (total <= 0.0) continue;
        auto f = [&](double gi) {
          Vector sigma = best.sigma;
          sigma(i) = std::sqrt(gi / prob.wt(i));
          sigma(j) = std::sqrt((total - gi) / prob.wt(j));
          return prob.eval(sigma, best.rho);
        };
        const auto [x, v] = scan_maximize(f, 0.0, total, opts.scan_points);
        if (v > best.value) {
          best.sigma(i) = std::sqrt(x / prob.wt(i));
          best.sigma(j) = std::sqrt((total - x) / prob.wt(j));
          best.value = v;
        }
      }
    }
    if (best.value - before <= opts.rel_tol * std::max(1.0, std::abs(before))) {
      break;
    }
  }
}

/// Exact reduction seed: water-fill over the reachable fused covariances
/// { Sigma_e : tr(M^-1 Sigma_e) <= a2 }, then pull back with the
/// minimum-budget preimage.
DetCandidate reduction_seed(const DetMultiProblem& prob) {
  const Matrix d_inv = prob.wt.cwiseInverse().asDiagonal();
  const Matrix m_red = prob.cmat * d_inv * prob.cmat.transpose();  // 2x2
  Eigen::SelfAdjointEigenSolver<Matrix> esm(symmetrize(m_red, 1e-8, "M"));
  if (esm.eigenvalues().minCoeff() <= 0.0) {
    return {};  // weights do not span both axes; grid/refine still run
  }
  const Matrix m_sqrt = esm.operatorSqrt();
  const Matrix xi = prob.gain.transpose() * inverse_sym(prob.p) * prob.gain;
  const Matrix xi_scaled = symmetrize(m_sqrt * xi * m_sqrt, 1e-8, "scaled Xi");
  Eigen::SelfAdjointEigenSolver<Matrix> es(xi_scaled);
  const WaterfillResult wf = waterfill_powers(es.eigenvalues(), prob.a2);
  const Matrix sigma_e = m_sqrt *
                         (es.eigenvectors() * wf.powers.asDiagonal() *
                          es.eigenvectors().transpose()) *
                         m_sqrt;
  const Matrix pre = d_inv * prob.cmat.transpose() * inverse_sym(m_red);
  const Matrix cov =
      symmetrize(pre * sigma_e * pre.transpose(), 1e-8, "seed covariance");
  const BiasCovariance bc = BiasCovariance::from_covariance(cov);
  DetCandidate seed;
  seed.sigma = bc.sigma;
  seed.rho = bc.rho;
  seed.value = prob.eval(seed.sigma, seed.rho);
  return seed;
}

}  // namespace

AllocationResult det_pv_multi(const Matrix& p, const Matrix& gain,
                              const Vector& cp, const Vector& cv,
                              double sampling_period_s, double a2,
                              const DetMultiOptions& opts) {
  if (cp.size() != cv.size() || cp.size() < 1) {
    throw std::invalid_argument(
        "det_pv_multi: weight vectors must be non-empty and equal length");
  }
  if (sampling_period_s <= 0.0) {
    throw std::invalid_argument("det_pv_multi: sampling period must be > 0");
  }
  if (a2 < 0.0) {
    throw std::invalid_argument("det_pv_multi: budget must be >= 0");
  }
  DetMultiProblem prob;
  prob.p = p;
  prob.gain = gain;
  prob.cp = cp;
  prob.cv = cv;
  prob.t = sampling_period_s;
  prob.a2 = a2;
  const auto m = cp.size();
  prob.cmat = Matrix::Zero(2, 2 * m);
  prob.wt = Vector::Ones(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    prob.cmat(0, 2 * i) = cp(i);
    prob.cmat(1, 2 * i + 1) = cv(i);
    prob.wt(2 * i + 1) = sampling_period_s * sampling_period_s;
  }

  const int n = prob.dim();
  DetCandidate best;
  best.sigma = Vector::Zero(n);
  best.rho = Matrix::Identity(n, n);
  best.value = prob.eval(best.sigma, best.rho);

  // Structured starts: even split (independent), even split with grouped
  // position/velocity correlation, and the trace-optimal allocation.
  {
    Vector even(n);
    for (int i = 0; i < n; ++i) {
      even(i) = std::sqrt(a2 / (n * prob.wt(i)));
    }
    consider(prob, best, even, Matrix::Identity(n, n));
    Matrix grouped = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if ((i % 2) == (j % 2)) grouped(i, j) = grouped(j, i) = 1.0;
      }
    }
    consider(prob, best, even, grouped);
    const AllocationResult tr = trace_pv_multi(gain, cp, cv,
                                               sampling_period_s, a2);
    consider(prob, best, tr.sigma, tr.rho);
  }

  // Exact reduction seed (global optimum of the relaxation, feasible here).
  const DetCandidate seed = reduction_seed(prob);
  if (seed.value > best.value) best = seed;

  // Alternating sweeps: power simplex grid + coarse correlation scans.
  const int steps =
      std::max(1, static_cast<int>(std::lround(1.0 / opts.grid_fraction)));
  DetCandidate swept = best;
  for (int pass = 0; pass < opts.sweep_passes; ++pass) {
    const double before = swept.value;
    power_grid_sweep(prob, swept, steps);
    rho_scan_sweep(prob, swept, opts.rho_scan_step);
    if (swept.value - before <= opts.rel_tol * std::max(1.0, before)) break;
  }
  if (swept.value > best.value) best = swept;

  coordinate_refine(prob, best, opts);

  AllocationResult out;
  out.kind = Objective::det;
  out.sigma = best.sigma;
  out.rho = best.rho;
  out.objective = best.value;
  return out;
}

MultiTimeAllocation multitime_single_shot(const Matrix& transition,
                                          const Matrix& gain,
                                          const std::vector<double>& weights,
                                          double a2, PowerDef power_def,
                                          double sampling_period_s,
                                          int start_k) {
  if (weights.empty()) {
    throw std::invalid_argument("multitime_single_shot: empty weights");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) {
      throw std::invalid_argument(
          "multitime_single_shot: weights must be >= 0");
    }
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "multitime_single_shot: weights must sum to 1");
  }
  const int horizon = static_cast<int>(weights.size()) - 1;
  const auto mdim = gain.cols();
  Vector s_inv = Vector::Ones(mdim);
  if (power_def == PowerDef::pv_weighted) {
    if (mdim % 2 != 0) {
      throw std::invalid_argument(
          "multitime_single_shot: pv_weighted needs an even measurement dim");
    }
    for (Eigen::Index i = 1; i < mdim; i += 2) {
      s_inv(i) = 1.0 / sampling_period_s;
    }
  }

  std::vector<Matrix> d(static_cast<std::size_t>(horizon) + 1);
  d[0] = gain;
  for (int j = 1; j <= horizon; ++j) {
    d[static_cast<std::size_t>(j)] =
        transition * d[static_cast<std::size_t>(j - 1)];
  }

  MultiTimeAllocation out;
  out.kappa.resize(static_cast<std::size_t>(horizon) + 1);
  double best_kappa = kNegInf;
  Vector best_dir = Vector::Zero(mdim);
  for (int m = 0; m <= horizon; ++m) {
    Matrix payoff = Matrix::Zero(mdim, mdim);
    for (int j = m; j <= horizon; ++j) {
      const Matrix& dj = d[static_cast<std::size_t>(j - m)];
      payoff += weights[static_cast<std::size_t>(j)] * dj.transpose() * dj;
    }
    const Matrix scaled = symmetrize(
        s_inv.asDiagonal() * payoff * s_inv.asDiagonal(), 1e-8, "payoff");
    Eigen::SelfAdjointEigenSolver<Matrix> es(scaled);
    const double kappa = es.eigenvalues().maxCoeff();
    out.kappa[static_cast<std::size_t>(m)] = kappa;
    if (kappa > best_kappa) {  // strict: earliest offset wins ties
      best_kappa = kappa;
      out.offset = m;
      best_dir = es.eigenvectors().col(mdim - 1);
    }
  }
  // Deterministic eigenvector sign: largest-magnitude component positive.
  Eigen::Index imax = 0;
  best_dir.cwiseAbs().maxCoeff(&imax);
  if (best_dir(imax) < 0.0) best_dir = -best_dir;

  // Bias direction in measurement space: b = sqrt(a2) S^-1 u (unit power).
  Vector b = s_inv.asDiagonal() * best_dir;
  const Matrix cov = a2 * b * b.transpose();
  out.direction = b.norm() > 0.0 ? Vector(b / b.norm()) : b;

  out.plan.start_k = start_k;
  out.plan.budget = a2;
  out.plan.power_def = power_def;
  out.plan.weights = weights;
  out.plan.covariances.reserve(static_cast<std::size_t>(horizon) + 1);
  for (int m = 0; m <= horizon; ++m) {
    if (m == out.offset) {
      out.plan.covariances.push_back(BiasCovariance::from_covariance(cov));
    } else {
      out.plan.covariances.push_back(BiasCovariance::from_parts(
          Vector::Zero(mdim), Matrix::Identity(mdim, mdim)));
    }
  }
  out.plan.validate(sampling_period_s);

  std::vector<Matrix> sigmas;
  sigmas.reserve(out.plan.covariances.size());
  for (const auto& c : out.plan.covariances) sigmas.push_back(c.covariance());
  out.objective = multitime_objective(sigmas, weights, transition, gain);
  return out;
}

double multitime_objective(const std::vector<Matrix>& sigmas,
                           const std::vector<double>& weights,
                           const Matrix& transition, const Matrix& gain) {
  if (sigmas.size() != weights.size() || sigmas.empty()) {
    throw std::invalid_argument(
        "multitime_objective: sigmas and weights must be equal non-zero "
        "length");
  }
  const int horizon = static_cast<int>(sigmas.size()) - 1;
  const std::vector<Matrix> series =
      emse_series(sigmas, transition, gain, horizon);
  double obj = 0.0;
  for (int j = 0; j <= horizon; ++j) {
    obj += weights[static_cast<std::size_t>(j)] *
           series[static_cast<std::size_t>(j)].trace();
  }
  return obj;
}

}  // namespace kfbias
