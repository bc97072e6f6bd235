#include "kfbias/attack.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace kfbias {

double bias_power(const Matrix& sigma, PowerDef def,
                  double sampling_period_s) {
  if (sigma.rows() != sigma.cols()) {
    throw std::invalid_argument("bias_power: covariance must be square");
  }
  switch (def) {
    case PowerDef::trace:
      return sigma.trace();
    case PowerDef::pv_weighted: {
      if (sigma.rows() % 2 != 0) {
        throw std::invalid_argument(
            "bias_power: pv_weighted needs an even dimension ([p; v] blocks)");
      }
      const double t2 = sampling_period_s * sampling_period_s;
      double total = 0.0;
      for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
        total += (i % 2 == 0) ? sigma(i, i) : t2 * sigma(i, i);
      }
      return total;
    }
  }
  throw std::invalid_argument("bias_power: unknown power definition");
}

Matrix BiasCovariance::covariance() const {
  return sigma.asDiagonal() * rho * sigma.asDiagonal();
}

void BiasCovariance::validate() const {
  const auto n = sigma.size();
  if (n < 1) {
    throw std::invalid_argument("bias_covariance.sigma: must be non-empty");
  }
  if (rho.rows() != n || rho.cols() != n) {
    throw std::invalid_argument(
        "bias_covariance.rho: dimensions must match sigma length");
  }
  if ((sigma.array() < 0.0).any()) {
    throw std::invalid_argument("bias_covariance.sigma: entries must be >= 0");
  }
  const Matrix rs = symmetrize(rho, 1e-8, "bias_covariance.rho");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(rs(i, i) - 1.0) > 1e-9) {
      throw std::invalid_argument(
          "bias_covariance.rho: diagonal entries must equal 1");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(rs(i, j)) > 1.0 + 1e-9) {
        throw std::invalid_argument(
            "bias_covariance.rho: entries must lie in [-1, 1]");
      }
    }
  }
  if (!is_psd(covariance(), 1e-9 * std::max(1.0, sigma.squaredNorm()))) {
    throw std::invalid_argument(
        "bias_covariance: implied covariance is not positive semidefinite");
  }
}

BiasCovariance BiasCovariance::from_parts(const Vector& sigma,
                                          const Matrix& rho) {
  BiasCovariance b{sigma, rho};
  b.validate();
  return b;
}

BiasCovariance BiasCovariance::from_covariance(const Matrix& cov) {
  const Matrix c = symmetrize(cov, 1e-8, "bias covariance");
  BiasCovariance b;
  b.sigma = c.diagonal().cwiseMax(0.0).cwiseSqrt();
  const auto n = c.rows();
  b.rho = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double denom = b.sigma(i) * b.sigma(j);
      const double r = denom > 0.0 ? c(i, j) / denom : 0.0;
      // Clamp roundoff spill just past +-1 from the division.
      b.rho(i, j) = b.rho(j, i) = std::clamp(r, -1.0, 1.0);
    }
  }
  b.validate();
  return b;
}

void AttackPlan::validate(double sampling_period_s) const {
  if (covariances.empty()) {
    throw std::invalid_argument("plan.covariances: must be non-empty");
  }
  if (weights.size() != covariances.size()) {
    throw std::invalid_argument(
        "plan.weights: length must match plan.covariances");
  }
  if (start_k < 0) {
    throw std::invalid_argument("plan.start_k: must be >= 0");
  }
  if (budget < 0.0) {
    throw std::invalid_argument("plan.budget: must be >= 0");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) {
      throw std::invalid_argument("plan.weights: entries must be >= 0");
    }
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) {
    throw std::invalid_argument("plan.weights: must sum to 1 (within 1e-12)");
  }
  for (const auto& c : covariances) {
    c.validate();
    const double p = bias_power(c.covariance(), power_def, sampling_period_s);
    if (p > budget * (1.0 + 1e-9) + 1e-12) {
      throw std::invalid_argument(
          "plan.covariances: step power " + std::to_string(p) +
          " exceeds budget " + std::to_string(budget));
    }
  }
}

Matrix bias_transition(const Matrix& gain, const Matrix& h, const Matrix& f) {
  const auto n = f.rows();
  if (gain.rows() != n || h.cols() != n || gain.cols() != h.rows()) {
    throw std::invalid_argument("bias_transition: dimension mismatch");
  }
  return (Matrix::Identity(n, n) - gain * h) * f;
}

Matrix propagation_matrix(const Matrix& transition, const Matrix& gain,
                          int m) {
  if (m < 0) {
    throw std::invalid_argument("propagation_matrix: m must be >= 0");
  }
  Matrix d = gain;
  for (int i = 0; i < m; ++i) d = transition * d;
  return d;
}

Matrix propagation_matrix(const std::vector<Matrix>& transitions,
                          const std::vector<Matrix>& gains, int m) {
  if (transitions.size() != gains.size() || gains.empty()) {
    throw std::invalid_argument(
        "propagation_matrix: schedules must be non-empty and equal length");
  }
  const int last = static_cast<int>(gains.size()) - 1;
  if (m < 0 || m > last) {
    throw std::invalid_argument(
        "propagation_matrix: m must lie within the schedule");
  }
  Matrix d = gains[static_cast<std::size_t>(last - m)];
  for (int i = last - m + 1; i <= last; ++i) {
    d = transitions[static_cast<std::size_t>(i)] * d;
  }
  return d;
}

EmseReport emse_at_horizon(const std::vector<Matrix>& sigmas,
                           const Matrix& transition, const Matrix& gain) {
  const int n = static_cast<int>(sigmas.size());
  const std::vector<Matrix> transitions(static_cast<std::size_t>(n),
                                        transition);
  const std::vector<Matrix> gains(static_cast<std::size_t>(n), gain);
  return emse_at_horizon(sigmas, transitions, gains);
}

EmseReport emse_at_horizon(const std::vector<Matrix>& sigmas,
                           const std::vector<Matrix>& transitions,
                           const std::vector<Matrix>& gains) {
  if (sigmas.empty()) {
    throw std::invalid_argument("emse_at_horizon: empty plan");
  }
  if (transitions.size() != sigmas.size() || gains.size() != sigmas.size()) {
    throw std::invalid_argument(
        "emse_at_horizon: schedule lengths must match the plan length");
  }
  const int horizon = static_cast<int>(sigmas.size()) - 1;
  EmseReport report;
  report.propagation.reserve(sigmas.size());
  const auto n = gains.front().rows();
  report.total = Matrix::Zero(n, n);
  for (int m = 0; m <= horizon; ++m) {
    const Matrix d = propagation_matrix(transitions, gains, m);
    const Matrix& s = sigmas[static_cast<std::size_t>(horizon - m)];
    report.total += d * s * d.transpose();
    report.propagation.push_back(d);
  }
  report.total = 0.5 * (report.total + report.total.transpose());
  return report;
}

std::vector<Matrix> emse_series(const std::vector<Matrix>& sigmas,
                                const Matrix& transition, const Matrix& gain,
                                int steps) {
  if (sigmas.empty()) {
    throw std::invalid_argument("emse_series: empty plan");
  }
  if (steps < 0) {
    throw std::invalid_argument("emse_series: steps must be >= 0");
  }
  const auto n = gain.rows();
  const auto mdim = gain.cols();
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  Matrix a = Matrix::Zero(n, n);
  for (int k = 0; k <= steps; ++k) {
    const Matrix prev = a;
    a = transition * prev * transition.transpose();
    if (k < static_cast<int>(sigmas.size())) {
      const Matrix& s = sigmas[static_cast<std::size_t>(k)];
      if (s.rows() != mdim || s.cols() != mdim) {
        throw std::invalid_argument(
            "emse_series: covariance dimension must match gain columns");
      }
      a += gain * s * gain.transpose();
    }
    a = 0.5 * (a + a.transpose());
    out.push_back(a);
  }
  return out;
}

double error_recursion_check(const Matrix& transition, const Matrix& gain,
                             int measurement_dim, int horizon, int trials,
                             std::uint64_t seed) {
  if (horizon < 0 || trials < 1 || measurement_dim < 1) {
    throw std::invalid_argument("error_recursion_check: bad arguments");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<Matrix> sigmas;
    sigmas.reserve(static_cast<std::size_t>(horizon) + 1);
    for (int k = 0; k <= horizon; ++k) {
      Matrix l(measurement_dim, measurement_dim);
      for (Eigen::Index i = 0; i < l.size(); ++i) {
        l.data()[i] = gauss(rng);
      }
      // Random PSD covariance with O(100) scale entries.
      sigmas.push_back(Matrix(10.0 * (l * l.transpose())));
    }
    const Matrix closed = emse_at_horizon(sigmas, transition, gain).total;
    const Matrix stepped =
        emse_series(sigmas, transition, gain, horizon).back();
    worst = std::max(worst, (closed - stepped).cwiseAbs().maxCoeff());
  }
  return worst;
}

Matrix nearest_psd_correlation(const Matrix& rho) {
  const Matrix rs = symmetrize(rho, 1e-8, "correlation matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rs);
  const Vector clipped = es.eigenvalues().cwiseMax(0.0);
  Matrix p = es.eigenvectors() * clipped.asDiagonal() *
             es.eigenvectors().transpose();
  p = 0.5 * (p + p.transpose());
  Vector d = p.diagonal().cwiseMax(1e-300).cwiseSqrt();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      p(i, j) /= d(i) * d(j);
    }
  }
  p.diagonal().setOnes();
  return p;
}

}  // namespace kfbias
