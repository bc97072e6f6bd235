#include "kfbias/sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace kfbias {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Draws N(0, cov) samples through an eigen square root; handles
/// rank-deficient covariances (eigenvalues clipped at zero).
class GaussianSampler {
 public:
  explicit GaussianSampler(const Matrix& cov) {
    if (cov.size() == 0 || cov.cwiseAbs().maxCoeff() == 0.0) {
      zero_ = true;
      dim_ = cov.rows();
      return;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    root_ = es.eigenvectors() *
            es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    dim_ = cov.rows();
  }

  Vector draw(std::mt19937_64& rng,
              std::normal_distribution<double>& gauss) const {
    if (zero_) return Vector::Zero(dim_);
    Vector xi(root_.cols());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = gauss(rng);
    return root_ * xi;
  }

 private:
  Matrix root_;
  Eigen::Index dim_ = 0;
  bool zero_ = false;
};

}  // namespace

void SimConfig::validate(int plan_end) const {
  if (horizon < 1) {
    throw std::invalid_argument("sim.horizon: must be >= 1");
  }
  if (runs < 2) {
    throw std::invalid_argument("sim.runs: must be >= 2");
  }
  if (confidence_gamma <= 0.0) {
    throw std::invalid_argument("sim.confidence_gamma: must be > 0");
  }
  if (plan_end >= horizon) {
    throw std::invalid_argument(
        "sim.horizon: must extend past the attack plan (plan ends at step " +
        std::to_string(plan_end) + ")");
  }
}

double ellipse_volume(const Matrix& total, double gamma) {
  if (gamma <= 0.0) {
    throw std::invalid_argument("ellipse_volume: gamma must be > 0");
  }
  const Matrix sym = symmetrize(total, 1e-8, "ellipse_volume: total");
  if (!is_psd(sym, 1e-9 * std::max(1.0, sym.diagonal().maxCoeff()))) {
    throw std::invalid_argument(
        "ellipse_volume: total covariance is not positive semidefinite");
  }
  const double n = static_cast<double>(sym.rows());
  const double cn =
      std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
  return cn * std::pow(gamma, n / 2.0) *
         std::sqrt(std::max(0.0, sym.determinant()));
}

EllipseGeometry ellipse_geometry(const Matrix& total, double gamma) {
  const Matrix sym = symmetrize(total, 1e-8, "ellipse_geometry: total");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const auto n = sym.rows();
  EllipseGeometry geo;
  geo.axes = Vector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Descending order; clip tiny negative roundoff.
    geo.axes(i) = std::sqrt(gamma * std::max(0.0, es.eigenvalues()(n - 1 - i)));
  }
  Vector major = es.eigenvectors().col(n - 1);
  if (major(0) < 0.0 || (major(0) == 0.0 && major(1) < 0.0)) major = -major;
  geo.angle = std::atan2(major(1), major(0));
  return geo;
}

SimReport run_monte_carlo(const StateSpaceModel& model, const Sensor& sensor,
                          const GainSchedule& schedule, const AttackPlan& plan,
                          const SimConfig& cfg) {
  model.validate();
  sensor.validate(model.dim());
  // Structural plan checks; power-vs-budget bookkeeping happens where the
  // plan is built, with the real sampling period.
  if (plan.covariances.empty()) {
    throw std::invalid_argument("plan.covariances: must be non-empty");
  }
  if (plan.start_k < 0) {
    throw std::invalid_argument("plan.start_k: must be >= 0");
  }
  for (const auto& c : plan.covariances) c.validate();
  cfg.validate(plan.start_k + plan.horizon());
  if (schedule.gains.empty()) {
    throw std::invalid_argument("run_monte_carlo: empty gain schedule");
  }

  const auto n = model.dim();
  const auto mdim = sensor.dim();
  const Matrix& w = schedule.steady_gain();
  const Matrix& p = schedule.steady_covariance();
  const Matrix p_inv = p.ldlt().solve(Matrix::Identity(n, n));
  const Matrix b_mat = bias_transition(w, sensor.h, model.f);

  // Per-step injected covariances over the whole horizon.
  std::vector<Matrix> sigmas(static_cast<std::size_t>(cfg.horizon),
                             Matrix::Zero(mdim, mdim));
  for (int m = 0; m <= plan.horizon(); ++m) {
    sigmas[static_cast<std::size_t>(plan.start_k + m)] =
        plan.covariances[static_cast<std::size_t>(m)].covariance();
  }
  const int last_plan_step = plan.start_k + plan.horizon();

  SimReport rep;
  rep.dim = static_cast<int>(n);
  rep.q_norm.assign(static_cast<std::size_t>(cfg.horizon), 0.0);
  rep.q_nominal.assign(static_cast<std::size_t>(cfg.horizon), 0.0);
  rep.q_theory.reserve(static_cast<std::size_t>(cfg.horizon));
  rep.q_band.reserve(static_cast<std::size_t>(cfg.horizon));
  rep.trace_total.reserve(static_cast<std::size_t>(cfg.horizon));
  rep.det_total.reserve(static_cast<std::size_t>(cfg.horizon));
  rep.volume.reserve(static_cast<std::size_t>(cfg.horizon));
  rep.ellipse_axes.reserve(static_cast<std::size_t>(cfg.horizon));
  rep.ellipse_angle.reserve(static_cast<std::size_t>(cfg.horizon));

  // Theory series: A_k by the one-step recursion, plus derived summaries.
  Matrix a = Matrix::Zero(n, n);
  for (int k = 0; k < cfg.horizon; ++k) {
    a = b_mat * a * b_mat.transpose() +
        w * sigmas[static_cast<std::size_t>(k)] * w.transpose();
    a = 0.5 * (a + a.transpose());
    if (k == last_plan_step) rep.theory_emse = a;
    const Matrix total = p + a;
    rep.q_theory.push_back(static_cast<double>(n) + (p_inv * a).trace());
    const Matrix scaled = p_inv * total;
    const double var_per_run = 2.0 * (scaled * scaled).trace();
    rep.q_band.push_back(3.0 * std::sqrt(var_per_run /
                                         static_cast<double>(cfg.runs)));
    rep.trace_total.push_back(total.trace());
    rep.det_total.push_back(total.determinant());
    rep.volume.push_back(ellipse_volume(total, cfg.confidence_gamma));
    const EllipseGeometry geo = ellipse_geometry(total, cfg.confidence_gamma);
    rep.ellipse_axes.push_back(geo.axes);
    rep.ellipse_angle.push_back(geo.angle);
  }

  // Samplers (shared across runs; the RNG carries all per-run state).
  const GaussianSampler sample_init(p);
  const GaussianSampler sample_process(model.q);
  const GaussianSampler sample_meas(sensor.r);
  std::vector<GaussianSampler> sample_bias;
  sample_bias.reserve(sigmas.size());
  for (const auto& s : sigmas) sample_bias.emplace_back(s);

  std::vector<Vector> mean_err(static_cast<std::size_t>(cfg.horizon),
                               Vector::Zero(n));
  Vector diff_sum = Vector::Zero(n);
  Matrix diff_outer = Matrix::Zero(n, n);

  for (int run = 0; run < cfg.runs; ++run) {
    std::mt19937_64 rng(
        splitmix64(cfg.seed ^ (0x9E3779B97F4A7C15ULL *
                               (static_cast<std::uint64_t>(run) + 1))));
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Start at steady state: filtered error ~ N(0, P).
    Vector x_hat = Vector::Zero(n);
    Vector x_hat_att = Vector::Zero(n);
    Vector x_true = -sample_init.draw(rng, gauss);
    Vector diff_at_plan_end = Vector::Zero(n);

    for (int k = 0; k < cfg.horizon; ++k) {
      x_true = model.f * x_true + sample_process.draw(rng, gauss);
      const Vector z =
          sensor.h * x_true + sample_meas.draw(rng, gauss);
      const Vector pred = model.f * x_hat;
      const Vector pred_att = model.f * x_hat_att;
      x_hat = pred + w * (z - sensor.h * pred);
      const Vector z_att = corrupt_measurement(
          z, sample_bias[static_cast<std::size_t>(k)].draw(rng, gauss));
      x_hat_att = pred_att + w * (z_att - sensor.h * pred_att);

      const Vector err_att = x_hat_att - x_true;
      const Vector err = x_hat - x_true;
      rep.q_norm[static_cast<std::size_t>(k)] +=
          err_att.dot(p_inv * err_att);
      rep.q_nominal[static_cast<std::size_t>(k)] += err.dot(p_inv * err);
      mean_err[static_cast<std::size_t>(k)] += err_att;
      if (k == last_plan_step) diff_at_plan_end = x_hat_att - x_hat;
    }
    diff_sum += diff_at_plan_end;
    diff_outer += diff_at_plan_end * diff_at_plan_end.transpose();
  }

  const double runs = static_cast<double>(cfg.runs);
  for (int k = 0; k < cfg.horizon; ++k) {
    rep.q_norm[static_cast<std::size_t>(k)] /= runs;
    rep.q_nominal[static_cast<std::size_t>(k)] /= runs;
    rep.ellipse_center.push_back(mean_err[static_cast<std::size_t>(k)] / runs);
  }
  const Vector mean_diff = diff_sum / runs;
  rep.empirical_emse =
      (diff_outer - runs * mean_diff * mean_diff.transpose()) / (runs - 1.0);
  rep.empirical_emse =
      0.5 * (rep.empirical_emse + rep.empirical_emse.transpose());
  return rep;
}

SweepResult kappa_sweep(const Matrix& p, const Matrix& gain,
                        double sampling_period_s, double a2, double gamma,
                        const std::vector<double>& kappa_grid,
                        const std::vector<double>& rho_grid) {
  if (kappa_grid.empty() || rho_grid.empty()) {
    throw std::invalid_argument("kappa_sweep: grids must be non-empty");
  }
  for (double k : kappa_grid) {
    if (k <= 0.0) {
      throw std::invalid_argument("kappa_sweep: kappa values must be > 0");
    }
  }
  for (double r : rho_grid) {
    if (std::abs(r) > 1.0) {
      throw std::invalid_argument("kappa_sweep: rho values must lie in [-1,1]");
    }
  }
  if (sampling_period_s <= 0.0) {
    throw std::invalid_argument("kappa_sweep: sampling period must be > 0");
  }
  const double t = sampling_period_s;
  SweepResult out;
  out.kappa_grid = kappa_grid;
  out.rho_grid = rho_grid;
  out.volume.assign(rho_grid.size(),
                    std::vector<double>(kappa_grid.size(), 0.0));
  out.best_volume = -1.0;
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    for (std::size_t j = 0; j < kappa_grid.size(); ++j) {
      const double kap = kappa_grid[j];
      const double sp2 = a2 * kap * kap / (1.0 + kap * kap);
      const double sv2 = a2 / ((1.0 + kap * kap) * t * t);
      const double rho = rho_grid[i];
      Matrix cov(2, 2);
      cov << sp2, rho * std::sqrt(sp2 * sv2), rho * std::sqrt(sp2 * sv2), sv2;
      const double vol = ellipse_volume(p + gain * cov * gain.transpose(),
                                        gamma);
      out.volume[i][j] = vol;
      if (vol > out.best_volume) {
        out.best_volume = vol;
        out.best_kappa = kap;
        out.best_rho = rho;
      }
    }
  }
  return out;
}

}  // namespace kfbias
