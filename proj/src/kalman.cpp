#include "kfbias/kalman.hpp"

#include <stdexcept>

namespace kfbias {

FilterState predict(const FilterState& state, const StateSpaceModel& model) {
  FilterState out;
  out.x = model.f * state.x + model.g * model.u;
  out.p = model.f * state.p * model.f.transpose() + model.q;
  out.p = 0.5 * (out.p + out.p.transpose());
  return out;
}

Matrix kalman_gain(const Matrix& p_pred, const Sensor& sensor) {
  const Matrix s =
      sensor.h * p_pred * sensor.h.transpose() + sensor.r;
  // S is SPD whenever R is; solve instead of forming the inverse.
  return s.ldlt().solve(sensor.h * p_pred).transpose();
}

FilterState update(const FilterState& state, const Sensor& sensor,
                   const Vector& z) {
  const Matrix w = kalman_gain(state.p, sensor);
  const Matrix iwh =
      Matrix::Identity(state.p.rows(), state.p.cols()) - w * sensor.h;
  FilterState out;
  out.x = state.x + w * (z - sensor.h * state.x);
  out.p = iwh * state.p * iwh.transpose() + w * sensor.r * w.transpose();
  out.p = 0.5 * (out.p + out.p.transpose());
  return out;
}

FilterState information_update(const FilterState& state, const Sensor& sensor,
                               const Vector& z) {
  const auto n = state.p.rows();
  const Matrix p_inv = state.p.ldlt().solve(Matrix::Identity(n, n));
  const Matrix r_inv =
      sensor.r.ldlt().solve(Matrix::Identity(sensor.r.rows(), sensor.r.rows()));
  const Matrix info = p_inv + sensor.h.transpose() * r_inv * sensor.h;
  FilterState out;
  out.p = info.ldlt().solve(Matrix::Identity(n, n));
  out.p = 0.5 * (out.p + out.p.transpose());
  out.x = out.p * (p_inv * state.x + sensor.h.transpose() * r_inv * z);
  return out;
}

GainSchedule steady_state(const StateSpaceModel& model, const Sensor& sensor,
                          const SteadyStateOptions& opts) {
  model.validate();
  sensor.validate(model.dim());
  if (opts.tol <= 0.0) {
    throw std::invalid_argument("steady_state: tol must be > 0");
  }
  if (opts.max_iter < 1) {
    throw std::invalid_argument("steady_state: max_iter must be >= 1");
  }
  const auto n = model.dim();
  Matrix p = opts.p0.size() > 0
                 ? symmetrize(opts.p0, 1e-8, "steady_state.p0")
                 : Matrix(100.0 * Matrix::Identity(n, n));

  GainSchedule sched;
  sched.gains.reserve(64);
  sched.covariances.reserve(64);
  FilterState st{Vector::Zero(n), p};
  const Vector z0 = Vector::Zero(sensor.dim());
  for (int k = 0; k < opts.max_iter; ++k) {
    const FilterState pred = predict(st, model);
    const Matrix w = kalman_gain(pred.p, sensor);
    st = update(pred, sensor, z0);
    sched.gains.push_back(w);
    sched.covariances.push_back(st.p);
    const double residual =
        sched.covariances.size() > 1
            ? (st.p - sched.covariances[sched.covariances.size() - 2])
                  .cwiseAbs()
                  .maxCoeff()
            : (st.p - p).cwiseAbs().maxCoeff();
    sched.last_residual = residual;
    if (residual < opts.tol) {
      sched.steady = true;
      return sched;
    }
  }
  sched.steady = false;
  return sched;
}

}  // namespace kfbias
