#include "kfbias/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kfbias/version.hpp"

namespace kfbias {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
  throw std::invalid_argument("scenario." + path + ": " + why);
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) bad_field(path, "missing required field");
  return j.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) bad_field(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad_field(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) bad_field(path, "expected a string");
  return j.get<std::string>();
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.name = as_string(require(j, "name", "name"), "name");
  if (j.contains("description")) {
    s.description = as_string(j.at("description"), "description");
  }
  const json& model = require(j, "model", "model");
  s.sampling_period_s = as_number(
      require(model, "sampling_period_s", "model.sampling_period_s"),
      "model.sampling_period_s");
  s.accel_noise_var =
      as_number(require(model, "accel_noise_var", "model.accel_noise_var"),
                "model.accel_noise_var");

  const json& sensors = require(j, "sensors", "sensors");
  if (!sensors.is_array() || sensors.empty()) {
    bad_field("sensors", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const std::string path = "sensors[" + std::to_string(i) + "]";
    const json& sj = sensors.at(i);
    SensorSpec spec;
    const std::string kind =
        as_string(require(sj, "kind", path + ".kind"), path + ".kind");
    if (kind == "position") {
      spec.kind = SensorKind::position;
    } else if (kind == "pv") {
      spec.kind = SensorKind::pv;
    } else {
      bad_field(path + ".kind", "must be \"position\" or \"pv\"");
    }
    const json& nv = require(sj, "noise_var", path + ".noise_var");
    if (!nv.is_array()) bad_field(path + ".noise_var", "expected an array");
    for (std::size_t v = 0; v < nv.size(); ++v) {
      spec.noise_var.push_back(as_number(
          nv.at(v), path + ".noise_var[" + std::to_string(v) + "]"));
    }
    s.sensors.push_back(std::move(spec));
  }

  const json& attack = require(j, "attack", "attack");
  const std::string obj = as_string(
      require(attack, "objective", "attack.objective"), "attack.objective");
  if (obj == "trace") {
    s.objective = Objective::trace;
  } else if (obj == "det") {
    s.objective = Objective::det;
  } else {
    bad_field("attack.objective", "must be \"trace\" or \"det\"");
  }
  const std::string mode =
      as_string(require(attack, "mode", "attack.mode"), "attack.mode");
  if (mode == "single") {
    s.mode = AttackMode::single;
  } else if (mode == "continuous") {
    s.mode = AttackMode::continuous;
  } else if (mode == "multitime") {
    s.mode = AttackMode::multitime;
  } else {
    bad_field("attack.mode",
              "must be \"single\", \"continuous\" or \"multitime\"");
  }
  s.power_a2 = as_number(require(attack, "power_a2", "attack.power_a2"),
                         "attack.power_a2");
  if (attack.contains("start_k")) {
    s.start_k = as_int(attack.at("start_k"), "attack.start_k");
  }
  if (attack.contains("weights")) {
    const json& wj = attack.at("weights");
    if (!wj.is_array()) bad_field("attack.weights", "expected an array");
    for (std::size_t i = 0; i < wj.size(); ++i) {
      s.weights.push_back(as_number(
          wj.at(i), "attack.weights[" + std::to_string(i) + "]"));
    }
  }

  if (j.contains("sim")) {
    const json& sim = j.at("sim");
    if (sim.contains("runs")) s.sim.runs = as_int(sim.at("runs"), "sim.runs");
    if (sim.contains("horizon")) {
      s.sim.horizon = as_int(sim.at("horizon"), "sim.horizon");
    }
    if (sim.contains("seed")) {
      if (!sim.at("seed").is_number_integer()) {
        bad_field("sim.seed", "expected an integer");
      }
      s.sim.seed = sim.at("seed").get<std::uint64_t>();
    }
    if (sim.contains("confidence_gamma")) {
      s.sim.confidence_gamma =
          as_number(sim.at("confidence_gamma"), "sim.confidence_gamma");
    }
  }
  if (j.contains("sweep")) {
    const json& sw = j.at("sweep");
    if (sw.contains("kappa_min")) {
      s.kappa_min = as_number(sw.at("kappa_min"), "sweep.kappa_min");
    }
    if (sw.contains("kappa_max")) {
      s.kappa_max = as_number(sw.at("kappa_max"), "sweep.kappa_max");
    }
    if (sw.contains("kappa_step")) {
      s.kappa_step = as_number(sw.at("kappa_step"), "sweep.kappa_step");
    }
    if (sw.contains("rho_step")) {
      s.rho_step = as_number(sw.at("rho_step"), "sweep.rho_step");
    }
  }
  s.validate();
  return s;
}

json mat_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vec_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix mat_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) bad_field(path, "expected a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      bad_field(path, "ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = as_number(row.at(static_cast<std::size_t>(c)), path);
    }
  }
  return m;
}

Vector vec_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) bad_field(path, "expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = as_number(j.at(static_cast<std::size_t>(i)), path);
  }
  return v;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

/// Model + fusion + steady filter shared by solve and re-evaluation.
struct Context {
  StateSpaceModel model;
  SensorSuite suite;
  EquivalentSensor fused;
  GainSchedule schedule;
  PowerDef power_def = PowerDef::trace;
  bool all_position = true;
  Vector coeffs;  ///< position: scalar weights
  Vector cp, cv;  ///< pv: diagonal weights per sensor
};

Context build_context(const Scenario& s) {
  Context ctx;
  ctx.model = build_dwna_model(s.sampling_period_s, s.accel_noise_var);
  for (std::size_t i = 0; i < s.sensors.size(); ++i) {
    const SensorSpec& spec = s.sensors[i];
    Sensor sensor;
    if (spec.kind == SensorKind::position) {
      sensor.h = Matrix{{1.0, 0.0}};
      sensor.r = Matrix{{spec.noise_var.at(0)}};
      sensor.name = "position-" + std::to_string(i);
    } else {
      sensor.h = Matrix::Identity(2, 2);
      sensor.r = Matrix::Zero(2, 2);
      sensor.r(0, 0) = spec.noise_var.at(0);
      sensor.r(1, 1) = spec.noise_var.at(1);
      sensor.name = "pv-" + std::to_string(i);
    }
    ctx.suite.sensors.push_back(std::move(sensor));
  }
  ctx.suite.validate(ctx.model.dim());
  ctx.all_position = s.sensors.front().kind == SensorKind::position;
  ctx.fused = ctx.all_position ? fuse_identical_h(ctx.suite)
                               : fuse_observable(ctx.suite);
  ctx.power_def =
      ctx.all_position ? PowerDef::trace : PowerDef::pv_weighted;
  ctx.schedule = steady_state(ctx.model, ctx.fused.fused);
  if (!ctx.schedule.steady) {
    throw std::runtime_error(
        "steady-state covariance iteration did not converge (residual " +
        std::to_string(ctx.schedule.last_residual) + ")");
  }
  const auto m = static_cast<Eigen::Index>(s.sensors.size());
  if (ctx.all_position) {
    ctx.coeffs = Vector(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      ctx.coeffs(i) = ctx.fused.weights[static_cast<std::size_t>(i)](0, 0);
    }
  } else {
    ctx.cp = Vector(m);
    ctx.cv = Vector(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Matrix& w = ctx.fused.weights[static_cast<std::size_t>(i)];
      const double off = std::abs(w(0, 1)) + std::abs(w(1, 0));
      if (off > 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument(
            "scenario.sensors: fusion weights are not diagonal; this sensor "
            "structure is not supported by the allocators");
      }
      ctx.cp(i) = w(0, 0);
      ctx.cv(i) = w(1, 1);
    }
  }
  return ctx;
}

/// Single evaluation rule per (structure, objective); also used to
/// round-trip stored allocations. For position banks the trace objective is
/// the fused bias variance (the induced extra trace scales it by ||W||^2).
double evaluate_objective(const Context& ctx, Objective kind,
                          const Matrix& joint_cov) {
  const Matrix sigma_e =
      equivalent_bias_covariance(ctx.fused.weights, joint_cov);
  if (kind == Objective::det) {
    return det_objective(ctx.schedule.steady_covariance(),
                         ctx.schedule.steady_gain(), sigma_e);
  }
  if (ctx.all_position) return sigma_e(0, 0);
  return trace_objective(ctx.schedule.steady_gain(), sigma_e);
}

}  // namespace

void Scenario::validate() const {
  if (name.empty()) bad_field("name", "must be non-empty");
  if (sampling_period_s <= 0.0) {
    bad_field("model.sampling_period_s", "must be > 0");
  }
  if (accel_noise_var < 0.0) bad_field("model.accel_noise_var", "must be >= 0");
  if (sensors.empty()) bad_field("sensors", "expected a non-empty array");
  const SensorKind kind0 = sensors.front().kind;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const std::string path = "sensors[" + std::to_string(i) + "]";
    const SensorSpec& spec = sensors[i];
    if (spec.kind != kind0) {
      bad_field("sensors", "mixed sensor kinds are not supported");
    }
    const std::size_t want = spec.kind == SensorKind::position ? 1 : 2;
    if (spec.noise_var.size() != want) {
      bad_field(path + ".noise_var",
                "expected " + std::to_string(want) + " variance entries");
    }
    for (double v : spec.noise_var) {
      if (v <= 0.0) bad_field(path + ".noise_var", "entries must be > 0");
    }
  }
  if (power_a2 < 0.0) bad_field("attack.power_a2", "must be >= 0");
  if (start_k < 0) bad_field("attack.start_k", "must be >= 0");
  if (mode == AttackMode::multitime) {
    if (weights.empty()) {
      bad_field("attack.weights", "required for multitime mode");
    }
    double sum = 0.0;
    for (double w : weights) {
      if (w < 0.0) bad_field("attack.weights", "entries must be >= 0");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      bad_field("attack.weights", "must sum to 1");
    }
    if (objective == Objective::det) {
      bad_field("attack.objective",
                "det is not supported in multitime mode (trace weights only)");
    }
  } else if (!weights.empty()) {
    bad_field("attack.weights", "only allowed in multitime mode");
  }
  if (sim.horizon < 1) bad_field("sim.horizon", "must be >= 1");
  if (sim.runs < 2) bad_field("sim.runs", "must be >= 2");
  if (sim.confidence_gamma <= 0.0) bad_field("sim.confidence_gamma", "must be > 0");
  if (kappa_min <= 0.0 || kappa_max < kappa_min) {
    bad_field("sweep.kappa_min", "need 0 < kappa_min <= kappa_max");
  }
  if (kappa_step <= 0.0) bad_field("sweep.kappa_step", "must be > 0");
  if (rho_step <= 0.0 || rho_step > 2.0) {
    bad_field("sweep.rho_step", "must lie in (0, 2]");
  }
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::invalid_argument("scenario file not readable: " +
                                file.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("scenario file is not valid JSON: " +
                                std::string(e.what()));
  }
  return scenario_from_json(j);
}

nlohmann::json scenario_to_json(const Scenario& s) {
  json sensors = json::array();
  for (const auto& spec : s.sensors) {
    sensors.push_back(
        {{"kind", spec.kind == SensorKind::position ? "position" : "pv"},
         {"noise_var", spec.noise_var}});
  }
  json attack = {
      {"objective", s.objective == Objective::trace ? "trace" : "det"},
      {"mode", s.mode == AttackMode::single       ? "single"
               : s.mode == AttackMode::continuous ? "continuous"
                                                  : "multitime"},
      {"power_a2", s.power_a2},
      {"start_k", s.start_k}};
  if (!s.weights.empty()) attack["weights"] = s.weights;
  return json{
      {"name", s.name},
      {"description", s.description},
      {"model",
       {{"sampling_period_s", s.sampling_period_s},
        {"accel_noise_var", s.accel_noise_var}}},
      {"sensors", sensors},
      {"attack", attack},
      {"sim",
       {{"runs", s.sim.runs},
        {"horizon", s.sim.horizon},
        {"seed", s.sim.seed},
        {"confidence_gamma", s.sim.confidence_gamma}}},
      {"sweep",
       {{"kappa_min", s.kappa_min},
        {"kappa_max", s.kappa_max},
        {"kappa_step", s.kappa_step},
        {"rho_step", s.rho_step}}}};
}

std::uint64_t config_hash(const Scenario& s) {
  return fnv1a64(scenario_to_json(s).dump());
}

SolveOutput run_solve(const Scenario& s) {
  s.validate();
  Context ctx = build_context(s);
  SolveOutput out;
  out.model = ctx.model;
  out.suite = ctx.suite;
  out.fused = ctx.fused;
  out.schedule = ctx.schedule;
  out.power_def = ctx.power_def;

  const Matrix& w = ctx.schedule.steady_gain();
  const Matrix& p = ctx.schedule.steady_covariance();
  const double t = s.sampling_period_s;

  if (s.mode == AttackMode::continuous && s.start_k >= s.sim.horizon) {
    throw std::invalid_argument(
        "scenario.attack.start_k: must be < sim.horizon in continuous mode");
  }

  if (s.mode == AttackMode::multitime) {
    const Matrix b = bias_transition(w, ctx.fused.fused.h, ctx.model.f);
    MultiTimeAllocation mt = multitime_single_shot(
        b, w, s.weights, s.power_a2, ctx.power_def, t, s.start_k);
    out.multitime = mt;
    out.plan = mt.plan;
    const BiasCovariance& chosen =
        mt.plan.covariances[static_cast<std::size_t>(mt.offset)];
    out.allocation.sigma = chosen.sigma;
    out.allocation.rho = chosen.rho;
    out.allocation.kind = Objective::trace;
    out.allocation.objective = mt.objective;
    out.sigma_e = chosen.covariance();
  } else {
    if (ctx.all_position) {
      out.allocation = s.objective == Objective::trace
                           ? trace_position(ctx.coeffs, s.power_a2)
                           : det_position(p, w, ctx.coeffs, s.power_a2);
    } else if (s.sensors.size() == 1) {
      out.allocation = s.objective == Objective::trace
                           ? trace_pv_single(w, t, s.power_a2)
                           : det_pv_single_waterfill(p, w, t, s.power_a2);
    } else {
      out.allocation =
          s.objective == Objective::trace
              ? trace_pv_multi(w, ctx.cp, ctx.cv, t, s.power_a2)
              : det_pv_multi(p, w, ctx.cp, ctx.cv, t, s.power_a2);
    }
    const Matrix joint = out.allocation.covariance();
    // One evaluation rule for reporting and round-trips.
    out.allocation.objective =
        evaluate_objective(ctx, out.allocation.kind, joint);
    out.sigma_e = equivalent_bias_covariance(ctx.fused.weights, joint);

    out.plan.start_k = s.start_k;
    out.plan.budget = s.power_a2;
    out.plan.power_def = ctx.power_def;
    const int plan_len = s.mode == AttackMode::single
                             ? 1
                             : std::max(1, s.sim.horizon - s.start_k);
    const BiasCovariance step = BiasCovariance::from_covariance(out.sigma_e);
    out.plan.covariances.assign(static_cast<std::size_t>(plan_len), step);
    out.plan.weights.assign(static_cast<std::size_t>(plan_len),
                            1.0 / plan_len);
    out.plan.validate(t);
  }

  std::vector<Matrix> sigmas;
  sigmas.reserve(out.plan.covariances.size());
  for (const auto& c : out.plan.covariances) sigmas.push_back(c.covariance());
  const Matrix b = bias_transition(w, ctx.fused.fused.h, ctx.model.f);
  out.emse = emse_at_horizon(sigmas, b, w).total;
  return out;
}

SimReport run_simulate(const Scenario& s, const SolveOutput& solve) {
  return run_monte_carlo(solve.model, solve.fused.fused, solve.schedule,
                         solve.plan, s.sim);
}

SweepResult run_sweep(const Scenario& s, const SolveOutput& solve) {
  if (s.sensors.size() != 1 || s.sensors.front().kind != SensorKind::pv) {
    throw std::invalid_argument(
        "scenario.sensors: sweep requires exactly one position-velocity "
        "sensor");
  }
  std::vector<double> kappa_grid;
  const auto n_kappa =
      static_cast<long>(std::floor((s.kappa_max - s.kappa_min) / s.kappa_step +
                                   1e-9));
  for (long i = 0; i <= n_kappa; ++i) {
    kappa_grid.push_back(s.kappa_min + static_cast<double>(i) * s.kappa_step);
  }
  std::vector<double> rho_grid;
  const auto n_rho = static_cast<long>(std::floor(2.0 / s.rho_step + 1e-9));
  for (long i = 0; i <= n_rho; ++i) {
    rho_grid.push_back(
        std::min(-1.0 + static_cast<double>(i) * s.rho_step, 1.0));
  }
  return kappa_sweep(solve.schedule.steady_covariance(),
                     solve.schedule.steady_gain(), s.sampling_period_s,
                     s.power_a2, s.sim.confidence_gamma, kappa_grid, rho_grid);
}

namespace {

json provenance_json(const Scenario& s) {
  return json{{"config_hash", hash_hex(config_hash(s))},
              {"seed", s.sim.seed},
              {"version", version}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path.string());
  }
  out << text;
  if (!out) {
    throw std::runtime_error("failed writing output file: " + path.string());
  }
}

}  // namespace

std::filesystem::path write_solution(const std::filesystem::path& out_dir,
                                     const Scenario& s, const SolveOutput& so) {
  json alloc = {{"sigma", vec_to_json(so.allocation.sigma)},
                {"rho", mat_to_json(so.allocation.rho)},
                {"objective", so.allocation.objective},
                {"objective_kind",
                 so.allocation.kind == Objective::trace ? "trace" : "det"},
                {"budget_used",
                 bias_power(so.allocation.covariance(), so.power_def,
                            s.sampling_period_s)}};
  json per_sensor = json::array();
  if (so.multitime) {
    // Multitime allocations live in the fused measurement space.
    per_sensor.push_back(
        {{"name", "fused"}, {"sigma", vec_to_json(so.allocation.sigma)}});
  } else {
    const int comps = so.power_def == PowerDef::pv_weighted ? 2 : 1;
    for (std::size_t i = 0; i < so.suite.sensors.size(); ++i) {
      json entry = {{"name", so.suite.sensors[i].name}};
      json sig = json::array();
      for (int c = 0; c < comps; ++c) {
        sig.push_back(so.allocation.sigma(
            static_cast<Eigen::Index>(i) * comps + c));
      }
      entry["sigma"] = sig;
      per_sensor.push_back(std::move(entry));
    }
  }
  alloc["per_sensor"] = per_sensor;

  json fused = {{"h", mat_to_json(so.fused.fused.h)},
                {"r", mat_to_json(so.fused.fused.r)},
                {"sigma_e", mat_to_json(so.sigma_e)},
                {"steady_gain", mat_to_json(so.schedule.steady_gain())},
                {"steady_covariance",
                 mat_to_json(so.schedule.steady_covariance())}};
  json weights = json::array();
  for (const auto& m : so.fused.weights) weights.push_back(mat_to_json(m));
  fused["weights"] = weights;

  const Matrix total = so.schedule.steady_covariance() + so.emse;
  json emse = {{"matrix", mat_to_json(so.emse)},
               {"trace_total", total.trace()},
               {"det_total", total.determinant()},
               {"volume", ellipse_volume(total, s.sim.confidence_gamma)}};

  json root = {{"config", scenario_to_json(s)},
               {"provenance", provenance_json(s)},
               {"allocation", alloc},
               {"fused", fused},
               {"emse", emse}};
  if (so.multitime) {
    json plan_steps = json::array();
    for (std::size_t m = 0; m < so.plan.covariances.size(); ++m) {
      plan_steps.push_back(
          {{"k", so.plan.start_k + static_cast<int>(m)},
           {"sigma_e", mat_to_json(so.plan.covariances[m].covariance())}});
    }
    root["multitime"] = {{"offset", so.multitime->offset},
                         {"kappa", so.multitime->kappa},
                         {"direction", vec_to_json(so.multitime->direction)},
                         {"plan", plan_steps}};
  }
  const auto path = out_dir / "solution.json";
  write_text(path, root.dump(2) + "\n");
  return path;
}

std::filesystem::path write_series_csv(const std::filesystem::path& out_dir,
                                       const SimReport& rep) {
  std::ostringstream out;
  out << "time_k,q_norm,q_theory,trace_total,det_total,volume\n";
  for (std::size_t k = 0; k < rep.q_norm.size(); ++k) {
    out << k << ',' << fmt_double(rep.q_norm[k]) << ','
        << fmt_double(rep.q_theory[k]) << ',' << fmt_double(rep.trace_total[k])
        << ',' << fmt_double(rep.det_total[k]) << ','
        << fmt_double(rep.volume[k]) << '\n';
  }
  const auto path = out_dir / "series.csv";
  write_text(path, out.str());
  return path;
}

std::filesystem::path write_sim_report(const std::filesystem::path& out_dir,
                                       const Scenario& s,
                                       const SolveOutput& so,
                                       const SimReport& rep) {
  json ellipse = json::array();
  for (std::size_t k = 0; k < rep.q_norm.size(); ++k) {
    ellipse.push_back({{"k", k},
                       {"center", vec_to_json(rep.ellipse_center[k])},
                       {"axes", vec_to_json(rep.ellipse_axes[k])},
                       {"angle", rep.ellipse_angle[k]}});
  }
  double q_nom_avg = 0.0;
  for (double q : rep.q_nominal) q_nom_avg += q;
  q_nom_avg /= static_cast<double>(rep.q_nominal.size());
  json root = {
      {"config", scenario_to_json(s)},
      {"provenance", provenance_json(s)},
      {"summary",
       {{"runs", s.sim.runs},
        {"q_nominal_time_avg", q_nom_avg},
        {"state_dim", rep.dim},
        {"objective", so.allocation.objective}}},
      {"emse",
       {{"theory", mat_to_json(rep.theory_emse)},
        {"empirical", mat_to_json(rep.empirical_emse)}}},
      {"ellipse", ellipse}};
  const auto path = out_dir / "report.json";
  write_text(path, root.dump(2) + "\n");
  return path;
}

std::filesystem::path write_sweep_csv(const std::filesystem::path& out_dir,
                                      const SweepResult& sweep) {
  std::ostringstream out;
  out << "rho,kappa,volume\n";
  for (std::size_t i = 0; i < sweep.rho_grid.size(); ++i) {
    for (std::size_t j = 0; j < sweep.kappa_grid.size(); ++j) {
      out << fmt_double(sweep.rho_grid[i]) << ','
          << fmt_double(sweep.kappa_grid[j]) << ','
          << fmt_double(sweep.volume[i][j]) << '\n';
    }
  }
  const auto path = out_dir / "surface.csv";
  write_text(path, out.str());
  return path;
}

std::filesystem::path write_sweep_summary(const std::filesystem::path& out_dir,
                                          const Scenario& s,
                                          const SweepResult& sweep) {
  json root = {{"config", scenario_to_json(s)},
               {"provenance", provenance_json(s)},
               {"argmax",
                {{"kappa", sweep.best_kappa},
                 {"rho", sweep.best_rho},
                 {"volume", sweep.best_volume}}}};
  const auto path = out_dir / "sweep.json";
  write_text(path, root.dump(2) + "\n");
  return path;
}

double reevaluate_solution_objective(const std::filesystem::path& solution) {
  std::ifstream in(solution);
  if (!in) {
    throw std::invalid_argument("solution file not readable: " +
                                solution.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("solution file is not valid JSON: " +
                                std::string(e.what()));
  }
  const Scenario s = scenario_from_json(require(j, "config", "config"));
  const Context ctx = build_context(s);
  if (s.mode == AttackMode::multitime) {
    const json& mt = require(j, "multitime", "multitime");
    const json& plan = require(mt, "plan", "multitime.plan");
    std::vector<Matrix> sigmas;
    for (const auto& step : plan) {
      sigmas.push_back(mat_from_json(require(step, "sigma_e",
                                             "multitime.plan.sigma_e"),
                                     "multitime.plan.sigma_e"));
    }
    const Matrix b = bias_transition(ctx.schedule.steady_gain(),
                                     ctx.fused.fused.h, ctx.model.f);
    return multitime_objective(sigmas, s.weights, b,
                               ctx.schedule.steady_gain());
  }
  const json& alloc = require(j, "allocation", "allocation");
  const Vector sigma =
      vec_from_json(require(alloc, "sigma", "allocation.sigma"),
                    "allocation.sigma");
  const Matrix rho = mat_from_json(require(alloc, "rho", "allocation.rho"),
                                   "allocation.rho");
  const Objective kind =
      as_string(require(alloc, "objective_kind", "allocation.objective_kind"),
                "allocation.objective_kind") == "det"
          ? Objective::det
          : Objective::trace;
  const Matrix joint = sigma.asDiagonal() * rho * sigma.asDiagonal();
  return evaluate_objective(ctx, kind, joint);
}

}  // namespace kfbias
