#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfbias/attack.hpp"
#include "kfbias/fusion.hpp"
#include "kfbias/kalman.hpp"
#include "kfbias/model.hpp"
#include "kfbias/optimizer.hpp"
#include "kfbias/sim.hpp"

namespace kfbias {

enum class SensorKind { position, pv };
enum class AttackMode { single, continuous, multitime };

/// One sensor entry of a scenario file.
struct SensorSpec {
  SensorKind kind = SensorKind::position;
  std::vector<double> noise_var;  ///< 1 entry (position) or 2 (pv), variances
};

/// Fully-resolved scenario: the file contents with defaults applied.
/// Field-name units: *_s seconds, *_var variances, power_a2 the squared
/// budget, confidence_gamma a chi-square gate.
struct Scenario {
  std::string name;
  std::string description;
  double sampling_period_s = 1.0;
  double accel_noise_var = 0.25;
  std::vector<SensorSpec> sensors;
  Objective objective = Objective::trace;
  AttackMode mode = AttackMode::single;
  double power_a2 = 3000.0;
  int start_k = 50;
  std::vector<double> weights;  ///< multitime objective weights alpha
  SimConfig sim;
  double kappa_min = 0.2;
  double kappa_max = 3.0;
  double kappa_step = 0.05;
  double rho_step = 0.1;

  /// Structural validation; throws std::invalid_argument naming the field.
  void validate() const;
};

/// Parses and validates a scenario file. Every parse error names the
/// offending field.
Scenario load_scenario(const std::filesystem::path& file);

/// Canonical resolved form (defaults applied, keys sorted); echoed into every
/// output bundle and hashed for provenance.
nlohmann::json scenario_to_json(const Scenario& s);

/// FNV-1a 64-bit over the canonical serialized scenario.
std::uint64_t config_hash(const Scenario& s);

/// Everything `solve` computes; `simulate` reuses it.
struct SolveOutput {
  StateSpaceModel model;
  SensorSuite suite;
  EquivalentSensor fused;
  GainSchedule schedule;
  PowerDef power_def = PowerDef::trace;
  AllocationResult allocation;  ///< per-sensor-component sigma/rho
  Matrix sigma_e;               ///< fused bias covariance of an injection step
  Matrix emse;                  ///< A at the end of the plan
  AttackPlan plan;              ///< realized per-step plan in fused space
  std::optional<MultiTimeAllocation> multitime;
};

/// Builds the model/fusion/filter and dispatches the matching allocator.
/// Throws std::invalid_argument for structural problems and
/// std::runtime_error for numerical failures (e.g. no steady state).
SolveOutput run_solve(const Scenario& s);

/// Monte Carlo for the scenario's plan.
SimReport run_simulate(const Scenario& s, const SolveOutput& solve);

/// kappa/rho surface for single position-velocity sensor scenarios.
SweepResult run_sweep(const Scenario& s, const SolveOutput& solve);

/// Output writers. All files are byte-stable for a fixed config, seed and
/// tool version; every JSON bundle embeds the resolved config and provenance
/// (config hash, seed, version). Writers return the created path.
std::filesystem::path write_solution(const std::filesystem::path& out_dir,
                                     const Scenario& s, const SolveOutput& so);
std::filesystem::path write_series_csv(const std::filesystem::path& out_dir,
                                       const SimReport& rep);
std::filesystem::path write_sim_report(const std::filesystem::path& out_dir,
                                       const Scenario& s,
                                       const SolveOutput& so,
                                       const SimReport& rep);
std::filesystem::path write_sweep_csv(const std::filesystem::path& out_dir,
                                      const SweepResult& sweep);
std::filesystem::path write_sweep_summary(const std::filesystem::path& out_dir,
                                          const Scenario& s,
                                          const SweepResult& sweep);

/// Reloads a solution bundle and recomputes the objective from the stored
/// allocation (the bundle embeds its config, so this is self-contained).
double reevaluate_solution_objective(const std::filesystem::path& solution);

}  // namespace kfbias
