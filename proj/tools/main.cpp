#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kfbias/scenario.hpp"
#include "kfbias/verify.hpp"
#include "kfbias/version.hpp"

namespace {

struct CommonArgs {
  std::string scenario;
  std::string out;
  std::int64_t seed = -1;
  int runs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out) {
  cmd->add_option("--scenario", args.scenario, "Scenario JSON file")
      ->required();
  auto* out =
      cmd->add_option("--out", args.out, "Output directory (created if absent)");
  if (needs_out) out->required();
  cmd->add_option("--seed", args.seed, "Override the scenario's RNG seed");
  cmd->add_option("--runs", args.runs,
                  "Override the scenario's Monte Carlo sample count");
}

kfbias::Scenario load_with_overrides(const CommonArgs& args) {
  kfbias::Scenario s = kfbias::load_scenario(args.scenario);
  if (args.seed >= 0) s.sim.seed = static_cast<std::uint64_t>(args.seed);
  if (args.runs > 0) s.sim.runs = args.runs;
  s.validate();
  return s;
}

std::filesystem::path ensure_out_dir(const std::string& out) {
  std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_solve_cmd(const CommonArgs& args) {
  const kfbias::Scenario s = load_with_overrides(args);
  const kfbias::SolveOutput so = kfbias::run_solve(s);
  const auto dir = ensure_out_dir(args.out);
  const auto path = kfbias::write_solution(dir, s, so);
  std::cout << "scenario: " << s.name << "\n"
            << "objective ("
            << (s.objective == kfbias::Objective::trace ? "trace" : "det")
            << "): " << so.allocation.objective << "\n"
            << "wrote " << path.string() << "\n";
  return 0;
}

int run_simulate_cmd(const CommonArgs& args) {
  const kfbias::Scenario s = load_with_overrides(args);
  const kfbias::SolveOutput so = kfbias::run_solve(s);
  const kfbias::SimReport rep = kfbias::run_simulate(s, so);
  const auto dir = ensure_out_dir(args.out);
  const auto series = kfbias::write_series_csv(dir, rep);
  const auto report = kfbias::write_sim_report(dir, s, so, rep);
  std::cout << "scenario: " << s.name << "\n"
            << "runs: " << s.sim.runs << ", horizon: " << s.sim.horizon << "\n"
            << "wrote " << series.string() << "\n"
            << "wrote " << report.string() << "\n";
  return 0;
}

int run_sweep_cmd(const CommonArgs& args) {
  const kfbias::Scenario s = load_with_overrides(args);
  const kfbias::SolveOutput so = kfbias::run_solve(s);
  const kfbias::SweepResult sweep = kfbias::run_sweep(s, so);
  const auto dir = ensure_out_dir(args.out);
  const auto surface = kfbias::write_sweep_csv(dir, sweep);
  const auto summary = kfbias::write_sweep_summary(dir, s, sweep);
  std::cout << "scenario: " << s.name << "\n"
            << "best kappa: " << sweep.best_kappa
            << ", best rho: " << sweep.best_rho
            << ", volume: " << sweep.best_volume << "\n"
            << "wrote " << surface.string() << "\n"
            << "wrote " << summary.string() << "\n";
  return 0;
}

int run_verify_cmd(const CommonArgs& args, double grid_step) {
  const kfbias::Scenario s = load_with_overrides(args);
  const kfbias::SolveOutput so = kfbias::run_solve(s);
  kfbias::VerifyOptions opts;
  opts.mc_runs = args.runs;
  opts.grid_fraction = grid_step;
  const kfbias::VerifyReport report = kfbias::run_verify(s, so, opts);

  int failed = 0;
  for (const auto& check : report.checks) {
    std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name << ": "
              << check.detail << "\n";
    if (!check.pass) ++failed;
  }
  if (!args.out.empty()) {
    const auto dir = ensure_out_dir(args.out);
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& check : report.checks) {
      checks.push_back({{"name", check.name},
                        {"pass", check.pass},
                        {"detail", check.detail}});
    }
    nlohmann::json root = {{"config", kfbias::scenario_to_json(s)},
                           {"checks", checks},
                           {"all_pass", report.all_pass()}};
    std::ofstream file(dir / "verify.json", std::ios::binary);
    file << root.dump(2) << "\n";
    std::cout << "wrote " << (dir / "verify.json").string() << "\n";
  }
  if (failed > 0) {
    std::cout << "verification FAILED (" << failed << "/"
              << report.checks.size() << " checks)\n";
    return 3;
  }
  std::cout << "verification passed (" << report.checks.size()
            << " checks)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Bias-injection attack planner for fused Kalman-filter tracking"};
  app.set_version_flag("--version", kfbias::version);
  app.require_subcommand(1);

  CommonArgs solve_args, sim_args, sweep_args, verify_args;
  double grid_step = 0.0;

  CLI::App* solve = app.add_subcommand(
      "solve", "Compute the optimal bias allocation and write solution.json");
  add_common(solve, solve_args, true);

  CLI::App* simulate = app.add_subcommand(
      "simulate",
      "Monte Carlo the planned attack; write series.csv and report.json");
  add_common(simulate, sim_args, true);

  CLI::App* sweep = app.add_subcommand(
      "sweep",
      "Sweep the power split and correlation; write surface.csv and sweep.json");
  add_common(sweep, sweep_args, true);

  CLI::App* verify = app.add_subcommand(
      "verify", "Re-derive the solution by independent checks (exit 3 on fail)");
  add_common(verify, verify_args, false);
  verify->add_option("--grid-step", grid_step,
                     "Verification grid resolution as a fraction (default 1e-4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (solve->parsed()) return run_solve_cmd(solve_args);
    if (simulate->parsed()) return run_simulate_cmd(sim_args);
    if (sweep->parsed()) return run_sweep_cmd(sweep_args);
    if (verify->parsed()) return run_verify_cmd(verify_args, grid_step);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
