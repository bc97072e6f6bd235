#pragma once

#include <string>
#include <vector>

#include "kfbias/scenario.hpp"

namespace kfbias {

/// Knobs for the verification pass.
struct VerifyOptions {
  int mc_runs = 0;            ///< Monte Carlo sample override (0 = auto)
  double grid_fraction = 0.0; ///< grid resolution override (0 = 1e-4)
};

/// One named verification check.
struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass() const;
};

/// Re-derives the solver's claims by independent means: steady-state gain
/// fixed point, closed-form EMSE vs the one-step recursion, full-budget and
/// feasibility accounting, exhaustive grid searches over the allocation
/// manifold (or exact reachable-set bounds where the grid would be too
/// coarse), and a Monte Carlo comparison of the predicted extra error
/// covariance against the sample covariance.
VerifyReport run_verify(const Scenario& s, const SolveOutput& so,
                        const VerifyOptions& opts = {});

}  // namespace kfbias
