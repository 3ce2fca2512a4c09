#pragma once

#include <string>
#include <vector>

#include "dbs/lp/lp_problem.hpp"
#include "dbs/multiperiod.hpp"
#include "dbs/scenario.hpp"

namespace dbs::mpc {

struct MpcConfig {
  int H = 24;
  int c = 6;
  int N = 8760;
  int k0 = 0;
  double battery_cost = 0.0;  // c_d in the window objective
  bool degradation = true;
  bool warm_start = true;
  std::string trace_path;     // JSON lines; empty disables
  std::string dump_dir;       // MPS dump of a failing window; empty disables

  void validate() const;      // throws InvalidMpcConfig
};

// Takes N, H, c from the scenario config.
MpcConfig config_from(const scenario::ScenarioConfig& cfg, double battery_cost,
                      bool degradation = true);

struct WindowDiagnostics {
  int j = 0;
  int k0 = 0;
  std::string status;
  double objective = 0.0;
  double applied_cost = 0.0;
  double solve_seconds = 0.0;
  int iterations = 0;
  std::vector<double> lambda;
};

struct MpcRunResult {
  multiperiod::Trajectory trajectory;
  std::vector<double> lambda_s;  // sum_j lambda^[j] c / H
  double J_sub = 0.0;
  std::vector<WindowDiagnostics> windows;
};

// dJ/dz per unit from the pinning rows; negative when capacity lowers cost.
// Throws MissingRows when the window has no pinning rows.
std::vector<double> extract_z_duals(const lp::LpSolution& sol,
                                    const multiperiod::MultiPeriodLayout& layout);

// Throws WindowInfeasible (with the window index) or propagated solver errors.
MpcRunResult run_receding_horizon(const scenario::Scenario& sc, const MpcConfig& cfg,
                                  const std::vector<double>& z_fixed);

// One trace line per window.
std::string trace_line(const WindowDiagnostics& w,
                       const std::vector<multiperiod::StepRecord>& applied);

}  // namespace dbs::mpc
