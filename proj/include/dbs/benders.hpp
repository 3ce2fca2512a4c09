#pragma once

#include <string>
#include <vector>

#include "dbs/mpc.hpp"
#include "dbs/scenario.hpp"

namespace dbs::benders {

// J_sub + lambda' (z - z_at) <= alpha
struct BendersCut {
  double J_sub = 0.0;
  std::vector<double> z;
  std::vector<double> lambda;
};

struct MasterResult {
  std::vector<double> z;
  double alpha = 0.0;
  double objective = 0.0;  // c_s' z + alpha
};

// min c_s'z + alpha  s.t. every cut, alpha >= alpha_down, 0 <= z <= z_max.
MasterResult solve_master(const std::vector<BendersCut>& cuts, const std::vector<double>& c_s,
                          const std::vector<double>& z_max, double alpha_down);

struct IterationRecord {
  int l = 0;
  double Z_up = 0.0, Z_down = 0.0, gap = 0.0;
  double Z_best = 0.0;  // lowest Z_up so far; the gap is measured against it
  double J_sub = 0.0, alpha = 0.0;
  std::vector<double> z;
};

struct BendersOptions {
  double battery_cost = 0.0;      // c_d, EUR/kWh
  double epsilon = 0.01;
  int max_iterations = 100;
  double alpha_down = -100000.0;
  // Lower box is widened to -10 |J_sub(0)| when the storage-free run
  // exceeds this magnitude.
  double alpha_rescale_threshold = 1e4;
};

// z, J_sub, investment, Z_up and final_run describe the best iterate seen.
struct PlanResult {
  std::vector<double> z;
  std::vector<std::string> buses;
  double J_sub = 0.0;
  double investment = 0.0;   // c_s' z
  double Z_up = 0.0, Z_down = 0.0, gap = 0.0;
  double alpha_down = 0.0;   // value actually used
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
  mpc::MpcRunResult final_run;

  double objective() const { return J_sub + investment; }
};

// Throws NoProgress when an iterate recurs twice with the same J_sub while
// the gap stays open, NotConverged at max_iterations, plus window errors.
PlanResult run_benders(const scenario::Scenario& sc, const mpc::MpcConfig& mpc_cfg,
                       const BendersOptions& opts);

std::string convergence_csv(const PlanResult& r);
std::string plan_json(const PlanResult& r, const scenario::Scenario& sc,
                      const BendersOptions& opts, const mpc::MpcConfig& mpc_cfg);

}  // namespace dbs::benders
