#pragma once

#include <functional>
#include <vector>

#include "dbs/mpc.hpp"
#include "dbs/multiperiod.hpp"
#include "dbs/scenario.hpp"

namespace dbs::heuristic {

struct HeuristicState {
  std::vector<double> soe;             // kWh per unit
  bool morning_discharge = false;
  std::vector<double> export_limit;    // kW per bus, last accepted net injection
};

struct HeuristicInputs {
  int step = 0;
  double hour = 0.0;                   // hour of day
  std::vector<double> pv_avail;        // kW per PV unit
  std::vector<double> load_p, load_q;  // kW / kVar per bus
};

// True when the per-bus net injections (kW / kVar, generation positive)
// keep every voltage and branch current inside its limits.
using GridCheck = std::function<bool(const std::vector<double>& p_kw,
                                     const std::vector<double>& q_kvar)>;

struct HeuristicOptions {
  double morning_start = 5.0;
  double morning_end = 8.0;   // exclusive
  double pv_cos_phi = 0.95;   // PV absorbs q = -tan(phi) p
  int bisection_steps = 40;
};

struct HeuristicDispatch {
  std::vector<double> pv_p, pv_q;      // per PV unit
  std::vector<double> p_dis, p_ch, q_s;
  double pv_scale = 1.0;               // common curtailment factor
  double discharge_scale = 1.0;
  bool grid_ok = true;
};

// Load flow check with a voltage tolerance of `tol` p.u.
GridCheck fbs_grid_check(const scenario::Scenario& sc, double tol = 1e-6);

// Per-bus net injections of a dispatch, kW / kVar.
void net_injections(const scenario::Scenario& sc, const HeuristicInputs& in,
                    const HeuristicDispatch& d, std::vector<double>& p,
                    std::vector<double>& q);

std::pair<HeuristicDispatch, HeuristicState> heuristic_step(
    const scenario::Scenario& sc, const std::vector<double>& z,
    const HeuristicState& state, const HeuristicInputs& in, const GridCheck& grid_check,
    const HeuristicOptions& opts = {});

// Feeder exchange, losses and cost of a dispatch under the linear grid model
// used by the optimizing controllers.
multiperiod::StepRecord account_step(const scenario::Scenario& sc,
                                     const HeuristicInputs& in,
                                     const HeuristicDispatch& d,
                                     const std::vector<double>& soe_after,
                                     const std::vector<double>& z);

// Runs N steps from k0 (config N when 0). lambda_s is empty.
mpc::MpcRunResult run_heuristic_year(const scenario::Scenario& sc, const std::vector<double>& z,
                                     int N = 0, int k0 = 0, const HeuristicOptions& opts = {});

}  // namespace dbs::heuristic
