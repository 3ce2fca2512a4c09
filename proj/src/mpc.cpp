#include "dbs/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "dbs/error.hpp"
#include "dbs/lp/mps.hpp"
#include "dbs/lp/simplex.hpp"
#include "json.hpp"

namespace dbs::mpc {

void MpcConfig::validate() const {
  if (c < 1 || H < c || N < H) {
    throw input_error("InvalidMpcConfig", "need 1 <= c <= H <= N (c=" + std::to_string(c) +
                                              ", H=" + std::to_string(H) + ", N=" + std::to_string(N) + ")");
  }
  if (N % c != 0) {
    throw input_error("InvalidMpcConfig", "N = " + std::to_string(N) + " is not divisible by c = " +
                                              std::to_string(c));
  }
  if (k0 < 0) throw input_error("InvalidMpcConfig", "negative start step");
}

MpcConfig config_from(const scenario::ScenarioConfig& cfg, double battery_cost,
                      bool degradation) {
  MpcConfig m;
  m.H = cfg.H;
  m.c = cfg.c;
  m.N = cfg.N;
  m.battery_cost = battery_cost;
  m.degradation = degradation;
  return m;
}

std::vector<double> extract_z_duals(const lp::LpSolution& sol,
                                    const multiperiod::MultiPeriodLayout& layout) {
  if (static_cast<int>(layout.z_pin_rows.size()) != layout.ns) {
    throw input_error("MissingRows", "window has no capacity pinning rows");
  }
  std::vector<double> out;
  for (int r : layout.z_pin_rows) out.push_back(sol.duals_eq.at(r));
  return out;
}

std::string trace_line(const WindowDiagnostics& w,
                       const std::vector<multiperiod::StepRecord>& applied) {
  nlohmann::json j;
  j["schema_version"] = scenario::kSchemaVersion;
  j["window"] = w.j;
  j["k0"] = w.k0;
  j["status"] = w.status;
  j["objective"] = w.objective;
  j["applied_cost"] = w.applied_cost;
  j["iterations"] = w.iterations;
  j["lambda"] = w.lambda;
  j["applied"] = nlohmann::json::array();
  for (const multiperiod::StepRecord& r : applied) {
    j["applied"].push_back({{"step", r.step}, {"feeder_p_kw", r.feeder_p}, {"p_dis_kw", r.p_dis},
                            {"p_ch_kw", r.p_ch}, {"q_s_kvar", r.q_s}, {"pv_kw", r.pv_p},
                            {"soe_kwh", r.soe}, {"energy_cost", r.energy_cost},
                            {"degradation_cost", r.degradation_cost}});
  }
  return j.dump();
}

MpcRunResult run_receding_horizon(const scenario::Scenario& sc, const MpcConfig& cfg,
                                  const std::vector<double>& z_fixed) {
  cfg.validate();
  const int ns = static_cast<int>(sc.config.storage.size());
  if (static_cast<int>(z_fixed.size()) != ns) {
    throw input_error("DimensionMismatch", "capacity vector needs one entry per storage unit");
  }
  for (double z : z_fixed)
    if (z < 0.0) throw input_error("InvalidCapacity", "capacities must be non-negative");

  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path);
    if (!trace) throw input_error("IoError", "cannot write " + cfg.trace_path);
  }

  MpcRunResult out;
  out.lambda_s.assign(ns, 0.0);
  out.trajectory.T = sc.config.T;
  std::vector<double> e(ns);
  for (int i = 0; i < ns; ++i) e[i] = std::min(sc.config.storage[i].e0, z_fixed[i]);
  const double weight = static_cast<double>(cfg.c) / cfg.H;
  std::vector<lp::VarStatus> basis;
  const int n = cfg.N / cfg.c;

  for (int j = 0; j < n; ++j) {
    multiperiod::WindowSpec w;
    w.k0 = cfg.k0 + j * cfg.c;
    w.N = cfg.H;
    w.e0 = e;
    w.z = multiperiod::ZMode::fixed(z_fixed);
    w.battery_cost = cfg.battery_cost;
    w.degradation = cfg.degradation;
    const multiperiod::MultiPeriodProblem mp = multiperiod::assemble_multiperiod(sc, w);

    lp::SolverConfig sc_cfg;
    if (cfg.warm_start && !basis.empty()) sc_cfg.warm_basis = &basis;
    const auto t0 = std::chrono::steady_clock::now();
    lp::LpSolution sol = lp::solve_lp(mp.problem, sc_cfg);
    const auto t1 = std::chrono::steady_clock::now();

    WindowDiagnostics d;
    d.j = j;
    d.k0 = w.k0;
    d.status = lp::to_string(sol.status);
    d.solve_seconds = std::chrono::duration<double>(t1 - t0).count();
    d.iterations = sol.iterations;
    if (!sol.optimal()) {
      std::string where;
      if (!cfg.dump_dir.empty()) {
        std::filesystem::create_directories(cfg.dump_dir);
        where = (std::filesystem::path(cfg.dump_dir) / ("window_" + std::to_string(j) + ".mps")).string();
        lp::write_mps_file(mp.problem, where, "WINDOW" + std::to_string(j));
        where = ", dumped to " + where;
      }
      const std::string msg = "window " + std::to_string(j) + " (steps " + std::to_string(w.k0) + ".." +
                              std::to_string(w.k0 + w.N - 1) + ") is " + d.status + where;
      if (sol.status == lp::SolveStatus::Infeasible || sol.status == lp::SolveStatus::Unbounded)
        throw input_error("WindowInfeasible", msg);
      if (sol.status == lp::SolveStatus::IterationLimit) throw convergence_error("SolverLimit", msg);
      throw numerical_error("SolverBreakdown", msg);
    }
    d.objective = sol.objective_value;
    d.lambda = extract_z_duals(sol, mp.layout);
    for (int i = 0; i < ns; ++i) out.lambda_s[i] += weight * d.lambda[i];

    multiperiod::Trajectory applied =
        multiperiod::extract_trajectory(sc, mp, sol.primal, cfg.c, cfg.battery_cost);
    d.applied_cost = applied.J();
    out.J_sub += applied.J();
    out.trajectory.energy_cost += applied.energy_cost;
    out.trajectory.degradation_cost += applied.degradation_cost;
    if (!applied.steps.empty()) {
      e = applied.steps.back().soe;
      for (int i = 0; i < ns; ++i) e[i] = std::clamp(e[i], 0.0, z_fixed[i]);
    }
    if (trace.is_open()) trace << trace_line(d, applied.steps) << '\n';
    for (multiperiod::StepRecord& r : applied.steps) out.trajectory.steps.push_back(std::move(r));
    out.windows.push_back(std::move(d));
    basis = std::move(sol.basis);
  }
  return out;
}

}  // namespace dbs::mpc
