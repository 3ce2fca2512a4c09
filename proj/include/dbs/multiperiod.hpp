#pragma once

#include <string>
#include <vector>

#include "dbs/lp/lp_problem.hpp"
#include "dbs/opf.hpp"
#include "dbs/scenario.hpp"

namespace dbs::multiperiod {

struct ZMode {
  enum class Kind { Free, Fixed };
  Kind kind = Kind::Fixed;
  std::vector<double> z;  // z_max when Free, pinned capacity when Fixed (kWh)

  static ZMode free(std::vector<double> z_max) { return {Kind::Free, std::move(z_max)}; }
  static ZMode fixed(std::vector<double> z) { return {Kind::Fixed, std::move(z)}; }
};

struct WindowSpec {
  int k0 = 0;
  int N = 1;
  std::vector<double> e0;      // kWh per unit; empty means the config values
  ZMode z;
  double battery_cost = 0.0;   // c_d, EUR/kWh
  double storage_cost = 0.0;   // c_s, EUR/kWh over the window (Free only)
  bool degradation = true;     // add D columns and the fade epigraph rows
  bool wrap = true;            // read profiles modulo their length
  bool terminal_soe_equals_initial = false;
};

// c_s for an N-step window: c_d amortised over the calendar life and scaled
// to the window duration.
double equivalent_storage_cost(const scenario::ScenarioConfig& cfg,
                               double battery_cost, int N);

struct MultiPeriodLayout {
  int N = 0, ns = 0, npv = 0, k0 = 0;
  double T = 1.0;
  std::vector<opf::SingleShotLayout> steps;
  std::vector<int> z_cols;
  std::vector<std::vector<int>> d_cols;  // [k][i], empty without degradation
  std::vector<int> z_pin_rows;           // equality rows, Fixed mode only
  std::vector<double> e0;

  int gen_feeder() const { return 0; }
  int gen_pv(int j) const { return 1 + j; }
  int gen_dis(int i) const { return 1 + npv + i; }
  int gen_ch(int i) const { return 1 + npv + ns + i; }
};

struct MultiPeriodProblem {
  lp::LpProblem problem;
  MultiPeriodLayout layout;
};

// Per-bus loads in kW / kVar at a profile step.
void step_loads(const scenario::Scenario& sc, int step, std::vector<double>& p_d,
                std::vector<double>& q_d);

// Generators of one step: feeder, PV units, storage discharge, storage charge.
std::vector<opf::GeneratorSpec> step_generators(const scenario::Scenario& sc,
                                                int step);

// Throws ProfileOutOfRange, InfeasibleInitialState, DimensionMismatch.
MultiPeriodProblem assemble_multiperiod(const scenario::Scenario& sc,
                                        const WindowSpec& spec);

struct StepRecord {
  int step = 0;
  double feeder_p = 0.0;  // kW drawn from the upstream grid (export negative)
  double feeder_q = 0.0;
  double import_price = 0.0, export_price = 0.0;  // EUR/MWh
  double energy_cost = 0.0;       // EUR over the step
  double degradation_cost = 0.0;  // EUR over the step
  double load_p = 0.0;            // kW total
  double losses_p = 0.0;          // kW, linear model
  std::vector<double> pv_avail, pv_p, pv_q;
  std::vector<double> p_dis, p_ch, q_s;
  std::vector<double> soe;        // after the step, kWh
  std::vector<double> fade;       // kWh lost over the step (map evaluated)
  std::vector<double> v;          // per bus, p.u.
};

struct Trajectory {
  std::vector<StepRecord> steps;
  double T = 1.0;
  double energy_cost = 0.0;
  double degradation_cost = 0.0;
  double J() const { return energy_cost + degradation_cost; }

  std::vector<double> total_fade() const;   // kWh per unit
  double imported_mwh() const;
  double exported_mwh() const;
  double pv_curtailed_mwh() const;
};

// Reads the first `count` steps of a solved window. Fade is evaluated on the
// map at the post-step SoE; the degradation cost uses the LP's d when the
// window carries D columns and is zero otherwise.
Trajectory extract_trajectory(const scenario::Scenario& sc,
                              const MultiPeriodProblem& mp,
                              const std::vector<double>& primal, int count,
                              double battery_cost);

// Solves an LP and throws on anything but Optimal: WindowInfeasible (input),
// SolverLimit (non-convergence) or SolverBreakdown (numerical).
lp::LpSolution solve_or_throw(const lp::LpProblem& p, const std::string& what,
                              const lp::SolverConfig& cfg = {});

struct SizingResult {
  std::vector<double> z;  // kWh per unit
  double J = 0.0;         // full objective including c_s z
  double operation_cost = 0.0;
  Trajectory trajectory;
  int iterations = 0;
};

struct SizingOptions {
  int k0 = 0;
  int N = 0;                   // 0 means config N
  double battery_cost = 0.0;
  bool degradation = true;
  bool terminal_soe_equals_initial = false;
  int max_columns = 2000000;   // memory guard
};

// Throws ProblemTooLarge beyond `max_columns` plus propagated solver errors.
SizingResult solve_monolithic_sizing(const scenario::Scenario& sc,
                                     const SizingOptions& opts);

}  // namespace dbs::multiperiod
