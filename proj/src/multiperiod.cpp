#include "dbs/multiperiod.hpp"

#include <algorithm>
#include <cmath>

#include "dbs/error.hpp"
#include "dbs/lp/simplex.hpp"
#include "dbs/storage.hpp"

namespace dbs::multiperiod {

using lp::kInf;
using lp::RowSense;

double equivalent_storage_cost(const scenario::ScenarioConfig& cfg,
                               double battery_cost, int N) {
  const double years = N * cfg.T / 8760.0;
  return battery_cost * years / cfg.calendar_life_years;
}

namespace {

int profile_step(const scenario::Scenario& sc, int step) {
  const int len = sc.profiles.steps();
  if (len <= 0) throw input_error("ProfileOutOfRange", "empty profile set");
  return ((step % len) + len) % len;
}

}  // namespace

void step_loads(const scenario::Scenario& sc, int step, std::vector<double>& p_d,
                std::vector<double>& q_d) {
  const int nb = sc.grid.num_buses();
  p_d.assign(nb, 0.0);
  q_d.assign(nb, 0.0);
  const double tan_phi =
      std::tan(std::acos(std::clamp(sc.config.load_power_factor, 1e-6, 1.0)));
  for (const std::string& bus : sc.config.load_buses) {
    const int row = sc.profiles.bus_row(bus);
    if (row < 0) throw input_error("ProfileOutOfRange", "no load profile for bus " + bus);
    const int b = sc.grid.bus_index(bus);
    const double p = sc.profiles.load(row, step);
    p_d[b] += p;
    q_d[b] += p * tan_phi;
  }
}

std::vector<opf::GeneratorSpec> step_generators(const scenario::Scenario& sc,
                                                int step) {
  const scenario::ScenarioConfig& cfg = sc.config;
  const scenario::TariffPoint price = scenario::tariff_at(cfg.tariff, step, cfg.T);
  std::vector<opf::GeneratorSpec> gens;

  opf::GeneratorSpec feeder;
  feeder.bus = sc.grid.buses[sc.grid.slack_index()].id;
  feeder.kind = opf::GeneratorKind::SlackFeeder;
  feeder.p_min = -kInf;
  feeder.p_max = kInf;
  feeder.q_max = kInf;
  feeder.cost.segments = {{price.export_price, 0.0}, {price.import_price, 0.0}};
  feeder.label = "feeder";
  gens.push_back(feeder);

  // PV rows in the profile set carry the total availability at a bus; split
  // it over the units at that bus by rating.
  for (std::size_t j = 0; j < cfg.pv.size(); ++j) {
    const scenario::PvSpec& pv = cfg.pv[j];
    const int row = sc.profiles.bus_row(pv.bus);
    if (row < 0) throw input_error("ProfileOutOfRange", "no PV profile for bus " + pv.bus);
    double rating_at_bus = 0.0;
    for (const scenario::PvSpec& o : cfg.pv)
      if (o.bus == pv.bus) rating_at_bus += o.p_max;
    const double share = rating_at_bus > 0.0 ? pv.p_max / rating_at_bus : 0.0;
    opf::GeneratorSpec g;
    g.bus = pv.bus;
    g.kind = opf::GeneratorKind::Pv;
    g.p_min = 0.0;
    g.p_max = std::clamp(share * sc.profiles.pv(row, step), 0.0, pv.p_max);
    g.q_shape = opf::QShape::Rectangular;
    g.q_max = pv.q_max;
    if (cfg.tariff.pv_cost != 0.0) g.cost.segments = {{cfg.tariff.pv_cost, 0.0}};
    g.label = "pv" + std::to_string(j);
    gens.push_back(g);
  }
  for (std::size_t i = 0; i < cfg.storage.size(); ++i) {
    const storage::StorageSpec& s = cfg.storage[i];
    opf::GeneratorSpec g;
    g.bus = s.bus;
    g.kind = opf::GeneratorKind::StorageDischarge;
    g.p_min = 0.0;
    g.p_max = s.p_dis_max;
    g.q_shape = opf::QShape::Rectangular;
    g.q_max = s.q_max;
    if (cfg.tariff.storage_cost != 0.0) g.cost.segments = {{cfg.tariff.storage_cost, 0.0}};
    g.label = "dis" + std::to_string(i);
    gens.push_back(g);
  }
  for (std::size_t i = 0; i < cfg.storage.size(); ++i) {
    const storage::StorageSpec& s = cfg.storage[i];
    opf::GeneratorSpec g;
    g.bus = s.bus;
    g.kind = opf::GeneratorKind::StorageCharge;
    g.p_min = -s.p_ch_max;
    g.p_max = 0.0;
    g.q_shape = opf::QShape::Rectangular;
    g.q_max = 0.0;
    g.label = "ch" + std::to_string(i);
    gens.push_back(g);
  }
  return gens;
}

MultiPeriodProblem assemble_multiperiod(const scenario::Scenario& sc,
                                        const WindowSpec& spec) {
  const scenario::ScenarioConfig& cfg = sc.config;
  const int N = spec.N;
  const int ns = static_cast<int>(cfg.storage.size());
  if (N < 1) throw input_error("ProfileOutOfRange", "window needs at least one step");
  if (spec.k0 < 0) throw input_error("ProfileOutOfRange", "negative start step");
  if (!spec.wrap && spec.k0 + N > sc.profiles.steps()) {
    throw input_error("ProfileOutOfRange",
                      "steps [" + std::to_string(spec.k0) + ", " +
                          std::to_string(spec.k0 + N) + ") exceed the profile length " +
                          std::to_string(sc.profiles.steps()));
  }
  if (static_cast<int>(spec.z.z.size()) != ns) {
    throw input_error("DimensionMismatch", "capacity vector needs one entry per storage unit");
  }
  std::vector<double> e0 = spec.e0;
  if (e0.empty())
    for (const storage::StorageSpec& s : cfg.storage) e0.push_back(s.e0);
  if (static_cast<int>(e0.size()) != ns) {
    throw input_error("DimensionMismatch", "initial SoE needs one entry per storage unit");
  }
  for (int i = 0; i < ns; ++i) {
    const double cap = spec.z.z[i];
    if (cap < 0.0) throw input_error("InfeasibleInitialState", "negative capacity");
    if (e0[i] < -1e-9 || e0[i] > cap + 1e-9) {
      throw input_error("InfeasibleInitialState",
                        "unit " + std::to_string(i) + " starts at " +
                            std::to_string(e0[i]) + " kWh outside [0, " +
                            std::to_string(cap) + "]");
    }
    e0[i] = std::clamp(e0[i], 0.0, cap);
  }

  MultiPeriodProblem out;
  lp::LpProblem& lp = out.problem;
  MultiPeriodLayout& L = out.layout;
  L.N = N;
  L.ns = ns;
  L.npv = static_cast<int>(cfg.pv.size());
  L.k0 = spec.k0;
  L.T = cfg.T;
  L.e0 = e0;

  opf::StepInput in;
  in.ops = &sc.ops;
  in.grid = &sc.grid;
  in.v_min = cfg.v_min;
  in.v_max = cfg.v_max;
  in.y_weight = cfg.T;
  for (int k = 0; k < N; ++k) {
    const int step = profile_step(sc, spec.k0 + k);
    in.gens = step_generators(sc, spec.k0 + k);
    step_loads(sc, step, in.p_d, in.q_d);
    L.steps.push_back(opf::append_step(lp, in, "k" + std::to_string(k) + ":"));
  }
  if (ns == 0) return out;

  const bool free_z = spec.z.kind == ZMode::Kind::Free;
  for (int i = 0; i < ns; ++i) {
    const std::string nm = "z" + std::to_string(i);
    if (free_z) L.z_cols.push_back(lp.add_column(spec.storage_cost, 0.0, spec.z.z[i], nm));
    // Free column so the pin row alone carries the capacity dual.
    else L.z_cols.push_back(lp.add_column(0.0, -kInf, kInf, nm));
  }
  if (!free_z) {
    for (int i = 0; i < ns; ++i) {
      const int col = L.z_cols[i];
      const double one = 1.0;
      L.z_pin_rows.push_back(lp.add_eq(std::span<const int>(&col, 1),
                                       std::span<const double>(&one, 1), spec.z.z[i],
                                       "z_pin[" + std::to_string(i) + "]"));
    }
  }

  storage::FleetColumns fc;
  fc.kw_per_unit = sc.grid.base.s_kw();
  fc.z = L.z_cols;
  fc.p_dis.resize(N);
  fc.p_ch.resize(N);
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < ns; ++i) {
      fc.p_dis[k].push_back(L.steps[k].col_p(L.gen_dis(i)));
      fc.p_ch[k].push_back(L.steps[k].col_p(L.gen_ch(i)));
    }
  }
  const storage::SoEEvolution ev = storage::soe_matrices(cfg.storage, N, cfg.T);
  const Eigen::VectorXd e0v = Eigen::Map<const Eigen::VectorXd>(e0.data(), ns);

  std::vector<std::string> names;
  names.reserve(2 * N * ns);
  for (const char* side : {"soe_ub", "soe_lb"})
    for (int k = 0; k < N; ++k)
      for (int i = 0; i < ns; ++i)
        names.push_back(std::string(side) + ":k" + std::to_string(k) + ":s" + std::to_string(i));
  storage::append_rows(lp, storage::soe_bound_rows(ev, e0v), fc, N, ns, names);

  if (spec.degradation && sc.map.n_p() > 0) {
    fc.d.resize(N);
    for (int k = 0; k < N; ++k) {
      for (int i = 0; i < ns; ++i) {
        fc.d[k].push_back(lp.add_column(cfg.T * spec.battery_cost, 0.0, kInf,
                                        "d" + std::to_string(k) + "_" + std::to_string(i)));
      }
    }
    L.d_cols = fc.d;
    names.clear();
    for (int k = 0; k < N; ++k)
      for (int i = 0; i < ns; ++i)
        for (int q = 0; q < sc.map.n_p(); ++q)
          names.push_back("fade:k" + std::to_string(k) + ":s" + std::to_string(i) + ":q" +
                          std::to_string(q));
    storage::append_rows(lp, storage::degradation_rows(sc.map, ev, e0v), fc, N, ns, names);
  }

  if (spec.terminal_soe_equals_initial) {
    // e(N) - e(0) = sum_k B u_k = 0
    lp::RowBuilder rb;
    for (int i = 0; i < ns; ++i) {
      rb.clear();
      for (int k = 0; k < N; ++k) {
        rb.add(fc.p_dis[k][i], ev.B(i, i) * fc.kw_per_unit);
        rb.add(fc.p_ch[k][i], ev.B(i, ns + i) * fc.kw_per_unit);
      }
      lp.add_eq(rb, 0.0, "e_terminal[" + std::to_string(i) + "]");
    }
  }
  return out;
}

std::vector<double> Trajectory::total_fade() const {
  std::vector<double> out;
  for (const StepRecord& s : steps) {
    if (out.empty()) out.assign(s.fade.size(), 0.0);
    for (std::size_t i = 0; i < s.fade.size(); ++i) out[i] += s.fade[i];
  }
  return out;
}

double Trajectory::imported_mwh() const {
  double e = 0.0;
  for (const StepRecord& s : steps) e += std::max(s.feeder_p, 0.0);
  return e * T / 1000.0;
}

double Trajectory::exported_mwh() const {
  double e = 0.0;
  for (const StepRecord& s : steps) e += std::max(-s.feeder_p, 0.0);
  return e * T / 1000.0;
}

double Trajectory::pv_curtailed_mwh() const {
  double e = 0.0;
  for (const StepRecord& s : steps)
    for (std::size_t j = 0; j < s.pv_p.size(); ++j) e += s.pv_avail[j] - s.pv_p[j];
  return e * T / 1000.0;
}

Trajectory extract_trajectory(const scenario::Scenario& sc,
                              const MultiPeriodProblem& mp,
                              const std::vector<double>& primal, int count,
                              double battery_cost) {
  const MultiPeriodLayout& L = mp.layout;
  const scenario::ScenarioConfig& cfg = sc.config;
  const double s_kw = sc.grid.base.s_kw();
  const double T = cfg.T;
  Trajectory tr;
  tr.T = T;
  std::vector<double> soe = L.e0;
  std::vector<double> z(L.ns, 0.0);
  for (int i = 0; i < L.ns; ++i) z[i] = primal[L.z_cols[i]];
  std::vector<double> p_d, q_d;
  count = std::min(count, L.N);
  for (int k = 0; k < count; ++k) {
    const opf::SingleShotLayout& sl = L.steps[k];
    const opf::Dispatch d = opf::extract_dispatch(sl, primal, s_kw);
    StepRecord r;
    r.step = L.k0 + k;
    const scenario::TariffPoint price = scenario::tariff_at(cfg.tariff, r.step, T);
    r.import_price = price.import_price;
    r.export_price = price.export_price;
    r.feeder_p = d.p_kw[L.gen_feeder()];
    r.feeder_q = d.q_kvar[L.gen_feeder()];
    double y_sum = 0.0;
    for (double c : d.cost) y_sum += c;
    r.energy_cost = T * y_sum;
    step_loads(sc, r.step, p_d, q_d);
    for (double p : p_d) r.load_p += p;
    for (double p : d.loss_p_kw) r.losses_p += p;
    for (int j = 0; j < L.npv; ++j) {
      r.pv_avail.push_back(mp.problem.upper[sl.col_p(L.gen_pv(j))] * s_kw);
      r.pv_p.push_back(d.p_kw[L.gen_pv(j)]);
      r.pv_q.push_back(d.q_kvar[L.gen_pv(j)]);
    }
    for (int i = 0; i < L.ns; ++i) {
      const double pd = d.p_kw[L.gen_dis(i)], pc = d.p_kw[L.gen_ch(i)];
      r.p_dis.push_back(pd);
      r.p_ch.push_back(pc);
      r.q_s.push_back(d.q_kvar[L.gen_dis(i)]);
      soe[i] += storage::soe_delta(cfg.storage[i], pd, pc, T);
      r.fade.push_back(T * std::max(0.0, sc.map.evaluate(pd + pc, soe[i], z[i])));
      if (!L.d_cols.empty()) r.degradation_cost += T * battery_cost * primal[L.d_cols[k][i]];
    }
    r.soe = soe;
    r.v = d.v;
    tr.energy_cost += r.energy_cost;
    tr.degradation_cost += r.degradation_cost;
    tr.steps.push_back(std::move(r));
  }
  return tr;
}

lp::LpSolution solve_or_throw(const lp::LpProblem& p, const std::string& what,
                              const lp::SolverConfig& cfg) {
  lp::LpSolution sol = lp::solve_lp(p, cfg);
  switch (sol.status) {
    case lp::SolveStatus::Optimal:
      return sol;
    case lp::SolveStatus::Infeasible:
    case lp::SolveStatus::Unbounded:
      throw input_error("WindowInfeasible",
                        what + " is " + lp::to_string(sol.status));
    case lp::SolveStatus::IterationLimit:
      throw convergence_error("SolverLimit", what + " hit the iteration limit");
    case lp::SolveStatus::NumericalBreakdown:
      break;
  }
  throw numerical_error("SolverBreakdown", what + " broke down numerically");
}

SizingResult solve_monolithic_sizing(const scenario::Scenario& sc,
                                     const SizingOptions& opts) {
  const scenario::ScenarioConfig& cfg = sc.config;
  WindowSpec w;
  w.k0 = opts.k0;
  w.N = opts.N > 0 ? opts.N : cfg.N;
  std::vector<double> zmax;
  for (const storage::StorageSpec& s : cfg.storage) zmax.push_back(s.z_max);
  w.z = ZMode::free(zmax);
  w.battery_cost = opts.battery_cost;
  w.storage_cost = equivalent_storage_cost(cfg, opts.battery_cost, w.N);
  w.degradation = opts.degradation;
  w.terminal_soe_equals_initial = opts.terminal_soe_equals_initial;

  const long per_step = 2L * sc.grid.num_branches() + 3L * (1 + cfg.pv.size() + 2 * cfg.storage.size()) +
                        sc.grid.num_buses() + cfg.storage.size();
  if (per_step * w.N > opts.max_columns) {
    throw input_error("ProblemTooLarge", "monolithic problem with about " +
                                             std::to_string(per_step * w.N) + " columns");
  }
  const MultiPeriodProblem mp = assemble_multiperiod(sc, w);
  const lp::LpSolution sol = solve_or_throw(mp.problem, "monolithic sizing");
  SizingResult r;
  for (int c : mp.layout.z_cols) r.z.push_back(sol.primal[c]);
  r.J = sol.objective_value;
  r.operation_cost = r.J;
  for (int i = 0; i < mp.layout.ns; ++i) r.operation_cost -= w.storage_cost * r.z[i];
  r.trajectory = extract_trajectory(sc, mp, sol.primal, w.N, opts.battery_cost);
  r.iterations = sol.iterations;
  return r;
}

}  // namespace dbs::multiperiod
