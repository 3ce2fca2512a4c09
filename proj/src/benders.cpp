#include "dbs/benders.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dbs/error.hpp"
#include "dbs/lp/simplex.hpp"
#include "dbs/multiperiod.hpp"
#include "json.hpp"

namespace dbs::benders {

MasterResult solve_master(const std::vector<BendersCut>& cuts, const std::vector<double>& c_s,
                          const std::vector<double>& z_max, double alpha_down) {
  const int ns = static_cast<int>(c_s.size());
  if (static_cast<int>(z_max.size()) != ns) throw input_error("DimensionMismatch", "z_max length");
  if (!std::isfinite(alpha_down)) throw input_error("InvalidMaster", "alpha_down must be finite");
  lp::LpProblem p;
  for (int i = 0; i < ns; ++i) p.add_column(c_s[i], 0.0, z_max[i], "z" + std::to_string(i));
  const int a = p.add_column(1.0, alpha_down, lp::kInf, "alpha");
  lp::RowBuilder rb;
  for (std::size_t l = 0; l < cuts.size(); ++l) {
    const BendersCut& cut = cuts[l];
    if (static_cast<int>(cut.z.size()) != ns || static_cast<int>(cut.lambda.size()) != ns) {
      throw input_error("DimensionMismatch", "cut " + std::to_string(l) + " has the wrong length");
    }
    rb.clear();
    double rhs = -cut.J_sub;
    for (int i = 0; i < ns; ++i) {
      rb.add(i, cut.lambda[i]);
      rhs += cut.lambda[i] * cut.z[i];
    }
    rb.add(a, -1.0);
    p.add_ineq(rb, lp::RowSense::LessEqual, rhs, "cut" + std::to_string(l));
  }
  const lp::LpSolution s = multiperiod::solve_or_throw(p, "master problem");
  MasterResult r;
  r.z.assign(s.primal.begin(), s.primal.begin() + ns);
  for (double& z : r.z) z = std::max(z, 0.0);
  r.alpha = s.primal[a];
  r.objective = s.objective_value;
  return r;
}

PlanResult run_benders(const scenario::Scenario& sc, const mpc::MpcConfig& mpc_cfg,
                       const BendersOptions& opts) {
  const scenario::ScenarioConfig& cfg = sc.config;
  const int ns = static_cast<int>(cfg.storage.size());
  const double cs = multiperiod::equivalent_storage_cost(cfg, opts.battery_cost, mpc_cfg.N);
  const std::vector<double> c_s(ns, cs);
  std::vector<double> z_max;
  for (const storage::StorageSpec& s : cfg.storage) z_max.push_back(s.z_max);

  PlanResult out;
  for (const storage::StorageSpec& s : cfg.storage) out.buses.push_back(s.bus);
  out.alpha_down = opts.alpha_down;
  std::vector<BendersCut> cuts;
  struct Seen {
    std::vector<double> z;
    double J;
    int count;
  };
  std::vector<Seen> seen;

  for (int l = 1; l <= opts.max_iterations; ++l) {
    const MasterResult m = solve_master(cuts, c_s, z_max, out.alpha_down);
    mpc::MpcRunResult run = mpc::run_receding_horizon(sc, mpc_cfg, m.z);

    if (l == 1 && std::abs(run.J_sub) > opts.alpha_rescale_threshold &&
        out.alpha_down > -10.0 * std::abs(run.J_sub)) {
      out.alpha_down = -10.0 * std::abs(run.J_sub);
    }

    IterationRecord rec;
    rec.l = l;
    rec.z = m.z;
    rec.J_sub = run.J_sub;
    rec.alpha = m.alpha;
    double inv = 0.0;
    for (int i = 0; i < ns; ++i) inv += c_s[i] * m.z[i];
    rec.Z_up = run.J_sub + inv;
    rec.Z_down = inv + std::max(m.alpha, out.alpha_down);
    const bool improved = out.history.empty() || rec.Z_up < out.Z_up;
    if (improved) {
      out.z = m.z;
      out.J_sub = run.J_sub;
      out.investment = inv;
      out.Z_up = rec.Z_up;
      out.final_run = run;
    }
    rec.Z_best = out.Z_up;
    rec.gap = std::abs((out.Z_up - rec.Z_down) / std::max(std::abs(rec.Z_down), 1e-9));
    out.history.push_back(rec);
    out.Z_down = rec.Z_down;
    out.gap = rec.gap;
    out.iterations = l;
    if (rec.gap <= opts.epsilon) {
      out.converged = true;
      return out;
    }

    auto it = std::find_if(seen.begin(), seen.end(), [&](const Seen& s) {
      if (s.J != run.J_sub) return false;
      for (int i = 0; i < ns; ++i)
        if (std::abs(s.z[i] - m.z[i]) > 1e-9) return false;
      return true;
    });
    bool cycling = false;
    if (it == seen.end()) {
      seen.push_back({m.z, run.J_sub, 1});
    } else {
      cycling = ++it->count >= 3;
    }
    if (cycling) {
      throw convergence_error("NoProgress", "iterate recurred without closing the gap (gap " +
                                                std::to_string(rec.gap) + " at iteration " +
                                                std::to_string(l) + ")");
    }
    cuts.push_back({run.J_sub, m.z, run.lambda_s});
  }
  throw convergence_error("NotConverged", "gap " + std::to_string(out.gap) + " after " +
                                              std::to_string(opts.max_iterations) + " iterations");
}

std::string convergence_csv(const PlanResult& r) {
  std::ostringstream o;
  o.precision(12);
  o << "# schema_version=" << scenario::kSchemaVersion << "\n";
  o << "iteration,Z_up,Z_best,Z_down,gap,J_sub,alpha";
  for (const std::string& b : r.buses) o << ",z_" << b;
  o << "\n";
  for (const IterationRecord& h : r.history) {
    o << h.l << ',' << h.Z_up << ',' << h.Z_best << ',' << h.Z_down << ',' << h.gap << ',' << h.J_sub << ',' << h.alpha;
    for (double z : h.z) o << ',' << z;
    o << "\n";
  }
  return o.str();
}

std::string plan_json(const PlanResult& r, const scenario::Scenario& sc,
                      const BendersOptions& opts, const mpc::MpcConfig& mpc_cfg) {
  nlohmann::json j;
  j["schema_version"] = scenario::kSchemaVersion;
  j["scenario"] = sc.config.name;
  j["battery_cost_eur_per_kwh"] = opts.battery_cost;
  j["H"] = mpc_cfg.H;
  j["c"] = mpc_cfg.c;
  j["N"] = mpc_cfg.N;
  j["degradation"] = mpc_cfg.degradation;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["gap"] = r.gap;
  j["Z_up"] = r.Z_up;
  j["Z_down"] = r.Z_down;
  j["alpha_down"] = r.alpha_down;
  j["J_sub_eur"] = r.J_sub;
  j["investment_eur"] = r.investment;
  j["profit_eur"] = -r.objective();
  nlohmann::json cap = nlohmann::json::object();
  double total = 0.0;
  for (std::size_t i = 0; i < r.z.size(); ++i) {
    cap[r.buses[i]] = cap.contains(r.buses[i]) ? cap[r.buses[i]].get<double>() + r.z[i] : r.z[i];
    total += r.z[i];
  }
  j["capacity_kwh"] = cap;
  j["total_capacity_kwh"] = total;
  return j.dump(2) + "\n";
}

}  // namespace dbs::benders
