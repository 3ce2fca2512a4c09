#include "dbs/heuristic.hpp"

#include <algorithm>
#include <cmath>

#include "dbs/error.hpp"
#include "dbs/loadflow.hpp"

namespace dbs::heuristic {

GridCheck fbs_grid_check(const scenario::Scenario& sc, double tol) {
  return [&sc, tol](const std::vector<double>& p_kw, const std::vector<double>& q_kvar) {
    const double s = sc.grid.base.s_kw();
    std::vector<double> p(p_kw.size()), q(q_kvar.size());
    for (std::size_t b = 0; b < p.size(); ++b) {
      p[b] = p_kw[b] / s;
      q[b] = q_kvar[b] / s;
    }
    loadflow::LoadflowResult lf;
    try {
      lf = loadflow::fbs_loadflow(sc.grid, p, q);
    } catch (const Error&) {
      return false;
    }
    for (int b = 0; b < sc.grid.num_buses(); ++b) {
      if (b == sc.grid.slack_index()) continue;
      const double v = std::abs(lf.v[b]);
      if (v < sc.config.v_min - tol || v > sc.config.v_max + tol) return false;
    }
    for (int l = 0; l < sc.grid.num_branches(); ++l)
      if (lf.i_b[l] > sc.grid.i_max_pu(l) * (1.0 + 1e-9)) return false;
    return true;
  };
}

void net_injections(const scenario::Scenario& sc, const HeuristicInputs& in,
                    const HeuristicDispatch& d, std::vector<double>& p,
                    std::vector<double>& q) {
  const int nb = sc.grid.num_buses();
  p.assign(nb, 0.0);
  q.assign(nb, 0.0);
  for (int b = 0; b < nb; ++b) {
    p[b] = -in.load_p[b];
    q[b] = -in.load_q[b];
  }
  for (std::size_t j = 0; j < sc.config.pv.size(); ++j) {
    const int b = sc.grid.bus_index(sc.config.pv[j].bus);
    p[b] += d.pv_p[j];
    q[b] += d.pv_q[j];
  }
  for (std::size_t i = 0; i < sc.config.storage.size(); ++i) {
    const int b = sc.grid.bus_index(sc.config.storage[i].bus);
    p[b] += d.p_dis[i] + d.p_ch[i];
    q[b] += d.q_s[i];
  }
}

namespace {

void set_pv(const scenario::Scenario& sc, const HeuristicInputs& in, double scale,
            double tan_phi, HeuristicDispatch& d) {
  for (std::size_t j = 0; j < sc.config.pv.size(); ++j) {
    d.pv_p[j] = scale * in.pv_avail[j];
    d.pv_q[j] = -std::min(tan_phi * d.pv_p[j], sc.config.pv[j].q_max);
  }
}

}  // namespace

std::pair<HeuristicDispatch, HeuristicState> heuristic_step(
    const scenario::Scenario& sc, const std::vector<double>& z, const HeuristicState& state,
    const HeuristicInputs& in, const GridCheck& grid_check, const HeuristicOptions& opts) {
  const scenario::ScenarioConfig& cfg = sc.config;
  const int ns = static_cast<int>(cfg.storage.size());
  const int npv = static_cast<int>(cfg.pv.size());
  const double T = cfg.T;
  const double tan_phi = std::tan(std::acos(std::clamp(opts.pv_cos_phi, 1e-6, 1.0)));

  HeuristicDispatch d;
  d.pv_p.assign(npv, 0.0);
  d.pv_q.assign(npv, 0.0);
  d.p_dis.assign(ns, 0.0);
  d.p_ch.assign(ns, 0.0);
  d.q_s.assign(ns, 0.0);
  set_pv(sc, in, 1.0, tan_phi, d);

  HeuristicState next = state;
  next.morning_discharge = in.hour >= opts.morning_start && in.hour < opts.morning_end;

  // Local surplus per bus, shared by the units at that bus in order.
  std::vector<double> surplus(sc.grid.num_buses(), 0.0);
  for (int b = 0; b < sc.grid.num_buses(); ++b) surplus[b] = -in.load_p[b];
  for (int j = 0; j < npv; ++j) surplus[sc.grid.bus_index(cfg.pv[j].bus)] += in.pv_avail[j];

  std::vector<double> planned_dis(ns, 0.0);
  for (int i = 0; i < ns; ++i) {
    const storage::StorageSpec& s = cfg.storage[i];
    const int b = sc.grid.bus_index(s.bus);
    const double e = std::clamp(state.soe[i], 0.0, z[i]);
    const double can_out = std::min(s.p_dis_max, e * s.eta_dis / T);
    const double can_in = std::min(s.p_ch_max, (z[i] - e) / (s.eta_ch * T));
    if (next.morning_discharge) {
      planned_dis[i] = can_out;
    } else if (surplus[b] > 0.0) {
      const double ch = std::min(surplus[b], can_in);
      d.p_ch[i] = -ch;
      surplus[b] -= ch;
    } else if (surplus[b] < 0.0) {
      // Household consumption only; no export from the battery.
      const double dis = std::min(-surplus[b], can_out);
      d.p_dis[i] = dis;
      surplus[b] += dis;
    }
  }
  auto with_discharge = [&](double scale) {
    for (int i = 0; i < ns; ++i)
      if (planned_dis[i] > 0.0) d.p_dis[i] = scale * planned_dis[i];
  };
  with_discharge(1.0);

  std::vector<double> p, q;
  auto ok = [&]() {
    net_injections(sc, in, d, p, q);
    return grid_check(p, q);
  };
  auto largest_feasible = [&](auto&& apply) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < opts.bisection_steps; ++it) {
      const double mid = 0.5 * (lo + hi);
      apply(mid);
      (ok() ? lo : hi) = mid;
    }
    apply(lo);
    return lo;
  };

  if (!ok()) {
    set_pv(sc, in, 0.0, tan_phi, d);
    if (ok()) {
      d.pv_scale = largest_feasible([&](double s) { set_pv(sc, in, s, tan_phi, d); });
    } else {
      d.pv_scale = 0.0;
      d.discharge_scale = largest_feasible([&](double s) { with_discharge(s); });
      if (!ok()) {
        // Full curtailment with an idle battery.
        std::fill(d.p_dis.begin(), d.p_dis.end(), 0.0);
        std::fill(d.p_ch.begin(), d.p_ch.end(), 0.0);
        d.discharge_scale = 0.0;
        d.grid_ok = ok();
      }
    }
  }
  // Charging never exceeds the PV actually kept at the bus.
  for (int i = 0; i < ns; ++i) {
    if (d.p_ch[i] >= 0.0) continue;
    const int b = sc.grid.bus_index(cfg.storage[i].bus);
    double pv_at_bus = 0.0, load_at_bus = in.load_p[b], charging = 0.0;
    for (int j = 0; j < npv; ++j)
      if (sc.grid.bus_index(cfg.pv[j].bus) == b) pv_at_bus += d.pv_p[j];
    for (int k = 0; k < ns; ++k)
      if (k != i && sc.grid.bus_index(cfg.storage[k].bus) == b) charging -= std::min(d.p_ch[k], 0.0);
    const double room = std::max(0.0, pv_at_bus - load_at_bus - charging);
    if (-d.p_ch[i] > room) d.p_ch[i] = -room;
  }
  d.grid_ok = d.grid_ok && ok();

  for (int i = 0; i < ns; ++i) {
    next.soe[i] = std::clamp(state.soe[i] + storage::soe_delta(cfg.storage[i], d.p_dis[i], d.p_ch[i], T),
                             0.0, z[i]);
  }
  net_injections(sc, in, d, p, q);
  next.export_limit = p;
  return {d, next};
}

multiperiod::StepRecord account_step(const scenario::Scenario& sc, const HeuristicInputs& in,
                                     const HeuristicDispatch& d,
                                     const std::vector<double>& soe_after,
                                     const std::vector<double>& z) {
  const scenario::ScenarioConfig& cfg = sc.config;
  const double s = sc.grid.base.s_kw();
  std::vector<double> p, q;
  net_injections(sc, in, d, p, q);
  Eigen::VectorXd pp(p.size()), qq(q.size());
  for (std::size_t b = 0; b < p.size(); ++b) {
    pp[b] = p[b] / s;
    qq[b] = q[b] / s;
  }
  const Eigen::VectorXd lp = grid::plane_losses(sc.ops, grid::linear_currents(sc.ops, pp));
  const Eigen::VectorXd lq = grid::plane_losses(sc.ops, grid::linear_currents(sc.ops, qq));
  multiperiod::StepRecord r;
  r.step = in.step;
  const scenario::TariffPoint price = scenario::tariff_at(cfg.tariff, in.step, cfg.T);
  r.import_price = price.import_price;
  r.export_price = price.export_price;
  r.losses_p = (lp.sum() + lq.sum()) * s;
  double net = 0.0, netq = 0.0;
  for (double v : p) net += v;
  for (double v : q) netq += v;
  r.feeder_p = r.losses_p - net;
  r.feeder_q = -netq;
  const double rate = std::max(price.export_price * r.feeder_p, price.import_price * r.feeder_p);
  r.energy_cost = cfg.T * rate / 1000.0;
  for (double v : in.load_p) r.load_p += v;
  r.pv_avail = in.pv_avail;
  r.pv_p = d.pv_p;
  r.pv_q = d.pv_q;
  r.p_dis = d.p_dis;
  r.p_ch = d.p_ch;
  r.q_s = d.q_s;
  r.soe = soe_after;
  for (std::size_t i = 0; i < soe_after.size(); ++i) {
    r.fade.push_back(cfg.T * std::max(0.0, sc.map.evaluate(d.p_dis[i] + d.p_ch[i], soe_after[i], z[i])));
  }
  const Eigen::VectorXd v = grid::linear_voltages(sc.ops, pp, qq);
  r.v.assign(v.data(), v.data() + v.size());
  return r;
}

mpc::MpcRunResult run_heuristic_year(const scenario::Scenario& sc, const std::vector<double>& z,
                                     int N, int k0, const HeuristicOptions& opts) {
  const scenario::ScenarioConfig& cfg = sc.config;
  const int ns = static_cast<int>(cfg.storage.size());
  if (static_cast<int>(z.size()) != ns) {
    throw input_error("DimensionMismatch", "capacity vector needs one entry per storage unit");
  }
  if (N <= 0) N = cfg.N;
  const GridCheck check = fbs_grid_check(sc);
  HeuristicState st;
  for (int i = 0; i < ns; ++i) st.soe.push_back(std::min(cfg.storage[i].e0, z[i]));

  mpc::MpcRunResult out;
  out.trajectory.T = cfg.T;
  std::vector<double> pv_total;
  for (int k = k0; k < k0 + N; ++k) {
    HeuristicInputs in;
    in.step = k;
    in.hour = std::fmod(k * cfg.T, 24.0);
    multiperiod::step_loads(sc, k, in.load_p, in.load_q);
    for (const opf::GeneratorSpec& g : multiperiod::step_generators(sc, k))
      if (g.kind == opf::GeneratorKind::Pv) in.pv_avail.push_back(g.p_max);
    auto [d, next] = heuristic_step(sc, z, st, in, check, opts);
    multiperiod::StepRecord r = account_step(sc, in, d, next.soe, z);
    out.trajectory.energy_cost += r.energy_cost;
    out.trajectory.steps.push_back(std::move(r));
    st = std::move(next);
  }
  out.J_sub = out.trajectory.J();
  return out;
}

}  // namespace dbs::heuristic
