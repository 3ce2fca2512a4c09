#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dbs/heuristic.hpp"
#include "dbs/loadflow.hpp"
#include "dbs/mpc.hpp"

using namespace dbs;
using namespace dbs::heuristic;
using scenario::Scenario;

namespace {

const Scenario& desk() {
  static const Scenario sc = scenario::build_scenario(scenario::desk_config(48));
  return sc;
}

// Desk buses are R1, R2, R3; PV and storage units sit at R2 and R3.
HeuristicInputs inputs(double hour, double pv2, double pv3, double ld2, double ld3) {
  HeuristicInputs in;
  in.hour = hour;
  in.step = static_cast<int>(hour);
  in.pv_avail = {pv2, pv3};
  in.load_p = {0.0, ld2, ld3};
  in.load_q = {0.0, 0.0, 0.0};
  return in;
}

HeuristicState state(double e2, double e3) {
  HeuristicState s;
  s.soe = {e2, e3};
  return s;
}

const GridCheck always = [](const std::vector<double>&, const std::vector<double>&) {
  return true;
};

double max_voltage(const Scenario& sc, const std::vector<double>& p_kw,
                   const std::vector<double>& q_kvar) {
  const double s = sc.grid.base.s_kw();
  std::vector<double> p, q;
  for (double x : p_kw) p.push_back(x / s);
  for (double x : q_kvar) q.push_back(x / s);
  const auto lf = loadflow::fbs_loadflow(sc.grid, p, q);
  double vmax = 0.0;
  for (const auto& v : lf.v) vmax = std::max(vmax, std::abs(v));
  return vmax;
}

}  // namespace

TEST_CASE("midday surplus charges the local battery without export") {
  const Scenario& sc = desk();
  const auto [d, next] = heuristic_step(sc, {20.0, 20.0}, state(0.0, 0.0),
                                        inputs(12.0, 3.5, 0.0, 0.5, 0.0), always);
  CHECK(d.p_ch[0] == doctest::Approx(-3.0));
  CHECK(d.p_ch[1] == 0.0);
  CHECK(d.pv_p[0] == doctest::Approx(3.5));
  std::vector<double> p, q;
  net_injections(sc, inputs(12.0, 3.5, 0.0, 0.5, 0.0), d, p, q);
  CHECK(std::abs(p[1]) <= 1e-12);
  CHECK(next.soe[0] == doctest::Approx(3.0 * sc.config.storage[0].eta_ch));
}

TEST_CASE("surplus beyond headroom is capped by power and energy") {
  const Scenario& sc = desk();
  const auto& s = sc.config.storage[0];
  const auto [d, next] = heuristic_step(sc, {20.0, 5.0}, state(19.0, 0.0),
                                        inputs(12.0, 15.0, 15.0, 0.0, 0.0), always);
  CHECK(-d.p_ch[0] == doctest::Approx(1.0 / s.eta_ch));
  CHECK(-d.p_ch[1] == doctest::Approx(std::min(s.p_ch_max, 5.0 / s.eta_ch)));
  CHECK(next.soe[0] == doctest::Approx(20.0));
}

TEST_CASE("full battery and over-voltage: PV curtailed to the bisection boundary") {
  // Same desk grid but weak long lines so export raises the far voltage
  // before any current limit is hit.
  scenario::ScenarioConfig cfg = scenario::desk_config(48);
  for (auto& b : cfg.branches) {
    b.length_m = 1500.0;
    b.i_max_A = 1000.0;
  }
  const Scenario sc = scenario::build_scenario(cfg);
  const GridCheck check = fbs_grid_check(sc);
  const auto in = inputs(12.0, 20.0, 20.0, 0.2, 0.2);
  const auto [d, next] = heuristic_step(sc, {10.0, 10.0}, state(10.0, 10.0), in, check);
  REQUIRE(d.pv_scale < 1.0);
  REQUIRE(d.pv_scale > 0.0);
  CHECK(d.grid_ok);
  CHECK(d.p_ch == std::vector<double>{0.0, 0.0});

  std::vector<double> p, q;
  net_injections(sc, in, d, p, q);
  CHECK(check(p, q));
  CHECK(max_voltage(sc, p, q) <= sc.config.v_max + 1e-6);
  CHECK(max_voltage(sc, p, q) >= sc.config.v_max - 1e-4);
  HeuristicDispatch more = d;
  for (std::size_t j = 0; j < more.pv_p.size(); ++j) {
    more.pv_p[j] *= 1.001;
    more.pv_q[j] *= 1.001;
  }
  net_injections(sc, in, more, p, q);
  CHECK_FALSE(check(p, q));
}

TEST_CASE("morning window discharges at the power or energy limit") {
  const Scenario& sc = desk();
  const auto& s = sc.config.storage[0];
  const auto [d, next] = heuristic_step(sc, {20.0, 20.0}, state(20.0, 2.0),
                                        inputs(6.0, 0.0, 0.0, 0.5, 0.5), always);
  CHECK(next.morning_discharge);
  CHECK(d.p_dis[0] == doctest::Approx(s.p_dis_max));
  CHECK(d.p_dis[1] == doctest::Approx(2.0 * s.eta_dis));
  CHECK(next.soe[1] == doctest::Approx(0.0).epsilon(1e-12));
  const auto [d2, n2] = heuristic_step(sc, {20.0, 20.0}, state(20.0, 2.0),
                                       inputs(8.0, 0.0, 0.0, 0.5, 0.5), always);
  CHECK_FALSE(n2.morning_discharge);
  CHECK(d2.p_dis[0] == doctest::Approx(0.5));
}

TEST_CASE("evening discharge serves the household only") {
  const Scenario& sc = desk();
  const auto [d, next] = heuristic_step(sc, {20.0, 20.0}, state(10.0, 0.0),
                                        inputs(20.0, 0.0, 0.0, 1.2, 0.8), always);
  CHECK(d.p_dis[0] == doctest::Approx(1.2));
  CHECK(d.p_dis[1] == 0.0);
}

TEST_CASE("zero PV year never cycles and pays pure import cost") {
  scenario::ScenarioConfig cfg = scenario::desk_config(48);
  cfg.profiles.pv_target_mwh = 0.0;
  const Scenario sc = scenario::build_scenario(cfg);
  const auto r = run_heuristic_year(sc, {10.0, 10.0}, 48);
  double import_cost = 0.0;
  for (const auto& s : r.trajectory.steps) {
    CHECK(s.p_ch == std::vector<double>{0.0, 0.0});
    CHECK(s.p_dis == std::vector<double>{0.0, 0.0});
    CHECK(s.feeder_p >= 0.0);
    import_cost += sc.config.T * s.import_price * s.feeder_p / 1000.0;
  }
  CHECK(r.J_sub == doctest::Approx(import_cost).epsilon(1e-12));
}

TEST_CASE("desk year: grid feasible, no grid charging, MPC earns at least as much") {
  const Scenario& sc = desk();
  const std::vector<double> z = {8.0, 8.0};
  const auto h = run_heuristic_year(sc, z, 48);
  const GridCheck check = fbs_grid_check(sc);
  for (const auto& s : h.trajectory.steps) {
    HeuristicInputs in;
    multiperiod::step_loads(sc, s.step, in.load_p, in.load_q);
    HeuristicDispatch d;
    d.pv_p = s.pv_p;
    d.pv_q = s.pv_q;
    d.p_dis = s.p_dis;
    d.p_ch = s.p_ch;
    d.q_s = s.q_s;
    std::vector<double> p, q;
    net_injections(sc, in, d, p, q);
    CHECK(check(p, q));
    for (int i = 0; i < 2; ++i) {
      const int b = sc.grid.bus_index(sc.config.storage[i].bus);
      if (s.p_ch[i] < 0.0) CHECK(-s.p_ch[i] <= s.pv_p[i] - in.load_p[b] + 1e-9);
      CHECK(s.soe[i] >= 0.0);
      CHECK(s.soe[i] <= z[i]);
    }
  }
  mpc::MpcConfig m;
  m.H = 24;
  m.c = 6;
  m.N = 48;
  m.battery_cost = 100.0;
  m.degradation = false;
  const auto r = mpc::run_receding_horizon(sc, m, z);
  CHECK(-r.trajectory.energy_cost > -h.trajectory.energy_cost);
}
