#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "dbs/error.hpp"
#include "dbs/mpc.hpp"
#include "dbs/multiperiod.hpp"
#include "json.hpp"

using namespace dbs;
using scenario::Scenario;

namespace {

const Scenario& desk() {
  static const Scenario sc = scenario::build_scenario(scenario::desk_config(48));
  return sc;
}

mpc::MpcConfig cfg(int H, int c, int N, double cd = 100.0) {
  mpc::MpcConfig m;
  m.H = H;
  m.c = c;
  m.N = N;
  m.battery_cost = cd;
  return m;
}

double window_cost(const Scenario& sc, int k0, int H, const std::vector<double>& z,
                   double cd) {
  multiperiod::WindowSpec w;
  w.k0 = k0;
  w.N = H;
  w.z = multiperiod::ZMode::fixed(z);
  w.battery_cost = cd;
  const auto mp = multiperiod::assemble_multiperiod(sc, w);
  return multiperiod::solve_or_throw(mp.problem, "fd").objective_value;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(cfg(24, 6, 48).validate());
  for (auto bad : {cfg(24, 0, 48), cfg(6, 12, 48), cfg(48, 6, 24), cfg(24, 5, 48)}) {
    try {
      bad.validate();
      FAIL("accepted an invalid config");
    } catch (const Error& e) {
      CHECK(e.kind() == "InvalidMpcConfig");
      CHECK(e.category() == ErrorCategory::Input);
    }
  }
}

TEST_CASE("year of six-step updates has 1460 windows") {
  const mpc::MpcConfig m = cfg(24, 6, 8760);
  CHECK(m.N / m.c == 1460);
}

TEST_CASE("H equal to c: unit weights and J_sub is the sum of window objectives") {
  const Scenario& sc = desk();
  const std::vector<double> z = {5.0, 3.0};
  const auto r = mpc::run_receding_horizon(sc, cfg(12, 12, 48), z);
  REQUIRE(r.windows.size() == 4);
  double sum_obj = 0.0;
  std::vector<double> lam(2, 0.0);
  for (const auto& w : r.windows) {
    CHECK(w.status == "Optimal");
    sum_obj += w.objective;
    for (int i = 0; i < 2; ++i) lam[i] += w.lambda[i];
  }
  CHECK(r.J_sub == doctest::Approx(sum_obj).epsilon(1e-9));
  for (int i = 0; i < 2; ++i) CHECK(r.lambda_s[i] == doctest::Approx(lam[i]).epsilon(1e-12));
}

TEST_CASE("overlapping windows weight duals by c/H") {
  const Scenario& sc = desk();
  const auto r = mpc::run_receding_horizon(sc, cfg(24, 6, 48), {6.0, 6.0});
  REQUIRE(r.windows.size() == 8);
  std::vector<double> lam(2, 0.0);
  double applied = 0.0;
  for (const auto& w : r.windows) {
    for (int i = 0; i < 2; ++i) lam[i] += w.lambda[i] * 6.0 / 24.0;
    applied += w.applied_cost;
  }
  for (int i = 0; i < 2; ++i) CHECK(r.lambda_s[i] == doctest::Approx(lam[i]).epsilon(1e-12));
  CHECK(r.J_sub == doctest::Approx(applied).epsilon(1e-12));
  CHECK(r.J_sub == doctest::Approx(r.trajectory.J()).epsilon(1e-9));
  CHECK(r.trajectory.steps.size() == 48);
}

TEST_CASE("dual signs") {
  const Scenario& sc = desk();
  // Daily cycle with midday surplus: capacity at zero is worth something.
  const auto r0 = mpc::run_receding_horizon(sc, cfg(24, 24, 24, 50.0), {0.0, 0.0});
  CHECK(r0.windows[0].lambda[0] < -1e-6);
  CHECK(r0.windows[0].lambda[1] < -1e-6);
  // Far more capacity than a single day can fill. Without the fade map z
  // only enters through the SoE bounds.
  mpc::MpcConfig big = cfg(24, 24, 24, 50.0);
  big.degradation = false;
  const auto rb = mpc::run_receding_horizon(sc, big, {5000.0, 5000.0});
  CHECK(std::abs(rb.windows[0].lambda[0]) <= 1e-9);
  CHECK(std::abs(rb.windows[0].lambda[1]) <= 1e-9);
}

TEST_CASE("window duals match finite differences") {
  const Scenario& sc = desk();
  const std::vector<double> z = {4.0, 4.0};
  const double cd = 100.0;
  const auto r = mpc::run_receding_horizon(sc, cfg(24, 24, 24, cd), z);
  const double J = window_cost(sc, 0, 24, z, cd);
  CHECK(J == doctest::Approx(r.windows[0].objective).epsilon(1e-10));
  const double delta = 1e-3;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> zp = z;
    zp[i] += delta;
    const double fd = (window_cost(sc, 0, 24, zp, cd) - J) / delta;
    const double lam = r.windows[0].lambda[i];
    INFO("unit " << i << " fd " << fd << " lambda " << lam);
    CHECK(std::abs(fd - lam) <= 1e-4 * std::abs(lam));
  }
}

TEST_CASE("single window at the monolithic optimum reproduces its operation cost") {
  const Scenario& sc = desk();
  multiperiod::SizingOptions so;
  so.N = 48;
  so.battery_cost = 100.0;
  const auto mono = multiperiod::solve_monolithic_sizing(sc, so);
  const auto r = mpc::run_receding_horizon(sc, cfg(48, 48, 48, 100.0), mono.z);
  CHECK(r.J_sub == doctest::Approx(mono.operation_cost).epsilon(1e-7));
}

TEST_CASE("SoE continuity and bounds across windows") {
  const Scenario& sc = desk();
  const std::vector<double> z = {7.0, 2.5};
  const auto r = mpc::run_receding_horizon(sc, cfg(12, 6, 48), z);
  const auto& steps = r.trajectory.steps;
  const auto& st = sc.config.storage;
  std::vector<double> e = {st[0].e0, st[1].e0};
  for (std::size_t k = 0; k < steps.size(); ++k) {
    for (int i = 0; i < 2; ++i) {
      const double next = e[i] + (-st[i].eta_ch * steps[k].p_ch[i] - steps[k].p_dis[i] / st[i].eta_dis) *
                                     r.trajectory.T;
      CHECK(std::abs(next - steps[k].soe[i]) <= 1e-9);
      CHECK(steps[k].soe[i] >= -1e-9);
      CHECK(steps[k].soe[i] <= z[i] + 1e-9);
      e[i] = steps[k].soe[i];
    }
  }
}

TEST_CASE("trace file has one line per window") {
  const Scenario& sc = desk();
  mpc::MpcConfig m = cfg(12, 12, 48);
  m.trace_path = (std::filesystem::temp_directory_path() / "test_mpc_trace.jsonl").string();
  std::remove(m.trace_path.c_str());
  mpc::run_receding_horizon(sc, m, {2.0, 2.0});
  std::ifstream in(m.trace_path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["window"].get<int>() == n);
    CHECK(j["status"] == "Optimal");
    CHECK(j["lambda"].size() == 2);
    CHECK(j["applied"].size() == 12);
    CHECK(j.contains("schema_version"));
    ++n;
  }
  CHECK(n == 4);
}

TEST_CASE("dual extraction needs pinning rows") {
  const Scenario& sc = desk();
  multiperiod::WindowSpec w;
  w.N = 2;
  w.z = multiperiod::ZMode::free({10.0, 10.0});
  const auto mp = multiperiod::assemble_multiperiod(sc, w);
  const auto sol = multiperiod::solve_or_throw(mp.problem, "free");
  try {
    mpc::extract_z_duals(sol, mp.layout);
    FAIL("expected MissingRows");
  } catch (const Error& e) {
    CHECK(e.kind() == "MissingRows");
  }
}

TEST_CASE("negative capacity is rejected") {
  CHECK_THROWS_AS(mpc::run_receding_horizon(desk(), cfg(12, 12, 48), {-1.0, 0.0}), Error);
}
