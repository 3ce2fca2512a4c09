#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dbs/benders.hpp"
#include "dbs/error.hpp"
#include "dbs/multiperiod.hpp"
#include "json.hpp"

using namespace dbs;
using namespace dbs::benders;
using scenario::Scenario;

namespace {

const Scenario& desk() {
  static const Scenario sc = scenario::build_scenario(scenario::desk_config(48));
  return sc;
}

mpc::MpcConfig full_window(double cd) {
  mpc::MpcConfig m;
  m.H = m.c = m.N = 48;
  m.battery_cost = cd;
  return m;
}

// Minimum of c'z + max(alpha_down, cuts) over the box, by enumerating every
// vertex of the epigraph in (z1, z2, alpha) space.
double envelope_min(const std::vector<BendersCut>& cuts, const std::array<double, 2>& c,
                    const std::array<double, 2>& zmax, double alpha_down) {
  // Planes a.(z1, z2, alpha) = b, feasible side a.x <= b.
  std::vector<std::array<double, 4>> planes;
  for (const auto& k : cuts) {
    planes.push_back({k.lambda[0], k.lambda[1], -1.0,
                      k.lambda[0] * k.z[0] + k.lambda[1] * k.z[1] - k.J_sub});
  }
  planes.push_back({0, 0, -1, -alpha_down});
  planes.push_back({-1, 0, 0, 0});
  planes.push_back({1, 0, 0, zmax[0]});
  planes.push_back({0, -1, 0, 0});
  planes.push_back({0, 1, 0, zmax[1]});
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = planes.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t d = b + 1; d < n; ++d) {
        const auto &p = planes[a], &q = planes[b], &r = planes[d];
        const double det = p[0] * (q[1] * r[2] - q[2] * r[1]) - p[1] * (q[0] * r[2] - q[2] * r[0]) +
                           p[2] * (q[0] * r[1] - q[1] * r[0]);
        if (std::abs(det) < 1e-12) continue;
        auto solve_col = [&](int col) {
          std::array<std::array<double, 3>, 3> m = {{{p[0], p[1], p[2]}, {q[0], q[1], q[2]}, {r[0], r[1], r[2]}}};
          m[0][col] = p[3];
          m[1][col] = q[3];
          m[2][col] = r[3];
          return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                  m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                  m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])) / det;
        };
        const std::array<double, 3> x = {solve_col(0), solve_col(1), solve_col(2)};
        bool ok = true;
        for (const auto& pl : planes) {
          if (pl[0] * x[0] + pl[1] * x[1] + pl[2] * x[2] > pl[3] + 1e-9 * (1.0 + std::abs(pl[3]))) {
            ok = false;
            break;
          }
        }
        if (ok) best = std::min(best, c[0] * x[0] + c[1] * x[1] + x[2]);
      }
  return best;
}

}  // namespace

TEST_CASE("first master without cuts sits at the lower box") {
  const MasterResult m = solve_master({}, {2.0, 3.0}, {50.0, 50.0}, -100000.0);
  CHECK(m.z == std::vector<double>{0.0, 0.0});
  CHECK(m.alpha == -100000.0);
  CHECK(m.objective == -100000.0);
}

TEST_CASE("single profitable cut pushes its unit to the bound") {
  BendersCut cut{0.0, {0.0}, {-10.0}};
  const MasterResult m = solve_master({cut}, {5.0}, {50.0}, -100000.0);
  CHECK(m.z[0] == doctest::Approx(50.0));
  CHECK(m.alpha == doctest::Approx(-500.0));
  CHECK(m.objective == doctest::Approx(-250.0));
}

TEST_CASE("master optimum equals the enumerated envelope minimum") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(0.0, 40.0), grad(-12.0, 2.0), cost(0.5, 6.0);
  for (int trial = 0; trial < 60; ++trial) {
    // Cuts are tangents of a convex quadratic, like a real operating-cost curve.
    const double a0 = 0.01 + 0.2 * pos(rng) / 40.0, a1 = 0.01 + 0.2 * pos(rng) / 40.0;
    const double g0 = grad(rng), g1 = grad(rng);
    auto f = [&](double x, double y) { return 100.0 + g0 * x + g1 * y + a0 * x * x + a1 * y * y; };
    std::vector<BendersCut> cuts;
    const int ncuts = 1 + trial % 6;
    for (int l = 0; l < ncuts; ++l) {
      const double x = pos(rng), y = pos(rng);
      cuts.push_back({f(x, y), {x, y}, {g0 + 2 * a0 * x, g1 + 2 * a1 * y}});
    }
    const std::array<double, 2> c = {cost(rng), cost(rng)};
    const std::array<double, 2> zmax = {40.0, 40.0};
    const MasterResult m = solve_master(cuts, {c[0], c[1]}, {zmax[0], zmax[1]}, -1000.0);
    const double oracle = envelope_min(cuts, c, zmax, -1000.0);
    INFO("trial " << trial);
    CHECK(m.objective == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("master input errors") {
  CHECK_THROWS_AS(solve_master({}, {1.0}, {1.0, 2.0}, -1.0), Error);
  CHECK_THROWS_AS(solve_master({}, {1.0}, {1.0}, -std::numeric_limits<double>::infinity()), Error);
  BendersCut bad{0.0, {0.0, 0.0}, {1.0}};
  CHECK_THROWS_AS(solve_master({bad}, {1.0, 1.0}, {1.0, 1.0}, -1.0), Error);
}

TEST_CASE("desk plan matches monolithic sizing") {
  const Scenario& sc = desk();
  const double cd = 100.0;
  BendersOptions o;
  o.battery_cost = cd;
  static const PlanResult plan = run_benders(sc, full_window(cd), o);
  multiperiod::SizingOptions so;
  so.N = 48;
  so.battery_cost = cd;
  static const auto mono = multiperiod::solve_monolithic_sizing(sc, so);
  CHECK(plan.converged);
  CHECK(plan.iterations <= 100);
  CHECK(std::abs(plan.objective() - mono.J) <= 0.01 * std::abs(mono.J));
  CHECK(plan.objective() >= mono.J - 1e-7 * std::abs(mono.J));

  SUBCASE("lower bound never decreases") {
    for (std::size_t l = 1; l < plan.history.size(); ++l)
      CHECK(plan.history[l].Z_down >= plan.history[l - 1].Z_down - 1e-9);
  }
  SUBCASE("first iteration") {
    CHECK(plan.history[0].z == std::vector<double>{0.0, 0.0});
    CHECK(plan.history[0].alpha == -100000.0);
  }
  SUBCASE("replaying the plan reproduces J_sub bit for bit") {
    const auto r = mpc::run_receding_horizon(sc, full_window(cd), plan.z);
    CHECK(r.J_sub == plan.J_sub);
  }
  SUBCASE("outputs") {
    const std::string csv = convergence_csv(plan);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# schema_version=", 0) == 0);
    std::getline(in, line);
    CHECK(line == "iteration,Z_up,Z_best,Z_down,gap,J_sub,alpha,z_R2,z_R3");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(plan.history.size()));
    const auto j = nlohmann::json::parse(plan_json(plan, sc, o, full_window(cd)));
    CHECK(j["schema_version"] == scenario::kSchemaVersion);
    CHECK(j["total_capacity_kwh"].get<double>() == doctest::Approx(plan.z[0] + plan.z[1]));
    CHECK(j["profit_eur"].get<double>() == doctest::Approx(-plan.objective()));
  }
}

TEST_CASE("prohibitive cost places nothing") {
  BendersOptions o;
  o.battery_cost = 1000.0;
  const PlanResult plan = run_benders(desk(), full_window(1000.0), o);
  CHECK(plan.converged);
  CHECK(plan.z[0] + plan.z[1] <= 0.01);
}

TEST_CASE("iteration cap raises NotConverged") {
  BendersOptions o;
  o.battery_cost = 100.0;
  o.max_iterations = 1;
  try {
    run_benders(desk(), full_window(100.0), o);
    FAIL("expected NotConverged");
  } catch (const Error& e) {
    CHECK(e.kind() == "NotConverged");
    CHECK(e.category() == ErrorCategory::NonConvergence);
  }
}
