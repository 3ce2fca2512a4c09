#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "dbs/error.hpp"
#include "dbs/kernels.hpp"
#include "dbs/lp/certificate.hpp"
#include "dbs/lp/mps.hpp"
#include "dbs/lp/simplex.hpp"
#include "lp_oracle.hpp"

using namespace dbs::lp;

TEST_CASE("single variable with a lower-bounding row") {
  LpProblem p;
  const int x = p.add_column(1.0, -kInf, kInf, "x");
  p.add_ineq(std::vector<int>{x}, std::vector<double>{1.0},
             RowSense::GreaterEqual, 1.0, "x>=1");
  const auto s = solve_lp(p);
  REQUIRE(s.optimal());
  CHECK(s.primal[0] == doctest::Approx(1.0));
  CHECK(s.objective_value == doctest::Approx(1.0));
  CHECK(s.duals_in[0] == doctest::Approx(1.0));
  CHECK(check_solution(p, s).passed);
}

TEST_CASE("two variables on a simplex face") {
  LpProblem p;
  p.add_column(-1.0, 0.0, kInf);
  p.add_column(-1.0, 0.0, kInf);
  p.add_ineq(std::vector<int>{0, 1}, std::vector<double>{1.0, 1.0},
             RowSense::LessEqual, 1.0);
  const auto s = solve_lp(p);
  REQUIRE(s.optimal());
  CHECK(s.objective_value == doctest::Approx(-1.0));
  CHECK(s.primal[0] + s.primal[1] == doctest::Approx(1.0));
  CHECK(s.duals_in[0] == doctest::Approx(-1.0));
}

TEST_CASE("equality dual is the rhs sensitivity") {
  // min 2x + 3y, x + y = 4, x <= 3  ->  x = 3, y = 1, obj 9; d obj / d rhs = 3
  LpProblem p;
  p.add_column(2.0, 0.0, 3.0);
  p.add_column(3.0, 0.0, kInf);
  p.add_eq(std::vector<int>{0, 1}, std::vector<double>{1.0, 1.0}, 4.0);
  const auto s = solve_lp(p);
  REQUIRE(s.optimal());
  CHECK(s.objective_value == doctest::Approx(9.0));
  CHECK(s.duals_eq[0] == doctest::Approx(3.0));
  CHECK(s.reduced_costs[0] == doctest::Approx(-1.0));
}

TEST_CASE("infeasible and unbounded are classified") {
  LpProblem inf;
  inf.add_column(0.0, 0.0, 1.0);
  inf.add_ineq(std::vector<int>{0}, std::vector<double>{1.0},
               RowSense::GreaterEqual, 2.0);
  CHECK(solve_lp(inf).status == SolveStatus::Infeasible);

  LpProblem unb;
  unb.add_column(-1.0, 0.0, kInf);
  unb.add_column(0.0, 0.0, kInf);
  unb.add_ineq(std::vector<int>{0, 1}, std::vector<double>{1.0, -1.0},
               RowSense::LessEqual, 1.0);
  CHECK(solve_lp(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("iteration limit is reported") {
  std::mt19937_64 rng(3);
  auto p = oracle::to_problem(oracle::random_bounded_lp(rng, 8, 8));
  SolverConfig cfg;
  cfg.max_iterations = 1;
  const auto s = solve_lp(p, cfg);
  CHECK((s.status == SolveStatus::IterationLimit || s.optimal()));
}

TEST_CASE("malformed problems throw") {
  LpProblem p;
  p.add_column(1.0, 2.0, 1.0);
  CHECK_THROWS_AS(p.validate(), dbs::Error);
  LpProblem q;
  q.add_column(1.0, 0.0, 1.0);
  q.add_ineq(std::vector<int>{3}, std::vector<double>{1.0},
             RowSense::LessEqual, 1.0);
  try {
    solve_lp(q);
    FAIL("expected throw");
  } catch (const dbs::Error& e) {
    CHECK(e.kind() == "DimensionMismatch");
  }
}

TEST_CASE("random LPs agree with vertex enumeration") {
  std::mt19937_64 rng(20240611);
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + t % 5;
    const int m = 2 + (t / 5) % 6;
    const auto d = oracle::random_bounded_lp(rng, n, m);
    const auto p = oracle::to_problem(d);
    const auto s = solve_lp(p);
    REQUIRE(s.optimal());
    const double ref = oracle::enumerate_vertices(d);
    CHECK(s.objective_value == doctest::Approx(ref).epsilon(1e-8));
    CHECK(check_solution(p, s).passed);
  }
}

TEST_CASE("one 10x15 instance against enumeration" * doctest::timeout(60)) {
  std::mt19937_64 rng(77);
  const auto d = oracle::random_bounded_lp(rng, 10, 15);
  const auto s = solve_lp(oracle::to_problem(d));
  REQUIRE(s.optimal());
  CHECK(s.objective_value ==
        doctest::Approx(oracle::enumerate_vertices(d)).epsilon(1e-8));
}

TEST_CASE("mixed row senses and bounds certify") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto p = oracle::random_mixed_lp(rng, 5 + t % 26, 3 + t % 20);
    const auto s = solve_lp(p);
    REQUIRE(s.optimal());
    const auto rep = check_solution(p, s);
    CHECK(rep.relative_gap <= 1e-6);
    CHECK(rep.passed);
  }
}

TEST_CASE("certificate flags a perturbed primal") {
  LpProblem p;
  p.add_column(-1.0, 0.0, kInf);
  p.add_column(-1.0, 0.0, kInf);
  p.add_ineq(std::vector<int>{0, 1}, std::vector<double>{1.0, 1.0},
             RowSense::LessEqual, 1.0);
  LpSolution exact;
  exact.status = SolveStatus::Optimal;
  exact.primal = {1.0, 0.0};
  exact.duals_in = {-1.0};
  auto rep = check_solution(p, exact);
  CHECK(rep.max_primal_residual == 0.0);
  CHECK(rep.max_dual_residual == 0.0);
  CHECK(rep.duality_gap == 0.0);
  CHECK(rep.passed);

  exact.primal[0] += 1e-3;
  rep = check_solution(p, exact);
  CHECK(rep.max_primal_residual == doctest::Approx(1e-3));
  CHECK_FALSE(rep.passed);
}

TEST_CASE("warm start reproduces the optimum in no more pivots") {
  std::mt19937_64 rng(11);
  const auto p = oracle::to_problem(oracle::random_bounded_lp(rng, 20, 15));
  const auto cold = solve_lp(p);
  REQUIRE(cold.optimal());
  SolverConfig cfg;
  cfg.warm_basis = &cold.basis;
  const auto warm = solve_lp(p, cfg);
  REQUIRE(warm.optimal());
  CHECK(warm.iterations == 0);
  CHECK(warm.objective_value == doctest::Approx(cold.objective_value));
}

TEST_CASE("objective scaling keeps the argmin") {
  std::mt19937_64 rng(19);
  auto p = oracle::to_problem(oracle::random_bounded_lp(rng, 12, 9));
  const auto a = solve_lp(p);
  for (double& c : p.objective) c *= 7.5;
  const auto b = solve_lp(p);
  REQUIRE(a.optimal());
  REQUIRE(b.optimal());
  for (std::size_t j = 0; j < a.primal.size(); ++j) {
    CHECK(a.primal[j] == doctest::Approx(b.primal[j]).epsilon(1e-9));
  }
}

TEST_CASE("solves are deterministic") {
  std::mt19937_64 rng(23);
  const auto p = oracle::random_mixed_lp(rng, 25, 18);
  const auto a = solve_lp(p);
  const auto b = solve_lp(p);
  CHECK(a.primal == b.primal);
  CHECK(a.duals_in == b.duals_in);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("mps output has the fixed sections") {
  LpProblem p;
  p.add_column(1.0, 0.0, 4.0, "generation");
  p.add_column(0.0, -kInf, kInf, "free");
  p.add_eq(std::vector<int>{0, 1}, std::vector<double>{1.0, -1.0}, 2.0, "bal");
  p.add_ineq(std::vector<int>{1}, std::vector<double>{1.0},
             RowSense::GreaterEqual, -1.0, "lo");
  std::ostringstream os;
  write_mps(p, os);
  const std::string s = os.str();
  CHECK(s.find("* R0000001 bal") != std::string::npos);
  CHECK(s.find("* C0000001 generation") != std::string::npos);
  CHECK(s.find(" E  R0000001") != std::string::npos);
  CHECK(s.find(" G  R0000002") != std::string::npos);
  CHECK(s.find(" UP BND") != std::string::npos);
  CHECK(s.find(" FR BND") != std::string::npos);
  CHECK(s.rfind("ENDATA") != std::string::npos);
}

TEST_CASE("parallel kernels match the serial reference") {
  using namespace dbs::kernels;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 5000, m = 300;
  std::vector<int> start{0}, index;
  std::vector<double> value;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; i += 1 + j % 17) {
      index.push_back(i);
      value.push_back(u(rng));
    }
    start.push_back(static_cast<int>(index.size()));
  }
  CompressedView a{n, m, start, index, value};
  std::vector<double> y(m), c(n), d1(n), d2(n);
  for (auto& v : y) v = u(rng);
  for (auto& v : c) v = u(rng);
  reduced_costs(a, y, c, d1);
  reduced_costs_serial(a, y, c, d2);
  CHECK(d1 == d2);
  CHECK(argmax_above(d1, 0.0) == argmax_above_serial(d2, 0.0));
  std::vector<double> lo(n, -0.5), up(n, 0.5);
  CHECK(max_bound_violation(d1, lo, up) ==
        max_bound_violation_serial(d1, lo, up));
}
