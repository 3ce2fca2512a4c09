#pragma once

#include "dbs/lp/lp_problem.hpp"

namespace dbs::lp {

// Bounded-variable revised primal simplex.
//
// Every row i gets a logical s_i with A_i x - s_i = 0 and bounds taken from
// the row sense, so the working basis is always square (m x m). The basis is
// held as a sparse LU of the last refactorization plus a product-form eta
// file. Phase 1 minimizes the sum of basic bound violations, phase 2 the
// objective; pricing is Dantzig with a Bland fallback once the objective
// stalls, and the ratio test is the two-pass Harris test.
//
// Throws dbs::Error for malformed input (LpProblem::validate()). Solver
// outcomes (infeasible, unbounded, limits, breakdown) are reported in
// LpSolution::status.
LpSolution solve_lp(const LpProblem& problem, const SolverConfig& config = {});

}  // namespace dbs::lp
