#pragma once

#include "dbs/lp/lp_problem.hpp"

namespace dbs::lp {

struct CertificateTolerances {
  double primal = 1e-7;
  double dual = 1e-6;
  // Relative: |primal - dual| <= gap * (1 + |primal|).
  double gap = 1e-6;
};

struct CertificateReport {
  double max_primal_residual = 0.0;
  double max_dual_residual = 0.0;
  double duality_gap = 0.0;
  double relative_gap = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  bool passed = false;
};

// Independent KKT check. Reduced costs are recomputed from the row duals
// rather than read from the solution, so a wrong dual vector shows up either
// as a sign residual or as a duality gap.
CertificateReport check_solution(const LpProblem& problem,
                                 const LpSolution& solution,
                                 const CertificateTolerances& tols = {});

}  // namespace dbs::lp
