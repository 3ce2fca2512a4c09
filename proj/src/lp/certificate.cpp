#include "dbs/lp/certificate.hpp"

#include <algorithm>
#include <cmath>

#include "dbs/kernels.hpp"

namespace dbs::lp {
namespace {

kernels::CompressedView csr(const SparseRows& rows, int ncols) {
  return {rows.rows(), ncols, rows.start, rows.index, rows.value};
}

}  // namespace

CertificateReport check_solution(const LpProblem& p, const LpSolution& s,
                                 const CertificateTolerances& tols) {
  CertificateReport rep;
  const int n = p.num_cols();
  if (static_cast<int>(s.primal.size()) != n ||
      static_cast<int>(s.duals_eq.size()) != p.num_eq() ||
      static_cast<int>(s.duals_in.size()) != p.num_ineq()) {
    rep.max_primal_residual = kInf;
    rep.max_dual_residual = kInf;
    rep.duality_gap = kInf;
    return rep;
  }

  // Primal side.
  std::vector<double> act_eq(p.num_eq()), act_in(p.num_ineq());
  kernels::row_activity(csr(p.eq, n), s.primal, act_eq);
  kernels::row_activity(csr(p.ineq, n), s.primal, act_in);
  double primal_res = kernels::max_bound_violation(s.primal, p.lower, p.upper);
  for (int i = 0; i < p.num_eq(); ++i) {
    primal_res = std::max(primal_res, std::abs(act_eq[i] - p.eq_rhs[i]));
  }
  for (int i = 0; i < p.num_ineq(); ++i) {
    const double v = p.ineq_sense[i] == RowSense::LessEqual
                         ? act_in[i] - p.ineq_rhs[i]
                         : p.ineq_rhs[i] - act_in[i];
    primal_res = std::max(primal_res, v);
  }
  rep.max_primal_residual = primal_res;

  rep.primal_objective = p.objective_offset;
  for (int j = 0; j < n; ++j) rep.primal_objective += p.objective[j] * s.primal[j];

  // Dual side: d = c - A' lambda.
  std::vector<double> d(p.objective);
  double dual_res = 0.0;
  double dual_obj = p.objective_offset;
  auto scatter = [&](const SparseRows& rows, const std::vector<double>& lam,
                     const std::vector<double>& rhs) {
    for (int r = 0; r < rows.rows(); ++r) {
      dual_obj += lam[r] * rhs[r];
      for (int k = rows.start[r]; k < rows.start[r + 1]; ++k) {
        d[rows.index[k]] -= lam[r] * rows.value[k];
      }
    }
  };
  scatter(p.eq, s.duals_eq, p.eq_rhs);
  scatter(p.ineq, s.duals_in, p.ineq_rhs);
  for (int i = 0; i < p.num_ineq(); ++i) {
    const double lam = s.duals_in[i];
    dual_res = std::max(dual_res, p.ineq_sense[i] == RowSense::LessEqual
                                      ? std::max(lam, 0.0)
                                      : std::max(-lam, 0.0));
  }
  for (int j = 0; j < n; ++j) {
    if (d[j] > 0.0) {
      if (std::isfinite(p.lower[j])) dual_obj += d[j] * p.lower[j];
      else dual_res = std::max(dual_res, d[j]);
    } else if (d[j] < 0.0) {
      if (std::isfinite(p.upper[j])) dual_obj += d[j] * p.upper[j];
      else dual_res = std::max(dual_res, -d[j]);
    }
  }
  rep.max_dual_residual = dual_res;
  rep.dual_objective = dual_obj;
  rep.duality_gap = std::abs(rep.primal_objective - dual_obj);
  rep.relative_gap = rep.duality_gap / (1.0 + std::abs(rep.primal_objective));
  rep.passed = rep.max_primal_residual <= tols.primal &&
               rep.max_dual_residual <= tols.dual && rep.relative_gap <= tols.gap;
  return rep;
}

}  // namespace dbs::lp
