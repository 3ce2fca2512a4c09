#pragma once

#include <complex>
#include <vector>

#include "dbs/grid.hpp"

namespace dbs::loadflow {

using cplx = std::complex<double>;

struct LoadflowOptions {
  int max_iterations = 100;
  double voltage_tol = 1e-10;
  double mismatch_tol = 1e-8;
};

struct LoadflowResult {
  std::vector<cplx> v;                    // per bus, p.u.
  std::vector<double> i_b;                // per branch |i|, p.u.
  std::vector<double> losses_per_branch;  // r |i|^2, p.u.
  cplx slack_injection;                   // power delivered by the slack
  double max_mismatch = 0.0;
  bool converged = false;
  int iterations = 0;

  double total_losses() const;
};

// Constant-power forward-backward sweep. p, q are per-unit bus injections
// (generation positive). Throws NotConverged after max_iterations.
LoadflowResult fbs_loadflow(const grid::GridModel& grid,
                            const std::vector<double>& p,
                            const std::vector<double>& q,
                            const LoadflowOptions& opts = {});

// |v| per bus from a load flow at the given reference injections, suitable as
// OperatorOptions::v_operating.
std::vector<double> operating_point(const grid::GridModel& grid,
                                    const std::vector<double>& p,
                                    const std::vector<double>& q);

}  // namespace dbs::loadflow
