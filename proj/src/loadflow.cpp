#include "dbs/loadflow.hpp"

#include <algorithm>
#include <cmath>

#include "dbs/error.hpp"

namespace dbs::loadflow {

double LoadflowResult::total_losses() const {
  double s = 0.0;
  for (double l : losses_per_branch) s += l;
  return s;
}

LoadflowResult fbs_loadflow(const grid::GridModel& g,
                            const std::vector<double>& p,
                            const std::vector<double>& q,
                            const LoadflowOptions& opts) {
  const grid::RadialTree tree = grid::analyze_tree(g);
  const int nb = g.num_buses();
  const int nl = g.num_branches();
  if (static_cast<int>(p.size()) != nb || static_cast<int>(q.size()) != nb) {
    throw input_error("DimensionMismatch", "injection vectors must have one entry per bus");
  }
  std::vector<cplx> z(nl), s(nb);
  for (int l = 0; l < nl; ++l) z[l] = {g.r_pu(l), g.x_pu(l)};
  for (int b = 0; b < nb; ++b) s[b] = {p[b], q[b]};
  const int slack = g.slack_index();

  LoadflowResult res;
  res.v.assign(nb, cplx(g.slack_voltage, 0.0));
  std::vector<cplx> inj(nb), j(nl), v_new(nb);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    res.iterations = it;
    for (int b = 0; b < nb; ++b) inj[b] = std::conj(s[b] / res.v[b]);

    // Backward sweep: branch current from parent to child.
    std::fill(j.begin(), j.end(), cplx{});
    for (auto it_b = tree.order.rbegin(); it_b != tree.order.rend(); ++it_b) {
      const int b = *it_b;
      if (b == slack) continue;
      const int l = tree.parent_branch[b];
      j[l] -= inj[b];
      const int up = tree.parent_branch[tree.parent[b]];
      if (up >= 0) j[up] += j[l];
    }

    // Forward sweep.
    v_new[slack] = cplx(g.slack_voltage, 0.0);
    double dv = 0.0;
    for (int b : tree.order) {
      if (b == slack) continue;
      const int l = tree.parent_branch[b];
      v_new[b] = v_new[tree.parent[b]] - z[l] * j[l];
      dv = std::max(dv, std::abs(v_new[b] - res.v[b]));
    }

    double mismatch = 0.0;
    for (int b = 0; b < nb; ++b) {
      if (b == slack) continue;
      mismatch = std::max(mismatch, std::abs(s[b] - v_new[b] * std::conj(inj[b])));
    }
    res.v = v_new;
    res.max_mismatch = mismatch;
    if (dv <= opts.voltage_tol || mismatch <= opts.mismatch_tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) {
    throw convergence_error("NotConverged",
                            "load flow did not converge in " +
                                std::to_string(opts.max_iterations) + " sweeps");
  }

  // Recompute currents at the final voltages so losses and the slack
  // injection are consistent with the reported v.
  for (int b = 0; b < nb; ++b) inj[b] = std::conj(s[b] / res.v[b]);
  std::fill(j.begin(), j.end(), cplx{});
  for (auto it_b = tree.order.rbegin(); it_b != tree.order.rend(); ++it_b) {
    const int b = *it_b;
    if (b == slack) continue;
    const int l = tree.parent_branch[b];
    j[l] -= inj[b];
    const int up = tree.parent_branch[tree.parent[b]];
    if (up >= 0) j[up] += j[l];
  }
  res.i_b.resize(nl);
  res.losses_per_branch.resize(nl);
  cplx out_of_slack{};
  for (int l = 0; l < nl; ++l) {
    res.i_b[l] = std::abs(j[l]);
    res.losses_per_branch[l] = g.r_pu(l) * std::norm(j[l]);
    if (tree.parent[tree.downstream[l]] == slack) out_of_slack += j[l];
  }
  res.slack_injection = res.v[slack] * std::conj(out_of_slack);
  return res;
}

std::vector<double> operating_point(const grid::GridModel& g,
                                    const std::vector<double>& p,
                                    const std::vector<double>& q) {
  const LoadflowResult r = fbs_loadflow(g, p, q);
  std::vector<double> mag(r.v.size());
  for (std::size_t b = 0; b < r.v.size(); ++b) mag[b] = std::abs(r.v[b]);
  return mag;
}

}  // namespace dbs::loadflow
