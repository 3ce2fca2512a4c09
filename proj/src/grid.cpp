#include "dbs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "dbs/error.hpp"

namespace dbs::grid {

GridModel GridModel::from_branches(std::vector<Branch> branches,
                                   const std::string& slack_id,
                                   PerUnitBase base) {
  GridModel g;
  g.base = base;
  auto add_bus = [&](const std::string& id) {
    for (const Bus& b : g.buses)
      if (b.id == id) return;
    g.buses.push_back({id, id == slack_id});
  };
  for (const Branch& br : branches) {
    add_bus(br.from);
    add_bus(br.to);
  }
  g.branches = std::move(branches);
  return g;
}

int GridModel::slack_index() const {
  for (int i = 0; i < num_buses(); ++i)
    if (buses[i].is_slack) return i;
  throw input_error("InvalidGrid", "no slack bus");
}

int GridModel::bus_index(const std::string& id) const {
  for (int i = 0; i < num_buses(); ++i)
    if (buses[i].id == id) return i;
  throw input_error("UnknownBus", "bus '" + id + "' is not in the grid");
}

double GridModel::r_pu(int l) const {
  const Branch& b = branches[l];
  return b.r_ohm_per_km * b.length_m / 1000.0 / base.z_ohm();
}

double GridModel::x_pu(int l) const {
  const Branch& b = branches[l];
  return b.x_ohm_per_km * b.length_m / 1000.0 / base.z_ohm();
}

double GridModel::i_max_pu(int l) const {
  return branches[l].i_max_A / base.i_amp();
}

void GridModel::validate() const {
  const auto slacks = std::count_if(buses.begin(), buses.end(),
                                    [](const Bus& b) { return b.is_slack; });
  if (slacks != 1) {
    throw input_error("InvalidGrid", "expected exactly one slack bus, found " +
                                         std::to_string(slacks));
  }
  for (int l = 0; l < num_branches(); ++l) {
    const Branch& b = branches[l];
    if (!(b.r_ohm_per_km > 0.0) || !(b.length_m > 0.0) || !(b.i_max_A > 0.0) ||
        !(b.x_ohm_per_km >= 0.0)) {
      throw input_error("InvalidGrid", "branch " + b.from + "-" + b.to +
                                           " has non-positive line data");
    }
  }
  if (!(base.v_ln > 0.0) || !(base.s_va > 0.0)) {
    throw input_error("InvalidGrid", "per-unit base must be positive");
  }
}

RadialTree analyze_tree(const GridModel& g) {
  g.validate();
  const int nb = g.num_buses();
  const int nl = g.num_branches();
  if (nl != nb - 1) {
    throw input_error("NotRadial", std::to_string(nl) + " branches for " +
                                       std::to_string(nb) + " buses");
  }
  std::vector<std::vector<std::pair<int, int>>> adj(nb);
  for (int l = 0; l < nl; ++l) {
    const int a = g.bus_index(g.branches[l].from);
    const int b = g.bus_index(g.branches[l].to);
    if (a == b) throw input_error("NotRadial", "self-loop at " + g.buses[a].id);
    adj[a].emplace_back(b, l);
    adj[b].emplace_back(a, l);
  }
  RadialTree t;
  t.parent.assign(nb, -2);
  t.parent_branch.assign(nb, -1);
  t.downstream.assign(nl, -1);
  const int s = g.slack_index();
  t.parent[s] = -1;
  std::deque<int> queue{s};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    t.order.push_back(u);
    for (auto [v, l] : adj[u]) {
      if (l == t.parent_branch[u]) continue;
      if (t.parent[v] != -2) {
        throw input_error("NotRadial", "cycle through bus " + g.buses[v].id);
      }
      t.parent[v] = u;
      t.parent_branch[v] = l;
      t.downstream[l] = v;
      queue.push_back(v);
    }
  }
  if (static_cast<int>(t.order.size()) != nb) {
    throw input_error("NotRadial", "grid is disconnected");
  }
  return t;
}

Eigen::MatrixXd build_bibc(const GridModel& g) {
  const RadialTree t = analyze_tree(g);
  Eigen::MatrixXd mf = Eigen::MatrixXd::Zero(g.num_branches(), g.num_buses());
  for (int b = 0; b < g.num_buses(); ++b) {
    for (int u = b; t.parent[u] >= 0; u = t.parent[u]) {
      mf(t.parent_branch[u], b) = 1.0;
    }
  }
  return mf;
}

LinearGridOperators build_operators(const GridModel& g,
                                    const OperatorOptions& opts) {
  LinearGridOperators ops;
  ops.Mf = build_bibc(g);
  const int nb = g.num_buses();
  const int nl = g.num_branches();
  ops.slack = g.slack_index();
  ops.v_slack = g.slack_voltage;

  for (int b = 0; b < nb; ++b)
    if (b != ops.slack) ops.nonslack.push_back(b);
  ops.M.resize(nl, nb - 1);
  for (int k = 0; k < nb - 1; ++k) ops.M.col(k) = ops.Mf.col(ops.nonslack[k]);

  ops.vdf.resize(nb);
  if (!opts.v_operating.empty() &&
      static_cast<int>(opts.v_operating.size()) != nb) {
    throw input_error("DimensionMismatch", "operating voltage vector length");
  }
  for (int b = 0; b < nb; ++b) {
    const double v = opts.v_operating.empty() ? 1.0 : std::abs(opts.v_operating[b]);
    if (!(v >= 0.5)) {
      throw numerical_error("DegenerateVoltage",
                            "|v| = " + std::to_string(v) + " at bus " + g.buses[b].id);
    }
    ops.vdf[b] = 1.0 / v;
  }

  ops.r.resize(nl);
  ops.x.resize(nl);
  ops.i_max.resize(nl);
  ops.i0.resize(nl);
  ops.i1.resize(nl);
  for (int l = 0; l < nl; ++l) {
    ops.r[l] = g.r_pu(l);
    ops.x[l] = g.x_pu(l);
    ops.i_max[l] = g.i_max_pu(l);
    ops.i0[l] = opts.i0_pu.empty() ? opts.i0_fraction * ops.i_max[l] : opts.i0_pu.at(l);
    ops.i1[l] = opts.i1_pu.empty() ? opts.i1_fraction * ops.i_max[l] : opts.i1_pu.at(l);
    if (!(ops.i0[l] > 0.0) || !(ops.i1[l] > 0.0)) {
      throw input_error("InvalidSupport", "supporting currents must be positive");
    }
  }

  const Eigen::MatrixXd mfv = ops.Mf * ops.vdf.asDiagonal();
  ops.Br = mfv;
  ops.Bv.resize(nb - 1, 2 * nb);
  ops.Bv.leftCols(nb) = ops.M.transpose() * ops.r.asDiagonal() * mfv;
  ops.Bv.rightCols(nb) = ops.M.transpose() * ops.x.asDiagonal() * mfv;
  ops.L0 = ops.i0.cwiseProduct(ops.r).asDiagonal() * mfv;
  ops.L1 = (ops.i0 + ops.i1).cwiseProduct(ops.r).asDiagonal() * mfv;
  ops.b_loss = -(ops.r.cwiseProduct(ops.i0).cwiseProduct(ops.i1));
  return ops;
}

Eigen::VectorXd linear_voltages(const LinearGridOperators& ops,
                                const Eigen::VectorXd& p,
                                const Eigen::VectorXd& q) {
  const int nb = ops.num_buses();
  Eigen::VectorXd pq(2 * nb);
  pq << p, q;
  const Eigen::VectorXd dv = ops.Bv * pq;
  Eigen::VectorXd v = Eigen::VectorXd::Constant(nb, ops.v_slack);
  for (int k = 0; k < nb - 1; ++k) v[ops.nonslack[k]] += dv[k];
  return v;
}

Eigen::VectorXd linear_currents(const LinearGridOperators& ops,
                                const Eigen::VectorXd& p) {
  return ops.Br * p;
}

Eigen::VectorXd plane_losses(const LinearGridOperators& ops,
                             const Eigen::VectorXd& i) {
  Eigen::VectorXd out(i.size());
  for (int l = 0; l < i.size(); ++l) {
    const double a = std::abs(i[l]);
    out[l] = std::max(ops.r[l] * ops.i0[l] * a,
                      ops.r[l] * (ops.i0[l] + ops.i1[l]) * a + ops.b_loss[l]);
  }
  return out;
}

}  // namespace dbs::grid
