#pragma once

// Test-side LP instances and an exhaustive vertex-enumeration oracle.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dbs/lp/lp_problem.hpp"

namespace oracle {

// min c'x  s.t.  A x <= b,  x >= 0. Dense so the enumeration stays simple.
struct DenseLp {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

// Feasible because b = A x0 + s with x0, s >= 0; bounded because
// c = A'y0 + r with y0 <= 0, r >= 0 makes (y0) dual feasible.
inline DenseLp random_bounded_lp(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
  DenseLp lp;
  lp.a.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) lp.a(i, j) = std::round(u(rng) * 20.0) / 4.0;
  Eigen::VectorXd x0(n), s(m), y0(m), r(n);
  for (int j = 0; j < n; ++j) x0(j) = pos(rng);
  for (int i = 0; i < m; ++i) s(i) = pos(rng);
  for (int i = 0; i < m; ++i) y0(i) = -pos(rng);
  for (int j = 0; j < n; ++j) r(j) = pos(rng) * 0.5;
  lp.b = lp.a * x0 + s;
  lp.c = lp.a.transpose() * y0 + r;
  return lp;
}

inline dbs::lp::LpProblem to_problem(const DenseLp& d) {
  dbs::lp::LpProblem p;
  const int n = static_cast<int>(d.c.size());
  for (int j = 0; j < n; ++j) p.add_column(d.c(j), 0.0, dbs::lp::kInf);
  for (int i = 0; i < d.a.rows(); ++i) {
    dbs::lp::RowBuilder row;
    for (int j = 0; j < n; ++j) row.add(j, d.a(i, j));
    p.add_ineq(row, dbs::lp::RowSense::LessEqual, d.b(i));
  }
  return p;
}

// Minimum over all basic feasible solutions: every choice of n active
// constraints among the m rows and n nonnegativity bounds.
inline double enumerate_vertices(const DenseLp& d, double tol = 1e-9) {
  const int n = static_cast<int>(d.c.size());
  const int m = static_cast<int>(d.b.size());
  const int total = m + n;
  Eigen::MatrixXd g(total, n);
  Eigen::VectorXd h(total);
  g.topRows(m) = d.a;
  h.head(m) = d.b;
  g.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  h.tail(n).setZero();

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(n);
  for (int k = 0; k < n; ++k) pick[k] = k;
  Eigen::MatrixXd sys(n, n);
  Eigen::VectorXd rhs(n);
  while (true) {
    for (int k = 0; k < n; ++k) {
      sys.row(k) = g.row(pick[k]);
      rhs(k) = h(pick[k]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (lu.isInvertible()) {
      Eigen::VectorXd x = lu.solve(rhs);
      if (((g * x - h).array() <= tol * (1.0 + h.cwiseAbs().array())).all()) {
        best = std::min(best, d.c.dot(x));
      }
    }
    int k = n - 1;
    while (k >= 0 && pick[k] == total - n + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int t = k + 1; t < n; ++t) pick[t] = pick[t - 1] + 1;
  }
  return best;
}

// Mixed instance for gap-only checks: equalities, >= rows, boxed and free
// columns. Feasible by construction around an interior point x0.
inline dbs::lp::LpProblem random_mixed_lp(std::mt19937_64& rng, int n, int m) {
  using namespace dbs::lp;
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 3);
  LpProblem p;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    x0[j] = u(rng);
    switch (kind(rng)) {
      case 0: p.add_column(u(rng), x0[j] - pos(rng), x0[j] + pos(rng)); break;
      case 1: p.add_column(pos(rng), x0[j] - pos(rng), kInf); break;
      case 2: p.add_column(-pos(rng), -kInf, x0[j] + pos(rng)); break;
      default: p.add_column(0.0, -1e3, 1e3); break;
    }
  }
  for (int i = 0; i < m; ++i) {
    RowBuilder row;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (pos(rng) < 0.5) {
        const double v = std::round(u(rng) * 8.0) / 2.0;
        row.add(j, v);
        act += v * x0[j];
      }
    }
    const int k = kind(rng);
    if (k == 0 && i < n / 2) p.add_eq(row, act);
    else if (k == 1) p.add_ineq(row, RowSense::GreaterEqual, act - pos(rng));
    else p.add_ineq(row, RowSense::LessEqual, act + pos(rng));
  }
  return p;
}

}  // namespace oracle

namespace oracle {

// Vertex enumeration for a general LpProblem: equalities are always active,
// the remaining n - m_eq active constraints are drawn from inequality rows and
// finite bounds. Assumes the feasible set has a vertex and is bounded in the
// objective direction.
inline double enumerate_vertices(const dbs::lp::LpProblem& p, double tol = 1e-9) {
  using dbs::lp::RowSense;
  const int n = p.num_cols();
  std::vector<Eigen::VectorXd> rows;  // g'x <= h
  std::vector<double> rhs;
  auto dense = [&](const dbs::lp::SparseRows& s, int r) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int k = s.start[r]; k < s.start[r + 1]; ++k) v[s.index[k]] = s.value[k];
    return v;
  };
  Eigen::MatrixXd eq(p.num_eq(), n);
  Eigen::VectorXd beq(p.num_eq());
  for (int r = 0; r < p.num_eq(); ++r) {
    eq.row(r) = dense(p.eq, r).transpose();
    beq[r] = p.eq_rhs[r];
  }
  for (int r = 0; r < p.num_ineq(); ++r) {
    Eigen::VectorXd v = dense(p.ineq, r);
    if (p.ineq_sense[r] == RowSense::LessEqual) {
      rows.push_back(v);
      rhs.push_back(p.ineq_rhs[r]);
    } else {
      rows.push_back(-v);
      rhs.push_back(-p.ineq_rhs[r]);
    }
  }
  std::vector<bool> used(n, false);
  for (int c : p.eq.index) used[c] = true;
  for (int c : p.ineq.index) used[c] = true;
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    if (!used[j] && p.objective[j] == 0.0) {
      // Unconstrained zero-cost column: pin it so the feasible set has vertices.
      eq.conservativeResize(eq.rows() + 1, Eigen::NoChange);
      eq.row(eq.rows() - 1) = e.transpose();
      beq.conservativeResize(beq.size() + 1);
      beq[beq.size() - 1] = std::clamp(0.0, p.lower[j], p.upper[j]);
      continue;
    }
    if (std::isfinite(p.upper[j])) {
      rows.push_back(e);
      rhs.push_back(p.upper[j]);
    }
    if (std::isfinite(p.lower[j]) && p.lower[j] != p.upper[j]) {
      rows.push_back(-e);
      rhs.push_back(-p.lower[j]);
    } else if (std::isfinite(p.lower[j])) {
      // Fixed column: treat as an equality.
      eq.conservativeResize(eq.rows() + 1, Eigen::NoChange);
      eq.row(eq.rows() - 1) = e.transpose();
      beq.conservativeResize(beq.size() + 1);
      beq[beq.size() - 1] = p.lower[j];
      rows.pop_back();
      rhs.pop_back();
    }
  }
  const int meq = static_cast<int>(eq.rows());
  const int total = static_cast<int>(rows.size());
  const int pick_n = n - meq;
  double best = std::numeric_limits<double>::infinity();
  if (pick_n < 0) return best;
  std::vector<int> pick(pick_n);
  for (int k = 0; k < pick_n; ++k) pick[k] = k;
  Eigen::MatrixXd sys(n, n);
  Eigen::VectorXd b(n);
  Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(p.objective.data(), n);
  while (true) {
    sys.topRows(meq) = eq;
    b.head(meq) = beq;
    for (int k = 0; k < pick_n; ++k) {
      sys.row(meq + k) = rows[pick[k]].transpose();
      b[meq + k] = rhs[pick[k]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(b);
      bool ok = true;
      for (int r = 0; r < total && ok; ++r) {
        ok = rows[r].dot(x) <= rhs[r] + tol * (1.0 + std::abs(rhs[r]));
      }
      if (ok) best = std::min(best, c.dot(x));
    }
    if (pick_n == 0) break;
    int k = pick_n - 1;
    while (k >= 0 && pick[k] == total - pick_n + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int t = k + 1; t < pick_n; ++t) pick[t] = pick[t - 1] + 1;
  }
  return best + p.objective_offset;
}

}  // namespace oracle
