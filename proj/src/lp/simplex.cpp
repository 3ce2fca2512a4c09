#include "dbs/lp/simplex.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <vector>

#include "dbs/kernels.hpp"

namespace dbs::lp {
namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// LU of the basis at the last refactorization plus product-form updates.
class BasisFactor {
 public:
  bool factorize(const SpMat& basis) {
    etas_.clear();
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    return lu_.info() == Eigen::Success;
  }

  void ftran(Eigen::VectorXd& v) const {
    v = lu_.solve(v).eval();
    for (const Eta& e : etas_) {
      const double pivot = v[e.row] / e.pivot;
      v[e.row] = pivot;
      if (pivot == 0.0) continue;
      for (std::size_t k = 0; k < e.index.size(); ++k) {
        v[e.index[k]] -= e.value[k] * pivot;
      }
    }
  }

  void btran(Eigen::VectorXd& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = v[it->row];
      for (std::size_t k = 0; k < it->index.size(); ++k) {
        acc -= it->value[k] * v[it->index[k]];
      }
      v[it->row] = acc / it->pivot;
    }
    v = lu_.transpose().solve(v).eval();
  }

  void push(int row, const Eigen::VectorXd& alpha, double drop_tol) {
    Eta e;
    e.row = row;
    e.pivot = alpha[row];
    for (int i = 0; i < alpha.size(); ++i) {
      if (i != row && std::abs(alpha[i]) > drop_tol) {
        e.index.push_back(i);
        e.value.push_back(alpha[i]);
      }
    }
    etas_.push_back(std::move(e));
  }

  int updates() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int row = 0;
    double pivot = 1.0;
    std::vector<int> index;
    std::vector<double> value;
  };
  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

class RevisedSimplex {
 public:
  RevisedSimplex(const LpProblem& p, const SolverConfig& cfg)
      : cfg_(cfg),
        m_(p.num_eq() + p.num_ineq()),
        n_(p.num_cols()),
        total_(n_ + m_) {
    build_columns(p);
    cost_.assign(total_, 0.0);
    lo_.assign(total_, 0.0);
    up_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) {
      cost_[j] = p.objective[j];
      lo_[j] = p.lower[j];
      up_[j] = p.upper[j];
    }
    for (int i = 0; i < p.num_eq(); ++i) {
      lo_[n_ + i] = up_[n_ + i] = p.eq_rhs[i];
    }
    for (int i = 0; i < p.num_ineq(); ++i) {
      const int k = n_ + p.num_eq() + i;
      if (p.ineq_sense[i] == RowSense::LessEqual) {
        lo_[k] = -kInf;
        up_[k] = p.ineq_rhs[i];
      } else {
        lo_[k] = p.ineq_rhs[i];
        up_[k] = kInf;
      }
    }
  }

  LpSolution run() {
    LpSolution out;
    if (!initial_basis()) {
      out.status = SolveStatus::NumericalBreakdown;
      return out;
    }

    Eigen::VectorXd cb(m_), y(m_), alpha(m_);
    std::vector<double> d(total_, 0.0), score(total_, 0.0);
    std::vector<double> phase_cost(n_, 0.0);
    bool bland = false;
    int stall = 0;
    int verify_rounds = 0;
    int retries = 0;

    while (true) {
      if (iterations_ >= cfg_.max_iterations) {
        out.status = SolveStatus::IterationLimit;
        break;
      }
      if (factor_.updates() >= cfg_.refactor_interval) {
        if (!refactor()) {
          if (++retries > cfg_.refactor_retries || !reset_to_slack_basis()) {
            out.status = SolveStatus::NumericalBreakdown;
            break;
          }
          continue;
        }
      }

      const bool phase1 = max_basic_infeasibility() > cfg_.feasibility_tol;

      for (int i = 0; i < m_; ++i) {
        const int j = head_[i];
        if (phase1) {
          if (x_[j] < lo_[j] - cfg_.feasibility_tol) {
            cb[i] = -1.0;
          } else if (x_[j] > up_[j] + cfg_.feasibility_tol) {
            cb[i] = 1.0;
          } else {
            cb[i] = 0.0;
          }
        } else {
          cb[i] = cost_[j];
        }
      }
      y = cb;
      factor_.btran(y);
      if (!y.allFinite()) {
        if (++retries > cfg_.refactor_retries || !reset_to_slack_basis()) {
          out.status = SolveStatus::NumericalBreakdown;
          break;
        }
        continue;
      }

      price(phase1, y, phase_cost, d, score);
      int q = -1;
      if (bland) {
        for (int j = 0; j < total_; ++j) {
          if (score[j] > cfg_.pricing_tol) {
            q = j;
            break;
          }
        }
      } else {
        q = kernels::argmax_above(score, cfg_.pricing_tol);
      }

      if (q < 0) {
        // Candidate termination: confirm on a fresh factorization.
        if (factor_.updates() > 0 && verify_rounds < 8) {
          ++verify_rounds;
          if (!refactor()) {
            if (++retries > cfg_.refactor_retries || !reset_to_slack_basis()) {
              out.status = SolveStatus::NumericalBreakdown;
              break;
            }
          }
          continue;
        }
        out.status = phase1 ? SolveStatus::Infeasible : SolveStatus::Optimal;
        break;
      }

      const double dir = d[q] < 0.0 ? 1.0 : -1.0;
      load_column(q, alpha);
      factor_.ftran(alpha);
      if (!alpha.allFinite()) {
        if (++retries > cfg_.refactor_retries || !reset_to_slack_basis()) {
          out.status = SolveStatus::NumericalBreakdown;
          break;
        }
        continue;
      }

      const Step step = ratio_test(q, dir, alpha, phase1, bland);
      if (step.unbounded) {
        if (phase1) {
          // Sum of infeasibilities is bounded below; this is round-off.
          if (++retries > cfg_.refactor_retries || !refactor()) {
            out.status = SolveStatus::NumericalBreakdown;
            break;
          }
          continue;
        }
        out.status = SolveStatus::Unbounded;
        break;
      }

      apply(q, dir, alpha, step);
      ++iterations_;

      const double gain = std::abs(d[q]) * step.theta;
      if (gain > 1e-11 * (1.0 + std::abs(objective_estimate()))) {
        stall = 0;
        bland = false;
      } else if (++stall > cfg_.stall_threshold) {
        bland = true;
      }
    }

    out.iterations = iterations_;
    out.basis = status_;
    if (out.status == SolveStatus::Optimal) fill_solution(y, d, out);
    else {
      out.primal.assign(x_.begin(), x_.begin() + n_);
    }
    return out;
  }

 private:
  struct Step {
    bool unbounded = false;
    bool flip = false;
    int row = -1;
    double theta = 0.0;
    double target = 0.0;
    VarStatus leave_status = VarStatus::AtLower;
  };

  void build_columns(const LpProblem& p) {
    std::vector<int> count(n_ + 1, 0);
    auto tally = [&](const SparseRows& rows) {
      for (int c : rows.index) ++count[c + 1];
    };
    tally(p.eq);
    tally(p.ineq);
    for (int j = 0; j < n_; ++j) count[j + 1] += count[j];
    col_start_ = count;
    col_index_.resize(count[n_]);
    col_value_.resize(count[n_]);
    std::vector<int> fill(count.begin(), count.end() - 1);
    auto scatter = [&](const SparseRows& rows, int offset) {
      for (int r = 0; r < rows.rows(); ++r) {
        for (int k = rows.start[r]; k < rows.start[r + 1]; ++k) {
          const int c = rows.index[k];
          col_index_[fill[c]] = r + offset;
          col_value_[fill[c]] = rows.value[k];
          ++fill[c];
        }
      }
    };
    scatter(p.eq, 0);
    scatter(p.ineq, p.num_eq());
  }

  kernels::CompressedView csc() const {
    return {n_, m_, col_start_, col_index_, col_value_};
  }

  void load_column(int j, Eigen::VectorXd& v) const {
    v.setZero();
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        v[col_index_[k]] = col_value_[k];
      }
    } else {
      v[j - n_] = -1.0;
    }
  }

  static double nonbasic_value(double lo, double up, VarStatus s) {
    switch (s) {
      case VarStatus::AtLower: return lo;
      case VarStatus::AtUpper: return up;
      default: return 0.0;
    }
  }

  static VarStatus resting_status(double lo, double up) {
    if (std::isfinite(lo)) return VarStatus::AtLower;
    if (std::isfinite(up)) return VarStatus::AtUpper;
    return VarStatus::AtZero;
  }

  bool initial_basis() {
    status_.assign(total_, VarStatus::AtLower);
    x_.assign(total_, 0.0);
    head_.assign(m_, -1);
    where_.assign(total_, -1);

    if (cfg_.warm_basis != nullptr &&
        static_cast<int>(cfg_.warm_basis->size()) == total_) {
      const auto& hint = *cfg_.warm_basis;
      int basics = 0;
      for (VarStatus s : hint) basics += s == VarStatus::Basic;
      if (basics == m_) {
        int pos = 0;
        for (int j = 0; j < total_; ++j) {
          VarStatus s = hint[j];
          if (s == VarStatus::Basic) {
            head_[pos] = j;
            where_[j] = pos++;
          } else {
            // Keep the hinted side only if that bound still exists.
            if ((s == VarStatus::AtLower && !std::isfinite(lo_[j])) ||
                (s == VarStatus::AtUpper && !std::isfinite(up_[j])) ||
                (s == VarStatus::AtZero &&
                 (std::isfinite(lo_[j]) || std::isfinite(up_[j])))) {
              s = resting_status(lo_[j], up_[j]);
            }
            x_[j] = nonbasic_value(lo_[j], up_[j], s);
          }
          status_[j] = s;
        }
        if (refactor()) return true;
      }
    }
    return reset_to_slack_basis();
  }

  bool reset_to_slack_basis() {
    for (int j = 0; j < n_; ++j) {
      VarStatus s = resting_status(lo_[j], up_[j]);
      // Prefer the bound closest to the current point.
      if (std::isfinite(lo_[j]) && std::isfinite(up_[j]) &&
          std::abs(x_[j] - up_[j]) < std::abs(x_[j] - lo_[j])) {
        s = VarStatus::AtUpper;
      }
      status_[j] = s;
      x_[j] = nonbasic_value(lo_[j], up_[j], s);
      where_[j] = -1;
    }
    for (int i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      where_[n_ + i] = i;
      status_[n_ + i] = VarStatus::Basic;
    }
    return refactor();
  }

  bool refactor() {
    SpMat b(m_, m_);
    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(static_cast<std::size_t>(m_) * 4);
    for (int pos = 0; pos < m_; ++pos) {
      const int j = head_[pos];
      if (j < n_) {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
          trip.emplace_back(col_index_[k], pos, col_value_[k]);
        }
      } else {
        trip.emplace_back(j - n_, pos, -1.0);
      }
    }
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    if (m_ > 0 && !factor_.factorize(b)) return false;
    recompute_primal();
    for (int i = 0; i < m_; ++i) {
      if (!std::isfinite(x_[head_[i]])) return false;
    }
    return true;
  }

  void recompute_primal() {
    if (m_ == 0) return;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < total_; ++j) {
      if (status_[j] == VarStatus::Basic || x_[j] == 0.0) continue;
      if (j < n_) {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
          rhs[col_index_[k]] -= col_value_[k] * x_[j];
        }
      } else {
        rhs[j - n_] += x_[j];
      }
    }
    factor_.ftran(rhs);
    for (int i = 0; i < m_; ++i) x_[head_[i]] = rhs[i];
  }

  double max_basic_infeasibility() const {
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      const int j = head_[i];
      worst = std::max({worst, lo_[j] - x_[j], x_[j] - up_[j]});
    }
    return worst;
  }

  double objective_estimate() const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += cost_[j] * x_[j];
    return v;
  }

  void price(bool phase1, const Eigen::VectorXd& y, std::vector<double>& phase_cost,
             std::vector<double>& d, std::vector<double>& score) const {
    std::span<const double> ys(y.data(), static_cast<std::size_t>(m_));
    std::span<const double> c =
        phase1 ? std::span<const double>(phase_cost) : std::span<const double>(cost_.data(), n_);
    kernels::reduced_costs(csc(), ys, c, std::span<double>(d.data(), n_));
    for (int i = 0; i < m_; ++i) d[n_ + i] = y[i];

    for (int j = 0; j < total_; ++j) {
      double s = 0.0;
      switch (status_[j]) {
        case VarStatus::Basic: break;
        case VarStatus::AtLower:
          if (up_[j] > lo_[j]) s = -d[j];
          break;
        case VarStatus::AtUpper:
          if (up_[j] > lo_[j]) s = d[j];
          break;
        case VarStatus::AtZero: s = std::abs(d[j]); break;
      }
      score[j] = s;
    }
  }

  Step ratio_test(int q, double dir, const Eigen::VectorXd& alpha, bool phase1,
                  bool bland) const {
    const double ftol = cfg_.feasibility_tol;
    struct Candidate {
      int row;
      double exact;
      double target;
      VarStatus status;
    };
    std::vector<Candidate> cands;
    double theta_max = kInf;

    for (int i = 0; i < m_; ++i) {
      const double a = alpha[i];
      if (std::abs(a) <= cfg_.pivot_tol) continue;
      const int j = head_[i];
      const double g = -dir * a;
      const double xv = x_[j];
      double target = 0.0;
      double relaxed = kInf;
      double exact = kInf;
      VarStatus st = VarStatus::AtLower;
      if (phase1 && xv < lo_[j] - ftol) {
        if (g <= 0.0) continue;
        target = lo_[j];
        relaxed = (target - xv + ftol) / g;
        exact = (target - xv) / g;
        st = VarStatus::AtLower;
      } else if (phase1 && xv > up_[j] + ftol) {
        if (g >= 0.0) continue;
        target = up_[j];
        relaxed = (xv - target + ftol) / -g;
        exact = (xv - target) / -g;
        st = VarStatus::AtUpper;
      } else if (g < 0.0) {
        if (!std::isfinite(lo_[j])) continue;
        target = lo_[j];
        relaxed = (xv - target + ftol) / -g;
        exact = (xv - target) / -g;
        st = VarStatus::AtLower;
      } else {
        if (!std::isfinite(up_[j])) continue;
        target = up_[j];
        relaxed = (target + ftol - xv) / g;
        exact = (target - xv) / g;
        st = VarStatus::AtUpper;
      }
      cands.push_back({i, std::max(exact, 0.0), target, st});
      theta_max = std::min(theta_max, bland ? std::max(exact, 0.0) : relaxed);
    }

    Step step;
    const double range = up_[q] - lo_[q];
    if (std::isfinite(range) && range <= theta_max) {
      step.flip = true;
      step.theta = range;
      return step;
    }
    if (!std::isfinite(theta_max)) {
      step.unbounded = true;
      return step;
    }

    int best = -1;
    if (bland) {
      const double tie = theta_max + 1e-12 * (1.0 + theta_max);
      int best_var = total_;
      for (int k = 0; k < static_cast<int>(cands.size()); ++k) {
        if (cands[k].exact <= tie && head_[cands[k].row] < best_var) {
          best_var = head_[cands[k].row];
          best = k;
        }
      }
    } else {
      double best_abs = 0.0;
      for (int k = 0; k < static_cast<int>(cands.size()); ++k) {
        if (cands[k].exact > theta_max) continue;
        const double mag = std::abs(alpha[cands[k].row]);
        if (mag > best_abs) {
          best_abs = mag;
          best = k;
        }
      }
    }
    if (best < 0) {
      step.unbounded = true;
      return step;
    }
    step.row = cands[best].row;
    step.theta = cands[best].exact;
    step.target = cands[best].target;
    step.leave_status = cands[best].status;
    return step;
  }

  void apply(int q, double dir, const Eigen::VectorXd& alpha, const Step& step) {
    const double delta = dir * step.theta;
    if (delta != 0.0) {
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) x_[head_[i]] -= alpha[i] * delta;
      }
    }
    if (step.flip) {
      status_[q] = dir > 0.0 ? VarStatus::AtUpper : VarStatus::AtLower;
      x_[q] = dir > 0.0 ? up_[q] : lo_[q];
      return;
    }
    x_[q] += delta;
    const int leaving = head_[step.row];
    x_[leaving] = step.target;
    status_[leaving] = step.leave_status;
    where_[leaving] = -1;
    head_[step.row] = q;
    where_[q] = step.row;
    status_[q] = VarStatus::Basic;
    factor_.push(step.row, alpha, 1e-14);
  }

  void fill_solution(const Eigen::VectorXd& y, const std::vector<double>& d,
                     LpSolution& out) {
    out.primal.assign(x_.begin(), x_.begin() + n_);
    out.duals_eq.clear();
    out.duals_in.clear();
    out.reduced_costs.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (status_[j] != VarStatus::Basic) out.reduced_costs[j] = d[j];
    }
    out.objective_value = 0.0;
    for (int j = 0; j < n_; ++j) out.objective_value += cost_[j] * x_[j];
    duals_.assign(y.data(), y.data() + m_);
  }

 public:
  void split_duals(int num_eq, LpSolution& out) const {
    if (out.status != SolveStatus::Optimal) return;
    out.duals_eq.assign(duals_.begin(), duals_.begin() + num_eq);
    out.duals_in.assign(duals_.begin() + num_eq, duals_.end());
  }

 private:
  SolverConfig cfg_;
  int m_, n_, total_;
  std::vector<int> col_start_, col_index_;
  std::vector<double> col_value_;
  std::vector<double> cost_, lo_, up_;

  std::vector<int> head_, where_;
  std::vector<VarStatus> status_;
  std::vector<double> x_;
  BasisFactor factor_;
  int iterations_ = 0;
  std::vector<double> duals_;
};

}  // namespace

namespace {

// Columns decouple when there are no rows: each sits at its cheaper bound.
LpSolution solve_unconstrained(const LpProblem& p) {
  LpSolution sol;
  const int n = p.num_cols();
  sol.primal.assign(n, 0.0);
  sol.reduced_costs = p.objective;
  sol.basis.assign(n, VarStatus::AtZero);
  sol.status = SolveStatus::Optimal;
  sol.objective_value = p.objective_offset;
  for (int j = 0; j < n; ++j) {
    const double c = p.objective[j], lo = p.lower[j], up = p.upper[j];
    double x = 0.0;
    VarStatus st = VarStatus::AtZero;
    if (c > 0.0 || (c == 0.0 && std::isfinite(lo))) {
      if (!std::isfinite(lo)) {
        if (c > 0.0) sol.status = SolveStatus::Unbounded;
      } else {
        x = lo;
        st = VarStatus::AtLower;
      }
    } else if (c < 0.0 || std::isfinite(up)) {
      if (!std::isfinite(up)) {
        if (c < 0.0) sol.status = SolveStatus::Unbounded;
      } else {
        x = up;
        st = VarStatus::AtUpper;
      }
    }
    if (lo == up) st = VarStatus::AtLower;
    sol.primal[j] = x;
    sol.basis[j] = st;
    sol.objective_value += c * x;
  }
  if (!sol.optimal()) sol.objective_value = 0.0;
  return sol;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const SolverConfig& config) {
  problem.validate();
  if (problem.num_eq() + problem.num_ineq() == 0) return solve_unconstrained(problem);
  RevisedSimplex simplex(problem, config);
  LpSolution sol = simplex.run();
  simplex.split_duals(problem.num_eq(), sol);
  if (sol.optimal()) sol.objective_value += problem.objective_offset;
  return sol;
}

}  // namespace dbs::lp
