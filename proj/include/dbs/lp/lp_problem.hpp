#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dbs::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Row-compressed sparse matrix that grows one row at a time.
struct SparseRows {
  std::vector<int> start{0};
  std::vector<int> index;
  std::vector<double> value;

  int rows() const { return static_cast<int>(start.size()) - 1; }
  int nonzeros() const { return static_cast<int>(index.size()); }

  // Duplicate column indices are summed; exact zeros are dropped.
  int append(std::span<const int> cols, std::span<const double> vals);

  std::span<const int> row_index(int r) const {
    return {index.data() + start[r], index.data() + start[r + 1]};
  }
  std::span<const double> row_value(int r) const {
    return {value.data() + start[r], value.data() + start[r + 1]};
  }
};

enum class RowSense : std::uint8_t { LessEqual, GreaterEqual };

// Accumulates (column, coefficient) pairs for a single row.
class RowBuilder {
 public:
  RowBuilder& add(int col, double coef) {
    cols_.push_back(col);
    vals_.push_back(coef);
    return *this;
  }
  void clear() {
    cols_.clear();
    vals_.clear();
  }
  std::span<const int> cols() const { return cols_; }
  std::span<const double> vals() const { return vals_; }
  bool empty() const { return cols_.empty(); }

 private:
  std::vector<int> cols_;
  std::vector<double> vals_;
};

// min c'x + offset  s.t.  A_eq x = b_eq,  A_in x (<= | >=) b_in,  l <= x <= u
struct LpProblem {
  std::vector<double> objective;
  double objective_offset = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> col_names;

  SparseRows eq;
  std::vector<double> eq_rhs;
  std::vector<std::string> eq_names;

  SparseRows ineq;
  std::vector<RowSense> ineq_sense;
  std::vector<double> ineq_rhs;
  std::vector<std::string> ineq_names;

  int num_cols() const { return static_cast<int>(objective.size()); }
  int num_eq() const { return eq.rows(); }
  int num_ineq() const { return ineq.rows(); }

  int add_column(double cost, double lo, double up, std::string name = {});
  int add_eq(std::span<const int> cols, std::span<const double> vals,
             double rhs, std::string name = {});
  int add_eq(const RowBuilder& row, double rhs, std::string name = {}) {
    return add_eq(row.cols(), row.vals(), rhs, std::move(name));
  }
  int add_ineq(std::span<const int> cols, std::span<const double> vals,
               RowSense sense, double rhs, std::string name = {});
  int add_ineq(const RowBuilder& row, RowSense sense, double rhs,
               std::string name = {}) {
    return add_ineq(row.cols(), row.vals(), sense, rhs, std::move(name));
  }

  // Throws dbs::Error(DimensionMismatch / InvalidProblem) when an invariant
  // is broken: ragged vectors, column index out of range, NaN/inf
  // coefficients or lower > upper.
  void validate() const;

  std::optional<int> find_eq(const std::string& name) const;
  std::optional<int> find_ineq(const std::string& name) const;
};

enum class SolveStatus : std::uint8_t {
  Optimal,
  Infeasible,
  Unbounded,
  IterationLimit,
  NumericalBreakdown,
};

const char* to_string(SolveStatus s);

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, AtZero };

struct LpSolution {
  SolveStatus status = SolveStatus::NumericalBreakdown;
  std::vector<double> primal;
  // Sensitivity of the optimal objective to the right-hand side of each row.
  // Under minimization rows with sense <= carry duals <= 0, rows with >= carry
  // duals >= 0.
  std::vector<double> duals_eq;
  std::vector<double> duals_in;
  // c - A'λ per column; nonzero only on columns held at a bound.
  std::vector<double> reduced_costs;
  double objective_value = 0.0;
  int iterations = 0;
  // Columns first, then one logical per row (equalities, then inequalities).
  std::vector<VarStatus> basis;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct SolverConfig {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-6;
  // Reduced-cost threshold for entering candidates. Tighter than the
  // certification tolerance so duals used in cuts are accurate.
  double pricing_tol = 1e-9;
  double pivot_tol = 1e-9;
  int max_iterations = 200000;
  int refactor_interval = 80;
  // Consecutive non-improving pivots before switching to Bland's rule.
  int stall_threshold = 60;
  int refactor_retries = 3;
  // Optional starting basis (size num_cols + num_eq + num_ineq). Ignored when
  // its shape does not match or its basis matrix is singular.
  const std::vector<VarStatus>* warm_basis = nullptr;
};

}  // namespace dbs::lp
