#include "dbs/lp/lp_problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dbs/error.hpp"

namespace dbs::lp {

int SparseRows::append(std::span<const int> cols, std::span<const double> vals) {
  std::vector<int> order(cols.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return cols[a] < cols[b]; });
  std::size_t k = 0;
  while (k < order.size()) {
    const int col = cols[order[k]];
    double sum = 0.0;
    while (k < order.size() && cols[order[k]] == col) sum += vals[order[k++]];
    if (sum != 0.0) {
      index.push_back(col);
      value.push_back(sum);
    }
  }
  start.push_back(static_cast<int>(index.size()));
  return rows() - 1;
}

int LpProblem::add_column(double cost, double lo, double up, std::string name) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(up);
  col_names.push_back(std::move(name));
  return num_cols() - 1;
}

int LpProblem::add_eq(std::span<const int> cols, std::span<const double> vals,
                      double rhs, std::string name) {
  eq_rhs.push_back(rhs);
  eq_names.push_back(std::move(name));
  return eq.append(cols, vals);
}

int LpProblem::add_ineq(std::span<const int> cols, std::span<const double> vals,
                        RowSense sense, double rhs, std::string name) {
  ineq_rhs.push_back(rhs);
  ineq_sense.push_back(sense);
  ineq_names.push_back(std::move(name));
  return ineq.append(cols, vals);
}

namespace {
void check_rows(const SparseRows& rows, std::span<const double> rhs, int ncols,
                const char* what) {
  if (static_cast<int>(rhs.size()) != rows.rows()) {
    throw input_error("DimensionMismatch",
                      std::string(what) + " rhs length differs from row count");
  }
  for (int c : rows.index) {
    if (c < 0 || c >= ncols) {
      throw input_error("DimensionMismatch",
                        std::string(what) + " references column " +
                            std::to_string(c) + " of " + std::to_string(ncols));
    }
  }
  for (double v : rows.value) {
    if (!std::isfinite(v)) {
      throw input_error("InvalidProblem",
                        std::string(what) + " contains a non-finite entry");
    }
  }
  for (double b : rhs) {
    if (std::isnan(b)) {
      throw input_error("InvalidProblem",
                        std::string(what) + " rhs contains NaN");
    }
  }
}
}  // namespace

void LpProblem::validate() const {
  const int n = num_cols();
  if (static_cast<int>(lower.size()) != n ||
      static_cast<int>(upper.size()) != n) {
    throw input_error("DimensionMismatch", "bound vectors differ in length");
  }
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) {
      throw input_error("InvalidProblem", "non-finite objective coefficient");
    }
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
      throw input_error("InvalidProblem",
                        "column " + std::to_string(j) + " has lower > upper");
    }
  }
  check_rows(eq, eq_rhs, n, "equality block");
  check_rows(ineq, ineq_rhs, n, "inequality block");
  if (ineq_sense.size() != ineq_rhs.size()) {
    throw input_error("DimensionMismatch", "row sense vector length");
  }
}

std::optional<int> LpProblem::find_eq(const std::string& name) const {
  auto it = std::find(eq_names.begin(), eq_names.end(), name);
  if (it == eq_names.end()) return std::nullopt;
  return static_cast<int>(it - eq_names.begin());
}

std::optional<int> LpProblem::find_ineq(const std::string& name) const {
  auto it = std::find(ineq_names.begin(), ineq_names.end(), name);
  if (it == ineq_names.end()) return std::nullopt;
  return static_cast<int>(it - ineq_names.begin());
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationLimit: return "IterationLimit";
    case SolveStatus::NumericalBreakdown: return "NumericalBreakdown";
  }
  return "Unknown";
}

}  // namespace dbs::lp
