#pragma once

// Data-parallel inner loops used by the simplex solver and the solution
// checker. Every kernel has an OpenMP version and a serial reference with the
// same signature; the reference is kept for tests and the benchmark target.

#include <cstddef>
#include <span>

namespace dbs::kernels {

// Compressed sparse column/row views. `start` has (outer + 1) entries.
struct CompressedView {
  int outer = 0;
  int inner = 0;
  std::span<const int> start;
  std::span<const int> index;
  std::span<const double> value;
};

// Below this many outer entries the parallel kernels run serially.
inline constexpr int kParallelThreshold = 2048;

// d[j] = c[j] - sum_i y[i] * A(i, j) for a column-compressed A.
void reduced_costs(const CompressedView& a_csc, std::span<const double> y,
                   std::span<const double> c, std::span<double> d);
void reduced_costs_serial(const CompressedView& a_csc,
                          std::span<const double> y,
                          std::span<const double> c, std::span<double> d);

// r[i] = sum_j A(i, j) * x[j] for a row-compressed A.
void row_activity(const CompressedView& a_csr, std::span<const double> x,
                  std::span<double> r);
void row_activity_serial(const CompressedView& a_csr,
                         std::span<const double> x, std::span<double> r);

// max_i max(lo[i] - v[i], v[i] - up[i], 0). Infinite bounds never bind.
double max_bound_violation(std::span<const double> v,
                           std::span<const double> lo,
                           std::span<const double> up);
double max_bound_violation_serial(std::span<const double> v,
                                  std::span<const double> lo,
                                  std::span<const double> up);

// Index of the entry with the largest score > threshold; -1 if none.
// Ties go to the lowest index so the result is thread-count independent.
int argmax_above(std::span<const double> score, double threshold);
int argmax_above_serial(std::span<const double> score, double threshold);

}  // namespace dbs::kernels
