#include "dbs/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <omp.h>

namespace dbs::kernels {

void reduced_costs_serial(const CompressedView& a, std::span<const double> y,
                          std::span<const double> c, std::span<double> d) {
  for (int j = 0; j < a.outer; ++j) {
    double acc = c[j];
    for (int p = a.start[j]; p < a.start[j + 1]; ++p) {
      acc -= y[a.index[p]] * a.value[p];
    }
    d[j] = acc;
  }
}

void reduced_costs(const CompressedView& a, std::span<const double> y,
                   std::span<const double> c, std::span<double> d) {
  const int n = a.outer;
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (int j = 0; j < n; ++j) {
    double acc = c[j];
    for (int p = a.start[j]; p < a.start[j + 1]; ++p) {
      acc -= y[a.index[p]] * a.value[p];
    }
    d[j] = acc;
  }
}

void row_activity_serial(const CompressedView& a, std::span<const double> x,
                         std::span<double> r) {
  for (int i = 0; i < a.outer; ++i) {
    double acc = 0.0;
    for (int p = a.start[i]; p < a.start[i + 1]; ++p) {
      acc += a.value[p] * x[a.index[p]];
    }
    r[i] = acc;
  }
}

void row_activity(const CompressedView& a, std::span<const double> x,
                  std::span<double> r) {
  const int m = a.outer;
#pragma omp parallel for schedule(static) if (m > kParallelThreshold)
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int p = a.start[i]; p < a.start[i + 1]; ++p) {
      acc += a.value[p] * x[a.index[p]];
    }
    r[i] = acc;
  }
}

namespace {
inline double violation(double v, double lo, double up) {
  double out = 0.0;
  if (std::isfinite(lo)) out = std::max(out, lo - v);
  if (std::isfinite(up)) out = std::max(out, v - up);
  return out;
}
}  // namespace

double max_bound_violation_serial(std::span<const double> v,
                                  std::span<const double> lo,
                                  std::span<const double> up) {
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    worst = std::max(worst, violation(v[i], lo[i], up[i]));
  }
  return worst;
}

double max_bound_violation(std::span<const double> v,
                           std::span<const double> lo,
                           std::span<const double> up) {
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst) \
    if (n > kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    worst = std::max(worst, violation(v[i], lo[i], up[i]));
  }
  return worst;
}

int argmax_above_serial(std::span<const double> score, double threshold) {
  int best = -1;
  double best_score = threshold;
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (score[i] > best_score) {
      best_score = score[i];
      best = static_cast<int>(i);
    }
  }
  return best;
}

int argmax_above(std::span<const double> score, double threshold) {
  const auto n = static_cast<std::ptrdiff_t>(score.size());
  if (n <= kParallelThreshold) return argmax_above_serial(score, threshold);

  int best = -1;
  double best_score = threshold;
#pragma omp parallel
  {
    int local = -1;
    double local_score = threshold;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (score[i] > local_score) {
        local_score = score[i];
        local = static_cast<int>(i);
      }
    }
#pragma omp critical
    {
      if (local >= 0 &&
          (local_score > best_score ||
           (local_score == best_score && (best < 0 || local < best)))) {
        best_score = local_score;
        best = local;
      }
    }
  }
  return best;
}

}  // namespace dbs::kernels
