#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dbs/kernels.hpp"

namespace {

struct Csc {
  std::vector<int> start{0}, index;
  std::vector<double> value;
  int n = 0, m = 0;
  dbs::kernels::CompressedView view() const {
    return {n, m, start, index, value};
  }
};

Csc make_matrix(int n, int m, int per_col) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> row(0, m - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Csc a;
  a.n = n;
  a.m = m;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < per_col; ++k) {
      a.index.push_back(row(rng));
      a.value.push_back(u(rng));
    }
    a.start.push_back(static_cast<int>(a.index.size()));
  }
  return a;
}

template <bool Parallel>
void BM_ReducedCosts(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Csc a = make_matrix(n, n / 2, 8);
  std::vector<double> y(n / 2, 0.5), c(n, 1.0), d(n);
  for (auto _ : state) {
    if constexpr (Parallel) dbs::kernels::reduced_costs(a.view(), y, c, d);
    else dbs::kernels::reduced_costs_serial(a.view(), y, c, d);
    benchmark::DoNotOptimize(d.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void BM_RowActivity(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Csc a = make_matrix(m, m, 12);
  std::vector<double> x(m, 0.25), r(m);
  for (auto _ : state) {
    if constexpr (Parallel) dbs::kernels::row_activity(a.view(), x, r);
    else dbs::kernels::row_activity_serial(a.view(), x, r);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * m);
}

template <bool Parallel>
void BM_ArgmaxAbove(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> s(n);
  for (auto& v : s) v = u(rng);
  for (auto _ : state) {
    int k = Parallel ? dbs::kernels::argmax_above(s, 0.0)
                     : dbs::kernels::argmax_above_serial(s, 0.0);
    benchmark::DoNotOptimize(k);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK(BM_ReducedCosts<false>)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_ReducedCosts<true>)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_RowActivity<false>)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_RowActivity<true>)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_ArgmaxAbove<false>)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_ArgmaxAbove<true>)->Range(1 << 10, 1 << 20);

BENCHMARK_MAIN();
