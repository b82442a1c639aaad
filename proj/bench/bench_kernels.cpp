#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <vector>

#include "mfldp/kernels.hpp"

namespace k = mfldp::kernels;

namespace {

std::vector<double> random_points(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (double& v : x) v = g(rng);
  return x;
}

double quad(std::span<const double> d, std::span<double> grad) {
  if (!grad.empty()) grad[0] = 2.0 * d[0];
  return d[0] * d[0];
}

template <bool Parallel>
void BM_pair_energy_and_force(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_points(n, 1);
  std::vector<double> f(n);
  for (auto _ : state) {
    double e;
    if constexpr (Parallel)
      e = k::parallel::pair_energy_and_force(x, n, 1, quad, f);
    else
      e = k::serial::pair_energy_and_force(x, n, 1, quad, f);
    benchmark::DoNotOptimize(e);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

template <bool Parallel>
void BM_convolve(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto p = random_points(m, 2);
  const auto lags = random_points(2 * m - 1, 3);
  std::vector<double> out(m);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::parallel::convolve(lags, p, out);
    else
      k::serial::convolve(lags, p, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_best_anchored_matching(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto xs = random_points(n, 4), ys = random_points(n, 5);
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  std::vector<double> anchors;
  for (double a : xs)
    for (double b : ys) anchors.push_back(a - b - 0.1);
  for (auto _ : state) {
    std::size_t r;
    if constexpr (Parallel)
      r = k::parallel::best_anchored_matching(xs, ys, anchors, 0.2);
    else
      r = k::serial::best_anchored_matching(xs, ys, anchors, 0.2);
    benchmark::DoNotOptimize(r);
  }
}

}  // namespace

BENCHMARK(BM_pair_energy_and_force<false>)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_pair_energy_and_force<true>)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_convolve<false>)->Arg(2000)->Arg(16000);
BENCHMARK(BM_convolve<true>)->Arg(2000)->Arg(16000);
BENCHMARK(BM_best_anchored_matching<false>)->Arg(32)->Arg(128);
BENCHMARK(BM_best_anchored_matching<true>)->Arg(32)->Arg(128);

BENCHMARK_MAIN();
