#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "mfldp/kernels.hpp"

using namespace mfldp;

namespace {

double cubic(std::span<const double> x, std::span<double> g) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double r = std::sqrt(r2);
  if (!g.empty())
    for (std::size_t k = 0; k < x.size(); ++k) g[k] = 3.0 * r * x[k];
  return r2 * r;
}

std::vector<double> random_coords(std::mt19937_64& rng, std::size_t count, double scale = 3.0) {
  std::normal_distribution<double> N(0.0, scale);
  std::vector<double> v(count);
  for (auto& x : v) x = N(rng);
  return v;
}

}  // namespace

TEST_CASE("pair energy: parallel matches serial") {
  std::mt19937_64 rng(11);
  for (std::size_t d : {1u, 2u, 3u}) {
    for (std::size_t n : {1u, 2u, 7u, 50u}) {
      const auto x = random_coords(rng, n * d);
      const double s = kernels::serial::pair_energy(x, n, d, cubic);
      const double p = kernels::parallel::pair_energy(x, n, d, cubic);
      CHECK(p == doctest::Approx(s).epsilon(1e-12));

      std::vector<double> fs(n * d), fp(n * d);
      const double es = kernels::serial::pair_energy_and_force(x, n, d, cubic, fs);
      const double ep = kernels::parallel::pair_energy_and_force(x, n, d, cubic, fp);
      CHECK(ep == doctest::Approx(es).epsilon(1e-12));
      CHECK(es == doctest::Approx(s).epsilon(1e-12));
      for (std::size_t i = 0; i < n * d; ++i) CHECK(fp[i] == doctest::Approx(fs[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("pair force sums to zero for an even potential") {
  std::mt19937_64 rng(3);
  const std::size_t n = 40;
  const auto x = random_coords(rng, n);
  std::vector<double> f(n);
  kernels::parallel::pair_energy_and_force(x, n, 1, cubic, f);
  double total = 0.0, scale = 0.0;
  for (double v : f) {
    total += v;
    scale += std::abs(v);
  }
  CHECK(std::abs(total) <= 1e-12 * scale);
}

TEST_CASE("convolve: parallel matches serial and a direct sum") {
  std::mt19937_64 rng(5);
  for (std::size_t m : {1u, 4u, 33u, 257u}) {
    const auto lags = random_coords(rng, 2 * m - 1, 1.0);
    const auto p = random_coords(rng, m, 1.0);
    std::vector<double> a(m), b(m);
    kernels::serial::convolve(lags, p, a);
    kernels::parallel::convolve(lags, p, b);
    for (std::size_t i = 0; i < m; ++i) {
      double direct = 0.0;
      for (std::size_t j = 0; j < m; ++j) direct += lags[i + m - 1 - j] * p[j];
      CHECK(a[i] == doctest::Approx(direct).epsilon(1e-12));
      CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("window matching agrees with Hopcroft-Karp") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(0, 12);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    auto xs = random_coords(rng, static_cast<std::size_t>(size(rng)), 1.0);
    auto ys = random_coords(rng, static_cast<std::size_t>(size(rng)), 1.0);
    // ties and exact window hits happen with rounded inputs
    if (trial % 2 == 0) {
      for (auto& v : xs) v = std::round(v * 4.0) / 4.0;
      for (auto& v : ys) v = std::round(v * 4.0) / 4.0;
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double lo = U(rng), hi = lo + std::abs(U(rng));
    if (trial % 2 == 0) {
      lo = std::round(lo * 4.0) / 4.0;
      hi = std::round(hi * 4.0) / 4.0;
    }
    CHECK(kernels::window_matching(xs, ys, lo, hi) == kernels::window_matching_reference(xs, ys, lo, hi));
  }
}

TEST_CASE("best anchored matching: parallel matches serial") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto xs = random_coords(rng, 20, 1.0);
    auto ys = random_coords(rng, 20, 1.0);
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const auto anchors = random_coords(rng, 60, 1.0);
    const double w = 0.3;
    const auto s = kernels::serial::best_anchored_matching(xs, ys, anchors, w);
    CHECK(kernels::parallel::best_anchored_matching(xs, ys, anchors, w) == s);
    std::size_t best = 0;
    for (double a : anchors) best = std::max(best, kernels::window_matching_reference(xs, ys, a, a + w));
    CHECK(s == best);
  }
}

TEST_CASE("for_each_index visits every index and rethrows") {
  std::vector<std::atomic<int>> hit(100);
  kernels::parallel::for_each_index(hit.size(), [&](std::size_t i) { hit[i]++; });
  for (auto& h : hit) CHECK(h.load() == 1);

  CHECK_THROWS_AS(kernels::parallel::for_each_index(10,
                                                    [](std::size_t i) {
                                                      if (i == 7) throw std::runtime_error("boom");
                                                    }),
                  std::runtime_error);
}

TEST_CASE("thread count round trip") {
  const int before = kernels::thread_count();
  kernels::set_thread_count(1);
  CHECK(kernels::thread_count() == 1);
  kernels::set_thread_count(before);
}
