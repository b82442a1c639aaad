#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mfldp/errors.hpp"
#include "mfldp/measures.hpp"

using namespace mfldp;

namespace {

EmpiricalMeasure em(std::vector<double> xs) { return EmpiricalMeasure::from_1d(std::move(xs)); }

std::vector<double> random_atoms(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = N(rng);
  return v;
}

// Prohorov between equal-size empirical measures by definition: the smallest
// eps with a matching in which at most floor(eps n) pairs are further than eps
// apart. Permutations are enumerated, so keep n small.
double prohorov_brute(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = a.size();
  std::vector<double> cand{1.0};
  for (double x : a)
    for (double y : b) cand.push_back(std::abs(x - y));
  for (std::size_t k = 1; k <= n; ++k) cand.push_back(static_cast<double>(k) / static_cast<double>(n));
  std::sort(cand.begin(), cand.end());
  std::vector<std::size_t> perm(n);
  for (double eps : cand) {
    if (eps > 1.0) break;
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = n;
    do {
      std::size_t far = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (std::abs(a[i] - b[perm[i]]) > eps) ++far;
      best = std::min(best, far);
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (static_cast<double>(best) <= eps * static_cast<double>(n) + 1e-12) return eps;
  }
  return 1.0;
}

}  // namespace

TEST_CASE("configuration validation") {
  CHECK_THROWS_AS(Configuration(0, 1, {}), InvalidArgument);
  CHECK_THROWS_AS(Configuration(2, 1, {1.0}), DimensionError);
  CHECK_THROWS_AS(Configuration::from_1d({0.0, NAN}), InvalidArgument);
  CHECK_THROWS_AS(CenteredConfiguration(2, 1, {0.0, 1.0}), InvalidArgument);
  CHECK_NOTHROW(CenteredConfiguration(2, 1, {-1.0, 1.0}));
}

TEST_CASE("centring examples") {
  CHECK(center(Configuration::from_1d({0.0, 2.0})).coords() == std::vector<double>{-1.0, 1.0});
  CHECK(center(Configuration::from_1d({1.0, 2.0, 3.0})).coords() == std::vector<double>{-1.0, 0.0, 1.0});
  const auto c = center(Configuration(2, 2, {0.0, 4.0, 2.0, 0.0}));
  CHECK(c.coords() == std::vector<double>{-1.0, 2.0, 1.0, -2.0});
}

TEST_CASE("centring is idempotent and commutes with translation") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto m = em(random_atoms(rng, 9));
    const auto c1 = center(m);
    const auto c2 = center(c1);
    const auto c3 = center(translate(m, 3.7));
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(c2.atoms()[i] == doctest::Approx(c1.atoms()[i]).epsilon(1e-14).scale(1.0));
      CHECK(c3.atoms()[i] == doctest::Approx(c1.atoms()[i]).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("translation moves atoms by +y") {
  const auto m = em({0.0, 2.0});
  CHECK(translate(m, 0.0) == m);
  CHECK(translate(m, 1.0).atoms() == std::vector<double>{1.0, 3.0});
  // integral identity with f(x) = x^2
  const double y = -0.75;
  const auto t = translate(m, y);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    lhs += t.atoms()[i] * t.atoms()[i];
    rhs += (m.atoms()[i] + y) * (m.atoms()[i] + y);
  }
  CHECK(lhs == doctest::Approx(rhs));
  const std::vector<double> y2{1.0, 2.0};
  CHECK_THROWS_AS(translate(m, std::span<const double>(y2)), DimensionError);
}

TEST_CASE("empirical cdf") {
  const auto m = em({0.0, 1.0, 1.0, 3.0});
  CHECK(m.cdf(-1.0) == 0.0);
  CHECK(m.cdf(0.0) == 0.25);
  CHECK(m.cdf(1.0) == 0.75);
  CHECK(m.cdf(2.9) == 0.75);
  CHECK(m.cdf(3.0) == 1.0);
}

TEST_CASE("wasserstein examples") {
  CHECK(wasserstein_1d(em({0.0}), em({1.0})) == doctest::Approx(1.0));
  CHECK(wasserstein_1d(em({-1.0, 1.0}), em({0.0, 2.0})) == doctest::Approx(1.0));
  CHECK(wasserstein_1d(em({-1.0, 1.0}), em({-1.0, 1.0})) == 0.0);
  CHECK(wasserstein_1d(em({0.0}), em({3.0}), 2.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(wasserstein_1d(em({0.0}), em({1.0}), 0.5), InvalidArgument);
  const EmpiricalMeasure two(1, 2, {0.0, 0.0});
  CHECK_THROWS_AS(wasserstein_1d(two, two), DimensionError);
}

TEST_CASE("wasserstein: cdf path equals matching path") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto a = em(random_atoms(rng, 1 + t % 17));
    const auto b = em(random_atoms(rng, 1 + t % 17));
    CHECK(wasserstein_1d_cdf(a, b) == doctest::Approx(wasserstein_1d_matching(a, b)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("wasserstein with unequal sizes uses the cdf path") {
  // {0} vs {0, 2}: half the mass moves 2
  CHECK(wasserstein_1d(em({0.0}), em({0.0, 2.0})) == doctest::Approx(1.0));
}

TEST_CASE("prohorov examples") {
  CHECK(prohorov_1d(em({0.0}), em({0.3})) == doctest::Approx(0.3));
  CHECK(prohorov_1d(em({0.0}), em({5.0})) == doctest::Approx(1.0));
  CHECK(prohorov_1d(em({1.0, 2.0}), em({1.0, 2.0})) == 0.0);
  CHECK_THROWS_AS(prohorov_1d(em({0.0}), em({0.0, 1.0})), NotImplemented);
}

TEST_CASE("prohorov agrees with the brute-force definition") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 150; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 5);
    auto a = random_atoms(rng, n);
    auto b = random_atoms(rng, n);
    for (auto& v : b) v *= 0.4;
    CHECK(prohorov_1d(em(a), em(b)) == doctest::Approx(prohorov_brute(a, b)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("prohorov is bounded by 1 and symmetric") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const auto a = em(random_atoms(rng, 8));
    const auto b = em(random_atoms(rng, 8));
    const double d = prohorov_1d(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(d == prohorov_1d(b, a));
  }
}

TEST_CASE("quotient examples") {
  const MetricSpec w2{BaseMetric::wasserstein, 2.0};
  const MetricSpec w1{BaseMetric::wasserstein, 1.0};
  CHECK(quotient_distance(em({-1.0, 1.0}), em({4.0, 6.0}), w2) == doctest::Approx(0.0).scale(1.0));
  CHECK(quotient_distance(em({-1.0, 1.0}), em({-2.0, 2.0}), w1) == doctest::Approx(1.0));
  CHECK(quotient_distance(em({0.0}), em({7.0}), MetricSpec{}) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("quotient metric properties") {
  std::mt19937_64 rng(8);
  const std::vector<MetricSpec> specs{{BaseMetric::prohorov, 1.0},
                                      {BaseMetric::wasserstein, 1.0},
                                      {BaseMetric::wasserstein, 2.0},
                                      {BaseMetric::wasserstein, 1.5}};
  for (const auto& s : specs) {
    for (int t = 0; t < 40; ++t) {
      const auto a = em(random_atoms(rng, 6));
      const auto b = em(random_atoms(rng, 6));
      const auto c = em(random_atoms(rng, 6));
      const auto r = quotient_distance_with_shift(a, b, s);
      const double base = s.base == BaseMetric::prohorov ? prohorov_1d(a, b) : wasserstein_1d(a, b, s.p);
      CHECK(r.distance <= base + 1e-12);
      // the returned shift realizes the value
      const auto bt = translate(b, r.shift);
      const double at = s.base == BaseMetric::prohorov ? prohorov_1d(a, bt) : wasserstein_1d(a, bt, s.p);
      CHECK(at == doctest::Approx(r.distance).epsilon(1e-7).scale(1.0));
      // invariant under translating either argument
      CHECK(quotient_distance(translate(a, 2.5), b, s) == doctest::Approx(r.distance).epsilon(1e-7).scale(1.0));
      CHECK(quotient_distance(b, a, s) == doctest::Approx(r.distance).epsilon(1e-7).scale(1.0));
      CHECK(quotient_distance(a, a, s) == doctest::Approx(0.0).scale(1.0));
      CHECK(quotient_distance(a, c, s) <= quotient_distance(a, b, s) + quotient_distance(b, c, s) + 1e-7);
    }
  }
}

TEST_CASE("quotient prohorov is below a dense shift scan") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 20; ++t) {
    const auto a = em(random_atoms(rng, 5));
    const auto b = em(random_atoms(rng, 5));
    double scan = 1.0;
    for (int k = -3000; k <= 3000; ++k) scan = std::min(scan, prohorov_1d(a, translate(b, k * 1e-3)));
    const double q = quotient_distance(a, b, MetricSpec{});
    CHECK(q <= scan + 1e-12);
    CHECK(scan - q <= 2e-3);
  }
}

TEST_CASE("metrics reject d > 1") {
  const EmpiricalMeasure two(2, 2, {0.0, 0.0, 1.0, 1.0});
  CHECK_THROWS_AS(prohorov_1d(two, two), DimensionError);
  CHECK_THROWS_AS(quotient_distance(two, two, MetricSpec{}), DimensionError);
}
