#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mfldp/errors.hpp"
#include "mfldp/models.hpp"

using namespace mfldp;

namespace {

Configuration c1(std::vector<double> xs) { return Configuration::from_1d(std::move(xs)); }

std::vector<double> random_points(std::mt19937_64& rng, std::size_t n, double scale = 2.0) {
  std::normal_distribution<double> N(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = N(rng);
  return v;
}

// direct double sum, no kernels
double mv_energy_naive(const std::vector<double>& x, double (*w)(double)) {
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (double a : x)
    for (double b : x) s += w(a - b);
  return s / (2.0 * n * n);
}

}  // namespace

TEST_CASE("mv energy examples") {
  CHECK(mv_energy(c1({0.0, 2.0}), MvModel::cubic(2.0)) == doctest::Approx(2.0));
  CHECK(mv_energy(c1({5.0}), MvModel::cubic(2.0)) == 0.0);
  CHECK(mv_energy(c1({-1.0, 1.0}), MvModel::abs(2.0)) == doctest::Approx(0.5));
}

TEST_CASE("mv energy matches a naive double sum") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 30; ++t) {
    const auto x = random_points(rng, 1 + t);
    CHECK(mv_energy(c1(x), MvModel::quadratic(2.0)) ==
          doctest::Approx(mv_energy_naive(x, [](double r) { return r * r; })).epsilon(1e-12));
    CHECK(mv_energy(c1(x), MvModel::cubic(2.0)) ==
          doctest::Approx(mv_energy_naive(x, [](double r) { return std::abs(r * r * r); })).epsilon(1e-12));
  }
}

TEST_CASE("rb energy examples") {
  const auto m = RbModel::logistic_flux(2.0);
  CHECK(rb_energy(c1({-1.0, 1.0}), m) == doctest::Approx(0.5));
  CHECK(rb_energy(c1({4.0, 4.0, 4.0}), m) == 0.0);
  CHECK(rb_energy(c1({0.0, 1.0, 3.0}), m) == doctest::Approx(2.0 / 3.0));
  CHECK(rb_energy(c1({3.0, 0.0, 1.0}), m) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("rb energy: gap path equals coefficient path") {
  std::mt19937_64 rng(2);
  const auto m = RbModel::polynomial({0.0, 1.0, 0.5, -1.5}, 2.0);
  for (int t = 0; t < 100; ++t) {
    const auto x = random_points(rng, 1 + t % 40);
    const double a = rb_energy_gap_sum(x, m);
    const double b = rb_energy_coefficients(x, m);
    CHECK(a == doctest::Approx(b).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("mv drift example and finite differences") {
  const auto d = mv_drift(c1({-1.0, 1.0}), MvModel::quadratic(2.0));
  CHECK(d[0] == doctest::Approx(2.0));
  CHECK(d[1] == doctest::Approx(-2.0));

  std::mt19937_64 rng(3);
  for (const auto& m : {MvModel::quadratic(2.0), MvModel::cubic(1.0)}) {
    for (std::size_t dim : {1u, 2u}) {
      const std::size_t n = 6;
      auto x = random_points(rng, n * dim);
      const Configuration c(n, dim, x);
      const auto drift = mv_drift(c, m);
      for (std::size_t i = 0; i < n * dim; ++i) {
        const double h = 1e-6;
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (mv_energy(Configuration(n, dim, xp), m) - mv_energy(Configuration(n, dim, xm), m)) / (2 * h);
        CHECK(drift[i] == doctest::Approx(-static_cast<double>(n) * fd).epsilon(1e-6).scale(1.0));
      }
    }
  }
}

TEST_CASE("rb drift examples") {
  const auto m = RbModel::logistic_flux(2.0);
  auto d = rb_drift(c1({0.0, 5.0}), m);
  CHECK(d[0] == doctest::Approx(0.5));
  CHECK(d[1] == doctest::Approx(-0.5));
  d = rb_drift(c1({5.0, 0.0}), m);
  CHECK(d[0] == doctest::Approx(-0.5));
  CHECK(d[1] == doctest::Approx(0.5));
  // ties: lower index ranks first
  d = rb_drift(c1({1.0, 1.0}), m);
  CHECK(d[0] == doctest::Approx(0.5));
  CHECK(d[1] == doctest::Approx(-0.5));
}

TEST_CASE("rb drift sums to zero") {
  std::mt19937_64 rng(4);
  const auto m = RbModel::polynomial({0.0, 2.0, -1.0, -1.0}, 1.0);
  for (std::size_t n : {2u, 5u, 33u}) {
    const auto d = rb_drift(c1(random_points(rng, n)), m);
    double s = 0.0;
    for (double v : d) s += v;
    CHECK(std::abs(s) <= 1e-12);
  }
}

TEST_CASE("rb drift is minus n times the energy gradient away from ties") {
  std::mt19937_64 rng(5);
  const auto m = RbModel::logistic_flux(2.0);
  const std::size_t n = 7;
  const auto x = random_points(rng, n);
  const auto d = rb_drift(c1(x), m);
  for (std::size_t i = 0; i < n; ++i) {
    auto xp = x, xm = x;
    xp[i] += 1e-7;
    xm[i] -= 1e-7;
    const double fd = (rb_energy(c1(xp), m) - rb_energy(c1(xm), m)) / 2e-7;
    CHECK(d[i] == doctest::Approx(-static_cast<double>(n) * fd).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("energies are translation invariant") {
  std::mt19937_64 rng(6);
  const auto mv = MvModel::cubic(2.0);
  const auto rb = RbModel::logistic_flux(2.0);
  for (int t = 0; t < 20; ++t) {
    auto x = random_points(rng, 9);
    auto y = x;
    for (auto& v : y) v += 3.25;
    CHECK(mv_energy(c1(y), mv) == doctest::Approx(mv_energy(c1(x), mv)).epsilon(1e-12));
    CHECK(rb_energy(c1(y), rb) == doctest::Approx(rb_energy(c1(x), rb)).epsilon(1e-12));
  }
}

TEST_CASE("rb energy is positively homogeneous") {
  std::mt19937_64 rng(7);
  const auto m = RbModel::logistic_flux(2.0);
  for (int t = 0; t < 20; ++t) {
    auto x = random_points(rng, 11);
    auto y = x;
    for (auto& v : y) v *= 0.75;
    CHECK(rb_energy(c1(y), m) == doctest::Approx(0.75 * rb_energy(c1(x), m)).epsilon(1e-12));
  }
}

TEST_CASE("rb rank drifts") {
  const auto m = RbModel::logistic_flux(2.0);
  const auto b = rb_rank_drifts(2, m);
  CHECK(b[0] == doctest::Approx(0.5));
  CHECK(b[1] == doctest::Approx(-0.5));
  const auto order = rank_order(std::vector<double>{2.0, 1.0, 2.0, 0.0});
  CHECK(order == std::vector<std::size_t>{3, 1, 0, 2});
}

TEST_CASE("kappa for the logistic flux") {
  const auto k = rb_kappa(RbModel::logistic_flux(2.0));
  CHECK(k.kappa == doctest::Approx(0.5).epsilon(1e-9));
  // B = u(1-u)(1 + u): the infimum of (1 + u)/2 is at the left end
  const auto k2 = rb_kappa(RbModel::polynomial({0.0, 1.0, 0.0, -1.0}, 2.0));
  CHECK(k2.kappa == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(k2.argmin == doctest::Approx(0.0).scale(1.0).epsilon(1e-3));
}

TEST_CASE("B_upper is B reflected") {
  const auto m = RbModel::polynomial({0.0, 1.0, 0.5, -1.5}, 2.0);
  REQUIRE(m.B_upper);
  for (double s = 0.0; s <= 1.0; s += 0.0625) CHECK(m.B_upper(s) == doctest::Approx(m.B(1.0 - s)).epsilon(1e-13).scale(1.0));
  // near F = 1 the survival path keeps relative accuracy
  const auto lf = RbModel::logistic_flux(2.0);
  CHECK(lf.flux(1.0, 1e-20) == doctest::Approx(1e-20).epsilon(1e-12));
  CHECK(lf.flux(0.25, 0.75) == doctest::Approx(0.1875));
}

TEST_CASE("assumption report for the logistic flux") {
  const auto rep = check_assumptions(RbModel::logistic_flux(2.0), 100);
  CHECK(rep.all_passed());
  const auto* gc = rep.find("GC");
  REQUIRE(gc != nullptr);
  CHECK(gc->values.at("kappa") == doctest::Approx(0.5).epsilon(1e-6));
  REQUIRE(rep.find("LSC") != nullptr);
  CHECK(rep.find("LSC")->verdict == Verdict::assumed);
  CHECK(rep.find("SH")->verdict == Verdict::pass);
}

TEST_CASE("a flux with b(0) = 0 fails the Lax condition") {
  // B = u^2 (1 - u)
  const auto rep = check_assumptions(RbModel::polynomial({0.0, 0.0, 1.0, -1.0}, 2.0), 50);
  const auto* lax = rep.find("Lax");
  REQUIRE(lax != nullptr);
  CHECK(lax->verdict == Verdict::fail);
  CHECK(lax->values.at("b0") == doctest::Approx(0.0).scale(1.0));
  CHECK_FALSE(rep.all_passed());
}

TEST_CASE("a flux with B(1) != 0 fails translation compatibility") {
  const auto rep = check_assumptions(RbModel::polynomial({0.0, 1.0}, 2.0), 50);
  CHECK(rep.find("RBti")->verdict == Verdict::fail);
}

TEST_CASE("assumption report for mean-field potentials") {
  for (const auto& m : {MvModel::quadratic(2.0), MvModel::cubic(2.0), MvModel::abs(2.0)}) {
    const auto rep = check_assumptions(m, 100);
    CHECK(rep.all_passed());
    CHECK(rep.find("SH")->verdict == Verdict::pass);
    CHECK(rep.find("gradient")->verdict == Verdict::pass);
  }
  CHECK(check_assumptions(MvModel::quadratic(2.0), 50, 1, 2).all_passed());
  CHECK(MvModel::quadratic(2.0).kappa == doctest::Approx(0.5));
  CHECK(MvModel::quadratic(2.0).ell == 2.0);
}

TEST_CASE("radial polynomial value and gradient") {
  RadialPolynomial p{{{2.0, 1.0}, {4.0, 0.25}, {1.5, 0.5}}};
  CHECK(p.leading_exponent() == 4.0);
  CHECK(p.leading_coefficient() == 0.25);
  for (double r : {0.0, 0.3, 1.0, 2.7}) {
    const double v = r * r + 0.25 * std::pow(r, 4) + 0.5 * std::pow(r, 1.5);
    CHECK(p.value_r(r) == doctest::Approx(v).epsilon(1e-14).scale(1.0));
    const double x[2] = {r * 0.6, r * 0.8};
    double g[2];
    CHECK(p(std::span<const double>(x, 2), std::span<double>(g, 2)) == doctest::Approx(v).epsilon(1e-13).scale(1.0));
    const double dv = 2 * r + std::pow(r, 3) + 0.75 * std::sqrt(r);
    CHECK(g[0] == doctest::Approx(dv * 0.6).epsilon(1e-12).scale(1.0));
    CHECK(g[1] == doctest::Approx(dv * 0.8).epsilon(1e-12).scale(1.0));
  }
}
