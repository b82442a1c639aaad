#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "mfldp/confining.hpp"
#include "mfldp/densities.hpp"
#include "mfldp/errors.hpp"

using namespace mfldp;
using boost::math::constants::pi;

namespace {

double logistic(double x, double c = 1.0) {
  const double e = std::exp(-c * std::abs(x));
  return c * e / ((1 + e) * (1 + e));
}

double gauss(double x, double var) { return std::exp(-x * x / (2 * var)) / std::sqrt(2 * pi<double>() * var); }

const Grid& standard_grid() {
  static const Grid g{-40.0, 40.0, 16000};
  return g;
}

double sup_diff(const GridDensity& p, const GridDensity& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s = std::max(s, std::abs(p[i] - q[i]));
  return s;
}

}  // namespace

TEST_CASE("grid density validation") {
  CHECK_THROWS_AS(GridDensity(Grid{0.0, 1.0, 4}, {1.0, 1.0, 1.0}), DimensionError);
  CHECK_THROWS_AS(GridDensity(Grid{0.0, 1.0, 2}, {1.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(GridDensity(Grid{0.0, 1.0, 2}, {-1.0, 3.0}), InvalidArgument);
  CHECK_NOTHROW(GridDensity(Grid{0.0, 1.0, 2}, {0.5, 1.5}));
}

TEST_CASE("entropy examples") {
  for (std::size_t m : {2u, 10u, 1000u}) CHECK(entropy(GridDensity(Grid{0.0, 1.0, m}, std::vector<double>(m, 1.0))) == 0.0);
  CHECK(entropy(GridDensity(Grid{0.0, 2.0, 100}, std::vector<double>(100, 0.5))) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  const auto p = GridDensity::from_function(standard_grid(), [](double x) { return logistic(x); });
  CHECK(std::abs(entropy(p) + 2.0) <= 1e-4);
}

TEST_CASE("entropy and energy converge at second order") {
  // p(x) = (1 + x/2)/2 on [-1, 1]: smooth, not periodic, bounded away from 0
  auto err = [](std::size_t m) {
    const Grid g{-1.0, 1.0, m};
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = (1 + 0.5 * g.center(i)) / 2;
    const GridDensity p(g, v);
    auto prim = [](double u) { return u * u / 2 * std::log(u) - u * u / 4; };
    const double exact_s = 4 * (prim(0.75) - prim(0.25));
    const double exact_var = 1.0 / 3.0 - 1.0 / 36.0;
    return std::pair{std::abs(entropy(p) - exact_s),
                     std::abs(energy_of_density(p, MvModel::quadratic(2.0)) - exact_var)};
  };
  const auto [s1, e1] = err(100);
  const auto [s2, e2] = err(200);
  CHECK(s1 / s2 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("relative entropy") {
  const Grid g{-10.0, 10.0, 2000};
  const auto p = GridDensity::from_function(g, [](double x) { return gauss(x, 1.0); });
  CHECK(relative_entropy(p, p) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  std::vector<double> half(g.m, 0.0);
  for (std::size_t i = g.m / 2; i < g.m; ++i) half[i] = 1.0;
  const auto q = GridDensity::normalized(g, half);
  CHECK(std::isinf(relative_entropy(p, q)));
  CHECK(std::isfinite(relative_entropy(q, p)));
  const auto other = GridDensity::from_function(Grid{-10.0, 10.0, 1000}, [](double x) { return gauss(x, 1.0); });
  CHECK_THROWS_AS(relative_entropy(p, other), DimensionError);
  // Gaussian KL closed form
  const auto r = GridDensity::from_function(g, [](double x) { return gauss(x - 0.5, 2.0); });
  const double kl = 0.5 * (1.0 / 2.0 + 0.25 / 2.0 - 1.0 + std::log(2.0));
  CHECK(relative_entropy(p, r) == doctest::Approx(kl).epsilon(1e-9));
}

TEST_CASE("relative entropy to the confining law splits into entropy and potential") {
  const double sigma2 = 2.0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.3, 1.5);
  for (double ell : {1.0, 2.0}) {
    // wide enough for the slow tail, narrow enough that nothing underflows
    const Grid g = ell == 1.0 ? Grid{-80.0, 80.0, 32000} : Grid{-20.0, 20.0, 8000};
    for (int t = 0; t < 10; ++t) {
      const ConfiningSpec s{U(rng), ell, 1, sigma2};
      std::vector<double> w(g.m);
      double z_grid = 0.0;
      for (std::size_t i = 0; i < g.m; ++i) {
        w[i] = std::exp(-2 * s.eta * std::pow(std::abs(g.center(i)), ell) / sigma2);
        z_grid += w[i] * g.dx();
      }
      // the grid normalizer is the closed form up to the midpoint error
      CHECK(std::log(z_grid) == doctest::Approx(std::log(z_eta(s))).epsilon(1e-5).scale(1.0));
      const auto nu = GridDensity::normalized(g, w);
      const double m1 = U(rng) - 0.9, v1 = U(rng), m2 = U(rng), v2 = U(rng), a = U(rng) / 2;
      const auto p = GridDensity::from_function(
          g, [&](double x) { return a * gauss(x - m1, v1) + (1 - a) * gauss(x - m2, v2); });
      double V = 0.0;
      for (std::size_t i = 0; i < g.m; ++i) V += s.eta * std::pow(std::abs(g.center(i)), ell) * p[i] * g.dx();
      const double lhs = relative_entropy(p, nu) - entropy(p) - (2 / sigma2) * V - std::log(z_grid);
      CHECK(std::abs(lhs) <= 1e-8);
    }
  }
}

TEST_CASE("energy of densities") {
  const auto lg = GridDensity::from_function(standard_grid(), [](double x) { return logistic(x); });
  CHECK(energy_of_density(lg, RbModel::logistic_flux(2.0)) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(free_energy(lg, RbModel::logistic_flux(2.0)) == doctest::Approx(-1.0).epsilon(1e-4));

  const Grid g{-10.0, 10.0, 2000};
  const auto p = GridDensity::from_function(g, [](double x) { return gauss(x, 0.7); });
  CHECK(energy_of_density(p, MvModel::quadratic(2.0)) == doctest::Approx(0.7).epsilon(1e-8));
  // direct double sum with |x|^3
  double direct = 0.0;
  for (std::size_t i = 0; i < g.m; i += 1)
    for (std::size_t j = 0; j < g.m; ++j) {
      const double r = std::abs(g.center(i) - g.center(j));
      direct += 0.5 * r * r * r * p[i] * p[j] * g.dx() * g.dx();
    }
  CHECK(energy_of_density(p, MvModel::cubic(2.0)) == doctest::Approx(direct).epsilon(1e-10));

  std::vector<double> hot(g.m, 0.0);
  hot[1000] = 1.0 / g.dx();
  CHECK(energy_of_density(GridDensity(g, hot), MvModel::quadratic(2.0)) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("free energy of the quadratic minimizer") {
  const Grid g{-20.0, 20.0, 8000};
  const auto p = GridDensity::from_function(g, [](double x) { return gauss(x, 0.5); });
  CHECK(free_energy(p, MvModel::quadratic(2.0)) == doctest::Approx(-0.5 * std::log(pi<double>())).epsilon(1e-9));
}

TEST_CASE("free energy is invariant under integer-cell shifts") {
  const auto p = GridDensity::from_function(standard_grid(), [](double x) { return logistic(x - 0.3); });
  const auto q = shift_cells(p, 200);
  CHECK(free_energy(q, RbModel::logistic_flux(2.0)) ==
        doctest::Approx(free_energy(p, RbModel::logistic_flux(2.0))).epsilon(1e-6).scale(1.0));
  const Grid g{-15.0, 15.0, 3000};
  const auto a = GridDensity::from_function(g, [](double x) { return gauss(x, 1.0); });
  CHECK(free_energy(shift_cells(a, -37), MvModel::cubic(2.0)) ==
        doctest::Approx(free_energy(a, MvModel::cubic(2.0))).epsilon(1e-6).scale(1.0));
}

TEST_CASE("translation on the grid") {
  const auto p = GridDensity::from_function(standard_grid(), [](double x) { return logistic(x); });
  const auto q = translate(p, 1.25);
  CHECK(q.mean() == doctest::Approx(1.25).epsilon(1e-9));
  const auto exact = GridDensity::from_function(standard_grid(), [](double x) { return logistic(x - 1.25); });
  CHECK(sup_diff(q, exact) <= 1e-5);
  CHECK(sup_diff(translate(p, 0.0), p) <= 1e-15);
  CHECK(std::abs(recenter(q).mean()) <= 1e-10);
}

TEST_CASE("stationary rank-based density is the logistic") {
  const auto r = stationary_rb(RbModel::logistic_flux(2.0), standard_grid());
  const auto exact = GridDensity::from_function(standard_grid(), [](double x) { return logistic(x); });
  CHECK(sup_diff(r.density, exact) < 1e-6);
  CHECK(std::abs(r.density.mean()) <= 1e-10);
  CHECK(r.residual < 1e-6);
  CHECK(fokker_planck_residual_l1(r.density, RbModel::logistic_flux(2.0)) < 1e-6);
}

TEST_CASE("stationary density for other temperatures") {
  for (double sigma2 : {1.0, 4.0}) {
    const Grid g = default_grid(sigma2);
    const auto r = stationary_rb(RbModel::logistic_flux(sigma2), g);
    const double c = 2.0 / sigma2;
    const auto exact = GridDensity::from_function(g, [c](double x) { return logistic(x, c); });
    CHECK(sup_diff(r.density, exact) < 1e-6);
  }
}

TEST_CASE("stationary solver reports non-convergence") {
  StationaryOptions opt;
  opt.max_iter = 2;
  CHECK_THROWS_AS(stationary_rb(RbModel::logistic_flux(2.0), standard_grid(), opt), ConvergenceError);
}

TEST_CASE("mean-field minimizer for the quadratic potential") {
  const Grid g{-10.0, 10.0, 2000};
  const auto r = minimize_free_energy_mv(MvModel::quadratic(2.0), g);
  CHECK(r.f_star == doctest::Approx(-0.5 * std::log(pi<double>())).epsilon(1e-5));
  double var = 0.0;
  for (std::size_t i = 0; i < g.m; ++i) var += g.center(i) * g.center(i) * r.density[i] * g.dx();
  CHECK(var == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(r.spread < 1e-6);
}

TEST_CASE("zero potential on a compact grid gives the uniform density") {
  MvModel zero;
  zero.id = "zero";
  zero.potential = [](std::span<const double>) { return 0.0; };
  zero.gradient = [](std::span<const double>, std::span<double> g) {
    for (auto& v : g) v = 0.0;
  };
  zero.w_sharp = zero.potential;
  const Grid g{-1.0, 1.0, 200};
  const auto r = minimize_free_energy_mv(zero, g);
  for (std::size_t i = 0; i < g.m; ++i) CHECK(r.density[i] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.f_star == doctest::Approx(-std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("rate of the stationary density is zero, and of a Gaussian matches quadrature") {
  const auto m = RbModel::logistic_flux(2.0);
  const auto st = stationary_rb(m, standard_grid());
  const double f_star = free_energy(st.density, m);
  CHECK(f_star == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(rate(st.density, m, f_star) <= 1e-6);

  const auto n01 = GridDensity::from_function(standard_grid(), [](double x) { return gauss(x, 1.0); });
  // S = -log(2 pi e)/2 and int Phi (1 - Phi) = 1/sqrt(pi) by quadrature
  auto integrand = [](double x) {
    const double phi = 0.5 * boost::math::erfc(-x / std::sqrt(2.0));
    return phi * (1 - phi);
  };
  const double energy = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 15, 1e-14);
  CHECK(energy == doctest::Approx(1.0 / std::sqrt(pi<double>())).epsilon(1e-10));
  const double exact = -0.5 * std::log(2 * pi<double>() * std::exp(1.0)) + energy + 1.0;
  // the free-energy path and the relative-entropy path
  CHECK(rate(n01, m, f_star) == doctest::Approx(rate_gap(n01, m, st.density).sum()).epsilon(1e-6).scale(1.0));
  // against the analytic value the grid energy is second order in the cell width
  const double err = std::abs(rate(n01, m, -1.0) - exact);
  CHECK(err <= 2e-6);
  const Grid fine{-40.0, 40.0, 32000};
  const auto n01_fine = GridDensity::from_function(fine, [](double x) { return gauss(x, 1.0); });
  const double err_fine = std::abs(rate(n01_fine, m, -1.0) - exact);
  CHECK(err_fine <= 1e-6);
  CHECK(err / err_fine == doctest::Approx(4.0).epsilon(0.05));
  CHECK(rate(shift_cells(n01, 300), m, -1.0) == doctest::Approx(rate(n01, m, -1.0)).epsilon(1e-6).scale(1.0));
}

TEST_CASE("rate gap decomposition") {
  const auto m = RbModel::logistic_flux(2.0);
  const auto st = stationary_rb(m, standard_grid());
  const double f_star = free_energy(st.density, m);
  const auto g0 = rate_gap(st.density, m, st.density);
  CHECK(std::abs(g0.relative_entropy_part) <= 1e-8);
  CHECK(std::abs(g0.gamma_part) <= 1e-8);

  const auto p = GridDensity::from_function(standard_grid(), [](double x) { return gauss(x, 3.0); });
  const auto g1 = rate_gap(p, m, st.density);
  CHECK(g1.sum() == doctest::Approx(rate(p, m, f_star)).epsilon(1e-5).scale(1.0));
  // concave B: gamma part is never positive
  CHECK(g1.gamma_part <= 1e-10);
  CHECK(g1.relative_entropy_part >= 0.0);

  const auto shifted = translate(st.density, 1.0);
  const auto g2 = rate_gap(shifted, m, st.density);
  CHECK(g2.sum() == doctest::Approx(rate(shifted, m, f_star)).epsilon(1e-5).scale(1.0));
}

TEST_CASE("first variation of the minimizer is flat") {
  const Grid g{-10.0, 10.0, 1000};
  const auto r = minimize_free_energy_mv(MvModel::quadratic(2.0), g);
  const auto fv = first_variation(r.density, MvModel::quadratic(2.0));
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < g.m; ++i)
    if (r.density[i] > 0.0) {
      lo = std::min(lo, fv[i]);
      hi = std::max(hi, fv[i]);
    }
  CHECK(hi - lo < 1e-6);
}
