#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mfldp/confining.hpp"
#include "mfldp/errors.hpp"

using namespace mfldp;
using boost::math::constants::pi;

namespace {

// radial formula: |S^{d-1}| Gamma(d/l) / (l a^{d/l}), a = 2 eta / sigma2
double z_closed(const ConfiningSpec& s) {
  const double d = static_cast<double>(s.d);
  const double area = 2.0 * std::pow(pi<double>(), d / 2.0) / boost::math::tgamma(d / 2.0);
  const double a = 2.0 * s.eta / s.sigma2;
  return area * boost::math::tgamma(d / s.ell) / (s.ell * std::pow(a, d / s.ell));
}

CenteredConfiguration centred(std::vector<double> x) { return center(Configuration::from_1d(std::move(x))); }

}  // namespace

TEST_CASE("partition function examples") {
  CHECK(z_eta({1.0, 2.0, 1, 2.0}) == doctest::Approx(std::sqrt(pi<double>())).epsilon(1e-13));
  CHECK(z_eta({1.0, 1.0, 1, 2.0}) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(z_eta({4.0, 2.0, 1, 2.0}) == doctest::Approx(0.5 * z_eta({1.0, 2.0, 1, 2.0})).epsilon(1e-13));
}

TEST_CASE("partition function: closed form vs quadrature vs gamma formula") {
  for (std::size_t d : {1u, 2u, 3u}) {
    for (double ell : {1.0, 1.5, 2.0, 3.0}) {
      for (double eta : {0.1, 1.0}) {
        const ConfiningSpec s{eta, ell, d, 1.3};
        CHECK(z_eta(s) == doctest::Approx(z_closed(s)).epsilon(1e-12));
        CHECK(z_eta_quadrature(s) == doctest::Approx(z_closed(s)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("confining parameter validation") {
  CHECK_THROWS_AS(z_eta({0.0, 2.0, 1, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(z_eta({1.0, 0.5, 1, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(z_eta({1.0, 2.0, 1, -1.0}), InvalidArgument);
}

TEST_CASE("hat_v example") {
  const ConfiningSpec s{1.0, 2.0, 1, 2.0};
  const double expected = 1.0 - 0.25 * std::log(pi<double>() / 2.0);
  CHECK(hat_v(centred({-1.0, 1.0}), s) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.887103).epsilon(1e-6));
  // all particles at the origin
  const double n = 3.0;
  const double zero = -(s.sigma2 / (2 * n)) * std::log(z_eta({n * s.eta, s.ell, 1, s.sigma2}));
  CHECK(hat_v(centred({0.0, 0.0, 0.0}), s) == doctest::Approx(zero).epsilon(1e-12));
}

TEST_CASE("hat_v: closed forms match quadrature") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 1.0);
  for (double ell : {1.0, 1.5, 2.0, 3.0}) {
    for (int t = 0; t < 10; ++t) {
      std::vector<double> x(2 + t);
      for (auto& v : x) v = N(rng);
      const auto c = centred(x);
      const ConfiningSpec s{0.3 + 0.1 * t, ell, 1, 2.0};
      CHECK(hat_v(c, s) == doctest::Approx(hat_v_quadrature(c.coords(), s)).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("hat_v lies between its bounds") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N(0.0, 2.0);
  for (double ell : {1.0, 2.0, 2.5}) {
    for (int t = 0; t < 30; ++t) {
      std::vector<double> x(2 + t % 10);
      for (auto& v : x) v = N(rng);
      const auto c = centred(x);
      const ConfiningSpec s{0.5, ell, 1, 2.0};
      const auto b = hat_v_bounds(c, s);
      const double v = hat_v(c, s);
      CHECK(b.lower <= v + 1e-10);
      CHECK(v <= b.upper + 1e-10);
    }
  }
}

TEST_CASE("hat_v in d > 1") {
  const ConfiningSpec s{1.0, 2.0, 2, 2.0};
  const auto c = center(Configuration(2, 2, {1.0, 0.0, -1.0, 0.0}));
  // quadratic case separates per dimension: the x part is the d = 1 example, the y part the zero case
  const ConfiningSpec s1{1.0, 2.0, 1, 2.0};
  const double x_part = hat_v(centred({-1.0, 1.0}), s1);
  const double y_part = hat_v(centred({0.0, 0.0}), s1);
  CHECK(hat_v(c, s) == doctest::Approx(x_part + y_part).epsilon(1e-12));
  CHECK_THROWS_AS(hat_v(c, ConfiningSpec{1.0, 1.5, 2, 2.0}), NotImplemented);
}

TEST_CASE("vartheta examples") {
  CHECK(vartheta(EmpiricalMeasure::from_1d({-1.0, 1.0}), 2.0) == doctest::Approx(1.0));
  CHECK(vartheta(EmpiricalMeasure::from_1d({0.0, 2.0}), 2.0) == doctest::Approx(1.0));
  CHECK(vartheta(EmpiricalMeasure::from_1d({0.0, 0.0, 3.0}), 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(vartheta(EmpiricalMeasure::from_1d({0.0}), 0.5), InvalidArgument);
}

TEST_CASE("vartheta properties") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  for (double ell : {1.0, 1.5, 2.0, 4.0}) {
    for (int t = 0; t < 20; ++t) {
      std::vector<double> x(1 + t % 9);
      for (auto& v : x) v = N(rng);
      const auto m = EmpiricalMeasure::from_1d(x);
      const auto r = vartheta_with_shift(m, ell);
      CHECK(vartheta(translate(m, 4.5), ell) == doctest::Approx(r.value).epsilon(1e-10).scale(1.0));
      double moment = 0.0, at_shift = 0.0;
      for (double v : x) {
        moment += std::pow(std::abs(v), ell);
        at_shift += std::pow(std::abs(v + r.shift), ell);
      }
      moment /= static_cast<double>(x.size());
      at_shift /= static_cast<double>(x.size());
      CHECK(r.value <= moment + 1e-12);
      CHECK(at_shift == doctest::Approx(r.value).epsilon(1e-10).scale(1.0));
      // a few perturbed shifts never do better
      for (double dy : {-0.1, -1e-3, 1e-3, 0.1}) {
        double alt = 0.0;
        for (double v : x) alt += std::pow(std::abs(v + r.shift + dy), ell);
        CHECK(alt / static_cast<double>(x.size()) >= r.value - 1e-10);
      }
    }
  }
}
