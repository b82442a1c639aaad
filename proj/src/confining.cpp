#include "mfldp/confining.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "mfldp/errors.hpp"

namespace mfldp {

namespace {

double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double power_sum(std::span<const double> x, double zeta, double ell) {
  double s = 0.0;
  for (double v : x) {
    const double r = std::abs(v + zeta);
    s += ell == 1.0 ? r : (ell == 2.0 ? r * r : std::pow(r, ell));
  }
  return s;
}

// log of the integral over zeta of exp(-c sum_i |x_i + zeta|), exact
double log_integral_ell1(std::span<const double> x, double c) {
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = -x[i];
  std::sort(t.begin(), t.end());
  const std::size_t n = t.size();
  const double nn = static_cast<double>(n);
  auto S = [&](double z) { return power_sum(x, z, 1.0); };

  // both tails have slope magnitude n
  double acc = -c * S(t.front()) - std::log(c * nn);
  acc = log_add(acc, -c * S(t.back()) - std::log(c * nn));
  for (std::size_t k = 1; k < n; ++k) {
    const double a = t[k - 1], b = t[k];
    if (!(b > a)) continue;
    const double slope = 2.0 * static_cast<double>(k) - nn;
    const double len = b - a;
    double piece;
    if (slope == 0.0) {
      piece = -c * S(a) + std::log(len);
    } else {
      // anchor at the endpoint where S is smaller so the exponent stays bounded
      const double base = slope > 0 ? S(a) : S(b);
      const double cs = c * std::abs(slope);
      piece = -c * base + std::log(-std::expm1(-cs * len)) - std::log(cs);
    }
    acc = log_add(acc, piece);
  }
  return acc;
}

double log_integral_quadrature(std::span<const double> x, double c, double ell) {
  const std::size_t n = x.size();
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  auto S = [&](double z) { return power_sum(x, z, ell); };
  const auto opt = boost::math::tools::brent_find_minima(S, -*mx, -*mn, 60);
  const double zstar = opt.first, sstar = opt.second;

  // centred x gives S(zeta) >= n |zeta|^ell, so beyond R the integrand is below e^-40 of its peak
  const double R = std::pow((sstar + 40.0 / c) / static_cast<double>(n), 1.0 / ell) + 1e-12;
  std::vector<double> cuts{-R, R, std::clamp(zstar, -R, R)};
  for (double v : x)
    if (-v > -R && -v < R) cuts.push_back(-v);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto f = [&](double z) { return std::exp(-c * (S(z) - sstar)); };
  double total = 0.0;
  for (std::size_t k = 1; k < cuts.size(); ++k)
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[k - 1], cuts[k], 15, 1e-13);
  if (!(total > 0.0) || !std::isfinite(total))
    throw ConvergenceError("hat_v quadrature produced a non-positive integral", 0, total);
  return -c * sstar + std::log(total);
}

}  // namespace

void ConfiningSpec::validate() const {
  if (!(eta > 0.0)) throw InvalidArgument("confining strength eta must be positive");
  if (!(ell >= 1.0)) throw InvalidArgument("confining growth index ell must be >= 1");
  if (d < 1) throw InvalidArgument("dimension must be >= 1");
  if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
}

double z_eta_quadrature(const ConfiningSpec& s) {
  s.validate();
  const double c = 2.0 * s.eta / s.sigma2;
  const double dd = static_cast<double>(s.d);
  const double surface = 2.0 * std::pow(std::numbers::pi, dd / 2.0) / boost::math::tgamma(dd / 2.0);
  // radial integrand r^{d-1} e^{-c r^ell}; past R the remaining mass is an incomplete
  // gamma tail far below 1e-14 of the total
  const double R = std::pow((60.0 + 4.0 * dd) / c, 1.0 / s.ell);
  auto f = [&](double r) { return std::pow(r, dd - 1.0) * std::exp(-c * std::pow(r, s.ell)); };
  const double peak = s.d > 1 ? std::pow((dd - 1.0) / (c * s.ell), 1.0 / s.ell) : 0.0;
  double total = 0.0;
  if (peak > 0.0 && peak < R) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, peak, 15, 1e-13);
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, peak, R, 15, 1e-13);
  } else {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, R, 15, 1e-13);
  }
  return surface * total;
}

double z_eta(const ConfiningSpec& s) {
  s.validate();
  if (s.d == 1 && s.ell == 1.0) return s.sigma2 / s.eta;
  if (s.d == 1 && s.ell == 2.0) return std::sqrt(std::numbers::pi * s.sigma2 / (2.0 * s.eta));
  return z_eta_quadrature(s);
}

double hat_v_quadrature(std::span<const double> x, const ConfiningSpec& s) {
  s.validate();
  if (s.d != 1) throw NotImplemented("hat_v quadrature is only implemented for d = 1");
  const double n = static_cast<double>(x.size());
  const double c = 2.0 * s.eta / s.sigma2;
  return -(s.sigma2 / (2.0 * n)) * log_integral_quadrature(x, c, s.ell);
}

double hat_v_raw(std::span<const double> x, std::size_t n, std::size_t d, const ConfiningSpec& s) {
  s.validate();
  if (d != s.d) throw DimensionError("configuration dimension does not match the confining spec");
  const double nn = static_cast<double>(n);
  if (s.ell == 2.0) {
    double sq = 0.0;
    for (double v : x) sq += v * v;
    return (s.eta / nn) * sq -
           (s.sigma2 * static_cast<double>(d) / (4.0 * nn)) * std::log(std::numbers::pi * s.sigma2 / (2.0 * s.eta * nn));
  }
  if (d != 1) throw NotImplemented("hat_v for d > 1 is only available when ell = 2");
  const double c = 2.0 * s.eta / s.sigma2;
  if (s.ell == 1.0) return -(s.sigma2 / (2.0 * nn)) * log_integral_ell1(x, c);
  return -(s.sigma2 / (2.0 * nn)) * log_integral_quadrature(x, c, s.ell);
}

double hat_v(const CenteredConfiguration& c, const ConfiningSpec& s) {
  return hat_v_raw(c.coords(), c.n(), c.d(), s);
}

HatVBounds hat_v_bounds(const CenteredConfiguration& c, const ConfiningSpec& s) {
  s.validate();
  const double n = static_cast<double>(c.n());
  const double dd = static_cast<double>(s.d);
  const double z = z_eta(s);
  double moment = 0.0;
  for (std::size_t i = 0; i < c.n(); ++i) {
    double r2 = 0.0;
    for (double v : c.point(i)) r2 += v * v;
    moment += std::pow(std::sqrt(r2), s.ell);
  }
  const double two = std::pow(2.0, s.ell - 1.0);
  HatVBounds b;
  b.lower = (s.sigma2 / (2.0 * n)) * ((dd / s.ell) * std::log(n) - std::log(z));
  b.upper = (two * s.eta / n) * moment + (s.sigma2 / (2.0 * n)) * ((dd / s.ell) * std::log(two * n) - std::log(z));
  return b;
}

namespace {

VarthetaResult vartheta_sorted(std::vector<double> s, double ell) {
  if (!(ell >= 1.0)) throw InvalidArgument("vartheta order must be >= 1");
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  if (ell == 2.0) {
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    return {var / n, -mean};
  }
  if (ell == 1.0) {
    const double med = s[(s.size() - 1) / 2];
    double acc = 0.0;
    for (double v : s) acc += std::abs(v - med);
    return {acc / n, -med};
  }
  auto g = [&](double y) { return power_sum(s, y, ell) / n; };
  if (s.front() == s.back()) return {0.0, -s.front()};
  const auto r = boost::math::tools::brent_find_minima(g, -s.back(), -s.front(), 52);
  return {r.second, r.first};
}

}  // namespace

VarthetaResult vartheta_with_shift(const EmpiricalMeasure& m, double ell) {
  if (m.d() != 1) throw DimensionError("vartheta is only implemented for d = 1");
  return vartheta_sorted(m.atoms(), ell);
}

double vartheta(const EmpiricalMeasure& m, double ell) { return vartheta_with_shift(m, ell).value; }

double vartheta_raw(std::span<const double> xs, double ell) {
  return vartheta_sorted(std::vector<double>(xs.begin(), xs.end()), ell).value;
}

}  // namespace mfldp
