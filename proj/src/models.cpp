#include "mfldp/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mfldp/errors.hpp"
#include "mfldp/kernels.hpp"

namespace mfldp {

namespace {

bool is_small_int(double e) { return e == std::floor(e) && e >= 0.0 && e <= 32.0; }

double ipow(double r, int k) {
  double out = 1.0;
  while (k > 0) {
    if (k & 1) out *= r;
    r *= r;
    k >>= 1;
  }
  return out;
}

double rpow(double r, double e) { return is_small_int(e) ? ipow(r, static_cast<int>(e)) : std::pow(r, e); }

double norm(std::span<const double> x) {
  if (x.size() == 1) return std::abs(x[0]);
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

double RadialPolynomial::value_r(double r) const {
  double s = 0.0;
  for (const auto& [e, c] : terms) s += c * (e == 0.0 ? 1.0 : rpow(r, e));
  return s;
}

double RadialPolynomial::grad_factor_r(double r) const {
  if (r == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& [e, c] : terms) {
    if (e == 0.0) continue;
    if (e == 2.0)
      s += 2.0 * c;
    else if (e == 1.0)
      s += c / r;
    else
      s += c * e * (e > 2.0 ? rpow(r, e - 2.0) : std::pow(r, e - 2.0));
  }
  return s;
}

double RadialPolynomial::leading_exponent() const {
  double e = 0.0;
  for (const auto& t : terms)
    if (t.second != 0.0) e = std::max(e, t.first);
  return e;
}

double RadialPolynomial::leading_coefficient() const {
  const double e = leading_exponent();
  double c = 0.0;
  for (const auto& t : terms)
    if (t.first == e) c += t.second;
  return c;
}

double RadialPolynomial::operator()(std::span<const double> x, std::span<double> grad) const {
  const double r = norm(x);
  if (grad.empty()) return value_r(r);
  // value and gradient factor in one pass; this is the MV hot loop
  double v = 0.0, f = 0.0;
  for (const auto& [e, c] : terms) {
    if (e == 2.0) {
      v += c * r * r;
      f += 2.0 * c;
    } else if (e == 1.0) {
      v += c * r;
      if (r > 0.0) f += c / r;
    } else if (e == 0.0) {
      v += c;
    } else {
      const double p = rpow(r, e);
      v += c * p;
      if (r > 0.0) f += c * e * p / (r * r);
    }
  }
  for (std::size_t k = 0; k < x.size(); ++k) grad[k] = f * x[k];
  return v;
}

MvModel MvModel::from_radial(RadialPolynomial poly, double sigma2, std::string id) {
  if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
  const double ell = poly.leading_exponent();
  const double lead = poly.leading_coefficient();
  if (ell < 1.0 || !(lead > 0.0))
    throw InvalidArgument("potential needs a leading term c|x|^l with l >= 1 and c > 0");
  for (const auto& t : poly.terms)
    if (t.first < 0.0) throw InvalidArgument("potential exponents must be nonnegative");
  MvModel m;
  m.id = std::move(id);
  m.radial = poly;
  m.potential = [poly](std::span<const double> x) { return poly.value_r(norm(x)); };
  m.gradient = [poly](std::span<const double> x, std::span<double> g) { poly(x, g); };
  m.w_sharp = [lead, ell](std::span<const double> x) { return lead * rpow(norm(x), ell); };
  m.ell = ell;
  m.kappa = lead / 2.0;
  m.sigma2 = sigma2;
  return m;
}

MvModel MvModel::quadratic(double sigma2) { return from_radial({{{2.0, 1.0}}}, sigma2, "mv:quadratic"); }
MvModel MvModel::cubic(double sigma2) { return from_radial({{{3.0, 1.0}}}, sigma2, "mv:cubic"); }
MvModel MvModel::abs(double sigma2) { return from_radial({{{1.0, 1.0}}}, sigma2, "mv:abs"); }

RbModel RbModel::polynomial(std::vector<double> coefficients, double sigma2, std::string id) {
  if (!(sigma2 > 0.0)) throw InvalidArgument("sigma2 must be positive");
  if (coefficients.empty()) throw InvalidArgument("flux polynomial needs coefficients");
  RbModel m;
  m.id = std::move(id);
  m.sigma2 = sigma2;
  m.coefficients = coefficients;
  m.B = [c = coefficients](double u) {
    double s = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) s = s * u + c[k];
    return s;
  };
  m.b = [c = coefficients](double u) {
    double s = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) s = s * u + static_cast<double>(k) * c[k];
    return s;
  };
  // coefficients of s -> B(1 - s) by binomial expansion
  std::vector<double> r(coefficients.size(), 0.0);
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    double binom = 1.0;
    for (std::size_t j = 0; j <= k; ++j) {
      r[j] += (j % 2 ? -1.0 : 1.0) * binom * coefficients[k];
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
  }
  m.B_upper = [r](double s) {
    double acc = 0.0;
    for (std::size_t k = r.size(); k-- > 0;) acc = acc * s + r[k];
    return acc;
  };
  return m;
}

RbModel RbModel::logistic_flux(double sigma2) { return polynomial({0.0, 1.0, -1.0}, sigma2, "rb:logistic-flux"); }

double mv_energy_raw(std::span<const double> x, std::size_t n, std::size_t d, const MvModel& m) {
  double total;
  if (m.radial) {
    total = kernels::parallel::pair_energy(x, n, d, *m.radial);
  } else {
    auto pot = [&m](std::span<const double> diff, std::span<double>) { return m.potential(diff); };
    total = kernels::parallel::pair_energy(x, n, d, pot);
  }
  const double nn = static_cast<double>(n);
  return total / (2.0 * nn * nn);
}

double mv_energy_and_drift_raw(std::span<const double> x, std::size_t n, std::size_t d, const MvModel& m,
                               std::span<double> drift) {
  double total;
  if (m.radial) {
    total = kernels::parallel::pair_energy_and_force(x, n, d, *m.radial, drift);
  } else {
    auto pot = [&m](std::span<const double> diff, std::span<double> grad) {
      if (!grad.empty()) m.gradient(diff, grad);
      return m.potential(diff);
    };
    total = kernels::parallel::pair_energy_and_force(x, n, d, pot, drift);
  }
  const double nn = static_cast<double>(n);
  for (double& v : drift) v = -v / nn;
  return total / (2.0 * nn * nn);
}

double mv_energy(const Configuration& c, const MvModel& m) { return mv_energy_raw(c.coords(), c.n(), c.d(), m); }

std::vector<double> mv_drift(const Configuration& c, const MvModel& m) {
  std::vector<double> drift(c.n() * c.d());
  mv_energy_and_drift_raw(c.coords(), c.n(), c.d(), m, drift);
  return drift;
}

std::vector<std::size_t> rank_order(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  return order;
}

std::vector<double> rb_rank_drifts(std::size_t n, const RbModel& m) {
  std::vector<double> out(n);
  const double nn = static_cast<double>(n);
  double prev = m.B(0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const double cur = m.B(static_cast<double>(k) / nn);
    out[k - 1] = nn * (cur - prev);
    prev = cur;
  }
  return out;
}

double rb_energy_gap_sum(std::span<const double> xs, const RbModel& m) {
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double nn = static_cast<double>(s.size());
  double acc = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) acc += m.B(static_cast<double>(k) / nn) * (s[k] - s[k - 1]);
  return acc;
}

double rb_energy_coefficients(std::span<const double> xs, const RbModel& m) {
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const auto bn = rb_rank_drifts(s.size(), m);
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) acc += bn[k] * s[k];
  return -acc / static_cast<double>(s.size());
}

double rb_energy(const Configuration& c, const RbModel& m) {
  if (c.d() != 1) throw DimensionError("rank-based energy is only defined for d = 1");
  return rb_energy_gap_sum(c.coords(), m);
}

std::vector<double> rb_drift(const Configuration& c, const RbModel& m) {
  if (c.d() != 1) throw DimensionError("rank-based drift is only defined for d = 1");
  const auto bn = rb_rank_drifts(c.n(), m);
  const auto order = rank_order(c.coords());
  std::vector<double> drift(c.n());
  for (std::size_t k = 0; k < order.size(); ++k) drift[order[k]] = bn[k];
  return drift;
}

double rb_energy_and_drift_raw(std::span<const double> x, std::span<const double> rank_drifts,
                               std::span<double> drift, std::vector<std::size_t>& order) {
  const std::size_t n = x.size();
  order.resize(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  // coefficient form; b_n sums to zero so this is the gap sum rearranged
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    drift[order[k]] = rank_drifts[k];
    acc += rank_drifts[k] * x[order[k]];
  }
  return -acc / static_cast<double>(n);
}

KappaEstimate rb_kappa(const RbModel& m, std::size_t grid_points) {
  if (grid_points == 0) throw InvalidArgument("kappa grid needs at least one point");
  KappaEstimate best{m.b(0.0) / 2.0, 0.0};
  const double right = -m.b(1.0) / 2.0;
  if (right < best.kappa) best = {right, 1.0};
  const double h = 1.0 / static_cast<double>(grid_points + 1);
  for (std::size_t i = 1; i <= grid_points; ++i) {
    const double u = static_cast<double>(i) * h;
    const double r = m.B(u) / (2.0 * u * (1.0 - u));
    if (r < best.kappa) best = {r, u};
  }
  return best;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::assumed: return "assumed";
    case Verdict::trend: return "trend";
  }
  return "?";
}

bool AssumptionReport::all_passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.verdict == Verdict::fail; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& id) const {
  for (const auto& c : checks)
    if (c.id == id) return &c;
  return nullptr;
}

namespace {

template <class Energy>
AssumptionCheck check_translation(const Energy& energy, std::size_t samples, std::size_t d, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> n_dist(2, 40);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t n = n_dist(rng);
    std::vector<double> x(n * d);
    for (double& v : x) v = 3.0 * g(rng);
    std::vector<double> y(x);
    std::vector<double> shift(d);
    for (double& v : shift) v = 10.0 * g(rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) y[i * d + k] += shift[k];
    const double e0 = energy(x, n), e1 = energy(y, n);
    worst = std::max(worst, std::abs(e1 - e0) / (1.0 + std::abs(e0)));
  }
  return {"TI", worst <= 1e-10 ? Verdict::pass : Verdict::fail,
          "energy change under random common shifts, relative to 1 + |W_n|: " + fmt(worst),
          {{"max_relative_change", worst}}};
}

template <class Energy>
AssumptionCheck check_subhomogeneity(const Energy& energy, std::size_t samples, std::size_t d, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> n_dist(2, 40);
  std::uniform_real_distribution<double> eps_dist(0.0, 1.0);
  std::normal_distribution<double> g;
  double worst = -1e300;  // max of W_n((1-e)x) - (1-e) W_n(x), want <= 0
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t n = n_dist(rng);
    const double eps = eps_dist(rng);
    std::vector<double> x(n * d);
    for (double& v : x) v = 3.0 * g(rng);
    std::vector<double> y(x);
    for (double& v : y) v *= 1.0 - eps;
    const double lhs = (1.0 - eps) * energy(x, n);
    const double rhs = energy(y, n);
    worst = std::max(worst, (rhs - lhs) / (1.0 + std::abs(lhs)));
  }
  return {"SH", worst <= 1e-12 ? Verdict::pass : Verdict::fail,
          "max over samples of W_n((1-e)x) - (1-e)W_n(x), relative: " + fmt(worst), {{"max_violation", worst}}};
}

template <class Energy>
AssumptionCheck check_sigma_finite(const Energy& energy, std::size_t samples, std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  bool ok = true;
  double largest = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t n = 16;
    std::vector<double> x(n * d);
    for (double& v : x) v = u(rng);
    const double e = energy(x, n);
    ok = ok && std::isfinite(e);
    largest = std::max(largest, e);
  }
  return {"sigmaF", ok ? Verdict::pass : Verdict::fail,
          "W_n finite on configurations supported in [-1,1]^d; largest value " + fmt(largest),
          {{"max_energy", largest}}};
}

// W_n(x~) >= kappa * (1/n) sum |x~_i|^l on random centered configurations.
template <class Energy>
AssumptionCheck check_growth_sampled(const Energy& energy, double kappa, double ell, std::size_t samples,
                                     std::size_t d, std::mt19937_64& rng, AssumptionCheck base) {
  std::uniform_int_distribution<std::size_t> n_dist(2, 40);
  std::normal_distribution<double> g;
  double worst = -1e300;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t n = n_dist(rng);
    std::vector<double> x(n * d);
    for (double& v : x) v = 3.0 * g(rng);
    project_to_hyperplane(x, n, d);
    double moment = 0.0;
    for (std::size_t i = 0; i < n; ++i) moment += std::pow(norm(std::span<const double>(x.data() + i * d, d)), ell);
    moment /= static_cast<double>(n);
    const double e = energy(x, n);
    worst = std::max(worst, (kappa * moment - e) / (1.0 + e));
  }
  base.values["max_sampled_violation"] = worst;
  base.detail += "; sampled kappa*moment - W_n on centered configurations: " + fmt(worst);
  if (worst > 1e-10) base.verdict = Verdict::fail;
  return base;
}

}  // namespace

AssumptionReport check_assumptions(const RbModel& m, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InvalidArgument("check_assumptions needs a positive sample budget");
  std::mt19937_64 rng(seed);
  AssumptionReport rep;
  rep.model_id = m.id;
  auto energy = [&m](std::span<const double> x, std::size_t) { return rb_energy_gap_sum(x, m); };

  const double b0 = m.B(0.0), b1 = m.B(1.0);
  rep.checks.push_back({"RBti", std::abs(b0) <= 1e-12 && std::abs(b1) <= 1e-12 ? Verdict::pass : Verdict::fail,
                        "B(0) = " + fmt(b0) + ", B(1) = " + fmt(b1), {{"B0", b0}, {"B1", b1}}});

  double min_interior = 1e300, argmin = 0.0;
  for (std::size_t i = 1; i <= 10000; ++i) {
    const double u = static_cast<double>(i) / 10001.0;
    const double v = m.B(u);
    if (v < min_interior) {
      min_interior = v;
      argmin = u;
    }
  }
  rep.checks.push_back({"Oleinik", min_interior > 0.0 ? Verdict::pass : Verdict::fail,
                        "min of B on the interior grid is " + fmt(min_interior) + " at u = " + fmt(argmin),
                        {{"min_B", min_interior}, {"argmin", argmin}}});

  const double db0 = m.b(0.0), db1 = m.b(1.0);
  rep.checks.push_back({"Lax", db0 > 0.0 && db1 < 0.0 ? Verdict::pass : Verdict::fail,
                        "b(0) = " + fmt(db0) + ", b(1) = " + fmt(db1) + ", need b(0) > 0 > b(1)",
                        {{"b0", db0}, {"b1", db1}}});

  rep.checks.push_back(check_translation(energy, samples, 1, rng));
  rep.checks.push_back(check_sigma_finite(energy, samples, 1, rng));
  rep.checks.push_back({"LSC", Verdict::assumed,
                        "lower semicontinuity has no finite-sample test; holds for continuous B >= 0 (see README)", {}});

  const auto kap = rb_kappa(m);
  AssumptionCheck gc{"GC", kap.kappa > 0.0 ? Verdict::pass : Verdict::fail,
                     "kappa = " + fmt(kap.kappa) + " at u = " + fmt(kap.argmin) + ", l = 1",
                     {{"kappa", kap.kappa}, {"argmin", kap.argmin}, {"ell", 1.0}}};
  rep.checks.push_back(kap.kappa > 0.0 ? check_growth_sampled(energy, kap.kappa, 1.0, samples, 1, rng, gc) : gc);
  rep.checks.push_back(check_subhomogeneity(energy, samples, 1, rng));

  // chaos compatibility against mu = uniform[0,1], whose energy is int_0^1 B(u) du
  const double target = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(m.B, 0.0, 1.0, 10, 1e-12);
  AssumptionCheck cc{"CC", Verdict::trend, "E[W_n] for i.i.d. uniform[0,1] vs W[mu] = " + fmt(target),
                     {{"target", target}}};
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t n : {4u, 16u, 64u, 256u}) {
    double acc = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      std::vector<double> x(n);
      for (double& v : x) v = unif(rng);
      acc += rb_energy_gap_sum(x, m);
    }
    cc.values["mean_n" + std::to_string(n)] = acc / static_cast<double>(samples);
  }
  rep.checks.push_back(cc);
  return rep;
}

AssumptionReport check_assumptions(const MvModel& m, std::size_t samples, std::uint64_t seed, std::size_t d) {
  if (samples == 0) throw InvalidArgument("check_assumptions needs a positive sample budget");
  if (d == 0) throw InvalidArgument("dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  AssumptionReport rep;
  rep.model_id = m.id;
  auto energy = [&m, d](std::span<const double> x, std::size_t n) { return mv_energy_raw(x, n, d, m); };

  double worst_even = 0.0, min_sharp = 1e300, worst_grad = 0.0, worst_growth = -1e300;
  std::vector<double> x(d), mx(d), grad(d), xp(d), xm(d);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = 3.0 * g(rng);
      mx[k] = -x[k];
    }
    const double w = m.potential(x);
    worst_even = std::max(worst_even, std::abs(w - m.potential(mx)) / (1.0 + std::abs(w)));
    const double ws = m.w_sharp(x);
    min_sharp = std::min(min_sharp, ws);
    worst_growth = std::max(worst_growth, 2.0 * m.kappa * std::pow(norm(x), m.ell) - ws);
    m.gradient(x, grad);
    const double h = 1e-6;
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      xp = x;
      xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (m.potential(xp) - m.potential(xm)) / (2.0 * h);
      err = std::max(err, std::abs(fd - grad[k]));
      scale = std::max(scale, std::abs(grad[k]));
    }
    worst_grad = std::max(worst_grad, err / std::max(scale, 1.0));
  }
  rep.checks.push_back({"even", worst_even <= 1e-10 ? Verdict::pass : Verdict::fail,
                        "max |W(x) - W(-x)| relative: " + fmt(worst_even), {{"max_asymmetry", worst_even}}});
  rep.checks.push_back({"sharp_nonnegative", min_sharp >= 0.0 ? Verdict::pass : Verdict::fail,
                        "min sampled W-sharp: " + fmt(min_sharp), {{"min_w_sharp", min_sharp}}});
  rep.checks.push_back({"gradient", worst_grad <= 1e-5 ? Verdict::pass : Verdict::fail,
                        "central differences at step 1e-6, relative error " + fmt(worst_grad),
                        {{"max_relative_error", worst_grad}}});

  rep.checks.push_back(check_translation(energy, samples, d, rng));
  rep.checks.push_back(check_sigma_finite(energy, samples, d, rng));
  rep.checks.push_back({"LSC", Verdict::assumed,
                        "lower semicontinuity has no finite-sample test; holds for continuous W bounded below", {}});
  rep.checks.push_back({"GC", worst_growth <= 1e-10 && m.kappa > 0.0 ? Verdict::pass : Verdict::fail,
                        "W-sharp(x) >= 2 kappa |x|^l with l = " + fmt(m.ell) + ", kappa = " + fmt(m.kappa) +
                            "; worst sampled violation " + fmt(worst_growth),
                        {{"kappa", m.kappa}, {"ell", m.ell}, {"max_violation", worst_growth}}});
  rep.checks.push_back(check_subhomogeneity(energy, samples, d, rng));

  // chaos compatibility in d = 1 against uniform[0,1]: W[mu] = int_0^1 (1 - t) W(t) dt
  if (d == 1) {
    auto integrand = [&m](double t) { return (1.0 - t) * m.potential(std::span<const double>(&t, 1)); };
    const double target = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 10, 1e-12);
    AssumptionCheck cc{"CC", Verdict::trend, "E[W_n] for i.i.d. uniform[0,1] vs W[mu] = " + fmt(target),
                       {{"target", target}}};
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t n : {4u, 16u, 64u, 256u}) {
      double acc = 0.0;
      for (std::size_t s = 0; s < samples; ++s) {
        std::vector<double> y(n);
        for (double& v : y) v = unif(rng);
        acc += mv_energy_raw(y, n, 1, m);
      }
      cc.values["mean_n" + std::to_string(n)] = acc / static_cast<double>(samples);
    }
    rep.checks.push_back(cc);
  } else {
    rep.checks.push_back({"CC", Verdict::trend, "trend only computed for d = 1", {}});
  }
  return rep;
}

}  // namespace mfldp
