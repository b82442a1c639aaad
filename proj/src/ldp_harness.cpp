#include "mfldp/ldp_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "mfldp/confining.hpp"
#include "mfldp/errors.hpp"
#include "mfldp/kernels.hpp"

namespace mfldp {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::vartheta_at_least: return "vartheta_at_least";
    case EventKind::w1_to_stationary_at_least: return "w1_to_stationary_at_least";
    case EventKind::mean_abs_at_least: return "mean_abs_at_least";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "vartheta_at_least") return EventKind::vartheta_at_least;
  if (s == "w1_to_stationary_at_least") return EventKind::w1_to_stationary_at_least;
  if (s == "mean_abs_at_least") return EventKind::mean_abs_at_least;
  throw InvalidArgument("unknown event kind '" + s + "'");
}

std::string EventSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind) << "(";
  if (kind == EventKind::vartheta_at_least) os << "ell=" << ell << ", ";
  os << threshold << ")";
  return os.str();
}

namespace {

double edge_cdf(const std::vector<double>& Fe, const Grid& g, double x) {
  const double pos = (x - g.lo) / g.dx();
  if (pos <= 0.0) return 0.0;
  if (pos >= static_cast<double>(g.m)) return Fe.back();
  const auto i = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(i);
  return Fe[i] + t * (Fe[i + 1] - Fe[i]);
}

// integral over a segment of length L of |f| with f linear from alpha to beta
double abs_linear(double alpha, double beta, double L) {
  if (alpha * beta >= 0.0) return 0.5 * L * std::abs(alpha + beta);
  return 0.5 * L * (alpha * alpha + beta * beta) / std::abs(beta - alpha);
}

double w1_empirical_vs_edges(std::span<const double> xs, const std::vector<double>& Fe, const Grid& g) {
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  std::vector<double> cuts;
  cuts.reserve(g.m + 1 + s.size());
  for (std::size_t i = 0; i <= g.m; ++i) cuts.push_back(g.edge(i));
  cuts.insert(cuts.end(), s.begin(), s.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double acc = 0.0;
  std::size_t below = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    while (below < s.size() && s[below] <= cuts[k]) ++below;
    const double c = static_cast<double>(below) / n;
    const double a = edge_cdf(Fe, g, cuts[k]), b = edge_cdf(Fe, g, cuts[k + 1]);
    acc += abs_linear(a - c, b - c, cuts[k + 1] - cuts[k]);
  }
  return acc;
}

double mean_abs(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s / static_cast<double>(x.size());
}

}  // namespace

double w1_to_density(std::span<const double> xs, const GridDensity& p) {
  if (xs.empty()) throw InvalidArgument("empty configuration");
  return w1_empirical_vs_edges(xs, p.cdf_edges(), p.grid());
}

double event_statistic(const EventSpec& e, std::span<const double> x, const GridDensity* p_inf) {
  switch (e.kind) {
    case EventKind::mean_abs_at_least: return mean_abs(x);
    case EventKind::vartheta_at_least: return vartheta_raw(x, e.ell);
    case EventKind::w1_to_stationary_at_least:
      if (!p_inf) throw InvalidArgument("w1 event needs the stationary density");
      return w1_to_density(x, *p_inf);
  }
  return 0.0;
}

double event_statistic(const EventSpec& e, const GridDensity& p, const GridDensity* p_inf) {
  const Grid& g = p.grid();
  const double h = g.dx();
  switch (e.kind) {
    case EventKind::mean_abs_at_least: {
      double s = 0.0;
      for (std::size_t i = 0; i < g.m; ++i) s += std::abs(g.center(i)) * p[i];
      return s * h;
    }
    case EventKind::vartheta_at_least: {
      auto moment = [&](double y) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.m; ++i) s += std::pow(std::abs(g.center(i) + y), e.ell) * p[i];
        return s * h;
      };
      const auto r = boost::math::tools::brent_find_minima(moment, -g.hi, -g.lo, 40);
      return r.second;
    }
    case EventKind::w1_to_stationary_at_least: {
      if (!p_inf) throw InvalidArgument("w1 event needs the stationary density");
      const auto a = p.cdf_centers(), b = p_inf->cdf_centers();
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
      return s * h;
    }
  }
  return 0.0;
}

WilsonInterval wilson_interval(std::size_t hits, std::size_t total, double z) {
  if (hits > total) throw InvalidArgument("more hits than trials");
  if (total == 0) return {0.0, 1.0};
  const double N = static_cast<double>(total);
  const double p = static_cast<double>(hits) / N;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / N;
  const double center = (p + z2 / (2.0 * N)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / N + z2 / (4.0 * N * N));
  // the bounds are exact at the ends; rounding would leave ~1e-18 there
  return {hits == 0 ? 0.0 : std::max(0.0, center - half), hits == total ? 1.0 : std::min(1.0, center + half)};
}

namespace {

LdpRow make_row(std::size_t n, const std::vector<double>& stats, double threshold) {
  LdpRow row;
  row.n = n;
  row.chains = stats.size();
  for (double s : stats)
    if (s >= threshold) ++row.hits;
  row.statistic_mean = stats.empty() ? 0.0 : std::accumulate(stats.begin(), stats.end(), 0.0) / static_cast<double>(stats.size());
  row.p_hat = row.chains ? static_cast<double>(row.hits) / static_cast<double>(row.chains) : 0.0;
  const auto w = wilson_interval(row.hits, row.chains);
  const double nn = static_cast<double>(n);
  row.slope_lo = -std::log(w.hi) / nn;
  row.slope_hi = w.lo > 0.0 ? -std::log(w.lo) / nn : std::numeric_limits<double>::infinity();
  if (row.hits == 0) {
    row.slope_is_bound = true;
    row.slope = row.slope_lo;
  } else {
    row.slope = -std::log(row.p_hat) / nn;
  }
  return row;
}

std::uint64_t seed_for_n(std::uint64_t seed, std::size_t n) { return splitmix64(seed + 0x632be59bd9b4e019ULL * n); }

}  // namespace

LdpEstimate estimate_ldp_curve(const GibbsModel& model, const EventSpec& event, std::span<const std::size_t> n_list,
                               std::size_t chains_per_n, const SamplerConfig& cfg, const GridDensity* p_inf) {
  if (chains_per_n == 0) throw InvalidArgument("need at least one chain per n");
  if (!(cfg.step > 0.0)) throw InvalidArgument("step size must be positive");
  if (event.kind == EventKind::w1_to_stationary_at_least && !p_inf)
    throw InvalidArgument("w1 event needs the stationary density");
  LdpEstimate out;
  out.event = event;
  out.law = "interacting";
  for (std::size_t n : n_list) {
    if (n < 2) throw InvalidArgument("LDP chains need n >= 2");
    const GibbsTarget target(model, n, 1);
    const std::uint64_t seed = seed_for_n(cfg.seed, n);
    std::vector<double> stats(chains_per_n);
    kernels::parallel::for_each_index(chains_per_n, [&](std::size_t c) {
      ChainState s = init_chain(target, seed, c);
      for (std::size_t i = 0; i < cfg.burn_in; ++i) {
        if (cfg.algorithm == Algorithm::mala)
          step_mala(s, target, cfg.step);
        else
          step_em(s, target, cfg.step);
      }
      stats[c] = event_statistic(event, s.x, p_inf);
    });
    out.rows.push_back(make_row(n, stats, event.threshold));
  }
  return out;
}

LdpEstimate estimate_ldp_curve_iid(const GridDensity& p_inf, const EventSpec& event,
                                   std::span<const std::size_t> n_list, std::size_t chains, std::uint64_t seed) {
  if (chains == 0) throw InvalidArgument("need at least one chain per n");
  const auto Fe = p_inf.cdf_edges();
  const Grid& g = p_inf.grid();
  auto quantile = [&](double u) {
    u *= Fe.back();
    const auto it = std::upper_bound(Fe.begin(), Fe.end(), u);
    std::size_t i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - Fe.begin(), 1, static_cast<std::ptrdiff_t>(g.m))) - 1;
    const double dF = Fe[i + 1] - Fe[i];
    const double t = dF > 0.0 ? std::clamp((u - Fe[i]) / dF, 0.0, 1.0) : 0.5;
    return g.edge(i) + t * g.dx();
  };
  LdpEstimate out;
  out.event = event;
  out.law = "iid-surrogate";
  for (std::size_t n : n_list) {
    if (n < 2) throw InvalidArgument("LDP draws need n >= 2");
    const std::uint64_t sn = seed_for_n(seed ^ 0x5bd1e995ULL, n);
    std::vector<double> stats(chains);
    kernels::parallel::for_each_index(chains, [&](std::size_t c) {
      std::mt19937_64 rng(chain_seed(sn, c));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> x(n);
      for (double& v : x) v = quantile(u(rng));
      project_to_hyperplane(x, n, 1);
      stats[c] = event_statistic(event, x, &p_inf);
    });
    out.rows.push_back(make_row(n, stats, event.threshold));
  }
  return out;
}

RateInfimum rate_infimum_from(const GridDensity& p_inf, double f_star, const EventSpec& e,
                              const std::function<double(const GridDensity&)>& free_energy_of, double theta_max) {
  if (e.kind == EventKind::w1_to_stationary_at_least)
    throw NotImplemented("no tilted-family reference for w1 events");
  if (e.kind == EventKind::vartheta_at_least && e.ell != 1.0)
    throw NotImplemented("tilted-family reference only for vartheta with ell = 1");
  const Grid& g = p_inf.grid();
  auto tilt = [&](double theta) {
    std::vector<double> v(g.m);
    for (std::size_t i = 0; i < g.m; ++i) v[i] = p_inf[i] * std::exp(theta * std::abs(g.center(i)));
    return GridDensity::normalized(g, std::move(v));
  };
  const double base = event_statistic(e, p_inf);
  const std::string note = "value of the exponential-tilt family p_inf*exp(theta|x|); an upper bound for the infimum over all measures";
  if (e.threshold <= base) return {0.0, 0.0, f_star, base, note};

  double lo = 0.0, hi;
  if (std::isfinite(theta_max)) {
    hi = theta_max * (1.0 - 1e-9);
    if (event_statistic(e, tilt(hi)) < e.threshold)
      throw InvalidArgument("threshold lies beyond what the tilted family reaches on this grid");
  } else {
    hi = 1.0;
    while (event_statistic(e, tilt(hi)) < e.threshold) {
      hi *= 2.0;
      if (hi > 1e6) throw InvalidArgument("threshold lies beyond what the tilted family reaches on this grid");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (event_statistic(e, tilt(mid)) < e.threshold)
      lo = mid;
    else
      hi = mid;
  }
  const auto p = tilt(hi);
  double value = free_energy_of(p) - f_star;
  if (value < 0.0 && value >= -1e-8) value = 0.0;
  return {value, hi, f_star, base, note};
}

RateInfimum rate_infimum(const RbModel& m, const EventSpec& e, const Grid& g) {
  const auto st = stationary_rb(m, g);
  const double f_star = free_energy(st.density, m);
  // p_inf decays like exp((2/sigma2) b(0) x) on the left and exp((2/sigma2) b(1) x) on the right
  const double theta_max = (2.0 / m.sigma2) * std::min(m.b(0.0), -m.b(1.0));
  return rate_infimum_from(st.density, f_star, e, [&](const GridDensity& p) { return free_energy(p, m); }, theta_max);
}

RateInfimum rate_infimum(const MvModel& m, const EventSpec& e, const Grid& g) {
  const auto mn = minimize_free_energy_mv(m, g);
  const double theta_max = m.ell > 1.0 ? std::numeric_limits<double>::infinity() : (2.0 / m.sigma2) * m.kappa * 2.0;
  return rate_infimum_from(mn.density, mn.f_star, e, [&](const GridDensity& p) { return free_energy(p, m); }, theta_max);
}

std::vector<std::pair<double, double>> tilting_event_catalogue() {
  const double inf = std::numeric_limits<double>::infinity();
  return {{0.0, inf}, {1.0, 3.0}, {0.0, 0.5}, {2.0, 10.0}, {5.0, inf}, {1.0, 0.0}};
}

namespace {

template <class F>
double integrate(F&& f, double a, double b) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14, &err);
  if (!std::isfinite(v)) throw ConvergenceError("gap-coordinate quadrature returned a non-finite value", 0, err);
  return v;
}

// integrate over [a, b] with b possibly infinite, split at unit intervals near
// the origin where the integrands have their structure
template <class F>
double integrate_gap(F&& f, double a, double b, double cutoff) {
  b = std::min(b, cutoff);
  if (!(b > a)) return 0.0;
  double total = 0.0;
  double lo = a;
  for (double edge = std::floor(a) + 1.0; lo < b; edge += (edge < 16.0 ? 1.0 : edge)) {
    const double hi = std::min(edge, b);
    if (hi > lo) total += integrate(f, lo, hi);
    lo = hi;
  }
  return total;
}

}  // namespace

TiltingReport verify_tilting(const GibbsModel& model, double eta, double ell) {
  const GibbsTarget target(model, 2, 1);
  const double s2 = target.sigma2();
  const double c = 4.0 / s2;  // 2n / sigma2 at n = 2
  const ConfiningSpec spec{eta, ell, 1, s2};
  spec.validate();

  auto W = [&](double g) {
    const double x[2] = {-0.5 * g, 0.5 * g};
    return target.energy(x);
  };
  auto V = [&](double g) {
    const double x[2] = {-0.5 * g, 0.5 * g};
    return hat_v_raw(x, 2, 1, spec);
  };
  // past the cutoff exp(-c W) is below 1e-300 of its value at 0
  double cutoff = 1.0;
  while (c * (W(cutoff) - W(0.0)) < 700.0) cutoff *= 2.0;

  auto gibbs = [&](double g) { return std::exp(-c * W(g)); };
  auto tilted = [&](double g) { return std::exp(-c * (V(g) + W(g))); };
  const double inf = std::numeric_limits<double>::infinity();
  const double z = integrate_gap(gibbs, 0.0, inf, cutoff);
  const double z_eta = integrate_gap(tilted, 0.0, inf, cutoff);

  TiltingReport rep;
  rep.eta = eta;
  rep.ell = ell;
  rep.ratio = z_eta / z;
  rep.max_residual = 0.0;
  // right side: (Z~eta/Z~) * int 1_B exp(c V) dP~eta, with the P~eta density
  // evaluated as is rather than cancelled against exp(c V) by hand
  auto rhs_integrand = [&](double g) {
    const double log_density = -c * (V(g) + W(g)) - std::log(z_eta);
    return std::exp(c * V(g) + log_density);
  };
  for (const auto& [u, v] : tilting_event_catalogue()) {
    TiltingRow row{u, v, 0.0, 0.0, 0.0};
    if (u <= v) {
      row.lhs = integrate_gap(gibbs, u, v, cutoff) / z;
      row.rhs = rep.ratio * integrate_gap(rhs_integrand, u, v, cutoff);
    }
    const double scale = std::max(std::abs(row.lhs), std::abs(row.rhs));
    row.residual = scale > 0.0 ? std::abs(row.lhs - row.rhs) / scale : 0.0;
    rep.max_residual = std::max(rep.max_residual, row.residual);
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

double log_mean_exp(const std::vector<double>& a, std::size_t from, std::size_t to, std::size_t skip_from = 0,
                    std::size_t skip_to = 0) {
  double mx = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (std::size_t i = from; i < to; ++i)
    if (i < skip_from || i >= skip_to) {
      mx = std::max(mx, a[i]);
      ++count;
    }
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i)
    if (i < skip_from || i >= skip_to) s += std::exp(a[i] - mx);
  return mx + std::log(s / static_cast<double>(count));
}

}  // namespace

ExpMomentTable exp_moment_diag(const GibbsModel& model, std::span<const double> etas,
                               std::span<const std::size_t> n_list, double q, const SamplerConfig& cfg, double ell) {
  if (!(q >= 1.0)) throw InvalidArgument("exponent q must be >= 1");
  ExpMomentTable table{q, {}, true};
  const double s2 = model_sigma2(model);
  for (std::size_t n : n_list) {
    const GibbsTarget target(model, n, 1);
    const double l = ell > 0.0 ? ell : target.ell();
    std::vector<ExpMomentRow> rows_n;
    if (n == 2) {
      const double c = 4.0 / s2;
      for (double eta : etas) {
        const ConfiningSpec spec{eta, l, 1, s2};
        auto W = [&](double g) {
          const double x[2] = {-0.5 * g, 0.5 * g};
          return target.energy(x);
        };
        auto V = [&](double g) {
          const double x[2] = {-0.5 * g, 0.5 * g};
          return hat_v_raw(x, 2, 1, spec);
        };
        double cutoff = 1.0;
        while (c * ((q - 1.0) * (-V(cutoff)) + W(cutoff) - W(0.0)) < 700.0 && cutoff < 1e6) cutoff *= 2.0;
        const double inf = std::numeric_limits<double>::infinity();
        const double z_eta = integrate_gap([&](double g) { return std::exp(-c * (V(g) + W(g))); }, 0.0, inf, cutoff);
        const double num = integrate_gap([&](double g) { return std::exp(c * (q - 1.0) * V(g) - c * W(g)); }, 0.0, inf, cutoff);
        rows_n.push_back({eta, n, std::log(num / z_eta) / 2.0, 0.0, "quadrature"});
      }
    } else {
      SamplerConfig sc = cfg;
      sc.n = n;
      sc.d = 1;
      const auto samples = sample_equilibrium(model, sc);
      const std::size_t N = samples.size();
      if (N < 4) throw InsufficientData("exponential-moment diagnostic needs at least 4 samples per n");
      const double c = 2.0 * static_cast<double>(n) / s2;
      for (double eta : etas) {
        const ConfiningSpec spec{eta, l, 1, s2};
        std::vector<double> up(N), down(N);
        for (std::size_t i = 0; i < N; ++i) {
          const double a = c * hat_v_raw(samples.row(i), n, 1, spec);
          up[i] = (q - 1.0) * a;
          down[i] = -a;
        }
        auto estimate = [&](std::size_t skip_from, std::size_t skip_to) {
          return log_mean_exp(up, 0, N, skip_from, skip_to) - log_mean_exp(down, 0, N, skip_from, skip_to);
        };
        const double full = estimate(0, 0);
        // delete-one-block jackknife on the log ratio
        const std::size_t blocks = std::min<std::size_t>(20, N);
        const std::size_t len = N / blocks;
        std::vector<double> jk(blocks);
        for (std::size_t b = 0; b < blocks; ++b) jk[b] = estimate(b * len, (b + 1) * len);
        const double jm = std::accumulate(jk.begin(), jk.end(), 0.0) / static_cast<double>(blocks);
        double var = 0.0;
        for (double v : jk) var += (v - jm) * (v - jm);
        var *= static_cast<double>(blocks - 1) / static_cast<double>(blocks);
        const double nn = static_cast<double>(n);
        rows_n.push_back({eta, n, full / nn, std::sqrt(var) / nn, "reweighting"});
      }
    }
    std::vector<ExpMomentRow> sorted = rows_n;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.eta > b.eta; });
    for (std::size_t k = 1; k < sorted.size(); ++k) {
      const double tol = 2.0 * std::hypot(sorted[k].standard_error, sorted[k - 1].standard_error);
      if (sorted[k].value > sorted[k - 1].value + tol + 1e-12) table.trend_consistent = false;
    }
    table.rows.insert(table.rows.end(), rows_n.begin(), rows_n.end());
  }
  return table;
}

SanovComparison sanov_compare(const RbModel& model, const EventSpec& event, std::span<const std::size_t> n_list,
                              std::size_t chains, const SamplerConfig& cfg, const GridDensity& p_inf) {
  if (n_list.empty()) throw InvalidArgument("sanov_compare needs at least one n");
  SanovComparison out{estimate_ldp_curve(model, event, n_list, chains, cfg, &p_inf),
                      estimate_ldp_curve_iid(p_inf, event, n_list, chains, cfg.seed), true};
  const auto& a = out.interacting.rows.back();
  const auto& b = out.surrogate.rows.back();
  out.ordering_consistent = a.slope_lo <= b.slope_hi;
  return out;
}

}  // namespace mfldp
