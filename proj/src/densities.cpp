#include "mfldp/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mfldp/errors.hpp"
#include "mfldp/kernels.hpp"

namespace mfldp {

void Grid::validate() const {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw InvalidArgument("grid needs lo < hi");
  if (m < 2) throw InvalidArgument("grid needs at least two cells");
}

Grid default_grid(double sigma2) {
  const double half = std::max(40.0, 20.0 * sigma2);
  return {-half, half, static_cast<std::size_t>(std::llround(2.0 * half / 0.005))};
}

GridDensity::GridDensity(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  if (values_.size() != grid_.m) throw DimensionError("density has the wrong number of cells for its grid");
  double mass = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("density values must be finite and nonnegative");
    mass += v;
  }
  mass *= grid_.dx();
  if (std::abs(mass - 1.0) > 1e-10) throw InvalidArgument("density does not integrate to 1 (mass " + std::to_string(mass) + ")");
}

GridDensity GridDensity::normalized(Grid grid, std::vector<double> values) {
  grid.validate();
  double mass = 0.0;
  for (double v : values) mass += v;
  mass *= grid.dx();
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidArgument("cannot normalize a density with zero or infinite mass");
  for (double& v : values) v /= mass;
  return GridDensity(grid, std::move(values));
}

std::vector<double> GridDensity::cdf_edges() const {
  std::vector<double> F(values_.size() + 1, 0.0);
  const double h = grid_.dx();
  for (std::size_t i = 0; i < values_.size(); ++i) F[i + 1] = F[i] + values_[i] * h;
  return F;
}

std::vector<double> GridDensity::cdf_centers() const {
  const auto Fe = cdf_edges();
  const double h = grid_.dx();
  std::vector<double> F(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) F[i] = Fe[i] + 0.5 * values_[i] * h;
  return F;
}

double GridDensity::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += grid_.center(i) * values_[i];
  return s * grid_.dx();
}

double GridDensity::quantile(double u) const {
  const auto Fe = cdf_edges();
  u = std::clamp(u, 0.0, Fe.back());
  const auto it = std::lower_bound(Fe.begin() + 1, Fe.end(), u);
  const std::size_t i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - Fe.begin(), static_cast<std::ptrdiff_t>(Fe.size() - 1))) - 1;
  const double dF = Fe[i + 1] - Fe[i];
  const double t = dF > 0.0 ? (u - Fe[i]) / dF : 0.0;
  return grid_.edge(i) + t * grid_.dx();
}

namespace {

void require_same_grid(const GridDensity& p, const GridDensity& q) {
  if (!(p.grid() == q.grid())) throw DimensionError("densities live on incompatible grids");
}

std::vector<double> mv_convolution(const GridDensity& p, const MvModel& m) {
  const Grid& g = p.grid();
  const std::size_t n = g.m;
  std::vector<double> lags(2 * n - 1);
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const double x = (static_cast<double>(k) - static_cast<double>(n - 1)) * g.dx();
    lags[k] = m.radial ? m.radial->value_r(std::abs(x)) : m.potential(std::span<const double>(&x, 1));
  }
  std::vector<double> out(n);
  kernels::parallel::convolve(lags, p.values(), out);
  for (double& v : out) v *= g.dx();
  return out;
}

double entropy_of(const std::vector<double>& v, double h) {
  double s = 0.0;
  for (double x : v)
    if (x > 0.0) s += x * std::log(x);
  return s * h;
}

}  // namespace

GridDensity translate(const GridDensity& p, double y) {
  // cell i receives the source interval [e_i - y, e_{i+1} - y], which overlaps at
  // most two source cells; summing overlaps directly keeps the tails exact where
  // CDF differences would cancel
  const Grid& g = p.grid();
  const double h = g.dx();
  const double cells = y / h;
  const double whole = std::floor(cells);
  const double t = cells - whole;  // fraction of cell j - k - 1 that lands in cell j
  const auto k = static_cast<long long>(whole);
  const auto m = static_cast<long long>(g.m);
  auto at = [&](long long j) { return (j >= 0 && j < m) ? p[static_cast<std::size_t>(j)] : 0.0; };
  std::vector<double> v(g.m);
  for (long long i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] = (1.0 - t) * at(i - k) + t * at(i - k - 1);
  return GridDensity::normalized(g, std::move(v));
}

GridDensity shift_cells(const GridDensity& p, long k) {
  const std::size_t m = p.size();
  std::vector<double> v(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const long j = static_cast<long>(i) - k;
    if (j >= 0 && j < static_cast<long>(m)) v[i] = p[static_cast<std::size_t>(j)];
  }
  return GridDensity::normalized(p.grid(), std::move(v));
}

GridDensity recenter(const GridDensity& p) { return translate(p, -p.mean()); }

double entropy(const GridDensity& p) { return entropy_of(p.values(), p.grid().dx()); }

double relative_entropy(const GridDensity& p, const GridDensity& q) {
  require_same_grid(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s * p.grid().dx();
}

double energy_of_density(const GridDensity& p, const MvModel& m) {
  const auto conv = mv_convolution(p, m);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * conv[i];
  return 0.5 * s * p.grid().dx();
}

double energy_of_density(const GridDensity& p, const RbModel& m) {
  const auto F = p.cdf_centers();
  double s = 0.0;
  for (double u : F) s += m.B(u);
  return s * p.grid().dx();
}

double free_energy(const GridDensity& p, const MvModel& m) {
  return entropy(p) + (2.0 / m.sigma2) * energy_of_density(p, m);
}

double free_energy(const GridDensity& p, const RbModel& m) {
  return entropy(p) + (2.0 / m.sigma2) * energy_of_density(p, m);
}

namespace {

// exp((2/sigma2) int b(F_p)) normalized; the integral of b(F) over a stretch where
// F is linear with slope p is exactly (B(F_end) - B(F_start)) / p
std::vector<double> fixed_point_map(const std::vector<double>& p, const Grid& g, const RbModel& m) {
  const std::size_t n = p.size();
  const double h = g.dx();
  // survival values summed from the right keep 1 - F accurate in the upper tail
  std::vector<double> Fe(n + 1, 0.0), Se(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) Fe[i + 1] = Fe[i] + p[i] * h;
  for (std::size_t i = n; i-- > 0;) Se[i] = Se[i + 1] + p[i] * h;
  auto seg = [&](double Fa, double Sa, double Fb, double Sb, double slope) {
    return slope > 1e-300 ? (m.flux(Fb, Sb) - m.flux(Fa, Sa)) / slope : 0.5 * h * m.b(Fa);
  };
  std::vector<double> logt(n, 0.0);
  double prev_right = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double Fc = Fe[i] + 0.5 * p[i] * h;
    const double Sc = Se[i + 1] + 0.5 * p[i] * h;
    const double left = seg(Fe[i], Se[i], Fc, Sc, p[i]);
    if (i > 0) logt[i] = logt[i - 1] + prev_right + left;
    prev_right = seg(Fc, Sc, Fe[i + 1], Se[i + 1], p[i]);
  }
  const double c = 2.0 / m.sigma2;
  double mx = -std::numeric_limits<double>::infinity();
  for (double& v : logt) {
    v *= c;
    mx = std::max(mx, v);
  }
  double mass = 0.0;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(logt[i] - mx);
    mass += out[i];
  }
  for (double& v : out) v /= mass * h;
  return out;
}

}  // namespace

double fokker_planck_residual_l1(const GridDensity& p, const RbModel& m) {
  const auto& v = p.values();
  const auto Fe = p.cdf_edges();
  const double h = p.grid().dx();
  const std::size_t n = v.size();
  // flux J at interior edges, residual is its divided difference
  std::vector<double> J(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    J[i] = 0.5 * m.sigma2 * (v[i + 1] - v[i]) / h - m.b(Fe[i + 1]) * 0.5 * (v[i] + v[i + 1]);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < J.size(); ++i) s += std::abs(J[i + 1] - J[i]);
  return s;
}

StationaryResult stationary_rb(const RbModel& m, const Grid& g, const StationaryOptions& opt) {
  g.validate();
  if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw InvalidArgument("damping must lie in (0, 1]");
  auto p = GridDensity::from_function(g, [](double x) { return std::exp(-0.5 * x * x); });
  double change = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    const auto t = fixed_point_map(p.values(), g, m);
    std::vector<double> mix(g.m);
    for (std::size_t i = 0; i < g.m; ++i) mix[i] = (1.0 - opt.damping) * p[i] + opt.damping * t[i];
    auto next = recenter(GridDensity::normalized(g, std::move(mix)));
    change = 0.0;
    for (std::size_t i = 0; i < g.m; ++i) change = std::max(change, std::abs(next[i] - p[i]));
    p = std::move(next);
    if (change < opt.tol) {
      const double res = fokker_planck_residual_l1(p, m);
      return {std::move(p), it, change, res};
    }
  }
  throw ConvergenceError("stationary fixed point did not converge", opt.max_iter, change);
}

std::vector<double> first_variation(const GridDensity& p, const MvModel& m) {
  const auto conv = mv_convolution(p, m);
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    v[i] = (p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity()) + 1.0 + (2.0 / m.sigma2) * conv[i];
  return v;
}

MinimizeResult minimize_free_energy_mv(const MvModel& m, const Grid& g, const MinimizeOptions& opt) {
  g.validate();
  if (!(opt.step > 0.0 && opt.step <= 1.0)) throw InvalidArgument("mirror-descent step must lie in (0, 1]");
  const std::size_t n = g.m;
  const double h = g.dx();
  // iterate on log-weights so tail cells stay finite
  std::vector<double> logp(n);
  for (std::size_t i = 0; i < n; ++i) logp[i] = -0.5 * g.center(i) * g.center(i);

  auto densify = [&](std::vector<double>& lp) {
    const double mx = *std::max_element(lp.begin(), lp.end());
    double mass = 0.0;
    for (double v : lp) mass += std::exp(v - mx);
    const double shift = mx + std::log(mass * h);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      lp[i] -= shift;
      v[i] = std::exp(lp[i]);
    }
    return GridDensity::normalized(g, std::move(v));
  };

  GridDensity p = densify(logp);
  double spread = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    const auto conv = mv_convolution(p, m);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::vector<double> field(n);
    for (std::size_t i = 0; i < n; ++i) {
      field[i] = logp[i] + 1.0 + (2.0 / m.sigma2) * conv[i];
      if (p[i] > 0.0) {
        lo = std::min(lo, field[i]);
        hi = std::max(hi, field[i]);
      }
    }
    spread = hi - lo;
    if (spread < opt.tol) return {p, free_energy(p, m), it, spread};
    for (std::size_t i = 0; i < n; ++i) logp[i] -= opt.step * field[i];
    p = densify(logp);
    const double mu = p.mean();
    if (std::abs(mu) > 1e-12) {
      // shift the log-weights by -mu cells with linear interpolation
      std::vector<double> shifted(n);
      const double cells = mu / h;
      for (std::size_t i = 0; i < n; ++i) {
        const double src = std::clamp(static_cast<double>(i) + cells, 0.0, static_cast<double>(n - 1));
        const auto j = static_cast<std::size_t>(src);
        const double t = src - static_cast<double>(j);
        shifted[i] = j + 1 < n ? (1.0 - t) * logp[j] + t * logp[j + 1] : logp[j];
      }
      logp.swap(shifted);
      p = densify(logp);
    }
  }
  throw ConvergenceError("free-energy mirror descent did not converge", opt.max_iter, spread);
}

namespace {
double floor_rate(double r) { return (r < 0.0 && r >= -1e-8) ? 0.0 : r; }
}  // namespace

double rate(const GridDensity& p, const MvModel& m, double f_star) { return floor_rate(free_energy(p, m) - f_star); }
double rate(const GridDensity& p, const RbModel& m, double f_star) { return floor_rate(free_energy(p, m) - f_star); }

RateGap rate_gap(const GridDensity& p, const RbModel& m, const GridDensity& p_inf) {
  require_same_grid(p, p_inf);
  const auto Fp = p.cdf_centers(), Fi = p_inf.cdf_centers();
  double gamma = 0.0;
  for (std::size_t i = 0; i < Fp.size(); ++i)
    gamma += m.B(Fp[i]) - m.B(Fi[i]) - m.b(Fi[i]) * (Fp[i] - Fi[i]);
  return {relative_entropy(p, p_inf), (2.0 / m.sigma2) * gamma * p.grid().dx()};
}

}  // namespace mfldp
