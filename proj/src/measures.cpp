#include "mfldp/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "mfldp/errors.hpp"
#include "mfldp/kernels.hpp"

namespace mfldp {

namespace {

void require_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidArgument("configuration has a non-finite coordinate");
}

void require_1d(const EmpiricalMeasure& m, const char* op) {
  if (m.d() != 1) throw DimensionError(std::string(op) + " is only supported for d = 1");
}

// Pieces of the quantile coupling: on a u-interval of length weight the two
// quantile functions are constant and differ by delta = Q_a - Q_b.
struct Piece {
  double weight;
  double delta;
};

std::vector<Piece> quantile_pieces(const std::vector<double>& xa, const std::vector<double>& xb) {
  // breakpoints i/na and j/nb, compared on the common denominator na*nb
  const auto na = static_cast<std::uint64_t>(xa.size());
  const auto nb = static_cast<std::uint64_t>(xb.size());
  const double denom = static_cast<double>(na) * static_cast<double>(nb);
  std::vector<Piece> out;
  out.reserve(xa.size() + xb.size());
  std::size_t i = 0, j = 0;
  std::uint64_t t = 0;
  while (i < xa.size() && j < xb.size()) {
    const std::uint64_t ea = (i + 1) * nb, eb = (j + 1) * na;
    const std::uint64_t e = std::min(ea, eb);
    if (e > t) out.push_back({static_cast<double>(e - t) / denom, xa[i] - xb[j]});
    t = e;
    if (ea == e) ++i;
    if (eb == e) ++j;
  }
  return out;
}

double lp_cost(const std::vector<Piece>& pieces, double shift, double p) {
  double s = 0.0;
  for (const auto& pc : pieces) {
    const double r = std::abs(pc.delta - shift);
    s += pc.weight * (p == 1.0 ? r : (p == 2.0 ? r * r : std::pow(r, p)));
  }
  return s;
}

std::size_t allowed_unmatched(std::size_t n, double eps) {
  const double v = std::floor(static_cast<double>(n) * eps + 1e-9);
  return v < 0 ? 0 : static_cast<std::size_t>(v);
}

}  // namespace

Configuration::Configuration(std::size_t n, std::size_t d, std::vector<double> coords)
    : n_(n), d_(d), coords_(std::move(coords)) {
  if (n_ < 1 || d_ < 1) throw InvalidArgument("configuration needs n >= 1 and d >= 1");
  if (coords_.size() != n_ * d_) throw DimensionError("coordinate count is not n * d");
  require_finite(coords_);
}

Configuration Configuration::from_1d(std::vector<double> xs) {
  const std::size_t n = xs.size();
  return Configuration(n, 1, std::move(xs));
}

CenteredConfiguration::CenteredConfiguration(std::size_t n, std::size_t d, std::vector<double> coords)
    : CenteredConfiguration(Configuration(n, d, std::move(coords))) {}

CenteredConfiguration::CenteredConfiguration(Configuration c) : Configuration(std::move(c)) {
  for (std::size_t k = 0; k < d_; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += coords_[i * d_ + k];
    if (std::abs(s) > 1e-12 * static_cast<double>(n_))
      throw InvalidArgument("configuration is not centered (component sum " + std::to_string(s) + ")");
  }
}

void project_to_hyperplane(std::span<double> coords, std::size_t n, std::size_t d) {
  for (std::size_t k = 0; k < d; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += coords[i * d + k];
    const double mean = s / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) coords[i * d + k] -= mean;
  }
}

CenteredConfiguration center(const Configuration& c) {
  std::vector<double> v = c.coords();
  project_to_hyperplane(v, c.n(), c.d());
  // one subtraction of the mean can leave a residual sum of a few ulps times the
  // magnitude; a second pass removes it
  project_to_hyperplane(v, c.n(), c.d());
  return CenteredConfiguration(c.n(), c.d(), std::move(v));
}

EmpiricalMeasure::EmpiricalMeasure(std::size_t n, std::size_t d, std::vector<double> atoms)
    : n_(n), d_(d), atoms_(std::move(atoms)) {
  if (n_ < 1 || d_ < 1) throw InvalidArgument("empirical measure needs at least one atom");
  if (atoms_.size() != n_ * d_) throw DimensionError("atom coordinate count is not n * d");
  require_finite(atoms_);
}

EmpiricalMeasure::EmpiricalMeasure(const Configuration& c) : EmpiricalMeasure(c.n(), c.d(), c.coords()) {}

EmpiricalMeasure EmpiricalMeasure::from_1d(std::vector<double> xs) {
  const std::size_t n = xs.size();
  return EmpiricalMeasure(n, 1, std::move(xs));
}

std::vector<double> EmpiricalMeasure::sorted_atoms() const {
  require_1d(*this, "sorted_atoms");
  std::vector<double> s = atoms_;
  std::sort(s.begin(), s.end());
  return s;
}

double EmpiricalMeasure::cdf(double x) const {
  require_1d(*this, "cdf");
  const auto below = std::count_if(atoms_.begin(), atoms_.end(), [x](double a) { return a <= x; });
  return static_cast<double>(below) / static_cast<double>(n_);
}

std::vector<double> EmpiricalMeasure::mean() const {
  std::vector<double> mu(d_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < d_; ++k) mu[k] += atoms_[i * d_ + k];
  for (double& v : mu) v /= static_cast<double>(n_);
  return mu;
}

EmpiricalMeasure translate(const EmpiricalMeasure& m, std::span<const double> y) {
  if (y.size() != m.d()) throw DimensionError("shift dimension does not match the measure");
  std::vector<double> a = m.atoms();
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t k = 0; k < m.d(); ++k) a[i * m.d() + k] += y[k];
  return EmpiricalMeasure(m.size(), m.d(), std::move(a));
}

EmpiricalMeasure translate(const EmpiricalMeasure& m, double y) {
  return translate(m, std::span<const double>(&y, 1));
}

EmpiricalMeasure center(const EmpiricalMeasure& m) {
  auto c = center(Configuration(m.size(), m.d(), m.atoms()));
  return EmpiricalMeasure(c);
}

double wasserstein_1d_cdf(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  require_1d(a, "wasserstein_1d");
  require_1d(b, "wasserstein_1d");
  const auto xa = a.sorted_atoms(), xb = b.sorted_atoms();
  const auto na = static_cast<long long>(xa.size()), nb = static_cast<long long>(xb.size());
  // between consecutive breakpoints F_a - F_b = (ca*nb - cb*na) / (na*nb) exactly
  long long ca = 0, cb = 0;
  std::size_t i = 0, j = 0;
  double acc = 0.0;
  double prev = std::min(xa.front(), xb.front());
  while (i < xa.size() || j < xb.size()) {
    const double next = (j == xb.size() || (i < xa.size() && xa[i] <= xb[j])) ? xa[i] : xb[j];
    acc += static_cast<double>(std::llabs(ca * nb - cb * na)) * (next - prev);
    while (i < xa.size() && xa[i] == next) ++i, ++ca;
    while (j < xb.size() && xb[j] == next) ++j, ++cb;
    prev = next;
  }
  return acc / (static_cast<double>(na) * static_cast<double>(nb));
}

double wasserstein_1d_matching(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
  require_1d(a, "wasserstein_1d");
  require_1d(b, "wasserstein_1d");
  if (!(p >= 1.0)) throw InvalidArgument("Wasserstein order must be >= 1");
  if (a.size() != b.size()) throw InvalidArgument("sorted matching needs equal atom counts");
  const auto xa = a.sorted_atoms(), xb = b.sorted_atoms();
  double s = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    const double r = std::abs(xa[i] - xb[i]);
    s += p == 1.0 ? r : std::pow(r, p);
  }
  s /= static_cast<double>(xa.size());
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
  require_1d(a, "wasserstein_1d");
  require_1d(b, "wasserstein_1d");
  if (!(p >= 1.0)) throw InvalidArgument("Wasserstein order must be >= 1");
  if (p == 1.0) return wasserstein_1d_cdf(a, b);
  if (a.size() == b.size()) return wasserstein_1d_matching(a, b, p);
  const auto pieces = quantile_pieces(a.sorted_atoms(), b.sorted_atoms());
  return std::pow(lp_cost(pieces, 0.0, p), 1.0 / p);
}

double prohorov_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  require_1d(a, "prohorov_1d");
  require_1d(b, "prohorov_1d");
  if (a.size() != b.size())
    throw NotImplemented("prohorov_1d needs equal atom counts");
  const std::size_t n = a.size();
  const auto xa = a.sorted_atoms(), xb = b.sorted_atoms();

  std::vector<double> cand;
  cand.reserve(n * n + n + 1);
  for (double x : xa)
    for (double y : xb) cand.push_back(std::abs(x - y));
  for (std::size_t k = 0; k <= n; ++k) cand.push_back(static_cast<double>(k) / static_cast<double>(n));
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  auto feasible = [&](double eps) {
    const std::size_t m = kernels::window_matching(xa, xb, -eps, eps);
    return n - m <= allowed_unmatched(n, eps);
  };
  // eps = 1 is always feasible, so the search has a true upper end
  std::size_t lo = 0, hi = cand.size() - 1;
  while (cand[hi] > 1.0) --hi;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(cand[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return cand[lo];
}

namespace {

QuotientResult quotient_wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("Wasserstein order must be >= 1");
  auto pieces = quantile_pieces(a.sorted_atoms(), b.sorted_atoms());
  double shift;
  if (p == 1.0) {
    // weighted median of delta
    std::sort(pieces.begin(), pieces.end(), [](const Piece& l, const Piece& r) { return l.delta < r.delta; });
    double acc = 0.0;
    shift = pieces.back().delta;
    for (const auto& pc : pieces) {
      acc += pc.weight;
      if (acc >= 0.5 - 1e-15) {
        shift = pc.delta;
        break;
      }
    }
  } else if (p == 2.0) {
    shift = 0.0;
    for (const auto& pc : pieces) shift += pc.weight * pc.delta;
  } else {
    double lo = pieces.front().delta, hi = lo;
    for (const auto& pc : pieces) {
      lo = std::min(lo, pc.delta);
      hi = std::max(hi, pc.delta);
    }
    // the cost is convex in the shift and its minimizer lies in [min delta, max delta]
    const auto r = boost::math::tools::brent_find_minima(
        [&](double y) { return lp_cost(pieces, y, p); }, lo, hi, 50);
    shift = r.first;
  }
  const double cost = lp_cost(pieces, shift, p);
  return {p == 1.0 ? cost : std::pow(cost, 1.0 / p), shift};
}

// Number of pairs q > p with lo < d[q] - d[p] < hi over sorted d.
std::size_t count_gaps(const std::vector<double>& d, double lo, double hi) {
  std::size_t count = 0, q_lo = 0, q_hi = 0;
  for (std::size_t p = 0; p < d.size(); ++p) {
    q_lo = std::max(q_lo, p + 1);
    q_hi = std::max(q_hi, p + 1);
    while (q_lo < d.size() && d[q_lo] - d[p] <= lo) ++q_lo;
    while (q_hi < d.size() && d[q_hi] - d[p] < hi) ++q_hi;
    if (q_hi > q_lo) count += q_hi - q_lo;
  }
  return count;
}

QuotientResult quotient_prohorov(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.size() != b.size())
    throw NotImplemented("quotient Prohorov distance needs equal atom counts");
  const std::size_t n = a.size();
  const auto xa = a.sorted_atoms(), xb = b.sorted_atoms();

  // pair differences x_i - y_j; a matched pair (i, j) under shift y needs
  // |x_i - y_j - y| <= eps, and an optimal window can be slid until its left end
  // sits on one of these differences
  std::vector<double> diffs;
  diffs.reserve(n * n);
  for (double x : xa)
    for (double y : xb) diffs.push_back(x - y);
  std::sort(diffs.begin(), diffs.end());
  std::vector<double> anchors = diffs;
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());

  double best_anchor = anchors.front();
  auto matched = [&](double eps) {
    const double width = 2.0 * eps;
    // candidate widths are rounded differences of the same doubles the kernel
    // compares; a few ulps of slack keep the boundary pair inside
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(anchors.front()) + std::abs(anchors.back()) + width);
    return kernels::parallel::best_anchored_matching(xa, xb, anchors, width + slack);
  };
  auto feasible = [&](double eps) { return n - matched(eps) <= allowed_unmatched(n, eps); };

  // smallest k with eps = k/n feasible
  std::size_t klo = 0, khi = n;
  while (klo < khi) {
    const std::size_t mid = (klo + khi) / 2;
    if (feasible(static_cast<double>(mid) / static_cast<double>(n)))
      khi = mid;
    else
      klo = mid + 1;
  }
  double answer = static_cast<double>(klo) / static_cast<double>(n);
  if (klo > 0) {
    // inside ((k-1)/n, k/n) the budget of unmatched pairs is fixed at k-1 and the
    // threshold is one of the half-gaps (d_q - d_p)/2
    double lo = static_cast<double>(klo - 1) / static_cast<double>(n);
    double hi = answer;
    const std::size_t need = n - (klo - 1);
    auto ok = [&](double eps) { return matched(eps) >= need; };
    constexpr std::size_t enumerate_limit = 1u << 16;
    for (int it = 0; it < 200 && count_gaps(diffs, 2.0 * lo, 2.0 * hi) > enumerate_limit; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (ok(mid))
        hi = mid;
      else
        lo = mid;
    }
    std::vector<double> cand;
    for (std::size_t p = 0; p < diffs.size(); ++p)
      for (std::size_t q = p + 1; q < diffs.size(); ++q) {
        const double g = diffs[q] - diffs[p];
        if (g >= 2.0 * hi) break;
        if (g > 2.0 * lo) cand.push_back(0.5 * g);
      }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::size_t clo = 0, chi = cand.size();
    while (clo < chi) {
      const std::size_t mid = (clo + chi) / 2;
      if (ok(cand[mid]))
        chi = mid;
      else
        clo = mid + 1;
    }
    answer = clo < cand.size() ? cand[clo] : hi;
  }

  // recover a shift realising the answer: the window [anchor, anchor + 2 eps]
  // is centred on y
  const double width = 2.0 * answer;
  const double slack = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(anchors.front()) + std::abs(anchors.back()) + width);
  std::size_t best = 0;
  for (double anc : anchors) {
    const std::size_t m = kernels::window_matching(xa, xb, anc, anc + width + slack);
    if (m > best) {
      best = m;
      best_anchor = anc;
    }
  }
  return {answer, best_anchor + answer};
}

}  // namespace

QuotientResult quotient_distance_with_shift(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                            const MetricSpec& metric) {
  require_1d(a, "quotient_distance");
  require_1d(b, "quotient_distance");
  if (metric.base == BaseMetric::wasserstein) return quotient_wasserstein(a, b, metric.p);
  return quotient_prohorov(a, b);
}

double quotient_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, const MetricSpec& metric) {
  return quotient_distance_with_shift(a, b, metric).distance;
}

}  // namespace mfldp
