#include "mfldp/spt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "mfldp/errors.hpp"

namespace mfldp {

MarketState market_weights(const Configuration& c) {
  if (c.d() != 1) throw DimensionError("market weights need d = 1");
  return market_weights(c.coords());
}

MarketState market_weights(std::span<const double> log_caps) {
  if (log_caps.empty()) throw InvalidArgument("empty market");
  MarketState ms;
  ms.log_caps.assign(log_caps.begin(), log_caps.end());
  const double mx = *std::max_element(log_caps.begin(), log_caps.end());
  if (!std::isfinite(mx)) throw InvalidArgument("log-capitalizations must be finite");
  ms.weights.resize(log_caps.size());
  double s = 0.0;
  for (std::size_t i = 0; i < log_caps.size(); ++i) {
    if (!std::isfinite(log_caps[i])) throw InvalidArgument("log-capitalizations must be finite");
    ms.weights[i] = std::exp(log_caps[i] - mx);
    s += ms.weights[i];
  }
  for (double& w : ms.weights) w /= s;
  return ms;
}

MarketState market_state_from_weights(std::vector<double> weights) {
  if (weights.empty()) throw InvalidArgument("empty market");
  double s = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("market weights must be positive and finite");
    s += w;
  }
  MarketState ms;
  for (double& w : weights) {
    w /= s;
    ms.log_caps.push_back(std::log(w));
  }
  ms.weights = std::move(weights);
  return ms;
}

CapitalCurve capital_curve(const MarketState& ms) {
  std::vector<double> w = ms.weights;
  std::sort(w.begin(), w.end(), std::greater<>());
  CapitalCurve c;
  for (std::size_t m = 0; m < w.size(); ++m) {
    if (!(w[m] > 0.0)) throw Error("zero market weight in capital curve");
    c.log_rank.push_back(std::log(static_cast<double>(m + 1)));
    c.log_weight.push_back(std::log(w[m]));
  }
  return c;
}

CapitalCurve typical_curve(const GridDensity& p_inf, std::size_t n, QuantileOffset offset) {
  if (n == 0) throw InvalidArgument("n must be >= 1");
  std::vector<double> q(n);
  const double nn = static_cast<double>(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double u = offset == QuantileOffset::midpoint ? (static_cast<double>(k) - 0.5) / nn
                                                        : static_cast<double>(k) / (nn + 1.0);
    q[k - 1] = p_inf.quantile(u);
  }
  return capital_curve(market_weights(q));
}

CapitalCurve typical_curve(const RbModel& m, std::size_t n, const Grid& g, QuantileOffset offset) {
  return typical_curve(stationary_rb(m, g).density, n, offset);
}

CapitalCurve mean_capital_curve(const SampleSet& samples) {
  if (samples.d != 1) throw DimensionError("capital curves need d = 1");
  const std::size_t N = samples.size();
  if (N == 0) throw InsufficientData("no samples");
  CapitalCurve acc;
  for (std::size_t i = 0; i < N; ++i) {
    const auto c = capital_curve(market_weights(samples.row(i)));
    if (i == 0) {
      acc = c;
    } else {
      for (std::size_t k = 0; k < c.size(); ++k) acc.log_weight[k] += c.log_weight[k];
    }
  }
  for (double& v : acc.log_weight) v /= static_cast<double>(N);
  return acc;
}

double sup_log_weight_distance(const CapitalCurve& a, const CapitalCurve& b) {
  if (a.size() != b.size()) throw InvalidArgument("curves differ in length");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a.log_weight[k] - b.log_weight[k]));
  return d;
}

AtypicalityReport atypicality_report(const RbModel& m, const EventSpec& event, std::span<const std::size_t> n_list,
                                     std::size_t chains, const SamplerConfig& cfg, const Grid& g) {
  const auto st = stationary_rb(m, g);
  const GridDensity& p_inf = st.density;
  const double f_star = free_energy(p_inf, m);
  AtypicalityReport rep{sanov_compare(m, event, n_list, chains, cfg, p_inf)};

  const double theta_max = (2.0 / m.sigma2) * std::min(m.b(0.0), -m.b(1.0));
  double theta = 0.5 * theta_max;
  if (event.kind != EventKind::w1_to_stationary_at_least &&
      !(event.kind == EventKind::vartheta_at_least && event.ell != 1.0)) {
    try {
      theta = rate_infimum_from(p_inf, f_star, event, [&](const GridDensity& p) { return free_energy(p, m); },
                                theta_max)
                  .theta;
    } catch (const InvalidArgument&) {
      // threshold out of reach of the family; keep the midpoint tilt
    }
  }
  rep.certificate_theta = theta;
  std::vector<double> v(g.m);
  for (std::size_t i = 0; i < g.m; ++i) v[i] = p_inf[i] * std::exp(theta * std::abs(g.center(i)));
  const auto p = GridDensity::normalized(g, std::move(v));
  rep.gap = rate_gap(p, m, p_inf);
  rep.rate = rate(p, m, f_star);
  rep.relative_entropy = rep.gap.relative_entropy_part;
  rep.gamma_certificate = rep.gap.gamma_part <= 1e-10;
  return rep;
}

}  // namespace mfldp
