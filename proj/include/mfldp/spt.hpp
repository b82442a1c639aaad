#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfldp/densities.hpp"
#include "mfldp/ldp_harness.hpp"
#include "mfldp/measures.hpp"
#include "mfldp/sampler.hpp"

namespace mfldp {

// Log-capitalizations and the market weights they induce.
struct MarketState {
  std::vector<double> log_caps;
  std::vector<double> weights;
};

MarketState market_weights(const Configuration& c);  // d = 1
MarketState market_weights(std::span<const double> log_caps);
// Externally supplied weights; rescaled to sum to 1, log_caps = log weights.
MarketState market_state_from_weights(std::vector<double> weights);

// Ranked market weights on log-log axes.
struct CapitalCurve {
  std::vector<double> log_rank;    // log m, m = 1..n
  std::vector<double> log_weight;  // log mu_[m], non-increasing

  std::size_t size() const noexcept { return log_rank.size(); }
  bool operator==(const CapitalCurve&) const = default;
};

CapitalCurve capital_curve(const MarketState& ms);

enum class QuantileOffset {
  midpoint,  // (k - 1/2) / n
  uniform,   // k / (n + 1)
};

// Stationary quantiles at n offsets, pushed through the softmax.
CapitalCurve typical_curve(const GridDensity& p_inf, std::size_t n, QuantileOffset offset = QuantileOffset::midpoint);
CapitalCurve typical_curve(const RbModel& m, std::size_t n, const Grid& g,
                           QuantileOffset offset = QuantileOffset::midpoint);

// Rank-wise mean of the log weights over every sample row (d = 1).
CapitalCurve mean_capital_curve(const SampleSet& samples);

double sup_log_weight_distance(const CapitalCurve& a, const CapitalCurve& b);

struct AtypicalityReport {
  SanovComparison sanov;
  // certificate density: p_inf tilted by exp(theta |x|)
  double certificate_theta = 0.0;
  RateGap gap{};
  double rate = 0.0;               // F[p] - F_star at the certificate density
  double relative_entropy = 0.0;   // the i.i.d. surrogate's rate at the same density
  bool gamma_certificate = false;  // gamma_part <= 1e-10
};

AtypicalityReport atypicality_report(const RbModel& m, const EventSpec& event, std::span<const std::size_t> n_list,
                                     std::size_t chains, const SamplerConfig& cfg, const Grid& g);

}  // namespace mfldp
