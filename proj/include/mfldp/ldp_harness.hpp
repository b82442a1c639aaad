#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfldp/densities.hpp"
#include "mfldp/sampler.hpp"

namespace mfldp {

enum class EventKind { vartheta_at_least, w1_to_stationary_at_least, mean_abs_at_least };

struct EventSpec {
  EventKind kind = EventKind::mean_abs_at_least;
  double threshold = 0.0;
  double ell = 1.0;  // vartheta order

  static EventSpec mean_abs(double a) { return {EventKind::mean_abs_at_least, a, 1.0}; }
  static EventSpec vartheta(double ell, double a) { return {EventKind::vartheta_at_least, a, ell}; }
  static EventSpec w1_to_stationary(double r) { return {EventKind::w1_to_stationary_at_least, r, 1.0}; }
  std::string describe() const;
};

const char* to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

// W1 between the empirical measure of xs and a grid density (exact on the
// piecewise-linear grid CDF).
double w1_to_density(std::span<const double> xs, const GridDensity& p);

// The event statistic of a centred 1D configuration. p_inf is needed for w1 events.
double event_statistic(const EventSpec& e, std::span<const double> x, const GridDensity* p_inf = nullptr);
// The same statistic for a grid density, used by the rate references.
double event_statistic(const EventSpec& e, const GridDensity& p, const GridDensity* p_inf = nullptr);

struct WilsonInterval {
  double lo;
  double hi;
};
WilsonInterval wilson_interval(std::size_t hits, std::size_t total, double z = 1.959963984540054);

struct LdpRow {
  std::size_t n = 0;
  std::size_t hits = 0;
  std::size_t chains = 0;
  double p_hat = 0.0;
  double slope = 0.0;     // -(1/n) log p_hat; meaningful only when hits > 0
  double slope_lo = 0.0;  // from the upper Wilson end
  double slope_hi = 0.0;  // from the lower Wilson end, +inf when it is 0
  bool slope_is_bound = false;  // zero hits: only slope > slope_lo is known
  double statistic_mean = 0.0;  // mean of the event statistic across chains
};

struct LdpEstimate {
  EventSpec event;
  std::string law;  // "interacting" or "iid-surrogate"
  std::vector<LdpRow> rows;
  std::optional<double> reference;  // tilted-family rate, an upper bound for the true infimum
  std::string reference_note;
};

// Sampler settings for the LDP chains: n is taken from the list, total_samples
// and thin are ignored; each chain runs burn_in steps and is evaluated once.
LdpEstimate estimate_ldp_curve(const GibbsModel& model, const EventSpec& event, std::span<const std::size_t> n_list,
                               std::size_t chains_per_n, const SamplerConfig& cfg,
                               const GridDensity* p_inf = nullptr);

struct RateInfimum {
  double value;
  double theta;  // active tilt
  double f_star;
  double stationary_statistic;
  std::string note;
};

// inf of F - F_star over p_theta proportional to p_inf exp(theta g), g = |x|.
RateInfimum rate_infimum(const RbModel& m, const EventSpec& e, const Grid& g);
RateInfimum rate_infimum(const MvModel& m, const EventSpec& e, const Grid& g);
// same with a precomputed stationary density and F_star
RateInfimum rate_infimum_from(const GridDensity& p_inf, double f_star, const EventSpec& e,
                              const std::function<double(const GridDensity&)>& free_energy_of,
                              double theta_max);

struct TiltingRow {
  double u, v;  // event {gap in [u, v]}; u > v encodes the empty event
  double lhs, rhs, residual;
};

struct TiltingReport {
  double eta;
  double ell;
  double ratio;  // Z~eta / Z~ for n = 2
  std::vector<TiltingRow> rows;
  double max_residual;
};

std::vector<std::pair<double, double>> tilting_event_catalogue();
TiltingReport verify_tilting(const GibbsModel& model, double eta, double ell = 2.0);

struct ExpMomentRow {
  double eta;
  std::size_t n;
  double value;  // (1/n) log I
  double standard_error;
  std::string method;  // "quadrature" at n = 2, "reweighting" otherwise
};

struct ExpMomentTable {
  double q;
  std::vector<ExpMomentRow> rows;
  // for every n, values are non-increasing as eta decreases, within 2 standard errors
  bool trend_consistent;
};

// ell = 0 uses the model's growth index (1 for rank-based models)
ExpMomentTable exp_moment_diag(const GibbsModel& model, std::span<const double> etas,
                               std::span<const std::size_t> n_list, double q, const SamplerConfig& cfg,
                               double ell = 0.0);

struct SanovComparison {
  LdpEstimate interacting;
  LdpEstimate surrogate;
  // at the largest n: the interacting slope does not exceed the surrogate slope
  // beyond the combined 95% intervals
  bool ordering_consistent;
};

SanovComparison sanov_compare(const RbModel& model, const EventSpec& event, std::span<const std::size_t> n_list,
                              std::size_t chains, const SamplerConfig& cfg, const GridDensity& p_inf);

// i.i.d. draws from p_inf by inverse CDF, centred; one evaluation per chain.
LdpEstimate estimate_ldp_curve_iid(const GridDensity& p_inf, const EventSpec& event,
                                   std::span<const std::size_t> n_list, std::size_t chains, std::uint64_t seed);

}  // namespace mfldp
