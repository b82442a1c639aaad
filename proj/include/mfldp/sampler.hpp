#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mfldp/confining.hpp"
#include "mfldp/measures.hpp"
#include "mfldp/models.hpp"

namespace mfldp {

using GibbsModel = std::variant<MvModel, RbModel>;

double model_sigma2(const GibbsModel& m);
const std::string& model_id(const GibbsModel& m);

enum class Algorithm { em, mala };
const char* to_string(Algorithm a);

// The temperature is the model's sigma2.
struct SamplerConfig {
  std::size_t n = 2;
  std::size_t d = 1;
  double step = 0.01;
  std::size_t burn_in = 1000;
  std::size_t thin = 1;
  std::size_t total_samples = 1000;
  Algorithm algorithm = Algorithm::mala;
  std::uint64_t seed = 1;
  std::size_t chains = 1;

  void validate() const;
};

std::uint64_t splitmix64(std::uint64_t x);
// per-chain stream: splitmix64(seed xor chain_index)
std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain_index);

// W_n and the drift -n grad W_n for a fixed (model, n, d).
class GibbsTarget {
 public:
  GibbsTarget(GibbsModel model, std::size_t n, std::size_t d);

  double evaluate(std::span<const double> x, std::span<double> drift, std::vector<std::size_t>& scratch) const;
  double energy(std::span<const double> x) const;

  const GibbsModel& model() const noexcept { return model_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  double sigma2() const noexcept { return sigma2_; }
  // growth index used to scale the initial configuration
  double ell() const noexcept;

 private:
  GibbsModel model_;
  std::size_t n_, d_;
  double sigma2_;
  std::vector<double> rank_drifts_;
};

struct ChainState {
  std::vector<double> x;  // centred, row-major n x d
  std::mt19937_64 rng;
  std::normal_distribution<double> normal;
  std::uint64_t accepted = 0;
  std::uint64_t proposed = 0;
  std::uint64_t steps = 0;
  double energy = 0.0;
  std::vector<double> drift;

  std::vector<double> prop, prop_drift;
  std::vector<std::size_t> scratch;

  CenteredConfiguration position(std::size_t n, std::size_t d) const;
};

// Equispaced along the first axis, centred, scaled to unit vartheta.
ChainState init_chain(const GibbsTarget& t, std::uint64_t seed, std::size_t chain_index);
void step_em(ChainState& s, const GibbsTarget& t, double h);
void step_mala(ChainState& s, const GibbsTarget& t, double h);

// log of [p(y) q(y -> x)] / [p(x) q(x -> y)] for the hyperplane-projected Langevin proposal
double mala_log_ratio(double sigma2, std::size_t n, double h, std::span<const double> x, double ex,
                      std::span<const double> ax, std::span<const double> y, double ey,
                      std::span<const double> ay);

struct AutocorrelationEstimate {
  double tau;  // integrated autocorrelation time, in samples
  double ess;
};
// Sokal's self-consistent window (M >= 5 tau).
AutocorrelationEstimate effective_sample_size(std::span<const double> trace);

struct SamplerDiagnostics {
  std::uint64_t accepted = 0;
  std::uint64_t proposed = 0;
  double acceptance_rate = 0.0;
  double energy_mean = 0.0;
  double energy_sd = 0.0;
  double energy_min = 0.0;
  double energy_max = 0.0;
  double tau = 0.0;
  double ess = 0.0;
  bool approximate = false;  // Euler-Maruyama carries an O(h) bias
};

struct SampleSet {
  std::size_t n = 0;
  std::size_t d = 1;
  std::vector<double> data;      // size() rows of n*d
  std::vector<double> energies;  // W_n of each row
  SamplerDiagnostics diagnostics;

  std::size_t size() const noexcept { return n == 0 ? 0 : data.size() / (n * d); }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * n * d, n * d}; }
  CenteredConfiguration configuration(std::size_t i) const;
};

SampleSet sample_equilibrium(const GibbsModel& model, const SamplerConfig& cfg);

// Independent draws from the rank-based Gibbs law: sorted gaps are independent
// exponentials with rates (2n/sigma2) B(k/n); labels are uniformly permuted.
SampleSet sample_rb_exact(const RbModel& model, std::size_t n, std::size_t count, std::uint64_t seed);

struct RatioEstimate {
  double ratio;
  double standard_error;
};
// Mean of exp(-(2n/sigma2) hat_v) over the samples, block-jackknife error.
RatioEstimate estimate_partition_ratio(const SampleSet& samples, const ConfiningSpec& s);

}  // namespace mfldp
