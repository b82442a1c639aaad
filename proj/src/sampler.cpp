#include "mfldp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfldp/errors.hpp"
#include "mfldp/kernels.hpp"

namespace mfldp {

double model_sigma2(const GibbsModel& m) {
  return std::visit([](const auto& v) { return v.sigma2; }, m);
}

const std::string& model_id(const GibbsModel& m) {
  return std::visit([](const auto& v) -> const std::string& { return v.id; }, m);
}

const char* to_string(Algorithm a) { return a == Algorithm::em ? "em" : "mala"; }

void SamplerConfig::validate() const {
  if (n < 2) throw InvalidArgument("sampler needs n >= 2");
  if (d < 1) throw InvalidArgument("sampler needs d >= 1");
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("step size must be positive");
  if (thin < 1) throw InvalidArgument("thin must be >= 1");
  if (chains < 1) throw InvalidArgument("need at least one chain");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain_index) {
  return splitmix64(seed ^ static_cast<std::uint64_t>(chain_index));
}

GibbsTarget::GibbsTarget(GibbsModel model, std::size_t n, std::size_t d)
    : model_(std::move(model)), n_(n), d_(d), sigma2_(model_sigma2(model_)) {
  if (n_ < 2) throw InvalidArgument("Gibbs measure needs n >= 2");
  if (const auto* rb = std::get_if<RbModel>(&model_)) {
    if (d_ != 1) throw DimensionError("rank-based model is one-dimensional");
    rank_drifts_ = rb_rank_drifts(n_, *rb);
  }
}

double GibbsTarget::ell() const noexcept {
  if (const auto* mv = std::get_if<MvModel>(&model_)) return mv->ell;
  return 1.0;
}

double GibbsTarget::evaluate(std::span<const double> x, std::span<double> drift,
                             std::vector<std::size_t>& scratch) const {
  if (const auto* mv = std::get_if<MvModel>(&model_)) return mv_energy_and_drift_raw(x, n_, d_, *mv, drift);
  return rb_energy_and_drift_raw(x, rank_drifts_, drift, scratch);
}

double GibbsTarget::energy(std::span<const double> x) const {
  if (const auto* mv = std::get_if<MvModel>(&model_)) return mv_energy_raw(x, n_, d_, *mv);
  return rb_energy_gap_sum(x, std::get<RbModel>(model_));
}

CenteredConfiguration ChainState::position(std::size_t n, std::size_t d) const {
  return CenteredConfiguration(n, d, x);
}

ChainState init_chain(const GibbsTarget& t, std::uint64_t seed, std::size_t chain_index) {
  const std::size_t n = t.n(), d = t.d();
  ChainState s;
  s.rng.seed(chain_seed(seed, chain_index));
  s.x.assign(n * d, 0.0);
  std::vector<double> first(n);
  for (std::size_t i = 0; i < n; ++i) first[i] = static_cast<double>(i) - 0.5 * static_cast<double>(n - 1);
  const double scale = vartheta_raw(first, t.ell());
  const double f = std::pow(scale, -1.0 / t.ell());
  for (std::size_t i = 0; i < n; ++i) s.x[i * d] = first[i] * f;
  s.drift.assign(n * d, 0.0);
  s.prop.assign(n * d, 0.0);
  s.prop_drift.assign(n * d, 0.0);
  s.energy = t.evaluate(s.x, s.drift, s.scratch);
  project_to_hyperplane(s.drift, n, d);
  return s;
}

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

// prop = P(x + h a + sigma sqrt(h) xi)
void propose(ChainState& s, const GibbsTarget& t, double h) {
  const double noise = std::sqrt(t.sigma2() * h);
  for (std::size_t k = 0; k < s.x.size(); ++k) s.prop[k] = s.x[k] + h * s.drift[k] + noise * s.normal(s.rng);
  project_to_hyperplane(s.prop, t.n(), t.d());
}

}  // namespace

void step_em(ChainState& s, const GibbsTarget& t, double h) {
  propose(s, t, h);
  ++s.steps;
  if (!all_finite(s.prop)) throw DivergedChain(s.steps);
  s.x.swap(s.prop);
  s.energy = t.evaluate(s.x, s.drift, s.scratch);
  project_to_hyperplane(s.drift, t.n(), t.d());
  ++s.proposed;
  ++s.accepted;
}

double mala_log_ratio(double sigma2, std::size_t n, double h, std::span<const double> x, double ex,
                      std::span<const double> ax, std::span<const double> y, double ey,
                      std::span<const double> ay) {
  double fwd = 0.0, bwd = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double f = y[k] - x[k] - h * ax[k];
    const double b = x[k] - y[k] - h * ay[k];
    fwd += f * f;
    bwd += b * b;
  }
  const double target = -(2.0 * static_cast<double>(n) / sigma2) * (ey - ex);
  return target + (fwd - bwd) / (2.0 * sigma2 * h);
}

void step_mala(ChainState& s, const GibbsTarget& t, double h) {
  propose(s, t, h);
  ++s.steps;
  ++s.proposed;
  if (!all_finite(s.prop)) throw DivergedChain(s.steps);
  const double ey = t.evaluate(s.prop, s.prop_drift, s.scratch);
  project_to_hyperplane(s.prop_drift, t.n(), t.d());
  const double log_alpha = mala_log_ratio(t.sigma2(), t.n(), h, s.x, s.energy, s.drift, s.prop, ey, s.prop_drift);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (log_alpha >= 0.0 || std::log(u(s.rng)) < log_alpha) {
    s.x.swap(s.prop);
    s.drift.swap(s.prop_drift);
    s.energy = ey;
    ++s.accepted;
  }
}

AutocorrelationEstimate effective_sample_size(std::span<const double> trace) {
  const std::size_t N = trace.size();
  if (N < 2) return {1.0, static_cast<double>(N)};
  const double mean = std::accumulate(trace.begin(), trace.end(), 0.0) / static_cast<double>(N);
  double c0 = 0.0;
  for (double v : trace) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(N);
  if (!(c0 > 0.0)) return {1.0, static_cast<double>(N)};
  double tau = 1.0;
  for (std::size_t k = 1; k < N; ++k) {
    double ck = 0.0;
    for (std::size_t i = 0; i + k < N; ++i) ck += (trace[i] - mean) * (trace[i + k] - mean);
    ck /= static_cast<double>(N);
    tau += 2.0 * ck / c0;
    if (static_cast<double>(k) >= 5.0 * tau) break;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(N));
  return {tau, static_cast<double>(N) / tau};
}

CenteredConfiguration SampleSet::configuration(std::size_t i) const {
  auto r = row(i);
  return CenteredConfiguration(n, d, std::vector<double>(r.begin(), r.end()));
}

namespace {

void summarize(SampleSet& out, const std::vector<AutocorrelationEstimate>& per_chain) {
  auto& dg = out.diagnostics;
  dg.acceptance_rate = dg.proposed ? static_cast<double>(dg.accepted) / static_cast<double>(dg.proposed) : 0.0;
  const auto& e = out.energies;
  if (e.empty()) return;
  const double N = static_cast<double>(e.size());
  dg.energy_mean = std::accumulate(e.begin(), e.end(), 0.0) / N;
  double ss = 0.0;
  for (double v : e) ss += (v - dg.energy_mean) * (v - dg.energy_mean);
  dg.energy_sd = e.size() > 1 ? std::sqrt(ss / (N - 1.0)) : 0.0;
  const auto [mn, mx] = std::minmax_element(e.begin(), e.end());
  dg.energy_min = *mn;
  dg.energy_max = *mx;
  dg.ess = 0.0;
  for (const auto& a : per_chain) dg.ess += a.ess;
  dg.tau = dg.ess > 0.0 ? N / dg.ess : 0.0;
}

}  // namespace

SampleSet sample_equilibrium(const GibbsModel& model, const SamplerConfig& cfg) {
  cfg.validate();
  const GibbsTarget target(model, cfg.n, cfg.d);
  const std::size_t row = cfg.n * cfg.d;

  struct ChainOut {
    std::vector<double> data, energies;
    std::uint64_t accepted = 0, proposed = 0;
  };
  std::vector<ChainOut> outs(cfg.chains);
  kernels::parallel::for_each_index(cfg.chains, [&](std::size_t c) {
    const std::size_t count = cfg.total_samples / cfg.chains + (c < cfg.total_samples % cfg.chains ? 1 : 0);
    ChainState s = init_chain(target, cfg.seed, c);
    auto step = [&] {
      if (cfg.algorithm == Algorithm::mala)
        step_mala(s, target, cfg.step);
      else
        step_em(s, target, cfg.step);
    };
    for (std::size_t i = 0; i < cfg.burn_in; ++i) step();
    const std::uint64_t acc0 = s.accepted, prop0 = s.proposed;
    auto& o = outs[c];
    o.data.reserve(count * row);
    o.energies.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      for (std::size_t i = 0; i < cfg.thin; ++i) step();
      o.data.insert(o.data.end(), s.x.begin(), s.x.end());
      o.energies.push_back(s.energy);
    }
    o.accepted = s.accepted - acc0;
    o.proposed = s.proposed - prop0;
  });

  SampleSet out;
  out.n = cfg.n;
  out.d = cfg.d;
  out.diagnostics.approximate = cfg.algorithm == Algorithm::em;
  std::vector<AutocorrelationEstimate> per_chain;
  for (auto& o : outs) {
    out.data.insert(out.data.end(), o.data.begin(), o.data.end());
    out.energies.insert(out.energies.end(), o.energies.begin(), o.energies.end());
    out.diagnostics.accepted += o.accepted;
    out.diagnostics.proposed += o.proposed;
    if (!o.energies.empty()) per_chain.push_back(effective_sample_size(o.energies));
  }
  summarize(out, per_chain);
  return out;
}

SampleSet sample_rb_exact(const RbModel& model, std::size_t n, std::size_t count, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("sampler needs n >= 2");
  std::vector<double> rates(n - 1);
  const double nn = static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    rates[k - 1] = (2.0 * nn / model.sigma2) * model.B(static_cast<double>(k) / nn);
    if (!(rates[k - 1] > 0.0)) throw InvalidArgument("exact rank-based sampler needs B > 0 on (0,1)");
  }
  std::mt19937_64 rng(chain_seed(seed, 0));
  std::exponential_distribution<double> expo(1.0);
  SampleSet out;
  out.n = n;
  out.d = 1;
  out.data.resize(count * n);
  out.energies.resize(count);
  std::vector<double> sorted(n);
  std::vector<std::size_t> perm(n);
  for (std::size_t s = 0; s < count; ++s) {
    sorted[0] = 0.0;
    double energy = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double gap = expo(rng) / rates[k - 1];
      sorted[k] = sorted[k - 1] + gap;
      energy += model.B(static_cast<double>(k) / nn) * gap;
    }
    project_to_hyperplane(sorted, n, 1);
    project_to_hyperplane(sorted, n, 1);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) out.data[s * n + perm[i]] = sorted[i];
    out.energies[s] = energy;
  }
  out.diagnostics.accepted = out.diagnostics.proposed = count;
  std::vector<AutocorrelationEstimate> iid;
  if (count) iid.push_back({1.0, static_cast<double>(count)});
  summarize(out, iid);
  return out;
}

RatioEstimate estimate_partition_ratio(const SampleSet& samples, const ConfiningSpec& s) {
  const std::size_t N = samples.size();
  if (N == 0) throw InsufficientData("partition ratio needs at least one sample");
  if (samples.d != s.d) throw DimensionError("sample dimension does not match the confining spec");
  const double scale = 2.0 * static_cast<double>(samples.n) / s.sigma2;
  std::vector<double> v(N);
  for (std::size_t i = 0; i < N; ++i) v[i] = std::exp(-scale * hat_v_raw(samples.row(i), samples.n, samples.d, s));
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(N);
  // the mean is linear, so delete-one-block jackknife reduces to the spread of block means
  const std::size_t blocks = std::min<std::size_t>(50, N);
  if (blocks < 2) return {mean, 0.0};
  const std::size_t len = N / blocks;
  std::vector<double> bm(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) bm[b] += v[i];
    bm[b] /= static_cast<double>(len);
  }
  const double total = std::accumulate(bm.begin(), bm.end(), 0.0);
  const double B = static_cast<double>(blocks);
  double var = 0.0;
  for (double x : bm) {
    const double leave = (total - x) / (B - 1.0);
    const double dev = leave - total / B;
    var += dev * dev;
  }
  var *= (B - 1.0) / B;
  return {mean, std::sqrt(var)};
}

}  // namespace mfldp
