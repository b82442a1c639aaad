#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfldp/densities.hpp"
#include "mfldp/ldp_harness.hpp"
#include "mfldp/sampler.hpp"
#include "mfldp/spt.hpp"

namespace mfldp::cli {

struct ModelSection {
  std::string family = "rb:logistic-flux";  // mv:quadratic mv:cubic mv:abs mv:radial rb:logistic-flux rb:polynomial
  double sigma2 = 2.0;
  std::vector<double> coefficients;  // rb:polynomial: B(u) = sum a_k u^k
  std::vector<double> exponents;     // mv:radial: paired with coefficients
};

struct GridSection {
  std::optional<double> lo, hi;
  std::optional<std::size_t> m;
};

struct LdpSection {
  EventKind event = EventKind::mean_abs_at_least;
  double threshold = 1.8;
  double ell = 1.0;
  std::vector<std::size_t> n_list{8, 16, 32, 64};
  std::size_t chains = 10000;
  bool surrogate = false;
};

struct TiltingSection {
  std::vector<double> etas{0.1, 1.0};
  double ell = 2.0;
};

struct ConfiningSection {
  double eta = 1.0;
  double ell = 2.0;
};

struct CapitalSection {
  std::size_t n = 64;
  std::string input;  // samples CSV or weights CSV; empty means the typical curve
  QuantileOffset offset = QuantileOffset::midpoint;
};

struct MetricsSection {
  std::vector<std::string> inputs;
  double p = 1.0;
};

struct CheckSection {
  std::size_t samples = 200;
};

struct RateSection {
  std::string density;  // optional density CSV to evaluate
};

struct RunConfig {
  ModelSection model;
  SamplerConfig sampler;
  GridSection grid;
  ConfiningSection confining;
  LdpSection ldp;
  TiltingSection tilting;
  CapitalSection capital;
  MetricsSection metrics;
  CheckSection check;
  RateSection rate;
};

// INI text; unknown sections or keys throw ConfigError naming the key.
RunConfig parse_config(const std::string& ini_text);
// "section.key=value"
void apply_override(RunConfig& c, const std::string& assignment);
void validate(const RunConfig& c);
// Canonical INI rendering: parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& c);

GibbsModel build_model(const ModelSection& m);
Grid build_grid(const RunConfig& c);

}  // namespace mfldp::cli
