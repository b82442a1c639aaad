#include "mfldp/cli/config.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mfldp/errors.hpp"
#include "mfldp/io.hpp"

namespace mfldp::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"family", "sigma2", "coefficients", "exponents"}},
      {"sampler", {"n", "d", "step", "burn_in", "thin", "total_samples", "algorithm", "seed", "chains"}},
      {"grid", {"lo", "hi", "m"}},
      {"confining", {"eta", "ell"}},
      {"ldp", {"event", "threshold", "ell", "n_list", "chains", "surrogate"}},
      {"tilting", {"etas", "ell"}},
      {"capital", {"n", "input", "offset"}},
      {"metrics", {"inputs", "p"}},
      {"check", {"samples"}},
      {"rate", {"density"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return io::parse_double(trim(v));
  } catch (const IoError&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

std::size_t to_size(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  try {
    return static_cast<std::size_t>(std::stoull(t));
  } catch (const std::exception&) {
    throw ConfigError(key, "integer out of range: '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(v)) out.push_back(to_size(key, s));
  return out;
}

void set_value(RunConfig& c, const std::string& section, const std::string& key, const std::string& raw) {
  const std::string full = section + "." + key;
  const auto sec = allowed_keys().find(section);
  if (sec == allowed_keys().end()) throw ConfigError(full, "unknown section [" + section + "]");
  if (!sec->second.count(key)) throw ConfigError(full, "unknown key");
  const std::string v = trim(raw);

  if (section == "model") {
    if (key == "family") c.model.family = v;
    else if (key == "sigma2") c.model.sigma2 = to_double(full, v);
    else if (key == "coefficients") c.model.coefficients = to_doubles(full, v);
    else if (key == "exponents") c.model.exponents = to_doubles(full, v);
  } else if (section == "sampler") {
    auto& s = c.sampler;
    if (key == "n") s.n = to_size(full, v);
    else if (key == "d") s.d = to_size(full, v);
    else if (key == "step") s.step = to_double(full, v);
    else if (key == "burn_in") s.burn_in = to_size(full, v);
    else if (key == "thin") s.thin = to_size(full, v);
    else if (key == "total_samples") s.total_samples = to_size(full, v);
    else if (key == "seed") s.seed = to_size(full, v);
    else if (key == "chains") s.chains = to_size(full, v);
    else if (key == "algorithm") {
      if (v == "mala") s.algorithm = Algorithm::mala;
      else if (v == "em") s.algorithm = Algorithm::em;
      else throw ConfigError(full, "expected mala or em, got '" + v + "'");
    }
  } else if (section == "grid") {
    if (key == "lo") c.grid.lo = to_double(full, v);
    else if (key == "hi") c.grid.hi = to_double(full, v);
    else if (key == "m") c.grid.m = to_size(full, v);
  } else if (section == "confining") {
    if (key == "eta") c.confining.eta = to_double(full, v);
    else if (key == "ell") c.confining.ell = to_double(full, v);
  } else if (section == "ldp") {
    if (key == "event") {
      try {
        c.ldp.event = event_kind_from_string(v);
      } catch (const InvalidArgument& e) {
        throw ConfigError(full, e.what());
      }
    } else if (key == "threshold") c.ldp.threshold = to_double(full, v);
    else if (key == "ell") c.ldp.ell = to_double(full, v);
    else if (key == "n_list") c.ldp.n_list = to_sizes(full, v);
    else if (key == "chains") c.ldp.chains = to_size(full, v);
    else if (key == "surrogate") c.ldp.surrogate = to_bool(full, v);
  } else if (section == "tilting") {
    if (key == "etas") c.tilting.etas = to_doubles(full, v);
    else if (key == "ell") c.tilting.ell = to_double(full, v);
  } else if (section == "capital") {
    if (key == "n") c.capital.n = to_size(full, v);
    else if (key == "input") c.capital.input = v;
    else if (key == "offset") {
      if (v == "midpoint") c.capital.offset = QuantileOffset::midpoint;
      else if (v == "uniform") c.capital.offset = QuantileOffset::uniform;
      else throw ConfigError(full, "expected midpoint or uniform, got '" + v + "'");
    }
  } else if (section == "metrics") {
    if (key == "inputs") c.metrics.inputs = split_list(v);
    else if (key == "p") c.metrics.p = to_double(full, v);
  } else if (section == "check") {
    c.check.samples = to_size(full, v);
  } else if (section == "rate") {
    c.rate.density = v;
  }
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, double>)
      out += io::format_double(xs[i]);
    else if constexpr (std::is_same_v<T, std::string>)
      out += xs[i];
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError(key, msg);
}

}  // namespace

RunConfig parse_config(const std::string& ini_text) {
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", std::string("malformed INI: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside any section");
    for (const auto& [key, value] : body) set_value(c, section, key, value.data());
  }
  validate(c);
  return c;
}

void apply_override(RunConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError(assignment, "override must look like section.key=value");
  set_value(c, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
            assignment.substr(eq + 1));
}

void validate(const RunConfig& c) {
  static const std::set<std::string> families{"mv:quadratic", "mv:cubic",        "mv:abs",
                                              "mv:radial",    "rb:logistic-flux", "rb:polynomial"};
  require(families.count(c.model.family) == 1, "model.family", "unknown family '" + c.model.family + "'");
  require(c.model.sigma2 > 0.0 && std::isfinite(c.model.sigma2), "model.sigma2", "must be positive");
  if (c.model.family == "rb:polynomial")
    require(c.model.coefficients.size() >= 3, "model.coefficients", "need at least a_0, a_1, a_2");
  if (c.model.family == "mv:radial") {
    require(!c.model.coefficients.empty(), "model.coefficients", "need at least one term");
    require(c.model.exponents.size() == c.model.coefficients.size(), "model.exponents",
            "must pair with model.coefficients");
  }
  try {
    c.sampler.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("sampler", e.what());
  }
  if (c.model.family.rfind("rb:", 0) == 0) require(c.sampler.d == 1, "sampler.d", "rank-based models are 1D");
  const Grid g = build_grid(c);
  require(g.hi > g.lo, "grid.hi", "must exceed grid.lo");
  require(g.m >= 2, "grid.m", "need at least 2 cells");
  require(c.confining.eta > 0.0, "confining.eta", "must be positive");
  require(c.confining.ell >= 1.0, "confining.ell", "must be >= 1");
  require(std::isfinite(c.ldp.threshold), "ldp.threshold", "must be finite");
  require(c.ldp.ell >= 1.0, "ldp.ell", "must be >= 1");
  require(!c.ldp.n_list.empty(), "ldp.n_list", "must not be empty");
  for (auto n : c.ldp.n_list) require(n >= 2, "ldp.n_list", "every n must be >= 2");
  require(c.ldp.chains >= 1, "ldp.chains", "must be >= 1");
  require(!c.tilting.etas.empty(), "tilting.etas", "must not be empty");
  for (double e : c.tilting.etas) require(e > 0.0, "tilting.etas", "must be positive");
  require(c.tilting.ell >= 1.0, "tilting.ell", "must be >= 1");
  require(c.capital.n >= 1, "capital.n", "must be >= 1");
  require(c.metrics.p >= 1.0, "metrics.p", "must be >= 1");
  require(c.check.samples >= 1, "check.samples", "must be >= 1");
}

std::string render_config(const RunConfig& c) {
  std::ostringstream o;
  const auto& s = c.sampler;
  o << "[model]\nfamily = " << c.model.family << "\nsigma2 = " << io::format_double(c.model.sigma2) << "\n";
  if (!c.model.coefficients.empty()) o << "coefficients = " << join(c.model.coefficients) << "\n";
  if (!c.model.exponents.empty()) o << "exponents = " << join(c.model.exponents) << "\n";
  o << "\n[sampler]\nn = " << s.n << "\nd = " << s.d << "\nstep = " << io::format_double(s.step)
    << "\nburn_in = " << s.burn_in << "\nthin = " << s.thin << "\ntotal_samples = " << s.total_samples
    << "\nalgorithm = " << to_string(s.algorithm) << "\nseed = " << s.seed << "\nchains = " << s.chains << "\n";
  o << "\n[grid]\n";
  if (c.grid.lo) o << "lo = " << io::format_double(*c.grid.lo) << "\n";
  if (c.grid.hi) o << "hi = " << io::format_double(*c.grid.hi) << "\n";
  if (c.grid.m) o << "m = " << *c.grid.m << "\n";
  o << "\n[confining]\neta = " << io::format_double(c.confining.eta) << "\nell = " << io::format_double(c.confining.ell)
    << "\n";
  o << "\n[ldp]\nevent = " << to_string(c.ldp.event) << "\nthreshold = " << io::format_double(c.ldp.threshold)
    << "\nell = " << io::format_double(c.ldp.ell) << "\nn_list = " << join(c.ldp.n_list)
    << "\nchains = " << c.ldp.chains << "\nsurrogate = " << (c.ldp.surrogate ? "true" : "false") << "\n";
  o << "\n[tilting]\netas = " << join(c.tilting.etas) << "\nell = " << io::format_double(c.tilting.ell) << "\n";
  o << "\n[capital]\nn = " << c.capital.n << "\n";
  if (!c.capital.input.empty()) o << "input = " << c.capital.input << "\n";
  o << "offset = " << (c.capital.offset == QuantileOffset::midpoint ? "midpoint" : "uniform") << "\n";
  o << "\n[metrics]\n";
  if (!c.metrics.inputs.empty()) o << "inputs = " << join(c.metrics.inputs) << "\n";
  o << "p = " << io::format_double(c.metrics.p) << "\n";
  o << "\n[check]\nsamples = " << c.check.samples << "\n";
  o << "\n[rate]\n";
  if (!c.rate.density.empty()) o << "density = " << c.rate.density << "\n";
  return o.str();
}

GibbsModel build_model(const ModelSection& m) {
  if (m.family == "mv:quadratic") return MvModel::quadratic(m.sigma2);
  if (m.family == "mv:cubic") return MvModel::cubic(m.sigma2);
  if (m.family == "mv:abs") return MvModel::abs(m.sigma2);
  if (m.family == "mv:radial") {
    RadialPolynomial p;
    for (std::size_t k = 0; k < m.coefficients.size(); ++k) p.terms.emplace_back(m.exponents[k], m.coefficients[k]);
    return MvModel::from_radial(p, m.sigma2);
  }
  if (m.family == "rb:logistic-flux") return RbModel::logistic_flux(m.sigma2);
  if (m.family == "rb:polynomial") return RbModel::polynomial(m.coefficients, m.sigma2);
  throw ConfigError("model.family", "unknown family '" + m.family + "'");
}

Grid build_grid(const RunConfig& c) {
  Grid g = default_grid(c.model.sigma2);
  if (c.grid.lo) g.lo = *c.grid.lo;
  if (c.grid.hi) g.hi = *c.grid.hi;
  if (c.grid.m) g.m = *c.grid.m;
  return g;
}

}  // namespace mfldp::cli
