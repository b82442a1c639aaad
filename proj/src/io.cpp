#include "mfldp/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mfldp/errors.hpp"

namespace mfldp::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw IoError("not a number: '" + std::string(s) + "'");
  return v;
}

const std::string& CsvTable::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  throw IoError("missing '" + key + "' in " + kind + " header");
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

std::filesystem::path sidecar(const std::filesystem::path& p) { return p.string() + ".json"; }

json read_json(const std::filesystem::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::exception& e) {
    throw IoError(p.string() + ": " + e.what());
  }
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto f = open_out(path);
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  auto f = open_in(path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_csv(const std::filesystem::path& path, const CsvTable& t) {
  std::string out = "# mfldp " + t.kind + " v" + std::to_string(schema_version);
  for (const auto& [k, v] : t.meta) {
    if (v.find_first_of(" \n,") != std::string::npos) throw IoError("header value for " + k + " has separators");
    out += " " + k + "=" + v;
  }
  out += "\n";
  for (std::size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + t.columns[j];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  write_text(path, out);
}

CsvTable read_csv(const std::filesystem::path& path, std::string_view expected_kind) {
  auto f = open_in(path);
  std::string line;
  CsvTable t;
  if (!std::getline(f, line) || line.rfind("# mfldp ", 0) != 0) throw IoError(path.string() + ": missing mfldp header");
  const auto words = split(std::string_view(line).substr(8), ' ');
  if (words.size() < 2) throw IoError(path.string() + ": malformed header");
  t.kind = std::string(words[0]);
  if (words[1] != "v" + std::to_string(schema_version))
    throw IoError(path.string() + ": unsupported schema " + std::string(words[1]));
  if (!expected_kind.empty() && t.kind != expected_kind)
    throw IoError(path.string() + ": expected a " + std::string(expected_kind) + " file, found " + t.kind);
  for (std::size_t i = 2; i < words.size(); ++i) {
    if (words[i].empty()) continue;
    const auto eq = words[i].find('=');
    if (eq == std::string_view::npos) throw IoError(path.string() + ": malformed header field");
    t.meta.emplace_back(std::string(words[i].substr(0, eq)), std::string(words[i].substr(eq + 1)));
  }
  if (!std::getline(f, line)) throw IoError(path.string() + ": missing column row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (auto c : split(line, ',')) t.columns.emplace_back(c);
  std::size_t lineno = 2;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    if (cells.size() != t.columns.size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) +
                    " fields");
    std::vector<double> row;
    row.reserve(cells.size());
    try {
      for (auto c : cells) row.push_back(parse_double(c));
    } catch (const IoError& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_measure(const std::filesystem::path& path, const EmpiricalMeasure& m) {
  CsvTable t{"measure", {{"n", std::to_string(m.size())}, {"d", std::to_string(m.d())}}, {}, {}};
  for (std::size_t k = 0; k < m.d(); ++k) t.columns.push_back("x" + std::to_string(k));
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto a = m.atom(i);
    t.rows.emplace_back(a.begin(), a.end());
  }
  write_csv(path, t);
}

EmpiricalMeasure read_measure(const std::filesystem::path& path) {
  const auto t = read_csv(path, "measure");
  const std::size_t d = t.columns.size();
  std::vector<double> atoms;
  for (const auto& r : t.rows) atoms.insert(atoms.end(), r.begin(), r.end());
  if (t.rows.empty()) throw IoError(path.string() + ": empty measure");
  return EmpiricalMeasure(t.rows.size(), d, std::move(atoms));
}

void write_samples(const std::filesystem::path& path, const SampleSet& s, const std::string& model_id) {
  CsvTable t{"samples", {{"n", std::to_string(s.n)}, {"d", std::to_string(s.d)}}, {"energy"}, {}};
  for (std::size_t j = 0; j < s.n * s.d; ++j) t.columns.push_back("x" + std::to_string(j));
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<double> row{s.energies[i]};
    auto r = s.row(i);
    row.insert(row.end(), r.begin(), r.end());
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
  const auto& g = s.diagnostics;
  json j = {{"schema", schema_version},
            {"kind", "samples"},
            {"model", model_id},
            {"n", s.n},
            {"d", s.d},
            {"rows", s.size()},
            {"diagnostics",
             {{"accepted", g.accepted},
              {"proposed", g.proposed},
              {"acceptance_rate", g.acceptance_rate},
              {"energy_mean", g.energy_mean},
              {"energy_sd", g.energy_sd},
              {"energy_min", g.energy_min},
              {"energy_max", g.energy_max},
              {"tau", g.tau},
              {"ess", g.ess},
              {"approximate", g.approximate}}}};
  write_text(sidecar(path), j.dump(2) + "\n");
}

SampleSet read_samples(const std::filesystem::path& path) {
  const auto t = read_csv(path, "samples");
  SampleSet s;
  s.n = std::stoul(t.meta_value("n"));
  s.d = std::stoul(t.meta_value("d"));
  if (t.columns.size() != 1 + s.n * s.d) throw IoError(path.string() + ": column count does not match n*d");
  for (const auto& r : t.rows) {
    s.energies.push_back(r[0]);
    s.data.insert(s.data.end(), r.begin() + 1, r.end());
  }
  if (std::filesystem::exists(sidecar(path))) {
    const auto j = read_json(sidecar(path));
    try {
      const auto& g = j.at("diagnostics");
      auto& d = s.diagnostics;
      d.accepted = g.at("accepted").get<std::uint64_t>();
      d.proposed = g.at("proposed").get<std::uint64_t>();
      d.acceptance_rate = g.at("acceptance_rate").get<double>();
      d.energy_mean = g.at("energy_mean").get<double>();
      d.energy_sd = g.at("energy_sd").get<double>();
      d.energy_min = g.at("energy_min").get<double>();
      d.energy_max = g.at("energy_max").get<double>();
      d.tau = g.at("tau").get<double>();
      d.ess = g.at("ess").get<double>();
      d.approximate = g.at("approximate").get<bool>();
    } catch (const json::exception& e) {
      throw IoError(sidecar(path).string() + ": " + e.what());
    }
  }
  return s;
}

void write_density(const std::filesystem::path& path, const GridDensity& p) {
  const Grid& g = p.grid();
  CsvTable t{"density",
             {{"lo", format_double(g.lo)}, {"hi", format_double(g.hi)}, {"m", std::to_string(g.m)}},
             {"x", "p"},
             {}};
  t.rows.reserve(g.m);
  for (std::size_t i = 0; i < g.m; ++i) t.rows.push_back({g.center(i), p[i]});
  write_csv(path, t);
}

GridDensity read_density(const std::filesystem::path& path) {
  const auto t = read_csv(path, "density");
  Grid g{parse_double(t.meta_value("lo")), parse_double(t.meta_value("hi")), std::stoul(t.meta_value("m"))};
  if (t.rows.size() != g.m) throw IoError(path.string() + ": row count does not match m");
  std::vector<double> v;
  v.reserve(g.m);
  for (const auto& r : t.rows) v.push_back(r.at(1));
  return GridDensity(g, std::move(v));
}

void write_curve(const std::filesystem::path& path, const CapitalCurve& c) {
  CsvTable t{"curve", {{"n", std::to_string(c.size())}}, {"log_rank", "log_weight"}, {}};
  for (std::size_t k = 0; k < c.size(); ++k) t.rows.push_back({c.log_rank[k], c.log_weight[k]});
  write_csv(path, t);
}

CapitalCurve read_curve(const std::filesystem::path& path) {
  const auto t = read_csv(path, "curve");
  CapitalCurve c;
  for (const auto& r : t.rows) {
    c.log_rank.push_back(r.at(0));
    c.log_weight.push_back(r.at(1));
  }
  return c;
}

MarketState read_weights(const std::filesystem::path& path) {
  auto f = open_in(path);
  std::string line;
  std::vector<double> w;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    // last column, so "name,weight" files work too
    const auto cells = split(line, ',');
    try {
      w.push_back(parse_double(cells.back()));
    } catch (const IoError&) {
      if (w.empty() && lineno == 1) continue;  // header row
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": not a weight");
    }
  }
  return market_state_from_weights(std::move(w));
}

void write_ldp(const std::filesystem::path& path, const LdpEstimate& e) {
  CsvTable t{"ldp",
             {{"law", e.law}, {"event", to_string(e.event.kind)}},
             {"n", "hits", "chains", "p_hat", "slope", "slope_lo", "slope_hi", "slope_is_bound", "statistic_mean"},
             {}};
  for (const auto& r : e.rows)
    t.rows.push_back({static_cast<double>(r.n), static_cast<double>(r.hits), static_cast<double>(r.chains), r.p_hat,
                      r.slope, r.slope_lo, r.slope_hi, r.slope_is_bound ? 1.0 : 0.0, r.statistic_mean});
  write_csv(path, t);
  json j = {{"schema", schema_version},
            {"kind", "ldp"},
            {"law", e.law},
            {"event", {{"kind", to_string(e.event.kind)}, {"threshold", e.event.threshold}, {"ell", e.event.ell}}},
            {"reference", e.reference ? json(*e.reference) : json(nullptr)},
            {"reference_note", e.reference_note}};
  write_text(sidecar(path), j.dump(2) + "\n");
}

LdpEstimate read_ldp(const std::filesystem::path& path) {
  const auto t = read_csv(path, "ldp");
  LdpEstimate e;
  e.law = t.meta_value("law");
  e.event.kind = event_kind_from_string(t.meta_value("event"));
  for (const auto& r : t.rows) {
    LdpRow row;
    row.n = static_cast<std::size_t>(r.at(0));
    row.hits = static_cast<std::size_t>(r.at(1));
    row.chains = static_cast<std::size_t>(r.at(2));
    row.p_hat = r.at(3);
    row.slope = r.at(4);
    row.slope_lo = r.at(5);
    row.slope_hi = r.at(6);
    row.slope_is_bound = r.at(7) != 0.0;
    row.statistic_mean = r.at(8);
    e.rows.push_back(row);
  }
  if (std::filesystem::exists(sidecar(path))) {
    const auto j = read_json(sidecar(path));
    try {
      e.event.threshold = j.at("event").at("threshold").get<double>();
      e.event.ell = j.at("event").at("ell").get<double>();
      if (!j.at("reference").is_null()) e.reference = j.at("reference").get<double>();
      e.reference_note = j.at("reference_note").get<std::string>();
    } catch (const json::exception& ex) {
      throw IoError(sidecar(path).string() + ": " + ex.what());
    }
  }
  return e;
}

}  // namespace mfldp::io
