#include "mfldp/cli/commands.hpp"

#include <cstdlib>
#include <iostream>
#include <limits>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfldp/errors.hpp"
#include "mfldp/io.hpp"
#include "mfldp/kernels.hpp"
#include "mfldp/ldp_harness.hpp"
#include "mfldp/models.hpp"
#include "mfldp/spt.hpp"

#ifndef MFLDP_VERSION
#define MFLDP_VERSION "dev"
#endif

namespace mfldp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(io::format_double(v)); }

json report_json(const AssumptionReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    json values = json::object();
    for (const auto& [k, v] : c.values) values[k] = num(v);
    checks.push_back({{"id", c.id}, {"verdict", to_string(c.verdict)}, {"detail", c.detail}, {"values", values}});
  }
  return {{"model", r.model_id}, {"all_passed", r.all_passed()}, {"checks", checks}};
}

json event_json(const EventSpec& e) {
  return {{"kind", to_string(e.kind)}, {"threshold", e.threshold}, {"ell", e.ell}};
}

json rows_json(const LdpEstimate& e) {
  json rows = json::array();
  for (const auto& r : e.rows)
    rows.push_back({{"n", r.n},
                    {"hits", r.hits},
                    {"chains", r.chains},
                    {"p_hat", r.p_hat},
                    {"slope", num(r.slope)},
                    {"slope_lo", num(r.slope_lo)},
                    {"slope_hi", num(r.slope_hi)},
                    {"slope_is_bound", r.slope_is_bound}});
  return rows;
}

json header(const std::string& kind) { return {{"schema", io::schema_version}, {"kind", kind}}; }

struct Context {
  const RunConfig& cfg;
  fs::path out;
  Manifest& manifest;

  fs::path output(const std::string& name) {
    manifest.outputs.push_back({name, ""});
    return out / name;
  }
  void sidecar_too(const std::string& name) { manifest.outputs.push_back({name + ".json", ""}); }
  void write_json(const std::string& name, const json& j) { io::write_text(output(name), j.dump(2) + "\n"); }
  void input(const std::string& path) { manifest.inputs.push_back({path, hex64(hash_file(path))}); }
};

// p_inf exp(theta |x|) stays integrable below this
double tilt_limit(const GibbsModel& model) {
  if (const auto* rb = std::get_if<RbModel>(&model)) return (2.0 / rb->sigma2) * std::min(rb->b(0.0), -rb->b(1.0));
  const auto& mv = std::get<MvModel>(model);
  return mv.ell > 1.0 ? std::numeric_limits<double>::infinity() : (2.0 / mv.sigma2) * mv.kappa * 2.0;
}

EventSpec event_of(const RunConfig& c) { return {c.ldp.event, c.ldp.threshold, c.ldp.ell}; }

// stationary density and F_star for either family
struct Stationary {
  GridDensity density;
  double f_star;
  json info;
};

Stationary stationary_of(const GibbsModel& model, const Grid& g) {
  if (const auto* rb = std::get_if<RbModel>(&model)) {
    auto st = stationary_rb(*rb, g);
    const double f = free_energy(st.density, *rb);
    json info = {{"method", "fixed-point"},
                 {"iterations", st.iterations},
                 {"change", st.change},
                 {"fokker_planck_l1", st.residual},
                 {"f_star", f}};
    return {std::move(st.density), f, info};
  }
  const auto& mv = std::get<MvModel>(model);
  auto mn = minimize_free_energy_mv(mv, g);
  json info = {{"method", "mirror-descent"}, {"iterations", mn.iterations}, {"spread", mn.spread}, {"f_star", mn.f_star}};
  return {std::move(mn.density), mn.f_star, info};
}

void cmd_check_model(Context& ctx, const GibbsModel& model) {
  const auto& c = ctx.cfg;
  const auto r = std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MvModel>)
          return check_assumptions(m, c.check.samples, c.sampler.seed, c.sampler.d);
        else
          return check_assumptions(m, c.check.samples, c.sampler.seed);
      },
      model);
  json j = header("assumptions");
  j.update(report_json(r));
  ctx.write_json("assumptions.json", j);
  for (const auto& ch : r.checks) std::cout << ch.id << ": " << to_string(ch.verdict) << "  " << ch.detail << "\n";
}

void cmd_sample(Context& ctx, const GibbsModel& model) {
  const auto s = sample_equilibrium(model, ctx.cfg.sampler);
  io::write_samples(ctx.output("samples.csv"), s, model_id(model));
  ctx.sidecar_too("samples.csv");
  const auto& d = s.diagnostics;
  std::cout << s.size() << " samples, acceptance " << d.acceptance_rate << ", ess " << d.ess << "\n";
}

void cmd_stationary(Context& ctx, const GibbsModel& model) {
  const auto st = stationary_of(model, build_grid(ctx.cfg));
  io::write_density(ctx.output("density.csv"), st.density);
  json j = header("stationary");
  j["model"] = model_id(model);
  j.update(st.info);
  ctx.write_json("stationary.json", j);
  std::cout << "F_star " << io::format_double(st.f_star) << "\n";
}

void cmd_rate(Context& ctx, const GibbsModel& model) {
  const auto& c = ctx.cfg;
  const Grid g = build_grid(c);
  const auto st = stationary_of(model, g);
  const EventSpec e = event_of(c);
  json j = header("rate");
  j["model"] = model_id(model);
  j["f_star"] = st.f_star;
  j["event"] = event_json(e);
  auto free_of = [&](const GridDensity& p) {
    return std::visit([&](const auto& m) { return free_energy(p, m); }, model);
  };
  try {
    const double theta_max = tilt_limit(model);
    const auto ri = rate_infimum_from(st.density, st.f_star, e, free_of, theta_max);
    j["reference"] = {{"value", ri.value},
                      {"theta", ri.theta},
                      {"stationary_statistic", ri.stationary_statistic},
                      {"note", ri.note}};
    std::cout << "tilted-family rate " << io::format_double(ri.value) << "\n";
  } catch (const NotImplemented& ex) {
    j["reference"] = nullptr;
    j["reference_note"] = ex.what();
  }
  if (!c.rate.density.empty()) {
    ctx.input(c.rate.density);
    const auto p = io::read_density(c.rate.density);
    json d = {{"path", c.rate.density}, {"free_energy", free_of(p)}};
    std::visit([&](const auto& m) { d["rate"] = rate(p, m, st.f_star); }, model);
    if (const auto* rb = std::get_if<RbModel>(&model)) {
      if (p.grid() == g) {
        const auto gap = rate_gap(p, *rb, st.density);
        d["relative_entropy_part"] = num(gap.relative_entropy_part);
        d["gamma_part"] = num(gap.gamma_part);
      }
    }
    j["density"] = d;
  }
  ctx.write_json("rate.json", j);
}

void cmd_ldp(Context& ctx, const GibbsModel& model) {
  const auto& c = ctx.cfg;
  const EventSpec e = event_of(c);
  const Grid g = build_grid(c);
  const auto st = stationary_of(model, g);
  auto est = estimate_ldp_curve(model, e, c.ldp.n_list, c.ldp.chains, c.sampler, &st.density);
  json j = header("ldp-summary");
  j["model"] = model_id(model);
  j["event"] = event_json(e);
  try {
    const double theta_max = tilt_limit(model);
    auto free_of = [&](const GridDensity& p) {
      return std::visit([&](const auto& m) { return free_energy(p, m); }, model);
    };
    const auto ri = rate_infimum_from(st.density, st.f_star, e, free_of, theta_max);
    est.reference = ri.value;
    est.reference_note = ri.note;
  } catch (const NotImplemented& ex) {
    est.reference_note = ex.what();
  } catch (const InvalidArgument& ex) {
    est.reference_note = ex.what();
  }
  io::write_ldp(ctx.output("ldp.csv"), est);
  ctx.sidecar_too("ldp.csv");
  j["interacting"] = rows_json(est);
  j["reference"] = est.reference ? json(*est.reference) : json(nullptr);
  j["reference_note"] = est.reference_note;
  if (c.ldp.surrogate) {
    const auto iid = estimate_ldp_curve_iid(st.density, e, c.ldp.n_list, c.ldp.chains, c.sampler.seed);
    io::write_ldp(ctx.output("ldp_surrogate.csv"), iid);
    ctx.sidecar_too("ldp_surrogate.csv");
    j["surrogate"] = rows_json(iid);
    j["ordering_consistent"] = est.rows.back().slope_lo <= iid.rows.back().slope_hi;
  }
  ctx.write_json("ldp_summary.json", j);
  for (const auto& r : est.rows)
    std::cout << "n=" << r.n << " hits=" << r.hits << "/" << r.chains << " slope=" << r.slope << " ["
              << r.slope_lo << ", " << r.slope_hi << "]\n";
}

void cmd_tilting(Context& ctx, const GibbsModel& model) {
  const auto& c = ctx.cfg;
  json reports = json::array();
  double worst = 0.0;
  for (double eta : c.tilting.etas) {
    const auto r = verify_tilting(model, eta, c.tilting.ell);
    json rows = json::array();
    for (const auto& row : r.rows)
      rows.push_back({{"u", num(row.u)}, {"v", num(row.v)}, {"lhs", row.lhs}, {"rhs", row.rhs}, {"residual", row.residual}});
    reports.push_back({{"eta", eta}, {"ell", r.ell}, {"ratio", r.ratio}, {"max_residual", r.max_residual}, {"rows", rows}});
    worst = std::max(worst, r.max_residual);
  }
  json j = header("tilting");
  j["model"] = model_id(model);
  j["reports"] = reports;
  j["max_residual"] = worst;
  ctx.write_json("tilting.json", j);
  std::cout << "max residual " << worst << "\n";
}

void cmd_capital_curve(Context& ctx, const GibbsModel& model) {
  const auto& c = ctx.cfg;
  CapitalCurve curve;
  if (!c.capital.input.empty()) {
    ctx.input(c.capital.input);
    const std::string head = io::read_text(c.capital.input).substr(0, 16);
    if (head.rfind("# mfldp samples", 0) == 0)
      curve = mean_capital_curve(io::read_samples(c.capital.input));
    else
      curve = capital_curve(io::read_weights(c.capital.input));
  } else {
    const auto* rb = std::get_if<RbModel>(&model);
    if (!rb) throw ConfigError("model.family", "the typical capital curve needs a rank-based model");
    curve = typical_curve(*rb, c.capital.n, build_grid(c), c.capital.offset);
  }
  io::write_curve(ctx.output("curve.csv"), curve);
  std::cout << curve.size() << " ranks\n";
}

void cmd_metrics(Context& ctx) {
  const auto& c = ctx.cfg;
  if (c.metrics.inputs.size() < 2) throw ConfigError("metrics.inputs", "need at least two measure files");
  std::vector<EmpiricalMeasure> ms;
  for (const auto& p : c.metrics.inputs) {
    ctx.input(p);
    ms.push_back(io::read_measure(p));
  }
  io::CsvTable t{"metrics",
                 {{"p", io::format_double(c.metrics.p)}},
                 {"i", "j", "quotient_prohorov", "prohorov_shift", "quotient_wasserstein", "wasserstein_shift",
                  "prohorov", "wasserstein"},
                 {}};
  for (std::size_t i = 0; i < ms.size(); ++i)
    for (std::size_t j = i + 1; j < ms.size(); ++j) {
      const auto qp = quotient_distance_with_shift(ms[i], ms[j], {BaseMetric::prohorov, 1.0});
      const auto qw = quotient_distance_with_shift(ms[i], ms[j], {BaseMetric::wasserstein, c.metrics.p});
      t.rows.push_back({static_cast<double>(i), static_cast<double>(j), qp.distance, qp.shift, qw.distance, qw.shift,
                        prohorov_1d(ms[i], ms[j]), wasserstein_1d(ms[i], ms[j], c.metrics.p)});
    }
  io::write_csv(ctx.output("metrics.csv"), t);
  json j = header("metrics-inputs");
  j["inputs"] = c.metrics.inputs;
  ctx.write_json("metrics_inputs.json", j);
  std::cout << t.rows.size() << " pairs\n";
}

}  // namespace

Manifest run_command(const std::string& command, const RunConfig& cfg, const fs::path& out_dir, int threads) {
  validate(cfg);
  kernels::set_thread_count(threads);
  Manifest m;
  m.command = command;
  m.config = render_config(cfg);
  m.config_hash = hex64(fnv1a64(m.config));
  m.seed = cfg.sampler.seed;
  m.threads = threads;
  m.version = MFLDP_VERSION;
  m.compiler = __VERSION__;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  Context ctx{cfg, out_dir, m};
  const GibbsModel model = build_model(cfg.model);
  if (command == "check-model") cmd_check_model(ctx, model);
  else if (command == "sample") cmd_sample(ctx, model);
  else if (command == "stationary") cmd_stationary(ctx, model);
  else if (command == "rate") cmd_rate(ctx, model);
  else if (command == "ldp") cmd_ldp(ctx, model);
  else if (command == "tilting") cmd_tilting(ctx, model);
  else if (command == "capital-curve") cmd_capital_curve(ctx, model);
  else if (command == "metrics") cmd_metrics(ctx);
  else throw ConfigError("command", "unknown command '" + command + "'");

  for (auto& r : m.outputs) r.hash = hex64(hash_file(out_dir / r.path));
  io::write_text(out_dir / "manifest.json", to_json_text(m));
  return m;
}

std::vector<std::string> rerun(const fs::path& manifest_path, const fs::path& out_dir) {
  const Manifest old = manifest_from_json_text(io::read_text(manifest_path));
  if (hex64(fnv1a64(old.config)) != old.config_hash) throw IoError("manifest config does not match its hash");
  for (const auto& in : old.inputs)
    if (hex64(hash_file(in.path)) != in.hash) throw IoError("input " + in.path + " changed since the recorded run");
  const RunConfig cfg = parse_config(old.config);
  const Manifest now = run_command(old.command, cfg, out_dir, old.threads);
  std::vector<std::string> differ;
  for (const auto& r : old.outputs) {
    bool found = false;
    for (const auto& s : now.outputs)
      if (s.path == r.path) {
        found = true;
        if (s.hash != r.hash) differ.push_back(r.path);
      }
    if (!found) differ.push_back(r.path);
  }
  return differ;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Mean-field Gibbs measures: sampling, stationary densities, rate functions and LDP estimates"};
  app.set_version_flag("--version", std::string(MFLDP_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = "mfldp-out", n_list;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> chains;
  int threads = 0;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "sampler.seed");
  app.add_option("--threads", threads, "thread cap for parallel kernels (0 = OpenMP default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out-dir", out_dir, "output directory")->envname("MFLDP_OUT_DIR");
  app.add_option("--set", overrides, "override a config value, section.key=value (repeatable)");
  app.add_option("--chains", chains, "ldp.chains for ldp, sampler.chains otherwise");
  app.add_option("--n-list", n_list, "ldp.n_list, comma separated");

  const std::vector<std::pair<std::string, std::string>> help{
      {"check-model", "assumption report (assumptions.json)"},
      {"sample", "equilibrium samples (samples.csv + sidecar)"},
      {"stationary", "stationary density (density.csv, stationary.json)"},
      {"rate", "free energy and tilted-family rate (rate.json)"},
      {"ldp", "Monte-Carlo LDP slopes (ldp.csv, ldp_summary.json)"},
      {"tilting", "n = 2 tilting identity residuals (tilting.json)"},
      {"capital-curve", "capital distribution curve (curve.csv)"},
      {"metrics", "pairwise quotient distances between measure files (metrics.csv)"}};
  for (const auto& [name, desc] : help) app.add_subcommand(name, desc);
  std::string manifest_path;
  auto* rerun_cmd = app.add_subcommand("rerun", "re-execute a manifest and compare output hashes");
  rerun_cmd->add_option("--manifest", manifest_path, "manifest.json of an earlier run")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ExitCode::ok : ExitCode::config_error;
  }

  try {
    if (rerun_cmd->parsed()) {
      const auto differ = rerun(manifest_path, out_dir);
      if (differ.empty()) {
        std::cout << "all outputs byte-identical\n";
        return ExitCode::ok;
      }
      for (const auto& d : differ) std::cerr << "differs: " << d << "\n";
      return ExitCode::other_error;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config(io::read_text(config_path));
    for (const auto& o : overrides) apply_override(cfg, o);
    if (seed) apply_override(cfg, "sampler.seed=" + std::to_string(*seed));
    if (chains) apply_override(cfg, (command == "ldp" ? "ldp.chains=" : "sampler.chains=") + std::to_string(*chains));
    if (!n_list.empty()) apply_override(cfg, "ldp.n_list=" + n_list);
    run_command(command, cfg, out_dir, threads);
    return ExitCode::ok;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ExitCode::config_error;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return ExitCode::config_error;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << " after " << e.iterations() << " iterations\n";
    return ExitCode::numerical_error;
  } catch (const DivergedChain& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return ExitCode::numerical_error;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return ExitCode::io_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCode::other_error;
  }
}

}  // namespace mfldp::cli
