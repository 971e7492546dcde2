#include "logkg/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "logkg/dynamics.hpp"
#include "logkg/experiments.hpp"
#include "logkg/ground_state.hpp"
#include "logkg/io.hpp"

namespace logkg {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GroundStateArgs {
  double p = 3.0;
  double omega = 0.0;
  double radius = 20.0;
  std::size_t intervals = 4000;
  std::string method = "both";
  std::string out;
  double s_lo = 1.0;
  double s_hi = 20.0;
  double cross_tol = 1e-2;
};

struct EvolveArgs {
  std::string init;
  std::string from_groundstate;
  std::string gs_method = "shoot";
  double lambda = 1.0;
  double p = 3.0;
  double dt = 0.0;
  double T = 0.0;
  std::string out;
  int sample_every = 1;
  double blowup_cap = 1e6;
  double cfl_limit = 0.9;
  double newton_tol = 1e-14;
  bool linear = false;
  bool polish = false;
};

struct CheckArgs {
  std::string suite;
  double p = 3.0;
  double omega = 0.0;
  double radius = 20.0;
  std::size_t intervals = 4000;
  double T_max = 50.0;
  double cross_tol = 1e-2;
  std::vector<double> lambdas{1.05, 1.1, 1.2, 1.5};
  double growth_target = 3.0;
  std::string out;
};

struct PlotArgs {
  std::string in;
  std::string out;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json certification_json(const Certification& c) {
  return {{"certified", c.certified}, {"k_rel", c.k_rel},       {"action_rel", c.action_rel},
          {"positive", c.positive},   {"monotone", c.monotone}, {"failure", c.failure}};
}

json suite_json(const std::string& name, const SuiteReport& rep) {
  json checks = json::array();
  for (const SuiteCheck& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  }
  return {{"suite", name},
          {"p", rep.params.p()},
          {"omega", rep.params.omega()},
          {"passed", rep.passed()},
          {"first_failure", rep.first_failure()},
          {"checks", checks}};
}

int cmd_groundstate(const GroundStateArgs& a, std::ostream& out, std::ostream& err) {
  const ModelParams params(a.p, a.omega);
  const RadialGrid grid(a.radius, a.intervals);
  const fs::path dir(a.out);
  fs::create_directories(dir);

  json summary{{"p", a.p}, {"omega", a.omega}, {"grid", io::grid_json(grid)}, {"method", a.method}};
  bool certified = true;
  std::optional<GroundState> shot, minimised;

  auto persist = [&](const GroundState& gs, const std::string& stem) {
    const Certification c = certify(gs);
    json side = io::ground_state_sidecar(gs);
    side["certification"] = certification_json(c);
    io::write_field_csv(dir / (stem + ".csv"), gs.profile);
    io::write_json(dir / (stem + ".json"), side);
    summary[stem] = {{"d_omega", gs.d_omega}, {"certified", c.certified}, {"file", stem + ".csv"}};
    if (!c.certified) {
      certified = false;
      err << stem << ": certification failed: " << c.failure << '\n';
    }
    out << stem << ": d_omega = " << io::format_number(gs.d_omega) << ", K = " << io::format_number(gs.K_value)
        << ", residual = " << io::format_number(gs.residual_norm) << (c.certified ? ", certified" : ", NOT certified")
        << '\n';
  };

  if (a.method == "shoot" || a.method == "both") {
    ShootingConfig cfg;
    cfg.s_lo = a.s_lo;
    cfg.s_hi = a.s_hi;
    cfg.radius = a.radius;
    cfg.intervals = a.intervals;
    shot = find_ground_state(params, cfg);
    if (shot->ambiguous) err << "shoot: several positive profiles in the bracket; kept the least action\n";
    persist(*shot, "shoot");
  }
  if (a.method == "nehari" || a.method == "both") {
    minimised = minimize_nehari(params, grid, nehari_seed(params, grid));
    persist(*minimised, "nehari");
  }
  if (shot && minimised) {
    const double rel = std::abs(shot->d_omega - minimised->d_omega) / shot->d_omega;
    summary["cross_method_rel"] = rel;
    summary["cross_method_tol"] = a.cross_tol;
    out << "cross-method relative difference in d_omega: " << io::format_number(rel) << '\n';
    if (!(rel <= a.cross_tol)) {
      certified = false;
      err << "methods disagree: relative difference " << rel << " exceeds " << a.cross_tol << '\n';
    }
  }
  summary["certified"] = certified;
  io::write_json(dir / "summary.json", summary);
  return certified ? exit_code::ok : exit_code::check_failed;
}

int cmd_evolve(const EvolveArgs& a, const std::vector<std::string>& argv_copy, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  if (a.init.empty() == a.from_groundstate.empty()) {
    throw DomainError("evolve: give exactly one of --init or --from-groundstate");
  }
  json provenance;
  std::optional<State> s0;
  std::optional<ModelParams> params;
  std::optional<R1Report> r1;
  if (!a.init.empty()) {
    params = ModelParams(a.p);
    const io::FieldData data = io::read_field_csv(a.init);
    s0 = make_state(data.u, data.v ? *data.v : RadialField::zeros(data.u.grid()));
    provenance = {{"source", "field_csv"}, {"path", fs::absolute(a.init).string()}};
  } else {
    const std::string stem = a.gs_method == "nehari" ? "nehari" : "shoot";
    GroundState gs = io::load_ground_state(a.from_groundstate, stem);
    params = gs.params.with_omega(0.0);
    if (a.polish) {
      if (gs.params.omega() != 0.0) throw DomainError("evolve: --polish needs a ground state at omega = 0");
      gs.profile = polish_equilibrium(gs.profile, *params);
      gs.d_omega = eval_J(gs.profile, *params);
      gs.K_value = eval_K(gs.profile, *params);
      gs.amplitude = gs.profile[0];
    }
    const CauchyData data = make_perturbed_data(gs, a.lambda);
    if (!data.warning.empty()) err << "warning: " << data.warning << '\n';
    s0 = data.state;
    provenance = {{"source", "ground_state"},
                  {"path", fs::absolute(fs::path(a.from_groundstate) / (stem + ".csv")).string()},
                  {"lambda", a.lambda},
                  {"polished", a.polish}};
    if (gs.params.omega() == 0.0) {
      r1 = check_R1_membership(*s0, gs, *params, a.lambda);
    } else {
      provenance["r1_note"] = "ground state not at omega = 0; membership not evaluated";
    }
  }

  EvolveConfig cfg;
  cfg.dt = a.dt;
  cfg.T = a.T;
  cfg.sample_every = a.sample_every;
  cfg.blowup_cap = a.blowup_cap;
  cfg.cfl_limit = a.cfl_limit;
  cfg.newton_tol = a.newton_tol;
  cfg.linear_only = a.linear;
  cfg.validate(s0->u.grid());

  const RunResult res = run(*s0, *params, cfg);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  io::write_diagnostics_csv(dir / "diagnostics.csv", res.records);
  const State final_fresh = unstagger(res.final_state, *params, cfg);
  io::write_field_csv(dir / "final.csv", final_fresh.u, &final_fresh.v);

  double drift = 0.0;
  const double e0 = res.records.front().E;
  for (const DiagnosticsRecord& r : res.records) {
    if (r.sup_abs_u <= kFidelityAmplitude) drift = std::max(drift, std::abs(r.E - e0) / std::abs(e0));
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json manifest{{"command", "evolve"},
                {"argv", argv_copy},
                {"tool_version", kToolVersion},
                {"timestamp", utc_timestamp()},
                {"params", {{"p", params->p()}, {"omega", 0.0}}},
                {"grid", io::grid_json(s0->u.grid())},
                {"config", io::evolve_config_json(cfg)},
                {"initial_data", provenance},
                {"termination", to_string(res.termination)},
                {"termination_message", res.message},
                {"steps", res.steps},
                {"refinements", res.refinements},
                {"final_dt", res.final_dt},
                {"final_time", res.final_state.t},
                {"max_relative_energy_drift", drift},
                {"outputs", {{"diagnostics", "diagnostics.csv"}, {"final_state", "final.csv"}}},
                {"wall_time", wall}};
  if (r1) {
    manifest["r1_report"] = io::r1_json(*r1);
    manifest["r1_certified"] = r1->is_member;
    const InvarianceReport inv = monitor_invariance(res.records, *r1);
    manifest["invariance"] = {{"applicable", inv.applicable},
                              {"violations", inv.violations},
                              {"samples_checked", inv.samples_checked},
                              {"reason", inv.reason}};
  }
  io::write_json(dir / "manifest.json", manifest);

  out << "termination: " << to_string(res.termination) << " at t = " << io::format_number(res.final_state.t)
      << " after " << res.steps << " steps; max relative energy drift " << io::format_number(drift) << '\n';
  switch (res.termination) {
    case Termination::completed: return exit_code::ok;
    case Termination::blowup: return exit_code::blowup;
    case Termination::solver_failure: err << res.message << '\n'; return exit_code::solver_failure;
  }
  return exit_code::solver_failure;
}

int cmd_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
  const ModelParams params(a.p, a.omega);
  json report;
  bool passed = false;
  std::string failure;
  if (a.suite == "identities") {
    const SuiteReport rep = verify_identity_suite(params);
    report = suite_json(a.suite, rep);
    passed = rep.passed();
    failure = rep.first_failure();
  } else if (a.suite == "ground_state" || a.suite == "theorem21") {
    SuiteOptions opts;
    opts.radius = a.radius;
    opts.intervals = a.intervals;
    opts.cross_tol = a.cross_tol;
    const SuiteReport rep = verify_ground_state_suite(params, opts);
    report = suite_json(a.suite, rep);
    if (rep.shooting) report["d_omega"] = rep.shooting->d_omega;
    passed = rep.passed();
    failure = rep.first_failure();
  } else {
    ShootingConfig scfg;
    scfg.radius = a.radius;
    scfg.intervals = a.intervals;
    const ModelParams rest = params.with_omega(0.0);
    const GroundState gs = find_ground_state(rest, scfg);
    const Certification c = certify(gs);
    InstabilityConfig icfg;
    icfg.lambdas = a.lambdas;
    icfg.T_max = a.T_max;
    icfg.growth_target = a.growth_target;
    EvolveConfig ecfg;
    ecfg.dt = 0.9 * gs.profile.grid().spacing();
    ecfg.sample_every = 10;
    const std::vector<InstabilityResult> results =
        c.certified ? run_instability(gs, rest, icfg, ecfg) : std::vector<InstabilityResult>{};
    json runs = json::array();
    bool inconclusive = false;
    passed = c.certified;
    if (!c.certified) failure = "ground_state.certification: " + c.failure;
    for (const InstabilityResult& r : results) {
      json entry{{"lambda", r.lambda},
                 {"r1_report", io::r1_json(r.r1)},
                 {"outcome", to_string(r.outcome)},
                 {"t_star", r.t_star},
                 {"final_h1", r.final_h1},
                 {"growth_factor", r.growth_factor},
                 {"invariance_violations", r.invariance.violations}};
      if (!a.out.empty() && r.run) {
        std::ostringstream name;
        name << "diagnostics_lambda_" << r.lambda << ".csv";
        io::write_diagnostics_csv(fs::path(a.out) / name.str(), r.run->records);
        entry["records_path"] = name.str();
      }
      runs.push_back(entry);
      if (r.outcome == InstabilityOutcome::inconclusive) inconclusive = true;
      if (r.outcome == InstabilityOutcome::solver_failure && passed) {
        passed = false;
        failure = "instability.solver_failure at lambda = " + io::format_number(r.lambda);
      }
      if (!r.invariance.passed() && passed) {
        passed = false;
        failure = "invariance at lambda = " + io::format_number(r.lambda) + ": " + r.invariance.reason;
      }
    }
    report = {{"suite", a.suite},           {"p", a.p},
              {"omega", 0.0},               {"d0", gs.d_omega},
              {"certification", certification_json(c)},
              {"T_max", a.T_max},           {"growth_target", a.growth_target},
              {"runs", runs},               {"inconclusive", inconclusive},
              {"passed", passed},           {"first_failure", failure}};
  }
  if (!a.out.empty()) io::write_json(fs::path(a.out) / ("check_" + a.suite + ".json"), report);
  out << report.dump(2) << '\n';
  if (!passed) {
    err << "check failed: " << failure << '\n';
    return exit_code::check_failed;
  }
  return exit_code::ok;
}

int cmd_plotdata(const PlotArgs& a, std::ostream& out) {
  const std::vector<DiagnosticsRecord> records = io::read_diagnostics_csv(a.in);
  const std::vector<io::LongRow> rows = io::to_long(records);
  io::write_long_csv(a.out, rows);
  out << "wrote " << rows.size() << " rows to " << a.out << '\n';
  return exit_code::ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial logarithmic Klein-Gordon toolkit: ground states, evolution and checks", "logkg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GroundStateArgs gs;
  auto* g = app.add_subcommand("groundstate", "Compute the ground state by shooting and/or minimisation");
  g->add_option("--p", gs.p, "Exponent, 2 < p < 4")->capture_default_str();
  g->add_option("--omega", gs.omega, "Frequency, 0 <= omega < 1")->capture_default_str();
  g->add_option("--R", gs.radius, "Grid radius")->capture_default_str();
  g->add_option("--n", gs.intervals, "Grid intervals")->capture_default_str();
  g->add_option("--method", gs.method, "shoot, nehari or both")
      ->check(CLI::IsMember({"shoot", "nehari", "both"}))
      ->capture_default_str();
  g->add_option("--out", gs.out, "Output directory")->required();
  g->add_option("--s-lo", gs.s_lo, "Lower amplitude of the shooting bracket")->capture_default_str();
  g->add_option("--s-hi", gs.s_hi, "Upper amplitude of the shooting bracket")->capture_default_str();
  g->add_option("--cross-tol", gs.cross_tol, "Allowed relative gap between the methods")->capture_default_str();

  EvolveArgs ev;
  auto* e = app.add_subcommand("evolve", "Evolve initial data with the energy-conserving scheme");
  e->add_option("--init", ev.init, "Field CSV with columns r,u[,v]");
  e->add_option("--from-groundstate", ev.from_groundstate, "Directory written by groundstate");
  e->add_option("--gs-method", ev.gs_method, "Which stored profile to use")
      ->check(CLI::IsMember({"shoot", "nehari"}))
      ->capture_default_str();
  e->add_option("--lambda", ev.lambda, "Dilation u0(r) = phi(r / lambda)")->capture_default_str();
  e->add_option("--p", ev.p, "Exponent when starting from --init")->capture_default_str();
  e->add_option("--dt", ev.dt, "Time step")->required();
  e->add_option("--T", ev.T, "Final time")->required();
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_option("--sample-every", ev.sample_every, "Steps between diagnostics records")->capture_default_str();
  e->add_option("--blowup-cap", ev.blowup_cap, "Amplitude declaring blow-up")->capture_default_str();
  e->add_option("--cfl-limit", ev.cfl_limit, "Largest allowed dt / dr")->capture_default_str();
  e->add_option("--newton-tol", ev.newton_tol, "Pointwise Newton tolerance")->capture_default_str();
  e->add_flag("--linear", ev.linear, "Drop the logarithmic term");
  e->add_flag("--polish", ev.polish, "Replace the stored profile by the equilibrium of the discrete scheme");

  CheckArgs ck;
  auto* c = app.add_subcommand("check", "Run a verification suite and print a JSON report");
  c->add_option("--suite", ck.suite, "identities, ground_state or instability")
      ->required()
      ->check(CLI::IsMember({"identities", "ground_state", "theorem21", "instability"}));
  c->add_option("--p", ck.p, "Exponent")->capture_default_str();
  c->add_option("--omega", ck.omega, "Frequency")->capture_default_str();
  c->add_option("--R", ck.radius, "Grid radius")->capture_default_str();
  c->add_option("--n", ck.intervals, "Grid intervals")->capture_default_str();
  c->add_option("--T-max", ck.T_max, "Time horizon of instability runs")->capture_default_str();
  c->add_option("--cross-tol", ck.cross_tol, "Allowed relative gap between the methods")->capture_default_str();
  c->add_option("--lambdas", ck.lambdas, "Dilation factors for instability runs")->delimiter(',');
  c->add_option("--growth-target", ck.growth_target, "H1 growth factor counted as instability")
      ->capture_default_str();
  c->add_option("--out", ck.out, "Optional directory for the report and diagnostics");

  PlotArgs pl;
  auto* pd = app.add_subcommand("plotdata", "Reshape a diagnostics CSV into long format t,quantity,value");
  pd->add_option("--in", pl.in, "Diagnostics CSV")->required();
  pd->add_option("--out", pl.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  std::vector<std::string> argv_copy(argv, argv + argc);
  try {
    if (g->parsed()) return cmd_groundstate(gs, out, err);
    if (e->parsed()) return cmd_evolve(ev, argv_copy, out, err);
    if (c->parsed()) return cmd_check(ck, out, err);
    if (pd->parsed()) return cmd_plotdata(pl, out);
  } catch (const io::CsvError& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code::bad_data;
  } catch (const DomainError& ex) {
    err << "error: " << ex.what() << '\n' << app.help() << '\n';
    return exit_code::usage;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code::solver_failure;
  } catch (const std::filesystem::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code::usage;
  }
  return exit_code::usage;
}

}  // namespace logkg
