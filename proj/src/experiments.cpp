#include "logkg/experiments.hpp"

#include <array>
#include <cmath>
#include <future>
#include <sstream>

namespace logkg {

CauchyData make_perturbed_data(const GroundState& gs, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("make_perturbed_data: lambda must be positive");
  CauchyData data{make_state(dilate(gs.profile, lambda), RadialField::zeros(gs.profile.grid())), lambda, {}};
  if (lambda <= 1.0) {
    std::ostringstream msg;
    msg << "lambda = " << lambda << " <= 1: data is not expected to lie in the unstable set";
    data.warning = msg.str();
  }
  return data;
}

R1Report check_R1_membership(const State& s, const GroundState& gs, const ModelParams& params,
                             std::optional<double> lambda) {
  if (gs.params.omega() != 0.0) throw DomainError("check_R1_membership: ground state must be computed at omega = 0");
  const ModelParams rest = params.with_omega(0.0);
  R1Report rep;
  rep.d0 = gs.d_omega;
  rep.energy_E = eval_energy(s.u, s.v, rest);
  const FunctionalTerms terms = functional_terms(s.u, rest);
  rep.K0_u0 = constraint_K(terms, rest);
  rep.grad_third = terms.grad_sq / 3.0;
  rep.nonzero = s.u.max_abs() > 0.0;
  rep.energy_below = rep.energy_E < rep.d0;
  rep.K_negative = rep.K0_u0 < 0.0;
  rep.is_member = rep.nonzero && rep.energy_below && rep.K_negative;
  rep.energy_margin = rep.d0 - rep.energy_E;
  rep.K_margin = -rep.K0_u0;
  rep.grad_above = rep.grad_third > rep.d0;
  if (lambda) {
    const double l = *lambda;
    rep.lambda = l;
    rep.predicted_E = rep.d0 * (3.0 * l - l * l * l) / 2.0;
    rep.predicted_K0 = l * (1.0 - l * l) * 0.5 * grad_l2_norm_sq(gs.profile);
  }
  return rep;
}

InvarianceReport monitor_invariance(const std::vector<DiagnosticsRecord>& records, const R1Report& start) {
  InvarianceReport rep;
  if (!start.is_member) {
    rep.reason = "skipped: initial data is not in the invariant set";
    return rep;
  }
  rep.applicable = true;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const DiagnosticsRecord& r = records[i];
    ++rep.samples_checked;
    std::string why;
    if (!(r.K0 < 0.0)) {
      std::ostringstream msg;
      msg << "K0 = " << r.K0 << " >= 0 at t = " << r.t;
      why = msg.str();
    } else if (r.sup_abs_u <= kFidelityAmplitude && !(r.E < start.d0)) {
      std::ostringstream msg;
      msg << "E = " << r.E << " >= d0 = " << start.d0 << " at t = " << r.t;
      why = msg.str();
    }
    if (!why.empty()) {
      ++rep.violations;
      if (!rep.first_violation) {
        rep.first_violation = i;
        rep.reason = why;
      }
    }
  }
  return rep;
}

void InstabilityConfig::validate() const {
  if (lambdas.empty()) throw DomainError("instability: lambda list is empty");
  for (double l : lambdas) {
    if (!(l > 1.0) || !std::isfinite(l)) throw DomainError("instability: every lambda must exceed 1");
  }
  if (!(growth_target > 1.0)) throw DomainError("instability: growth_target must exceed 1");
  if (!(T_max > 0.0)) throw DomainError("instability: T_max must be positive");
}

const char* to_string(InstabilityOutcome o) noexcept {
  switch (o) {
    case InstabilityOutcome::h1_growth_reached: return "h1_growth_reached";
    case InstabilityOutcome::blowup: return "blowup";
    case InstabilityOutcome::inconclusive: return "inconclusive";
    case InstabilityOutcome::skipped: return "skipped";
    case InstabilityOutcome::solver_failure: return "solver_failure";
  }
  return "unknown";
}

namespace {

InstabilityResult run_one(const GroundState& gs, const ModelParams& params, double lambda, double growth_target,
                          const EvolveConfig& ecfg) {
  InstabilityResult res;
  res.lambda = lambda;
  const CauchyData data = make_perturbed_data(gs, lambda);
  res.r1 = check_R1_membership(data.state, gs, params, lambda);
  if (!res.r1.is_member) {
    res.invariance = monitor_invariance({}, res.r1);
    return res;
  }
  RunResult run_res = run(data.state, params, ecfg);
  const double h1_0 = run_res.records.front().h1;
  for (const DiagnosticsRecord& r : run_res.records) {
    res.growth_factor = std::max(res.growth_factor, r.h1 / h1_0);
    if (res.outcome == InstabilityOutcome::skipped && r.h1 >= growth_target * h1_0) {
      res.outcome = InstabilityOutcome::h1_growth_reached;
      res.t_star = r.t;
    }
  }
  res.final_h1 = run_res.records.back().h1;
  if (res.outcome == InstabilityOutcome::skipped) {
    switch (run_res.termination) {
      case Termination::blowup: res.outcome = InstabilityOutcome::blowup; break;
      case Termination::solver_failure: res.outcome = InstabilityOutcome::solver_failure; break;
      case Termination::completed: res.outcome = InstabilityOutcome::inconclusive; break;
    }
    res.t_star = run_res.records.back().t;
  }
  res.invariance = monitor_invariance(run_res.records, res.r1);
  res.run = std::move(run_res);
  return res;
}

}  // namespace

std::vector<InstabilityResult> run_instability(const GroundState& gs, const ModelParams& params,
                                               const InstabilityConfig& cfg, const EvolveConfig& ecfg) {
  cfg.validate();
  EvolveConfig local = ecfg;
  local.T = cfg.T_max;
  local.validate(gs.profile.grid());
  std::vector<std::future<InstabilityResult>> jobs;
  jobs.reserve(cfg.lambdas.size());
  for (double lambda : cfg.lambdas) {
    jobs.push_back(std::async(std::launch::async, run_one, std::cref(gs), std::cref(params), lambda,
                              cfg.growth_target, std::cref(local)));
  }
  std::vector<InstabilityResult> out;
  out.reserve(jobs.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

bool SuiteReport::passed() const noexcept {
  if (checks.empty()) return false;
  for (const SuiteCheck& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::string SuiteReport::first_failure() const {
  for (const SuiteCheck& c : checks) {
    if (!c.passed) return c.name;
  }
  return checks.empty() ? "no checks ran" : "";
}

RadialField nehari_seed(const ModelParams& params, const RadialGrid& grid) {
  for (double amplitude : {3.0, 6.0, 12.0}) {
    RadialField seed = RadialField::sample(grid, [&](double r) { return amplitude * std::exp(-0.5 * r * r); });
    if (scaling_coefficients(seed, params).B < 0.0) return seed;
  }
  throw NotProjectable("nehari_seed: no Gaussian seed with a Nehari scale");
}

namespace {

void add_check(SuiteReport& rep, std::string name, bool passed, double value, double tolerance,
               std::string detail = {}) {
  rep.checks.push_back(SuiteCheck{std::move(name), passed, value, tolerance, std::move(detail)});
}

void add_certification(SuiteReport& rep, const std::string& label, const GroundState& gs,
                       const CertifyTolerances& tol) {
  const Certification c = certify(gs, tol);
  add_check(rep, label + ".constraint", c.k_rel <= tol.k_rel, c.k_rel, tol.k_rel);
  add_check(rep, label + ".action_identity", c.action_rel <= tol.action_rel, c.action_rel, tol.action_rel);
  add_check(rep, label + ".positive", c.positive, c.positive ? 1.0 : 0.0, 1.0);
  add_check(rep, label + ".monotone", c.monotone, c.monotone ? 1.0 : 0.0, 1.0);
}

double relative_l2_distance(const RadialField& a, const RadialField& b) {
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a[i] - b[i];
  return std::sqrt(l2_norm_sq(RadialField(a.grid(), std::move(diff))) / l2_norm_sq(a));
}

}  // namespace

SuiteReport verify_ground_state_suite(const ModelParams& params, const SuiteOptions& opts) {
  SuiteReport rep{params, {}, {}, {}, {}};
  const RadialGrid grid(opts.radius, opts.intervals);
  ShootingConfig scfg;
  scfg.radius = opts.radius;
  scfg.intervals = opts.intervals;

  try {
    rep.shooting = find_ground_state(params, scfg);
  } catch (const Error& e) {
    add_check(rep, "shooting.solve", false, 0.0, 0.0, e.what());
    return rep;
  }
  add_certification(rep, "shooting", *rep.shooting, opts.certify);

  try {
    rep.minimised = minimize_nehari(params, grid, nehari_seed(params, grid));
  } catch (const Error& e) {
    add_check(rep, "nehari.solve", false, 0.0, 0.0, e.what());
    return rep;
  }
  add_certification(rep, "nehari", *rep.minimised, opts.certify);

  const double d_rel = std::abs(rep.shooting->d_omega - rep.minimised->d_omega) / rep.shooting->d_omega;
  add_check(rep, "cross_method.d", d_rel <= opts.cross_tol, d_rel, opts.cross_tol);
  const double prof_rel = relative_l2_distance(rep.shooting->profile, rep.minimised->profile);
  add_check(rep, "cross_method.profile", prof_rel <= 2.0 * opts.cross_tol, prof_rel, 2.0 * opts.cross_tol);

  rep.equivalence = verify_equivalence(params, *rep.shooting);
  {
    std::ostringstream msg;
    msg << "d = " << rep.equivalence->d << ", d~ = " << rep.equivalence->d_tilde << ", skipped "
        << rep.equivalence->skipped << " of " << rep.equivalence->trials.size();
    add_check(rep, "equivalence", rep.equivalence->passed(), rep.equivalence->d_tilde / rep.equivalence->d,
              rep.equivalence->tolerance, msg.str());
  }

  try {
    ShootingConfig fine = scfg;
    fine.intervals = 2 * opts.intervals;
    const GroundState refined = find_ground_state(params, fine);
    const double ratio = rep.shooting->residual_norm / refined.residual_norm;
    add_check(rep, "residual_convergence", ratio >= opts.residual_ratio_lo && ratio <= opts.residual_ratio_hi, ratio,
              opts.residual_ratio_lo);
  } catch (const Error& e) {
    add_check(rep, "residual_convergence", false, 0.0, opts.residual_ratio_lo, e.what());
  }
  return rep;
}

RadialField random_smooth_field(const RadialGrid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(0.5, 5.0), width(0.4, 1.5), bend(0.0, 0.5), coin(0.0, 1.0);
  std::array<double, 3> c{}, s{};
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] = amp(rng) * (coin(rng) < 0.3 ? -1.0 : 1.0);
    s[k] = width(rng);
  }
  const double b = bend(rng);
  return RadialField::sample(grid, [&](double r) {
    double acc = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) acc += c[k] * std::exp(-r * r / (2.0 * s[k] * s[k]));
    return acc * (1.0 + b * r * r);
  });
}

SuiteReport verify_identity_suite(const ModelParams& params, const IdentityOptions& opts) {
  SuiteReport rep{params, {}, {}, {}, {}};
  std::mt19937_64 rng(opts.seed);
  const RadialGrid grid(20.0, 4000);

  double worst = 0.0;
  for (int k = 0; k < opts.fields; ++k) {
    const RadialField u = random_smooth_field(grid, rng);
    const FunctionalTerms t = functional_terms(u, params);
    const double lhs = action_J(t, params) - constraint_K(t, params) / 3.0;
    const double rhs = t.grad_sq / 3.0;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
  }
  add_check(rep, "identity.J_minus_K_over_3", worst <= opts.identity_tol, worst, opts.identity_tol);

  double worst_law = 0.0, worst_proj = 0.0;
  int projected = 0;
  for (int k = 0; k < opts.dilation_fields; ++k) {
    const RadialField u = random_smooth_field(grid, rng);
    const ScalingCoefficients sc = scaling_coefficients(u, params);
    for (double beta : opts.betas) {
      const double predicted = beta * sc.A + beta * beta * beta * sc.B;
      const double measured = eval_K(dilate(u, beta), params);
      const double scale = beta * sc.A + beta * beta * beta * std::abs(sc.B);
      worst_law = std::max(worst_law, std::abs(measured - predicted) / scale);
    }
    if (sc.B < 0.0) {
      const NehariProjection proj = project_to_nehari(u, params);
      worst_proj = std::max(worst_proj, std::abs(eval_K(proj.field, params)) / h1_norm_sq(proj.field));
      ++projected;
    }
  }
  add_check(rep, "dilation.law", worst_law <= opts.dilation_tol, worst_law, opts.dilation_tol);
  add_check(rep, "dilation.projection", projected > 0 && worst_proj <= opts.projection_tol, worst_proj,
            opts.projection_tol, std::to_string(projected) + " projectable fields");

  // Embedding ratios: scalar and dilation invariance and the analytic bounds.
  const RadialGrid fine(12.0, 24000);
  double worst_gn = 0.0, worst_scalar = 0.0, top_strauss = 0.0, top_gn = 0.0;
  for (int k = 0; k < 5; ++k) {
    const RadialField u = random_smooth_field(fine, rng);
    const double base_gn = gn_ratio(u, opts.gn_alpha);
    const double base_st = strauss_ratio(u);
    top_strauss = std::max(top_strauss, base_st);
    top_gn = std::max(top_gn, base_gn);
    for (double c : {-3.0, 0.1, 7.5}) {
      worst_scalar = std::max(worst_scalar, std::abs(strauss_ratio(u.scaled(c)) - base_st) / base_st);
    }
    for (double beta : {0.8, 1.25}) {
      worst_gn = std::max(worst_gn, std::abs(gn_ratio(dilate(u, beta), opts.gn_alpha) - base_gn) / base_gn);
    }
  }
  add_check(rep, "embedding.gn_dilation_invariance", worst_gn <= opts.gn_invariance_tol, worst_gn,
            opts.gn_invariance_tol);
  add_check(rep, "embedding.strauss_scalar_invariance", worst_scalar <= 1e-13, worst_scalar, 1e-13);
  add_check(rep, "embedding.strauss_bound", top_strauss <= strauss_bound(), top_strauss, strauss_bound());
  add_check(rep, "embedding.gn_bound", top_gn <= gn_ratio_bound(opts.gn_alpha), top_gn,
            gn_ratio_bound(opts.gn_alpha));

  // G' = -f by centred differences.
  double worst_deriv = 0.0;
  for (double u : {-3.0, -0.7, 0.2, 0.9, 1.0, 1.6, 4.0}) {
    const double h = 1e-5 * std::max(1.0, std::abs(u));
    const double dg = (potential_G(u + h, params) - potential_G(u - h, params)) / (2.0 * h);
    const double f = nonlinearity_f(u, params);
    worst_deriv = std::max(worst_deriv, std::abs(dg + f) / std::max(1.0, std::abs(f)));
  }
  add_check(rep, "potential.derivative", worst_deriv <= 1e-8, worst_deriv, 1e-8);
  return rep;
}

}  // namespace logkg
