#include "logkg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include <lapacke.h>

namespace logkg {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// W and its derivatives at one point, sharing a single log/exp evaluation.
struct PotentialJet {
  double w, d1, d2, d3;
};

PotentialJet potential_jet(double u, const ModelParams& params, bool linear_only) {
  PotentialJet j{0.5 * u * u, u, 1.0, 0.0};
  const double a = std::abs(u);
  if (linear_only || a == 0.0) return j;
  const double p = params.p();
  const double q = p + 1.0;
  const double la = std::log(a);
  const double apm2 = std::exp((p - 2.0) * la);
  const double apm1 = apm2 * a;
  j.w += apm1 * a * a * (2.0 / (q * q) - 2.0 * la / q);
  j.d1 -= apm1 * u * 2.0 * la;
  j.d2 -= apm1 * (2.0 * p * la + 2.0);
  const double d3 = apm2 * ((p - 1.0) * (2.0 * p * la + 2.0) + 2.0 * p);
  j.d3 = u > 0.0 ? -d3 : d3;
  return j;
}

bool use_midpoint(double x, double y) {
  const double d = std::abs(x - y);
  return d < 1e-12 || d < 1e-4 * std::abs(0.5 * (x + y));
}

// DW(x, y) and its partial derivative in x.
std::pair<double, double> dw_with_slope(double x, double y, const ModelParams& params, bool linear_only) {
  const double d = x - y;
  if (use_midpoint(x, y)) {
    const PotentialJet m = potential_jet(0.5 * (x + y), params, linear_only);
    return {m.d1 + m.d3 * d * d / 24.0, 0.5 * m.d2 + m.d3 * d / 12.0};
  }
  const PotentialJet jx = potential_jet(x, params, linear_only);
  const double wy = potential_jet(y, params, linear_only).w;
  const double dw = (jx.w - wy) / d;
  return {dw, (jx.d1 - dw) / d};
}

// Solves x - b + dt2 * DW(x, y) = 0 for one node.
double solve_node(double b, double y, double guess, double dt2, const ModelParams& params,
                  const EvolveConfig& cfg, std::size_t node) {
  auto residual = [&](double x) { return x - b + dt2 * dw_with_slope(x, y, params, cfg.linear_only).first; };
  double x = guess;
  for (int it = 0; it < cfg.newton_max; ++it) {
    const auto [dw, slope] = dw_with_slope(x, y, params, cfg.linear_only);
    const double jac = 1.0 + dt2 * slope;
    if (!(jac > 0.0) || !std::isfinite(dw)) break;
    const double dx = (x - b + dt2 * dw) / jac;
    x -= dx;
    if (!std::isfinite(x)) break;
    if (std::abs(dx) <= cfg.newton_tol * (1.0 + std::abs(x))) return x;
  }

  // Bisection fallback on an expanding bracket around the explicit guess.
  double lo = guess, hi = guess;
  double width = 1e-6 * (1.0 + std::abs(guess));
  bool bracketed = false;
  for (int k = 0; k < 200 && !bracketed; ++k) {
    const double f_lo = residual(lo), f_hi = residual(hi);
    if (f_lo <= 0.0 && f_hi >= 0.0) {
      bracketed = true;
      break;
    }
    if (f_lo > 0.0) lo -= width;
    if (f_hi < 0.0) hi += width;
    width *= 2.0;
    if (!std::isfinite(lo) || !std::isfinite(hi)) break;
  }
  if (bracketed) {
    for (int k = 0; k < 400; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (hi - lo <= cfg.newton_tol * (1.0 + std::abs(mid)) || mid <= lo || mid >= hi) return mid;
      if (residual(mid) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
  std::ostringstream msg;
  msg << "pointwise solve failed at node " << node << " (Newton and bisection), previous value " << y;
  throw SolverFailure(msg.str());
}

double origin_value(const std::vector<double>& u) { return (4.0 * u[1] - u[2]) / 3.0; }

}  // namespace

void EvolveConfig::validate(const RadialGrid& grid) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("evolve: dt must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("evolve: T must be positive");
  if (sample_every < 1) throw DomainError("evolve: sample_every must be at least 1");
  if (newton_max < 1 || !(newton_tol > 0.0)) throw DomainError("evolve: invalid Newton settings");
  if (!(blowup_cap > 0.0)) throw DomainError("evolve: blowup_cap must be positive");
  if (max_refinements < 0 || !(stiffness_limit > 0.0)) throw DomainError("evolve: invalid step refinement settings");
  if (dt > cfl_limit * grid.spacing() * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "CFL violation: dt = " << dt << " exceeds " << cfl_limit << " * dr = " << cfl_limit * grid.spacing();
    throw DomainError(msg.str());
  }
}

State make_state(const RadialField& u, const RadialField& v, double t) {
  if (!(u.grid() == v.grid())) throw DomainError("state: u and v live on different grids");
  return State{u, v, t, false};
}

double potential_W(double u, const ModelParams& params, bool linear_only) {
  return potential_jet(u, params, linear_only).w;
}

double potential_dW(double u, const ModelParams& params, bool linear_only) {
  return potential_jet(u, params, linear_only).d1;
}

double discrete_gradient_W(double x, double y, const ModelParams& params, bool linear_only) {
  return dw_with_slope(x, y, params, linear_only).first;
}

std::vector<double> flux_laplacian(const RadialField& u) {
  const RadialGrid& g = u.grid();
  const std::size_t n = g.intervals();
  const double dr = g.spacing();
  const double inv = 1.0 / (dr * dr);
  std::vector<double> lap(g.size(), 0.0);
  lap[0] = 6.0 * (u[1] - u[0]) * inv;
  for (std::size_t i = 1; i < n; ++i) {
    const double r = g.node(i);
    lap[i] = (g.node(i + 1) * u[i + 1] - 2.0 * r * u[i] + g.node(i - 1) * u[i - 1]) * inv / r;
  }
  return lap;
}

State stagger(const State& s, const ModelParams& params, const EvolveConfig& cfg) {
  if (s.lagged) return s;
  const std::vector<double> lap = flux_laplacian(s.u);
  const std::size_t n = s.u.grid().intervals();
  std::vector<double> prev(s.u.size(), 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double acc = lap[i] - potential_dW(s.u[i], params, cfg.linear_only);
    prev[i] = s.u[i] - cfg.dt * s.v[i] + 0.5 * cfg.dt * cfg.dt * acc;
  }
  prev[0] = origin_value(prev);
  std::vector<double> v(s.u.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i] = (s.u[i] - prev[i]) / cfg.dt;
  return State{s.u, RadialField(s.u.grid(), std::move(v)), s.t, true};
}

State step(const State& s, const ModelParams& params, const EvolveConfig& cfg) {
  const State cur = stagger(s, params, cfg);
  const RadialGrid& g = cur.u.grid();
  const std::size_t n = g.intervals();
  const double dt2 = cfg.dt * cfg.dt;
  const std::vector<double> lap = flux_laplacian(cur.u);
  std::vector<double> next(g.size(), 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double u = cur.u[i];
    const double y = u - cfg.dt * cur.v[i];
    const double b = 2.0 * u - y + dt2 * lap[i];
    const double guess = b - dt2 * potential_dW(u, params, cfg.linear_only);
    next[i] = solve_node(b, y, guess, dt2, params, cfg, i);
  }
  next[0] = origin_value(next);
  std::vector<double> v(g.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i] = (next[i] - cur.u[i]) / cfg.dt;
  return State{RadialField(g, std::move(next)), RadialField(g, std::move(v)), cur.t + cfg.dt, true};
}

double discrete_energy(const State& s, const ModelParams& params, const EvolveConfig& cfg) {
  if (!s.lagged) throw DomainError("discrete_energy: state must come from the stepper (call stagger first)");
  const RadialGrid& g = s.u.grid();
  const std::size_t n = g.intervals();
  const double dr = g.spacing();
  double kinetic = 0.0, potential = 0.0, gradient = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double r2 = g.node(i) * g.node(i);
    const double prev = s.u[i] - cfg.dt * s.v[i];
    kinetic += r2 * s.v[i] * s.v[i];
    potential += r2 * (potential_W(s.u[i], params, cfg.linear_only) + potential_W(prev, params, cfg.linear_only));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double ra = g.node(i), rb = g.node(i + 1);
    const double cur = rb * s.u[i + 1] - ra * s.u[i];
    const double prev = rb * (s.u[i + 1] - cfg.dt * s.v[i + 1]) - ra * (s.u[i] - cfg.dt * s.v[i]);
    gradient += cur * prev;
  }
  return kFourPi * (0.5 * kinetic * dr + 0.5 * gradient / dr + 0.5 * potential * dr);
}

State reverse_time(const State& s, double dt) {
  if (!s.lagged) {
    return State{s.u, s.v.scaled(-1.0), s.t, false};
  }
  std::vector<double> prev(s.u.size());
  for (std::size_t i = 0; i < prev.size(); ++i) prev[i] = s.u[i] - dt * s.v[i];
  return State{RadialField(s.u.grid(), std::move(prev)), s.v.scaled(-1.0), s.t - dt, true};
}

DiagnosticsRecord diagnose(const State& s, const ModelParams& params, const EvolveConfig& cfg) {
  const ModelParams rest = params.with_omega(0.0);
  const State lagged = stagger(s, params, cfg);
  DiagnosticsRecord rec;
  rec.t = s.t;
  rec.E = discrete_energy(lagged, rest, cfg);
  const FunctionalTerms terms = functional_terms(s.u, rest);
  rec.J0 = action_J(terms, rest);
  rec.K0 = constraint_K(terms, rest);
  rec.l2 = std::sqrt(terms.l2_sq);
  rec.h1 = std::sqrt(terms.l2_sq + terms.grad_sq);
  rec.sup_abs_u = s.u.max_abs();
  rec.strauss_ratio = rec.h1 > 0.0 ? strauss_ratio(s.u) : 0.0;
  return rec;
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::blowup: return "blowup";
    case Termination::solver_failure: return "solver_failure";
  }
  return "unknown";
}

State unstagger(const State& s, const ModelParams& params, const EvolveConfig& cfg) {
  if (!s.lagged) return s;
  const std::vector<double> lap = flux_laplacian(s.u);
  const std::size_t n = s.u.grid().intervals();
  std::vector<double> v(s.u.size(), 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    v[i] = s.v[i] + 0.5 * cfg.dt * (lap[i] - potential_dW(s.u[i], params, cfg.linear_only));
  }
  v[0] = origin_value(v);
  return State{s.u, RadialField(s.u.grid(), std::move(v)), s.t, false};
}

// Scales the lagged velocity by the factor gamma near 1 for which the discrete
// energy equals `target`, so a change of step size keeps the conserved value.
State rescale_to_energy(const State& s, double target, const ModelParams& params, const EvolveConfig& cfg) {
  auto energy_at = [&](double gamma) {
    return discrete_energy(State{s.u, s.v.scaled(gamma), s.t, true}, params, cfg) - target;
  };
  double g0 = 1.0, f0 = energy_at(g0);
  const double scale = std::abs(target) + std::abs(f0 + target) + std::abs(energy_at(0.0) + target);
  double g1 = 1.01, f1 = energy_at(g1);
  for (int it = 0; it < 60 && f1 != 0.0; ++it) {
    if (f1 == f0 || !std::isfinite(f1)) break;
    const double g2 = g1 - f1 * (g1 - g0) / (f1 - f0);
    g0 = g1;
    f0 = f1;
    g1 = g2;
    f1 = energy_at(g1);
    if (std::abs(g1 - g0) <= 1e-15 * std::abs(g1)) break;
  }
  if (!std::isfinite(g1) || !(g1 > 0.5 && g1 < 2.0) || !(std::abs(f1) <= 1e-10 * scale)) return s;
  return State{s.u, s.v.scaled(g1), s.t, true};
}

double stiffness(const State& s, const ModelParams& params, const EvolveConfig& cfg) {
  const double top = s.u.max_abs();
  if (cfg.linear_only || top <= 1.0) return 0.0;
  return cfg.dt * cfg.dt * std::max(0.0, -potential_jet(top, params, false).d2);
}

RunResult run(const State& s0, const ModelParams& params, const EvolveConfig& cfg) {
  cfg.validate(s0.u.grid());
  if (!(s0.u.grid() == s0.v.grid())) throw DomainError("run: u and v live on different grids");
  if (!s0.u.is_finite() || !s0.v.is_finite()) throw DomainError("run: initial state is not finite");

  EvolveConfig local = cfg;
  std::vector<DiagnosticsRecord> records;
  Termination termination = Termination::completed;
  std::string message;
  long steps = 0;
  int refinements = 0;
  State cur = stagger(s0, params, local);
  records.push_back(diagnose(cur, params, local));
  const double t_end = s0.t + cfg.T;
  double t_ref = s0.t;  // time origin of the current step size
  long k_ref = 0;
  const long planned = std::max(1L, static_cast<long>(std::ceil(cfg.T / cfg.dt - 1e-9)));

  auto refine = [&]() {
    if (refinements >= cfg.max_refinements) return false;
    const double energy = discrete_energy(cur, params, local);
    const State fresh = unstagger(cur, params, local);
    local.dt *= 0.5;
    ++refinements;
    t_ref = cur.t;
    k_ref = 0;
    cur = rescale_to_energy(stagger(fresh, params, local), energy, params, local);
    return true;
  };

  while (refinements == 0 ? k_ref < planned : cur.t < t_end - 1e-9 * local.dt) {
    while (stiffness(cur, params, local) > cfg.stiffness_limit && refine()) {
    }
    std::optional<State> next;
    try {
      next = step(cur, params, local);
    } catch (const SolverFailure& e) {
      if (refine()) continue;
      termination = Termination::solver_failure;
      message = e.what();
      break;
    }
    ++k_ref;
    ++steps;
    next->t = t_ref + static_cast<double>(k_ref) * local.dt;
    const bool finite = next->u.is_finite() && next->v.is_finite();
    if (!finite || next->u.max_abs() > cfg.blowup_cap) {
      termination = Termination::blowup;
      std::ostringstream msg;
      msg << "sup |u| exceeded " << cfg.blowup_cap << " at t = " << next->t;
      message = msg.str();
      if (finite) {
        records.push_back(diagnose(*next, params, local));
        cur = std::move(*next);
      }
      break;
    }
    cur = std::move(*next);
    const bool last = refinements == 0 ? k_ref == planned : cur.t >= t_end - 1e-9 * local.dt;
    if (steps % cfg.sample_every == 0 || last) records.push_back(diagnose(cur, params, local));
  }
  return RunResult{std::move(records), termination, std::move(cur), steps, std::move(message), refinements,
                   local.dt};
}

RadialField polish_equilibrium(const RadialField& guess, const ModelParams& params, double tol, int max_iter) {
  const RadialGrid& g = guess.grid();
  const std::size_t n = g.intervals();
  const double inv = 1.0 / (g.spacing() * g.spacing());
  std::vector<double> u = guess.values();
  u[n] = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const std::vector<double> lap = flux_laplacian(RadialField(g, u));
    const std::size_t m = n - 1;
    std::vector<double> lower(m, 0.0), diag(m), upper(m, 0.0), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      const double r = g.node(i);
      const PotentialJet j = potential_jet(u[i], params, false);
      rhs[k] = -(j.d1 - lap[i]);
      diag[k] = 2.0 * inv + j.d2;
      if (k > 0) lower[k] = -g.node(i - 1) * inv / r;
      if (k + 1 < m) upper[k] = -g.node(i + 1) * inv / r;
    }
    // dgtsv: partial pivoting, sub/super-diagonals of length m - 1.
    std::vector<double> du = rhs;
    std::vector<double> sub(lower.begin() + 1, lower.end()), sup(upper.begin(), upper.end() - 1);
    if (LAPACKE_dgtsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(m), 1, sub.data(), diag.data(), sup.data(), du.data(),
                      static_cast<lapack_int>(m)) != 0) {
      throw SolverFailure("polish_equilibrium: singular Jacobian");
    }
    double change = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      u[k + 1] += du[k];
      change = std::max(change, std::abs(du[k]));
    }
    u[0] = origin_value(u);
    double scale = 0.0;
    for (double x : u) scale = std::max(scale, std::abs(x));
    if (!std::isfinite(change)) break;
    if (change <= tol * scale) return RadialField(g, std::move(u));
  }
  throw ConvergenceError("polish_equilibrium: Newton did not converge");
}

}  // namespace logkg
