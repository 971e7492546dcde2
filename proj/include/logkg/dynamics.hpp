#pragma once

#include <string>
#include <vector>

#include "logkg/error.hpp"
#include "logkg/functionals.hpp"
#include "logkg/radial_field.hpp"

namespace logkg {

enum class BoundaryCondition { dirichlet_zero };

struct EvolveConfig {
  double dt = 0.0045;
  double T = 10.0;
  BoundaryCondition bc = BoundaryCondition::dirichlet_zero;
  double blowup_cap = 1e6;
  double newton_tol = 1e-14;  // relative update size ending the pointwise Newton solve
  int newton_max = 50;
  int sample_every = 1;
  double cfl_limit = 0.9;  // dt <= cfl_limit * dr; the scheme itself is stable up to 1
  bool linear_only = false;  // drop the logarithmic term (pure Klein-Gordon)
  // run() halves dt while dt^2 |W''(sup |u|)| exceeds stiffness_limit or a
  // pointwise solve fails, at most max_refinements times.
  double stiffness_limit = 0.01;
  int max_refinements = 40;

  /// Throws DomainError for non-positive dt or T, bad sampling, or a CFL violation on `grid`.
  void validate(const RadialGrid& grid) const;
};

/// Solution snapshot. Freshly built states carry v = u_t at time t; states
/// produced by `step` carry the backward difference (u^n - u^{n-1}) / dt,
/// flagged by `lagged`.
struct State {
  RadialField u;
  RadialField v;
  double t = 0.0;
  bool lagged = false;
};

State make_state(const RadialField& u, const RadialField& v, double t = 0.0);

/// W(u) = u^2 / 2 + G(u) and W'(u) = u - f(u).
double potential_W(double u, const ModelParams& params, bool linear_only = false);
double potential_dW(double u, const ModelParams& params, bool linear_only = false);

/// Difference quotient (W(x) - W(y)) / (x - y). Close pairs switch to the
/// midpoint expansion W'(m) + W'''(m) (x - y)^2 / 24, which avoids cancellation.
double discrete_gradient_W(double x, double y, const ModelParams& params, bool linear_only = false);

/// (r u)'' / r with u(R) = 0, evaluated on interior nodes; the origin entry
/// carries the even limit 3 u''(0) of the same stencil.
std::vector<double> flux_laplacian(const RadialField& u);

/// Converts a freshly built state into the two-level form used by `step`
/// with a Taylor half-step: u^{-1} = u - dt v + dt^2 / 2 (Laplace u - W'(u)).
State stagger(const State& s, const ModelParams& params, const EvolveConfig& cfg);

/// One step of the discrete-gradient scheme
///   u^{n+1} - 2u^n + u^{n-1} = dt^2 (Laplace_h u^n - DW(u^{n+1}, u^{n-1})),
/// solved node by node with safeguarded Newton. Throws SolverFailure if a
/// node cannot be solved even by bisection.
State step(const State& s, const ModelParams& params, const EvolveConfig& cfg);

/// Energy conserved exactly (up to the Newton tolerance) by `step`:
///   1/2 |(u^n - u^{n-1})/dt|^2 + 1/2 <grad u^n, grad u^{n-1}> + 1/2 int (W(u^n) + W(u^{n-1})).
/// Requires a lagged state.
double discrete_energy(const State& s, const ModelParams& params, const EvolveConfig& cfg);

/// Inverse of `stagger`: recovers u_t at the current time level to second order.
State unstagger(const State& s, const ModelParams& params, const EvolveConfig& cfg);

/// Reverses the direction of time: (u^n, u^{n-1}) becomes (u^{n-1}, u^n).
State reverse_time(const State& s, double dt);

struct DiagnosticsRecord {
  double t = 0.0;
  double E = 0.0;
  double J0 = 0.0;
  double K0 = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
  double sup_abs_u = 0.0;
  double strauss_ratio = 0.0;
};

DiagnosticsRecord diagnose(const State& s, const ModelParams& params, const EvolveConfig& cfg);

enum class Termination { completed, blowup, solver_failure };

const char* to_string(Termination t) noexcept;

struct RunResult {
  std::vector<DiagnosticsRecord> records;
  Termination termination;
  State final_state;
  long steps;
  std::string message;
  int refinements;  // number of step halvings
  double final_dt;
};

/// Takes ceil(T / dt) fixed steps, so the run ends at the first level with
/// t >= T. Diagnostics are sampled every cfg.sample_every steps and at the
/// final step. Blow-up (sup |u| > blowup_cap) and solver failures end the
/// run early with the last finite state and record kept. A step halving
/// restarts from the second-order velocity and rescales it so that the
/// discrete energy carries over.
RunResult run(const State& s0, const ModelParams& params, const EvolveConfig& cfg);

/// Stationary point of the semi-discrete flow: Laplace_h u = W'(u) on interior
/// nodes, found by Newton from `guess`. The time stepper keeps it fixed up to
/// rounding.
RadialField polish_equilibrium(const RadialField& guess, const ModelParams& params, double tol = 1e-13,
                               int max_iter = 50);

}  // namespace logkg
