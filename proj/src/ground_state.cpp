#include "logkg/ground_state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/numeric/odeint.hpp>
#include <lapacke.h>

namespace logkg {

namespace {

namespace odeint = boost::numeric::odeint;

struct OdeState {
  double phi;
  double dphi;
};

// Radial profile equation as a first-order system in r.
class ProfileRhs {
 public:
  explicit ProfileRhs(const ModelParams& params) : params_(params), mass_(params.mass()) {}
  OdeState operator()(double r, const OdeState& y) const {
    return {y.dphi, mass_ * y.phi - nonlinearity_f(y.phi, params_) - 2.0 * y.dphi / r};
  }
  double source(double s) const { return mass_ * s - nonlinearity_f(s, params_); }

 private:
  ModelParams params_;
  double mass_;
};

// Adaptive Dormand-Prince 5(4) from Boost.Odeint, stepped by hand so that an
// observer can stop the integration after any accepted step.
class DormandPrince {
 public:
  using Observer = std::function<bool(double, const OdeState&)>;

  DormandPrince(ProfileRhs rhs, double rtol, double atol)
      : rhs_(std::move(rhs)),
        stepper_(odeint::make_controlled(atol, rtol, odeint::runge_kutta_dopri5<Vec2>())) {}

  // Integrates from (r, y) to r_end, updating r, y and the step-size hint h.
  // Returns false if the observer stopped the integration.
  bool advance(double& r, OdeState& y, double r_end, double& h, const Observer& observe) {
    const auto system = [this](const Vec2& x, Vec2& dxdr, double rr) {
      const OdeState d = rhs_(rr, {x[0], x[1]});
      dxdr = {d.phi, d.dphi};
    };
    Vec2 x{y.phi, y.dphi};
    while (r < r_end) {
      double dt = h;
      // Stretch the final step rather than leave a sliver below it.
      const bool last = r + 1.01 * dt >= r_end;
      if (last) dt = r_end - r;
      if (dt < 1e-14 * std::max(1.0, r)) {
        std::ostringstream msg;
        msg << "shooting integrator: step size underflow at r = " << r;
        throw SolverFailure(msg.str());
      }
      if (stepper_.try_step(system, x, r, dt) == odeint::success) {
        if (last) {
          r = r_end;
        } else {
          h = dt;
        }
        y = {x[0], x[1]};
        if (!observe(r, y)) return false;
      } else {
        h = dt;
      }
    }
    return true;
  }

 private:
  using Vec2 = std::array<double, 2>;
  using Controlled = decltype(odeint::make_controlled(0.0, 0.0, odeint::runge_kutta_dopri5<Vec2>()));
  ProfileRhs rhs_;
  Controlled stepper_;
};

constexpr double kSeriesStart = 1e-6;

// Taylor start off the coordinate singularity: phi(h) ~ s + h^2 q / 6.
OdeState series_start(double s, const ProfileRhs& rhs) {
  const double q = rhs.source(s);
  return {s + kSeriesStart * kSeriesStart * q / 6.0, kSeriesStart * q / 3.0};
}

// Event classification shared by shoot() and the grid sampler.
class ShotClassifier {
 public:
  ShotClassifier(const ShootingConfig& cfg) : cfg_(cfg) {}

  bool decided() const noexcept { return decided_; }
  ShotOutcome outcome() const noexcept { return outcome_; }

  bool operator()(double /*r*/, const OdeState& y) {
    if (!std::isfinite(y.phi) || !std::isfinite(y.dphi) || std::abs(y.phi) >= cfg_.blowup_cap) {
      return set(ShotOutcome::diverges);
    }
    if (y.phi <= 0.0) return set(ShotOutcome::crosses_zero);
    if (y.dphi < 0.0) descended_ = true;
    if (descended_ && y.dphi > 0.0) return set(ShotOutcome::diverges);
    if (std::abs(y.phi) + std::abs(y.dphi) < cfg_.tail_threshold) return set(ShotOutcome::converged_tail);
    return true;
  }

 private:
  bool set(ShotOutcome o) {
    decided_ = true;
    outcome_ = o;
    return false;
  }

  const ShootingConfig& cfg_;
  bool descended_ = false;
  bool decided_ = false;
  ShotOutcome outcome_ = ShotOutcome::diverges;
};

struct Trajectory {
  std::vector<double> phi;
  std::size_t valid_until = 0;  // last node not affected by a classification event
};

Trajectory sample_trajectory(double s, const ModelParams& params, const ShootingConfig& cfg,
                             const RadialGrid& grid) {
  const ProfileRhs rhs(params);
  DormandPrince stepper(rhs, cfg.rtol, cfg.atol);
  Trajectory tr;
  tr.phi.assign(grid.size(), 0.0);
  tr.phi[0] = s;
  double r = kSeriesStart;
  OdeState y = series_start(s, rhs);
  double h = std::min(1e-3, grid.spacing());
  ShotClassifier classify(cfg);
  auto observer = [&](double rr, const OdeState& yy) { return classify(rr, yy); };
  std::size_t i = 1;
  for (; i < grid.size(); ++i) {
    if (!stepper.advance(r, y, grid.node(i), h, observer)) break;
    tr.phi[i] = y.phi;
    h = std::min(h, grid.spacing());
  }
  tr.valid_until = i - 1;
  return tr;
}

struct Candidate {
  double s_a;
  double s_b;
};

Candidate bisect(double lo, ShotOutcome o_lo, double hi, const ModelParams& params, const ShootingConfig& cfg) {
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (hi - lo <= cfg.tol_s * hi) return {lo, hi};
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return {lo, hi};
    const ShotOutcome o = shoot_classify(mid, params, cfg);
    if (o == ShotOutcome::converged_tail) return {mid, mid};
    if (o == o_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw ConvergenceError("find_ground_state: bisection did not converge within max_iter");
}

// Joins the two bracketing trajectories up to the point where they separate
// and continues with the decaying solution e^{-sqrt(m) r} / r of the
// linearised equation.
RadialField assemble_profile(const Candidate& c, const ModelParams& params, const ShootingConfig& cfg,
                             const RadialGrid& grid) {
  const Trajectory ta = sample_trajectory(c.s_a, params, cfg, grid);
  const Trajectory tb = c.s_b == c.s_a ? ta : sample_trajectory(c.s_b, params, cfg, grid);
  const std::size_t n = grid.intervals();
  const std::size_t valid = std::min(ta.valid_until, tb.valid_until);
  const double decay = std::sqrt(params.mass());

  std::size_t match = valid;
  if (valid < n) {
    std::size_t gap = valid;
    for (std::size_t i = 1; i <= valid; ++i) {
      const double scale = 0.5 * (std::abs(ta.phi[i]) + std::abs(tb.phi[i]));
      if (std::abs(ta.phi[i] - tb.phi[i]) > 1e-6 * scale) {
        gap = i;
        break;
      }
    }
    const auto back = static_cast<std::size_t>(std::lround(1.0 / (decay * grid.spacing())));
    match = gap > back + 1 ? gap - back : 1;
  }

  std::vector<double> phi(grid.size());
  for (std::size_t i = 0; i <= match; ++i) phi[i] = 0.5 * (ta.phi[i] + tb.phi[i]);
  const double r_m = grid.node(match);
  const double phi_m = phi[match];
  for (std::size_t i = match + 1; i <= n; ++i) {
    const double r = grid.node(i);
    phi[i] = phi_m * (r_m / r) * std::exp(-decay * (r - r_m));
  }
  return RadialField(grid, std::move(phi));
}

GroundState make_ground_state(RadialField profile, const ModelParams& params, GroundStateMethod method,
                              int iterations) {
  const auto terms = functional_terms(profile, params);
  GroundState gs{std::move(profile), params, method, 0.0, 0.0, 0.0, 0.0, 0, {}, false};
  gs.d_omega = action_J(terms, params);
  gs.K_value = constraint_K(terms, params);
  gs.residual_norm = residual_norm(gs.profile, params);
  gs.amplitude = gs.profile[0];
  gs.iterations = iterations;
  return gs;
}

bool all_positive(const RadialField& phi) {
  for (std::size_t i = 0; i + 1 < phi.size(); ++i) {
    if (!(phi[i] > 0.0)) return false;
  }
  return phi[phi.size() - 1] >= 0.0;
}

}  // namespace

void ShootingConfig::validate() const {
  if (!(s_lo > 0.0) || !std::isfinite(s_hi)) throw BracketError("shooting bracket must be positive and finite");
  if (!(s_lo < s_hi)) {
    std::ostringstream msg;
    msg << "bracket does not straddle: s_lo = " << s_lo << " is not below s_hi = " << s_hi;
    throw BracketError(msg.str());
  }
  if (!(tol_s > 0.0)) throw DomainError("shooting tolerance must be positive");
  if (max_iter <= 0) throw DomainError("shooting max_iter must be positive");
  if (!(blowup_cap > 0.0) || !(tail_threshold > 0.0)) throw DomainError("shooting thresholds must be positive");
  if (!(r_max >= radius)) throw DomainError("shooting r_max must be at least the grid radius");
  RadialGrid(radius, intervals);
}

const char* to_string(ShotOutcome o) noexcept {
  switch (o) {
    case ShotOutcome::crosses_zero: return "crosses_zero";
    case ShotOutcome::diverges: return "diverges";
    case ShotOutcome::converged_tail: return "converged_tail";
  }
  return "unknown";
}

const char* to_string(GroundStateMethod m) noexcept {
  switch (m) {
    case GroundStateMethod::shooting: return "shooting";
    case GroundStateMethod::nehari_min: return "nehari_min";
  }
  return "unknown";
}

ShotResult shoot(double s, const ModelParams& params, const ShootingConfig& cfg) {
  if (!(s > 0.0)) throw DomainError("shoot: amplitude must be positive");
  if (s >= cfg.blowup_cap) return {ShotOutcome::diverges, 0.0};
  const ProfileRhs rhs(params);
  DormandPrince stepper(rhs, cfg.rtol, cfg.atol);
  double r = kSeriesStart;
  OdeState y = series_start(s, rhs);
  double h = 1e-4;
  ShotClassifier classify(cfg);
  double r_event = r;
  stepper.advance(r, y, cfg.r_max, h, [&](double rr, const OdeState& yy) {
    r_event = rr;
    return classify(rr, yy);
  });
  // A trajectory that neither decays nor turns before r_max stays trapped
  // above zero: the undershoot side.
  if (!classify.decided()) return {ShotOutcome::diverges, cfg.r_max};
  return {classify.outcome(), r_event};
}

ShotOutcome shoot_classify(double s, const ModelParams& params, const ShootingConfig& cfg) {
  return shoot(s, params, cfg).outcome;
}

GroundState find_ground_state(const ModelParams& params, const ShootingConfig& cfg) {
  cfg.validate();
  const RadialGrid grid(cfg.radius, cfg.intervals);

  // Probe the bracket endpoints and a geometric scan in between.
  std::vector<double> probes{cfg.s_lo};
  const double ratio = std::pow(cfg.s_hi / cfg.s_lo, 1.0 / (cfg.scan_points + 1));
  for (int k = 1; k <= cfg.scan_points; ++k) probes.push_back(cfg.s_lo * std::pow(ratio, k));
  probes.push_back(cfg.s_hi);

  const ShotOutcome o_lo = shoot_classify(cfg.s_lo, params, cfg);
  const ShotOutcome o_hi = shoot_classify(cfg.s_hi, params, cfg);
  if (o_lo == o_hi && o_lo != ShotOutcome::converged_tail) {
    std::ostringstream msg;
    msg << "bracket does not straddle: both endpoints " << to_string(o_lo) << " (s_lo = " << cfg.s_lo
        << ", s_hi = " << cfg.s_hi << ")";
    throw BracketError(msg.str());
  }

  std::vector<ShotOutcome> outcomes;
  outcomes.reserve(probes.size());
  outcomes.push_back(o_lo);
  for (std::size_t k = 1; k + 1 < probes.size(); ++k) outcomes.push_back(shoot_classify(probes[k], params, cfg));
  outcomes.push_back(o_hi);

  std::vector<Candidate> candidates;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    if (outcomes[k] == ShotOutcome::converged_tail) {
      candidates.push_back({probes[k], probes[k]});
      continue;
    }
    if (k + 1 < probes.size() && outcomes[k + 1] != ShotOutcome::converged_tail && outcomes[k + 1] != outcomes[k]) {
      candidates.push_back(bisect(probes[k], outcomes[k], probes[k + 1], params, cfg));
    }
  }

  std::vector<GroundState> found;
  int iterations = 0;
  for (const Candidate& c : candidates) {
    RadialField profile = assemble_profile(c, params, cfg, grid);
    if (!all_positive(profile)) continue;
    found.push_back(make_ground_state(std::move(profile), params, GroundStateMethod::shooting, ++iterations));
  }
  if (found.empty()) throw ConvergenceError("find_ground_state: no positive profile found in the bracket");

  auto best = std::min_element(found.begin(), found.end(),
                               [](const GroundState& a, const GroundState& b) { return a.d_omega < b.d_omega; });
  GroundState gs = *best;
  for (const GroundState& g : found) gs.candidate_amplitudes.push_back(g.amplitude);
  gs.ambiguous = found.size() > 1;
  return gs;
}

namespace {

// Flux-form discretisation used by the minimiser: rho_i = r_i phi_i,
// A_h = 2 pi sum (rho_{i+1} - rho_i)^2 / dr, P_h = 4 pi sum r_i^2 dr (m/2 phi_i^2 + G(phi_i)).
// Unknowns are phi_1..phi_{n-1}; phi_n = 0.
class FluxForm {
 public:
  FluxForm(const RadialGrid& grid, const ModelParams& params, double penalty)
      : params_(params), penalty_(penalty), dr_(grid.spacing()), size_(grid.intervals() - 1), r_(size_ + 2) {
    for (std::size_t i = 0; i < r_.size(); ++i) r_[i] = grid.node(i);
    // Preconditioner M = 4 pi (S + m diag(r^2 dr)), S the Hessian of A_h / (4 pi).
    const double m = params_.mass();
    std::vector<double> diag(size_), off(size_, 0.0);
    for (std::size_t k = 0; k < size_; ++k) {
      const double r = r_[k + 1];
      diag[k] = kFourPi * (2.0 * r * r / dr_ + m * r * r * dr_);
      if (k + 1 < size_) off[k] = -kFourPi * r * r_[k + 2] / dr_;
    }
    // L D L^T factors of the SPD tridiagonal matrix.
    factor_d_ = std::move(diag);
    factor_e_.assign(off.begin(), off.end() - 1);
    if (LAPACKE_dpttrf(static_cast<lapack_int>(size_), factor_d_.data(), factor_e_.data()) != 0) {
      throw SolverFailure("minimiser: preconditioner is not positive definite");
    }
  }

  std::size_t size() const noexcept { return size_; }

  struct Parts {
    double A;
    double P;
  };

  Parts parts(const std::vector<double>& x) const {
    double a = 0.0, p = 0.0;
    double rho_prev = 0.0;
    const double m = params_.mass();
    for (std::size_t k = 0; k < size_; ++k) {
      const double r = r_[k + 1];
      const double rho = r * x[k];
      a += (rho - rho_prev) * (rho - rho_prev);
      rho_prev = rho;
      p += r * r * (0.5 * m * x[k] * x[k] + potential_G(x[k], params_));
    }
    a += rho_prev * rho_prev;  // last interval to rho_n = 0
    return {kFourPi * 0.5 * a / dr_, kFourPi * p * dr_};
  }

  // Quotient (2/3) A^{3/2} / sqrt(-3P) times 1 + w (q - 1)^2, q = -A / (3P) the
  // squared Nehari scale. The factor leaves the continuum minimum unchanged and
  // keeps the grid from drifting towards concentrated profiles. +inf unless P < 0.
  double objective(const Parts& q) const {
    if (!(q.P < 0.0) || !(q.A > 0.0)) return std::numeric_limits<double>::infinity();
    const double scale_sq = -q.A / (3.0 * q.P);
    return (2.0 / 3.0) * std::pow(q.A, 1.5) / std::sqrt(-3.0 * q.P) *
           (1.0 + penalty_ * (scale_sq - 1.0) * (scale_sq - 1.0));
  }

  std::vector<double> gradient(const std::vector<double>& x, const Parts& q) const {
    const double scale_sq = -q.A / (3.0 * q.P);
    const double factor = 1.0 + penalty_ * (scale_sq - 1.0) * (scale_sq - 1.0);
    const double value = objective(q) / factor;
    // d log(objective) = a dA + b dP
    const double a = 1.5 / q.A + 2.0 * penalty_ * (scale_sq - 1.0) * scale_sq / (factor * q.A);
    const double b = -0.5 / q.P - 2.0 * penalty_ * (scale_sq - 1.0) * scale_sq / (factor * q.P);
    const double m = params_.mass();
    std::vector<double> g(size_);
    for (std::size_t k = 0; k < size_; ++k) {
      const double r = r_[k + 1];
      const double rho = r * x[k];
      const double rho_l = k > 0 ? r_[k] * x[k - 1] : 0.0;
      const double rho_r = k + 1 < size_ ? r_[k + 2] * x[k + 1] : 0.0;
      const double dA = kFourPi * r * (2.0 * rho - rho_l - rho_r) / dr_;
      const double dP = kFourPi * r * r * dr_ * (m * x[k] - nonlinearity_f(x[k], params_));
      g[k] = value * factor * (a * dA + b * dP);
    }
    return g;
  }

  std::vector<double> precondition(const std::vector<double>& g) const {
    std::vector<double> z = g;
    LAPACKE_dpttrs(LAPACK_COL_MAJOR, static_cast<lapack_int>(size_), 1, factor_d_.data(), factor_e_.data(), z.data(),
                   static_cast<lapack_int>(size_));
    return z;
  }

  double metric_norm_sq(const std::vector<double>& x) const {
    double acc = 0.0;
    const double m = params_.mass();
    double rho_prev = 0.0;
    for (std::size_t k = 0; k < size_; ++k) {
      const double r = r_[k + 1];
      const double rho = r * x[k];
      acc += 2.0 * (rho - rho_prev) * (rho - rho_prev) / dr_ * 0.5 + m * r * r * dr_ * x[k] * x[k];
      rho_prev = rho;
    }
    acc += rho_prev * rho_prev / dr_;
    return kFourPi * acc;
  }

  RadialField to_field(const RadialGrid& grid, const std::vector<double>& x) const {
    std::vector<double> v(grid.size(), 0.0);
    for (std::size_t k = 0; k < size_; ++k) v[k + 1] = x[k];
    v[0] = (4.0 * v[1] - v[2]) / 3.0;
    return RadialField(grid, std::move(v));
  }

  std::vector<double> from_field(const RadialField& f) const {
    return std::vector<double>(f.values().begin() + 1, f.values().begin() + 1 + static_cast<long>(size_));
  }

 private:
  static constexpr double kFourPi = 4.0 * std::numbers::pi;
  ModelParams params_;
  double penalty_;
  double dr_;
  std::size_t size_;
  std::vector<double> r_;
  std::vector<double> factor_d_, factor_e_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

GroundState minimize_nehari(const ModelParams& params, const RadialGrid& grid, const RadialField& seed,
                            const NehariConfig& cfg) {
  if (!(seed.grid() == grid)) throw DomainError("minimize_nehari: seed lives on a different grid");
  if (!(seed.max_abs() > 0.0)) throw DomainError("minimize_nehari: seed must be nonzero");
  // Throws NotProjectable for seeds without a positive Nehari scale.
  const NehariProjection start = project_to_nehari(seed, params);

  const FluxForm form(grid, params, cfg.scale_penalty);
  std::vector<double> x = form.from_field(start.field);
  x.back() = 0.0;
  auto parts = form.parts(x);
  double value = form.objective(parts);
  if (!std::isfinite(value)) throw NotProjectable("minimize_nehari: seed has nonnegative potential part");

  std::vector<double> best = x;
  double best_value = value;

  std::vector<double> g = form.gradient(x, parts);
  std::vector<double> z = form.precondition(g);
  std::vector<double> d(z.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = -z[k];
  double gz = dot(g, z);
  double alpha = 0.1 * std::sqrt(form.metric_norm_sq(x) / std::max(gz, 1e-300));
  bool restarted = true;
  int iterations = 0;
  int stagnant = 0;

  auto stationarity = [&] { return std::sqrt(std::max(gz, 0.0) * form.metric_norm_sq(x)) / value; };

  for (; iterations < cfg.max_iter; ++iterations) {
    if (stationarity() < cfg.stationarity_tol) break;

    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = -z[k];
      slope = -gz;
      restarted = true;
    }

    // Backtracking with a quadratic-interpolation refinement.
    auto trial = [&](double a, std::vector<double>& xt, FluxForm::Parts& pt) {
      for (std::size_t k = 0; k < x.size(); ++k) xt[k] = x[k] + a * d[k];
      pt = form.parts(xt);
      return form.objective(pt);
    };
    std::vector<double> xt(x.size()), xq(x.size());
    FluxForm::Parts pt{}, pq{};
    double accepted = 0.0;
    double vt = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      vt = trial(alpha, xt, pt);
      if (std::isfinite(vt) && vt <= value + 1e-4 * alpha * slope) {
        accepted = alpha;
        break;
      }
      double shrink = 0.5;
      if (std::isfinite(vt)) {
        const double curv = vt - value - slope * alpha;
        if (curv > 0.0) shrink = std::clamp(-slope * alpha / (2.0 * curv), 0.1, 0.5);
      }
      alpha *= shrink;
    }
    if (accepted == 0.0) {
      if (stationarity() < 10.0 * cfg.stationarity_tol) break;
      if (!restarted) {
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = -z[k];
        restarted = true;
        alpha = 0.1 * std::sqrt(form.metric_norm_sq(x) / std::max(gz, 1e-300));
        continue;
      }
      throw NehariStall("minimize_nehari: line search failed to decrease the quotient",
                        form.to_field(grid, best), best_value);
    }
    {
      const double curv = vt - value - slope * accepted;
      if (curv > 0.0) {
        const double a_star = -slope * accepted * accepted / (2.0 * curv);
        if (a_star > 0.2 * accepted && a_star < 5.0 * accepted) {
          const double vq = trial(a_star, xq, pq);
          if (vq < vt) {
            std::swap(xt, xq);
            pt = pq;
            vt = vq;
            accepted = a_star;
          }
        }
      }
    }

    x.swap(xt);
    parts = pt;
    value = vt;
    if (value < best_value * (1.0 - 1e-14)) {
      stagnant = 0;
    } else if (++stagnant > 100) {
      throw NehariStall("minimize_nehari: quotient stagnated above the stationarity tolerance",
                        form.to_field(grid, best), best_value);
    }
    if (value < best_value) {
      best_value = value;
      best = x;
    }

    std::vector<double> g_new = form.gradient(x, parts);
    std::vector<double> z_new = form.precondition(g_new);
    const double gz_new = dot(g_new, z_new);
    double num = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) num += z_new[k] * (g_new[k] - g[k]);
    const double beta_pr = std::max(0.0, num / gz);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = -z_new[k] + beta_pr * d[k];
    restarted = beta_pr == 0.0;
    g.swap(g_new);
    z.swap(z_new);
    gz = gz_new;
    alpha = accepted * 1.5;
  }
  if (iterations >= cfg.max_iter) {
    throw NehariStall("minimize_nehari: no convergence within max_iter", form.to_field(grid, best), best_value);
  }

  const NehariProjection final_proj = project_to_nehari(form.to_field(grid, x), params);
  return make_ground_state(final_proj.field, params, GroundStateMethod::nehari_min, iterations);
}

Certification certify(const GroundState& gs, const CertifyTolerances& tol) {
  Certification c;
  const auto terms = functional_terms(gs.profile, gs.params);
  const double h1 = terms.grad_sq + terms.l2_sq;
  const double d = action_J(terms, gs.params);
  c.k_rel = std::abs(constraint_K(terms, gs.params)) / h1;
  c.action_rel = std::abs(d - terms.grad_sq / 3.0) / std::abs(d);
  c.positive = all_positive(gs.profile);
  c.monotone = true;
  const double slack = 1e-12 * gs.profile.max_abs();
  for (std::size_t i = 0; i + 1 < gs.profile.size(); ++i) {
    if (gs.profile[i + 1] > gs.profile[i] + slack) {
      c.monotone = false;
      break;
    }
  }
  if (!(c.k_rel <= tol.k_rel)) {
    std::ostringstream msg;
    msg << "constraint |K|/||phi||_H1^2 = " << c.k_rel << " exceeds " << tol.k_rel;
    c.failure = msg.str();
  } else if (!(c.action_rel <= tol.action_rel)) {
    std::ostringstream msg;
    msg << "action identity |J - |grad|^2/3| / d = " << c.action_rel << " exceeds " << tol.action_rel;
    c.failure = msg.str();
  } else if (!c.positive) {
    c.failure = "profile is not positive";
  } else if (!c.monotone) {
    c.failure = "profile is not monotonically decreasing";
  }
  c.certified = c.failure.empty();
  return c;
}

EquivalenceReport verify_equivalence(const ModelParams& params, const GroundState& gs,
                                     const EquivalenceOptions& opts) {
  EquivalenceReport rep;
  rep.tolerance = opts.tolerance;
  rep.d = gs.d_omega;
  const double gs_value = grad_l2_norm_sq(gs.profile) / 3.0;
  rep.d_tilde = gs_value;
  rep.all_above = true;
  const RadialGrid& grid = gs.profile.grid();
  for (double c : opts.amplitudes) {
    for (double sigma : opts.widths) {
      EquivalenceTrial t;
      t.amplitude = c;
      t.width = sigma;
      const RadialField phi =
          RadialField::sample(grid, [&](double r) { return c * std::exp(-r * r / (2.0 * sigma * sigma)); });
      t.K = eval_K(phi, params);
      t.raw_value = grad_l2_norm_sq(phi) / 3.0;
      try {
        const NehariProjection proj = project_to_nehari(phi, params);
        t.projected = true;
        t.beta = proj.beta;
        t.value = grad_l2_norm_sq(proj.field) / 3.0;
        rep.d_tilde = std::min(rep.d_tilde, t.value);
        if (t.value < rep.d * (1.0 - opts.tolerance)) rep.all_above = false;
        if (t.K < 0.0 && t.raw_value < rep.d * (1.0 - opts.tolerance)) rep.all_above = false;
      } catch (const NotProjectable& e) {
        t.note = e.what();
        ++rep.skipped;
      }
      rep.trials.push_back(std::move(t));
    }
  }
  rep.attained = std::abs(gs_value - rep.d) <= CertifyTolerances{}.action_rel * std::abs(rep.d) &&
                 gs_value <= rep.d_tilde * (1.0 + opts.tolerance);
  return rep;
}

}  // namespace logkg
