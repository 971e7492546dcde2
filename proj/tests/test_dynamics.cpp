#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "logkg/dynamics.hpp"
#include "logkg/error.hpp"
#include "logkg/experiments.hpp"
#include "logkg/ground_state.hpp"

using namespace logkg;

namespace {

double l2_distance(const RadialField& a, const RadialField& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return std::sqrt(l2_norm_sq(RadialField(a.grid(), d)));
}

const GroundState& ground_state_p3() {
  static const GroundState gs = find_ground_state(ModelParams(3.0));
  return gs;
}

// Largest L^2 error of the standing linear mode sin(kr)/(kr) cos(w t) over one period.
double linear_mode_error(std::size_t intervals) {
  const double R = 10.0;
  const double k = 2.0 * std::numbers::pi / R;
  const double w = std::sqrt(1.0 + k * k);
  const RadialGrid g(R, intervals);
  const auto mode = [&](double r) { return r == 0.0 ? 1.0 : std::sin(k * r) / (k * r); };
  const RadialField shape = RadialField::sample(g, mode);
  const double period = 2.0 * std::numbers::pi / w;
  EvolveConfig cfg;
  cfg.linear_only = true;
  const long steps = static_cast<long>(std::ceil(period / (0.5 * g.spacing())));
  cfg.dt = period / static_cast<double>(steps);
  const ModelParams params(3.0);
  State s = stagger(make_state(shape, RadialField::zeros(g)), params, cfg);
  double worst = 0.0;
  for (long n = 1; n <= steps; ++n) {
    s = step(s, params, cfg);
    worst = std::max(worst, l2_distance(s.u, shape.scaled(std::cos(w * s.t))));
  }
  return worst;
}

}  // namespace

TEST_CASE("configuration validation") {
  const RadialGrid g(20.0, 4000);
  EvolveConfig cfg;
  CHECK_NOTHROW(cfg.validate(g));
  cfg.dt = 0.0046;
  try {
    cfg.validate(g);
    FAIL("accepted a CFL violation");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("CFL") != std::string::npos);
  }
  cfg.cfl_limit = 1.0;
  CHECK_NOTHROW(cfg.validate(g));
  cfg = EvolveConfig{};
  cfg.T = 0.0;
  CHECK_THROWS_AS(cfg.validate(g), DomainError);
  cfg = EvolveConfig{};
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(g), DomainError);
  cfg = EvolveConfig{};
  cfg.sample_every = 0;
  CHECK_THROWS_AS(cfg.validate(g), DomainError);
}

TEST_CASE("discrete gradient of the potential") {
  const ModelParams params(3.0);
  SUBCASE("exact quotient for separated arguments") {
    const double x = 1.7, y = 0.4;
    CHECK(discrete_gradient_W(x, y, params) ==
          doctest::Approx((potential_W(x, params) - potential_W(y, params)) / (x - y)).epsilon(1e-13));
    CHECK(discrete_gradient_W(x, y, params) == doctest::Approx(discrete_gradient_W(y, x, params)).epsilon(1e-15));
  }
  SUBCASE("coincident arguments give W'") {
    for (double u : {-3.0, 0.0, 0.3, 1.0, 2.5}) {
      CHECK(discrete_gradient_W(u, u, params) == doctest::Approx(potential_dW(u, params)).epsilon(1e-15));
    }
  }
  SUBCASE("continuous across the switch to the midpoint expansion") {
    for (double m : {0.2, 1.3, 4.0}) {
      for (double d : {1e-3, 1e-4, 1e-5}) {
        const double x = m + d / 2, y = m - d / 2;
        // long-double quotient as the reference
        const long double wx = potential_W(x, params), wy = potential_W(y, params);
        const double reference = static_cast<double>((wx - wy) / (static_cast<long double>(x) - y));
        CHECK(discrete_gradient_W(x, y, params) == doctest::Approx(reference).epsilon(1e-8));
      }
    }
  }
  CHECK(potential_dW(2.0, params, true) == 2.0);
  CHECK(potential_W(2.0, params, true) == 2.0);
}

TEST_CASE("zero state stays zero") {
  const RadialGrid g(10.0, 200);
  EvolveConfig cfg;
  cfg.T = 1.0;
  const RunResult res = run(make_state(RadialField::zeros(g), RadialField::zeros(g)), ModelParams(3.0), cfg);
  CHECK(res.termination == Termination::completed);
  CHECK(res.final_state.u.max_abs() == 0.0);
  for (const DiagnosticsRecord& r : res.records) CHECK(r.E == 0.0);
}

TEST_CASE("one step conserves the discrete energy") {
  const RadialGrid g(20.0, 4000);
  const ModelParams params(3.0);
  EvolveConfig cfg;
  const RadialField u = RadialField::sample(g, [](double r) { return 2.5 * std::exp(-r * r); });
  const RadialField v = RadialField::sample(g, [](double r) { return 0.3 * r * std::exp(-r * r); });
  State s = stagger(make_state(u, v), params, cfg);
  const double scale = h1_norm_sq(u) + l2_norm_sq(v);
  const double e0 = discrete_energy(s, params, cfg);
  for (int n = 0; n < 5; ++n) {
    s = step(s, params, cfg);
    CHECK(std::abs(discrete_energy(s, params, cfg) - e0) <= 1e-12 * scale);
  }
  CHECK_THROWS_AS(discrete_energy(make_state(u, v), params, cfg), DomainError);
}

TEST_CASE("linear mode converges at second order") {
  const double coarse = linear_mode_error(200);
  const double fine = linear_mode_error(400);
  const double finer = linear_mode_error(800);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.125));
  CHECK(fine / finer == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("finite propagation speed") {
  const double R0 = 3.0;
  const RadialGrid g(12.0, 2400);
  const RadialField u0 = RadialField::sample(g, [&](double r) {
    if (r >= R0) return 0.0;
    const double q = 1.0 - (r / R0) * (r / R0);
    return 0.8 * q * q * q * q;
  });
  const ModelParams params(3.0);
  EvolveConfig cfg;
  State s = stagger(make_state(u0, RadialField::zeros(g)), params, cfg);
  const double bound = 1e-8 * u0.max_abs();
  double worst = 0.0;
  while (s.t < 6.0) {
    s = step(s, params, cfg);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.node(i) > R0 + s.t + 2.0 * g.spacing()) worst = std::max(worst, std::abs(s.u[i]));
    }
  }
  CHECK(worst <= bound);
}

TEST_CASE("time reversal returns to the initial data") {
  const RadialGrid g(20.0, 4000);
  const ModelParams params(3.0);
  EvolveConfig cfg;
  const RadialField u0 = RadialField::sample(g, [](double r) { return 1.5 * std::exp(-r * r / 2.0); });
  State s = stagger(make_state(u0, RadialField::zeros(g)), params, cfg);
  const State start = s;
  const int n = 400;
  for (int k = 0; k < n; ++k) s = step(s, params, cfg);
  s = reverse_time(s, cfg.dt);
  for (int k = 0; k < n; ++k) s = step(s, params, cfg);
  // The backward run ends at the lagged level of the start, so compare (u^0, u^{-1}) swapped.
  const State back = reverse_time(s, cfg.dt);
  CHECK(l2_distance(back.u, start.u) <= 1e-10 * std::sqrt(l2_norm_sq(u0)));
  CHECK(l2_distance(back.v, start.v) <= 1e-8 * std::sqrt(l2_norm_sq(u0)));
}

TEST_CASE("energy drift of a smooth pulse stays below 1e-8") {
  const RadialGrid g(20.0, 4000);
  const ModelParams params(3.0);
  EvolveConfig cfg;
  cfg.T = 10.0;
  cfg.sample_every = 100;
  const RadialField u0 = RadialField::sample(g, [](double r) { return 0.8 * std::exp(-r * r); });
  const RunResult res = run(make_state(u0, RadialField::zeros(g)), params, cfg);
  REQUIRE(res.termination == Termination::completed);
  CHECK(res.records.back().t >= 10.0 - 1e-12);
  CHECK(res.records.back().t < 10.0 + cfg.dt);
  CHECK(res.steps == static_cast<long>(std::ceil(10.0 / cfg.dt - 1e-9)));
  const double e0 = res.records.front().E;
  for (const DiagnosticsRecord& r : res.records) {
    CHECK(std::abs(r.E - e0) <= 1e-8 * std::abs(e0));
    CHECK(r.strauss_ratio <= strauss_bound());
  }
  CHECK(res.final_state.u.is_finite());
}

TEST_CASE("unstagger recovers the velocity to second order") {
  const RadialGrid g(20.0, 4000);
  const ModelParams params(3.0);
  EvolveConfig cfg;
  const RadialField u = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
  const RadialField v = RadialField::sample(g, [](double r) { return 0.5 * std::exp(-r * r); });
  const State fresh = make_state(u, v);
  const State back = unstagger(stagger(fresh, params, cfg), params, cfg);
  CHECK(l2_distance(back.u, u) == 0.0);
  CHECK(l2_distance(back.v, v) <= 1e-4 * std::sqrt(l2_norm_sq(v)));
}

TEST_CASE("standing state") {
  const ModelParams params(3.0);
  const GroundState& gs = ground_state_p3();
  const RadialField eq = polish_equilibrium(gs.profile, params);
  const RadialGrid& g = eq.grid();
  const double norm = std::sqrt(l2_norm_sq(eq));
  CHECK(l2_distance(eq, gs.profile) <= 1e-3 * norm);

  EvolveConfig cfg;
  State s = stagger(make_state(eq, RadialField::zeros(g)), params, cfg);
  double drift_1 = 0.0, drift_2 = 0.0;
  while (s.t < 2.0 - 1e-9) {
    s = step(s, params, cfg);
    const double drift = l2_distance(s.u, eq) / norm;
    CHECK(drift <= 1e-3);
    if (std::abs(s.t - 1.0) < 0.5 * cfg.dt) drift_1 = drift;
    drift_2 = drift;
  }
  // Rounding seeds the unstable direction; it grows at sqrt(-mu) with mu the
  // negative eigenvalue of -Laplace + 1 - f'(phi0). Oracle: mu = -112.8 from a
  // finite-difference eigenvalue solve on r phi, with phi from an independent shooting run.
  REQUIRE(drift_1 > 0.0);
  const double rate = std::log(drift_2 / drift_1) / (s.t - 1.0);
  CHECK(rate == doctest::Approx(std::sqrt(112.8)).epsilon(0.05));
}

TEST_CASE("focusing data blows up with monotone final growth") {
  const ModelParams params(3.0);
  const GroundState& gs = ground_state_p3();
  const RadialField u0 = dilate(gs.profile, 1.5);
  EvolveConfig cfg;
  cfg.T = 5.0;
  cfg.blowup_cap = 2.0 * u0.max_abs() * 10.0;
  const RunResult res = run(make_state(u0, RadialField::zeros(u0.grid())), params, cfg);
  REQUIRE(res.termination == Termination::blowup);
  CHECK(res.records.back().t < cfg.T);
  CHECK(res.final_state.u.is_finite());
  CHECK_FALSE(res.message.empty());
  const std::size_t n = res.records.size();
  REQUIRE(n > 10);
  for (std::size_t i = n - 10; i < n; ++i) CHECK(res.records[i].sup_abs_u > res.records[i - 1].sup_abs_u);
  for (const DiagnosticsRecord& r : res.records) CHECK(r.K0 < 0.0);
}
