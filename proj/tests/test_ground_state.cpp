#include <doctest.h>

#include <cmath>
#include <string>

#include "logkg/error.hpp"
#include "logkg/experiments.hpp"
#include "logkg/ground_state.hpp"

using namespace logkg;

namespace {

// Independent oracle: scipy solve_ivp (DOP853, rtol 1e-13) with bisection to
// machine precision on the amplitude, continuum action by Richardson-extrapolated
// quadrature of the tail-corrected profile.
constexpr double kOracleAmplitude = 5.820327090872797;
constexpr double kOracleAction = 12.75726;

const GroundState& shooting_p3() {
  static const GroundState gs = find_ground_state(ModelParams(3.0));
  return gs;
}

}  // namespace

TEST_CASE("shooting classification") {
  const ModelParams params(3.0);
  const ShootingConfig cfg;
  CHECK(shoot_classify(cfg.blowup_cap, params, cfg) == ShotOutcome::diverges);
  CHECK(shoot_classify(10.0, params, cfg) == ShotOutcome::crosses_zero);
  // Below amplitude 1 the nonlinearity is repulsive, so tiny data turns upward.
  CHECK(shoot_classify(1e-6, params, cfg) == ShotOutcome::diverges);
  CHECK(shoot_classify(3.0, params, cfg) == ShotOutcome::diverges);
  CHECK(shoot_classify(shooting_p3().amplitude, params, cfg) == ShotOutcome::converged_tail);
  CHECK_THROWS_AS(shoot_classify(0.0, params, cfg), DomainError);
}

TEST_CASE("shooting ground state at p = 3, omega = 0") {
  const GroundState& gs = shooting_p3();
  CHECK(gs.method == GroundStateMethod::shooting);
  CHECK(gs.amplitude == doctest::Approx(kOracleAmplitude).epsilon(1e-9));
  CHECK(gs.d_omega == doctest::Approx(kOracleAction).epsilon(5e-5));
  CHECK_FALSE(gs.ambiguous);
  CHECK(gs.candidate_amplitudes.size() == 1);

  const Certification cert = certify(gs);
  CHECK(cert.certified);
  CHECK(cert.failure.empty());
  CHECK(cert.positive);
  CHECK(cert.monotone);
  CHECK(cert.k_rel <= 1e-4);
  CHECK(cert.action_rel <= 1e-4);
  CHECK(gs.d_omega == doctest::Approx(grad_l2_norm_sq(gs.profile) / 3.0).epsilon(1e-4));
}

TEST_CASE("residual converges at second order under grid halving") {
  for (double omega : {0.0, 0.8}) {
    const ModelParams params(3.0, omega);
    ShootingConfig coarse;
    ShootingConfig fine;
    fine.intervals = 2 * coarse.intervals;
    const double ratio = find_ground_state(params, coarse).residual_norm / find_ground_state(params, fine).residual_norm;
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("action is continuous in the frequency") {
  double prev = find_ground_state(ModelParams(3.0, 0.4)).d_omega;
  for (double omega : {0.45, 0.5}) {
    const double d = find_ground_state(ModelParams(3.0, omega)).d_omega;
    CHECK(std::abs(d - prev) <= 0.1 * prev);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("bracket errors") {
  const ModelParams params(3.0);
  ShootingConfig cfg;
  SUBCASE("both endpoints diverge") {
    cfg.s_lo = 1.0;
    cfg.s_hi = 4.0;
    try {
      find_ground_state(params, cfg);
      FAIL("expected BracketError");
    } catch (const BracketError& e) {
      CHECK(std::string(e.what()).find("bracket does not straddle") != std::string::npos);
    }
  }
  SUBCASE("both endpoints cross zero") {
    cfg.s_lo = 8.0;
    cfg.s_hi = 20.0;
    CHECK_THROWS_AS(find_ground_state(params, cfg), BracketError);
  }
  SUBCASE("inverted") {
    cfg.s_lo = 20.0;
    cfg.s_hi = 1.0;
    CHECK_THROWS_AS(find_ground_state(params, cfg), Error);
  }
  SUBCASE("iteration budget") {
    cfg.max_iter = 3;
    CHECK_THROWS_AS(find_ground_state(params, cfg), ConvergenceError);
  }
}

TEST_CASE("Nehari minimisation agrees with shooting") {
  const ModelParams params(3.0);
  const RadialGrid grid(20.0, 4000);
  const GroundState& shot = shooting_p3();

  SUBCASE("from the gaussian seed") {
    const RadialField seed = RadialField::sample(grid, [](double r) { return 3.0 * std::exp(-r * r / 2.0); });
    const GroundState gs = minimize_nehari(params, grid, seed);
    CHECK(gs.method == GroundStateMethod::nehari_min);
    CHECK(certify(gs).certified);
    CHECK(gs.d_omega == doctest::Approx(shot.d_omega).epsilon(1e-2));
    CHECK(gs.d_omega == doctest::Approx(shot.d_omega).epsilon(1e-4));
    CHECK(gs.amplitude == doctest::Approx(shot.amplitude).epsilon(1e-2));
  }
  SUBCASE("seeded with the shooting profile") {
    const GroundState gs = minimize_nehari(params, grid, shot.profile);
    CHECK(gs.iterations <= 30);
    CHECK(gs.d_omega >= shot.d_omega * (1.0 - 1e-4));
    CHECK(gs.d_omega <= shot.d_omega * (1.0 + 1e-4));
  }
  SUBCASE("zero seed") {
    CHECK_THROWS_AS(minimize_nehari(params, grid, RadialField::zeros(grid)), DomainError);
  }
  SUBCASE("unprojectable seed") {
    const RadialField small = RadialField::sample(grid, [](double r) { return 0.1 * std::exp(-r * r); });
    CHECK_THROWS_AS(minimize_nehari(params, grid, small), NotProjectable);
  }
  SUBCASE("stall reports the best iterate") {
    NehariConfig cfg;
    cfg.max_iter = 2;
    const RadialField seed = RadialField::sample(grid, [](double r) { return 3.0 * std::exp(-r * r / 2.0); });
    try {
      minimize_nehari(params, grid, seed, cfg);
      FAIL("expected NehariStall");
    } catch (const NehariStall& e) {
      CHECK(e.best().size() == grid.size());
      CHECK(std::isfinite(e.best_value()));
      CHECK(e.best_value() > shot.d_omega * 0.99);
    }
  }
}

TEST_CASE("certification rejects a sign-changing profile") {
  GroundState gs = shooting_p3();
  std::vector<double> v = gs.profile.values();
  v[v.size() / 2] = -1e-3;
  gs.profile = RadialField(gs.profile.grid(), v);
  const Certification cert = certify(gs);
  CHECK_FALSE(cert.certified);
  CHECK_FALSE(cert.positive);
  CHECK_FALSE(cert.failure.empty());
}

TEST_CASE("minimisation over the Nehari set equals the gradient-energy problem") {
  const ModelParams params(3.0);
  const GroundState& gs = shooting_p3();
  const EquivalenceReport report = verify_equivalence(params, gs);
  CHECK(report.passed());
  CHECK(report.trials.size() == 25);
  CHECK(report.skipped > 0);
  std::size_t unprojected = 0;
  for (const EquivalenceTrial& t : report.trials) {
    if (!t.projected) {
      ++unprojected;
      CHECK_FALSE(t.note.empty());
      continue;
    }
    CHECK(t.value >= report.d * (1.0 - 1e-2));
  }
  CHECK(unprojected == report.skipped);
  CHECK(report.d_tilde == doctest::Approx(report.d).epsilon(1e-4));
}
