#include <doctest.h>

#include <cmath>
#include <string>

#include "logkg/error.hpp"
#include "logkg/experiments.hpp"

using namespace logkg;

namespace {

const GroundState& ground_state_p3() {
  static const GroundState gs = find_ground_state(ModelParams(3.0));
  return gs;
}

double h1_distance(const RadialField& a, const RadialField& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return std::sqrt(h1_norm_sq(RadialField(a.grid(), d)));
}

}  // namespace

TEST_CASE("perturbed data") {
  const GroundState& gs = ground_state_p3();
  const CauchyData same = make_perturbed_data(gs, 1.0);
  CHECK(same.state.u.values() == gs.profile.values());
  CHECK(same.state.v.max_abs() == 0.0);
  CHECK_FALSE(same.warning.empty());

  const CauchyData data = make_perturbed_data(gs, 1.2);
  CHECK(data.warning.empty());
  CHECK(grad_l2_norm_sq(data.state.u) == doctest::Approx(1.2 * grad_l2_norm_sq(gs.profile)).epsilon(1e-4));

  double prev = 0.0;
  for (double lambda : {1.05, 1.1, 1.2}) {
    const double dist = h1_distance(make_perturbed_data(gs, lambda).state.u, gs.profile);
    CHECK(dist > prev);
    prev = dist;
  }
  CHECK_THROWS_AS(make_perturbed_data(gs, 0.0), DomainError);
}

TEST_CASE("membership of dilated ground-state data") {
  const ModelParams params(3.0);
  const GroundState& gs = ground_state_p3();
  const RadialGrid& g = gs.profile.grid();

  SUBCASE("zero data") {
    const R1Report rep = check_R1_membership(make_state(RadialField::zeros(g), RadialField::zeros(g)), gs, params);
    CHECK_FALSE(rep.nonzero);
    CHECK_FALSE(rep.is_member);
  }
  SUBCASE("the ground state itself is on the boundary") {
    const R1Report rep = check_R1_membership(make_perturbed_data(gs, 1.0).state, gs, params, 1.0);
    CHECK_FALSE(rep.is_member);
    CHECK(rep.energy_E == doctest::Approx(rep.d0).epsilon(1e-12));
  }
  SUBCASE("lambda = 1.2") {
    const R1Report rep = check_R1_membership(make_perturbed_data(gs, 1.2).state, gs, params, 1.2);
    CHECK(rep.is_member);
    CHECK(rep.energy_below);
    CHECK(rep.K_negative);
    CHECK(rep.grad_above);
    CHECK(rep.energy_E / rep.d0 == doctest::Approx(0.936).epsilon(1e-3));
    CHECK(rep.grad_third / rep.d0 == doctest::Approx(1.2).epsilon(1e-3));
    const double grad_sq = grad_l2_norm_sq(gs.profile);
    CHECK(rep.K0_u0 / grad_sq == doctest::Approx(-0.264).epsilon(1e-3));
    CHECK(rep.energy_E == doctest::Approx(rep.predicted_E).epsilon(1e-4));
    CHECK(rep.K0_u0 == doctest::Approx(rep.predicted_K0).epsilon(1e-3));
    CHECK(rep.energy_margin == doctest::Approx(rep.d0 - rep.energy_E));
    CHECK(rep.K_margin == doctest::Approx(-rep.K0_u0));
  }
  SUBCASE("energy decreases and K0 stays negative for lambda > 1") {
    double prev = gs.d_omega;
    for (double lambda : {1.02, 1.05, 1.1, 1.2, 1.5, 1.7}) {
      const R1Report rep = check_R1_membership(make_perturbed_data(gs, lambda).state, gs, params, lambda);
      CHECK(rep.energy_E < prev);
      CHECK(rep.K0_u0 < 0.0);
      prev = rep.energy_E;
    }
  }
  SUBCASE("requires a rest-frame ground state") {
    const GroundState moving = find_ground_state(ModelParams(3.0, 0.5));
    CHECK_THROWS_AS(check_R1_membership(make_perturbed_data(gs, 1.2).state, moving, params), DomainError);
  }
}

TEST_CASE("invariance monitor") {
  R1Report start;
  start.d0 = 10.0;
  start.is_member = true;
  std::vector<DiagnosticsRecord> records(6);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].t = 0.1 * static_cast<double>(i);
    records[i].E = 9.0;
    records[i].K0 = -1.0;
    records[i].sup_abs_u = 5.0;
  }
  CHECK(monitor_invariance(records, start).passed());
  CHECK(monitor_invariance(records, start).samples_checked == 6);

  SUBCASE("doctored K0") {
    records[3].K0 = 0.5;
    const InvarianceReport rep = monitor_invariance(records, start);
    CHECK_FALSE(rep.passed());
    REQUIRE(rep.first_violation.has_value());
    CHECK(*rep.first_violation == 3);
    CHECK(rep.reason.find("K0") != std::string::npos);
  }
  SUBCASE("energy above the threshold") {
    records[4].E = 10.0;
    const InvarianceReport rep = monitor_invariance(records, start);
    CHECK(rep.violations == 1);
    CHECK(*rep.first_violation == 4);
  }
  SUBCASE("energy is not judged beyond the resolved amplitude") {
    records[5].E = 11.0;
    records[5].sup_abs_u = 2.0 * kFidelityAmplitude;
    CHECK(monitor_invariance(records, start).passed());
  }
  SUBCASE("not applicable outside the invariant set") {
    start.is_member = false;
    const InvarianceReport rep = monitor_invariance(records, start);
    CHECK_FALSE(rep.applicable);
    CHECK(rep.samples_checked == 0);
    CHECK(rep.reason.find("skipped") != std::string::npos);
  }
}

TEST_CASE("instability configuration") {
  InstabilityConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.growth_target = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = InstabilityConfig{};
  cfg.lambdas = {1.2, 1.0};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = InstabilityConfig{};
  cfg.lambdas.clear();
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = InstabilityConfig{};
  cfg.T_max = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("dilated ground state is unstable") {
  const ModelParams params(3.0);
  const GroundState& gs = ground_state_p3();
  InstabilityConfig cfg;
  cfg.lambdas = {1.2, 1.5};
  EvolveConfig ecfg;
  ecfg.sample_every = 10;
  const std::vector<InstabilityResult> results = run_instability(gs, params, cfg, ecfg);
  REQUIRE(results.size() == 2);
  for (const InstabilityResult& r : results) {
    CHECK(r.r1.is_member);
    const bool grew = r.outcome == InstabilityOutcome::h1_growth_reached || r.outcome == InstabilityOutcome::blowup;
    CHECK(grew);
    CHECK(r.t_star < cfg.T_max);
    CHECK(r.growth_factor >= cfg.growth_target);
    CHECK(r.invariance.applicable);
    CHECK(r.invariance.passed());
    REQUIRE(r.run.has_value());
    for (const DiagnosticsRecord& rec : r.run->records) CHECK(rec.K0 < 0.0);
  }
  CHECK(results[0].lambda == 1.2);
  CHECK(results[1].lambda == 1.5);
}

TEST_CASE("identity suite") {
  const SuiteReport rep = verify_identity_suite(ModelParams(3.0));
  CHECK(rep.passed());
  CHECK(rep.first_failure().empty());
  CHECK(rep.checks.size() >= 6);
  for (const SuiteCheck& c : rep.checks) {
    INFO(c.name << ": " << c.value << " vs " << c.tolerance << " " << c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("ground-state suite at p = 3, omega = 0") {
  const SuiteReport rep = verify_ground_state_suite(ModelParams(3.0));
  for (const SuiteCheck& c : rep.checks) {
    INFO(c.name << ": " << c.value << " vs " << c.tolerance << " " << c.detail);
    CHECK(c.passed);
  }
  CHECK(rep.passed());
  REQUIRE(rep.shooting.has_value());
  REQUIRE(rep.minimised.has_value());
  REQUIRE(rep.equivalence.has_value());
  CHECK(rep.equivalence->passed());
}

TEST_CASE("ground-state suite at p = 3.9, omega = 0.8 with a 2% cross-method tolerance") {
  SuiteOptions opts;
  opts.cross_tol = 0.02;
  const SuiteReport rep = verify_ground_state_suite(ModelParams(3.9, 0.8), opts);
  for (const SuiteCheck& c : rep.checks) {
    INFO(c.name << ": " << c.value << " vs " << c.tolerance << " " << c.detail);
    CHECK(c.passed);
  }
  CHECK(rep.passed());
}

TEST_CASE("suite failures are named") {
  SuiteOptions opts;
  opts.certify.k_rel = 1e-20;
  const SuiteReport rep = verify_ground_state_suite(ModelParams(3.0), opts);
  CHECK_FALSE(rep.passed());
  CHECK_FALSE(rep.first_failure().empty());
}

TEST_CASE("minimiser seed escalates the amplitude") {
  const RadialGrid g(20.0, 4000);
  const RadialField seed = nehari_seed(ModelParams(2.5), g);
  CHECK(seed[0] > 3.0);
  CHECK(scaling_coefficients(seed, ModelParams(2.5)).B < 0.0);
  CHECK(nehari_seed(ModelParams(3.0), g)[0] == doctest::Approx(3.0));
}
