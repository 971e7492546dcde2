#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "logkg/dynamics.hpp"
#include "logkg/ground_state.hpp"

namespace logkg {

/// Initial data (u0, 0) with u0(r) = phi(r / lambda). Values of lambda <= 1
/// are accepted; `warning` says when the data lies outside the instability regime.
struct CauchyData {
  State state;
  double lambda;
  std::string warning;
};

CauchyData make_perturbed_data(const GroundState& gs, double lambda);

/// Membership of (u0, u1) in {E < d(0), K_0 < 0, u != 0}.
struct R1Report {
  double energy_E = 0.0;
  double d0 = 0.0;
  double K0_u0 = 0.0;
  double grad_third = 0.0;  // (1/3) ||grad u0||^2
  bool nonzero = false;
  bool energy_below = false;
  bool K_negative = false;
  bool is_member = false;
  double energy_margin = 0.0;  // d0 - E
  double K_margin = 0.0;       // -K0
  bool grad_above = false;     // grad_third > d0
  // Closed forms for dilated ground-state data, present when lambda is known.
  std::optional<double> lambda;
  double predicted_E = 0.0;   // d0 (3 lambda - lambda^3) / 2
  double predicted_K0 = 0.0;  // lambda (1 - lambda^2) (1/2) ||grad phi0||^2
};

/// `gs` must be a ground state at omega = 0; d0 is taken from it.
R1Report check_R1_membership(const State& s, const GroundState& gs, const ModelParams& params,
                             std::optional<double> lambda = std::nullopt);

/// Amplitude beyond which energy samples are not checked: the grid no longer
/// resolves the collapsing core there.
inline constexpr double kFidelityAmplitude = 1e3;

struct InvarianceReport {
  bool applicable = false;  // false when the run did not start in the invariant set
  std::size_t samples_checked = 0;
  std::size_t violations = 0;
  std::optional<std::size_t> first_violation;
  std::string reason;
  bool passed() const noexcept { return violations == 0; }
};

/// Checks K0 < 0 at every sample and E < d0 at every sample whose amplitude is
/// below kFidelityAmplitude.
InvarianceReport monitor_invariance(const std::vector<DiagnosticsRecord>& records, const R1Report& start);

struct InstabilityConfig {
  std::vector<double> lambdas{1.05, 1.1, 1.2, 1.5};
  double growth_target = 3.0;  // H^1 norm multiple counted as growth
  double T_max = 50.0;

  void validate() const;
};

enum class InstabilityOutcome { h1_growth_reached, blowup, inconclusive, skipped, solver_failure };

const char* to_string(InstabilityOutcome o) noexcept;

struct InstabilityResult {
  double lambda = 0.0;
  R1Report r1;
  InstabilityOutcome outcome = InstabilityOutcome::skipped;
  double t_star = 0.0;  // time the outcome was decided
  double final_h1 = 0.0;
  double growth_factor = 0.0;  // largest sampled h1 / initial h1
  InvarianceReport invariance;
  std::optional<RunResult> run;
};

/// Evolves dilated ground-state data for every lambda concurrently. Runs whose
/// data fails the membership test are skipped.
std::vector<InstabilityResult> run_instability(const GroundState& gs, const ModelParams& params,
                                               const InstabilityConfig& cfg, const EvolveConfig& ecfg);

struct SuiteCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteOptions {
  double radius = 20.0;
  std::size_t intervals = 4000;
  double cross_tol = 1e-2;  // shooting vs minimisation, relative in d; profiles get twice this
  CertifyTolerances certify{};
  double residual_ratio_lo = 3.5;
  double residual_ratio_hi = 4.5;
};

struct SuiteReport {
  ModelParams params;
  std::vector<SuiteCheck> checks;
  std::optional<GroundState> shooting;
  std::optional<GroundState> minimised;
  std::optional<EquivalenceReport> equivalence;
  bool passed() const noexcept;
  /// Name of the first failing check, empty when all pass.
  std::string first_failure() const;
};

/// Seed for the minimiser: the first of 3, 6, 12 times exp(-r^2 / 2) that can be
/// projected onto K = 0.
RadialField nehari_seed(const ModelParams& params, const RadialGrid& grid);

/// Sum of three Gaussians c_k exp(-r^2 / (2 s_k^2)) with c_k in +-[0.5, 5] and
/// s_k in [0.4, 1.5], times 1 + b r^2 with b in [0, 0.5].
RadialField random_smooth_field(const RadialGrid& grid, std::mt19937_64& rng);

struct IdentityOptions {
  std::uint64_t seed = 20240611;
  int fields = 100;         // random fields for the coefficient identity
  int dilation_fields = 20;
  std::vector<double> betas{0.5, 0.8, 1.25, 2.0};
  double identity_tol = 1e-12;
  double dilation_tol = 1e-3;
  double projection_tol = 1e-8;
  double gn_alpha = 4.0;
  double gn_invariance_tol = 1e-6;
};

/// Algebraic identities of the functionals on random fields: J - K/3 = |grad|^2 / 3,
/// the dilation law for K, Nehari projection accuracy, the embedding-ratio
/// invariances and bounds, and G' = -f.
SuiteReport verify_identity_suite(const ModelParams& params, const IdentityOptions& opts = {});

/// Ground state by both methods, certification of each, cross-method agreement,
/// the equivalence sweep and residual convergence under grid halving.
SuiteReport verify_ground_state_suite(const ModelParams& params, const SuiteOptions& opts = {});

}  // namespace logkg
