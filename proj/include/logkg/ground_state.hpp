#pragma once

#include <string>
#include <vector>

#include "logkg/error.hpp"
#include "logkg/functionals.hpp"
#include "logkg/radial_field.hpp"

namespace logkg {

struct ShootingConfig {
  double s_lo = 1.0;  // amplitude bracket for phi(0)
  double s_hi = 20.0;
  double tol_s = 1e-15;  // relative bracket width at which bisection stops
  double blowup_cap = 1e6;
  double tail_threshold = 1e-8;
  double radius = 20.0;
  std::size_t intervals = 4000;
  int max_iter = 200;
  int scan_points = 12;  // interior amplitudes probed for additional transitions
  double r_max = 400.0;  // classification may integrate past the sampling radius
  double rtol = 1e-12;
  double atol = 1e-16;

  void validate() const;
};

enum class ShotOutcome { crosses_zero, diverges, converged_tail };

const char* to_string(ShotOutcome o) noexcept;

struct ShotResult {
  ShotOutcome outcome;
  double r_event;  // radius at which the outcome was decided
};

/// Integrates phi'' + (2/r) phi' = (1 - omega^2) phi - f(phi), phi(0) = s, phi'(0) = 0,
/// with an adaptive Dormand-Prince 5(4) pair until the trajectory is classified:
/// crosses_zero (phi reaches 0), diverges (exceeds blowup_cap or turns upward
/// after descending), converged_tail (|phi| + |phi'| below tail_threshold).
ShotResult shoot(double s, const ModelParams& params, const ShootingConfig& cfg);
ShotOutcome shoot_classify(double s, const ModelParams& params, const ShootingConfig& cfg);

enum class GroundStateMethod { shooting, nehari_min };

const char* to_string(GroundStateMethod m) noexcept;

struct GroundState {
  RadialField profile;
  ModelParams params;
  GroundStateMethod method;
  double d_omega = 0.0;  // J_omega(profile)
  double K_value = 0.0;
  double residual_norm = 0.0;
  double amplitude = 0.0;  // profile(0)
  int iterations = 0;
  /// Shooting only: every converged amplitude found inside the bracket. More
  /// than one means the selection (least action) was ambiguous.
  std::vector<double> candidate_amplitudes;
  bool ambiguous = false;
};

/// Bisection on the shooting amplitude. Throws BracketError when the bracket
/// endpoints classify to the same side (or are inverted), ConvergenceError when
/// max_iter is exhausted.
GroundState find_ground_state(const ModelParams& params, const ShootingConfig& cfg = {});

struct NehariConfig {
  int max_iter = 20000;
  double stationarity_tol = 1e-6;  // preconditioned gradient norm relative to the quotient
  double scale_penalty = 1.0;  // weight w of the factor 1 + w (beta^2 - 1)^2 pinning the Nehari scale
};

/// Thrown when minimize_nehari stalls; carries the best iterate found.
class NehariStall : public ConvergenceError {
 public:
  NehariStall(const std::string& what, RadialField best, double best_value)
      : ConvergenceError(what), best_(std::move(best)), best_value_(best_value) {}
  const RadialField& best() const noexcept { return best_; }
  double best_value() const noexcept { return best_value_; }

 private:
  RadialField best_;
  double best_value_;
};

/// Minimises J over the constraint K = 0 by minimising the dilation-invariant
/// quotient J(project(phi)) = (2/3) A^{3/2} / sqrt(-3 P) with H^1-preconditioned
/// nonlinear conjugate gradients (A: gradient energy, P: potential part of J).
/// The result is projected onto K = 0 once more with the grid functionals.
GroundState minimize_nehari(const ModelParams& params, const RadialGrid& grid,
                            const RadialField& seed, const NehariConfig& cfg = {});

struct CertifyTolerances {
  double k_rel = 1e-4;       // |K| / ||phi||_{H^1}^2
  double action_rel = 1e-4;  // |J - (1/3) ||grad phi||^2| / d
};

struct Certification {
  bool certified = false;
  double k_rel = 0.0;
  double action_rel = 0.0;
  bool positive = false;
  bool monotone = false;
  std::string failure;  // empty when certified
};

Certification certify(const GroundState& gs, const CertifyTolerances& tol = {});

struct EquivalenceOptions {
  std::vector<double> amplitudes{1.5, 2.0, 3.0, 4.0, 6.0};
  std::vector<double> widths{0.5, 0.75, 1.0, 1.5, 2.0};
  double tolerance = 1e-2;
};

struct EquivalenceTrial {
  double amplitude = 0.0;
  double width = 0.0;
  double K = 0.0;
  bool projected = false;
  double beta = 0.0;
  double value = 0.0;      // (1/3) ||grad psi||^2 after projection
  double raw_value = 0.0;  // (1/3) ||grad phi||^2 before projection
  std::string note;
};

struct EquivalenceReport {
  double d = 0.0;        // J(phi_0) on K = 0
  double d_tilde = 0.0;  // least (1/3)||grad||^2 over projected trials and phi_0
  double tolerance = 0.0;
  std::vector<EquivalenceTrial> trials;
  std::size_t skipped = 0;
  bool all_above = false;  // every projected trial >= d (1 - tol)
  bool attained = false;   // phi_0 realises d_tilde within certification tolerance
  bool passed() const noexcept { return all_above && attained; }
};

/// Checks d = d~: Gaussian trials c exp(-r^2 / (2 sigma^2)) are projected onto
/// K = 0 and none may undercut the certified minimum.
EquivalenceReport verify_equivalence(const ModelParams& params, const GroundState& gs,
                                     const EquivalenceOptions& opts = {});

}  // namespace logkg
