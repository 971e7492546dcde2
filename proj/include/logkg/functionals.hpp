#pragma once

#include "logkg/radial_field.hpp"

namespace logkg {

/// Exponent p of |u|^{p-1} u ln|u|^2 and standing-wave frequency omega.
/// Construction enforces 2 < p < 4 and 0 <= omega < 1.
class ModelParams {
 public:
  ModelParams(double p, double omega = 0.0);

  double p() const noexcept { return p_; }
  double omega() const noexcept { return omega_; }
  /// 1 - omega^2, the coefficient of the linear term.
  double mass() const noexcept { return 1.0 - omega_ * omega_; }

  ModelParams with_omega(double omega) const { return ModelParams(p_, omega); }

 private:
  double p_;
  double omega_;
};

/// f(u) = |u|^{p-1} u ln|u|^2, f(0) = 0.
double nonlinearity_f(double u, const ModelParams& params);
/// f'(u) = |u|^{p-1} (p ln|u|^2 + 2), zero at the origin.
double nonlinearity_df(double u, const ModelParams& params);
/// f''(u) = sgn(u) |u|^{p-2} ((p-1)(p ln|u|^2 + 2) + 2p).
double nonlinearity_d2f(double u, const ModelParams& params);

/// G(u) = 2/(p+1)^2 |u|^{p+1} - 1/(p+1) |u|^{p+1} ln|u|^2, G(0) = 0. G' = -f.
double potential_G(double u, const ModelParams& params);

/// Quadrature values shared by J, K and the energy so that their algebraic
/// relations hold to rounding.
struct FunctionalTerms {
  double grad_sq = 0.0;    // int |grad u|^2
  double l2_sq = 0.0;      // int |u|^2
  double potential = 0.0;  // int G(|u|)
};

FunctionalTerms functional_terms(const RadialField& phi, const ModelParams& params);

double action_J(const FunctionalTerms& t, const ModelParams& params);
double constraint_K(const FunctionalTerms& t, const ModelParams& params);

double eval_J(const RadialField& phi, const ModelParams& params);
double eval_K(const RadialField& phi, const ModelParams& params);

/// K(phi(./beta)) = beta * A + beta^3 * B in three dimensions.
struct ScalingCoefficients {
  double A = 0.0;  // (1/2) int |grad phi|^2
  double B = 0.0;  // K(phi) - A
};

ScalingCoefficients scaling_coefficients(const RadialField& phi, const ModelParams& params);

/// Closed-form root sqrt(-A/B) of beta*A + beta^3*B; throws NotProjectable when B >= 0.
double nehari_scale(const ScalingCoefficients& c);

struct NehariProjection {
  double beta;
  RadialField field;
};

/// Dilates phi onto K = 0. Starts from the closed-form root and refines beta
/// against the discrete K of the interpolated field, so the result satisfies
/// |K| <= 1e-11 * ||psi||_{H^1}^2 rather than just the interpolation accuracy.
NehariProjection project_to_nehari(const RadialField& phi, const ModelParams& params);

/// E(u, v) = (1/2) int v^2 + J_0(u). Frequency in `params` is ignored.
double eval_energy(const RadialField& u, const RadialField& v, const ModelParams& params);

/// phi'' + (2/r) phi' with centred differences; 3 phi''(0) at the origin and
/// one-sided second-order stencils at r = R.
RadialField centered_laplacian(const RadialField& phi);

/// Nodewise -Laplace(phi) + (1 - omega^2) phi - |phi|^{p-1} phi ln|phi|^2.
RadialField ode_residual(const RadialField& phi, const ModelParams& params);

/// sqrt(int residual^2): the volume-weighted L^2 norm of ode_residual.
double residual_norm(const RadialField& phi, const ModelParams& params);

}  // namespace logkg
