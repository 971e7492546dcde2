#include "logkg/functionals.hpp"

#include <cmath>
#include <sstream>

#include "logkg/error.hpp"

namespace logkg {

ModelParams::ModelParams(double p, double omega) : p_(p), omega_(omega) {
  if (!(p > 2.0 && p < 4.0)) {
    std::ostringstream msg;
    msg << "exponent p = " << p << " outside the valid range 2 < p < 4";
    throw DomainError(msg.str());
  }
  if (!(omega >= 0.0 && omega < 1.0)) {
    std::ostringstream msg;
    msg << "frequency omega = " << omega << " outside the supported range 0 <= omega < 1";
    throw DomainError(msg.str());
  }
}

double nonlinearity_f(double u, const ModelParams& params) {
  const double a = std::abs(u);
  if (a == 0.0) return 0.0;
  return std::pow(a, params.p() - 1.0) * u * 2.0 * std::log(a);
}

double nonlinearity_df(double u, const ModelParams& params) {
  const double a = std::abs(u);
  if (a == 0.0) return 0.0;
  const double p = params.p();
  return std::pow(a, p - 1.0) * (2.0 * p * std::log(a) + 2.0);
}

double nonlinearity_d2f(double u, const ModelParams& params) {
  const double a = std::abs(u);
  if (a == 0.0) return 0.0;
  const double p = params.p();
  const double mag = std::pow(a, p - 2.0) * ((p - 1.0) * (2.0 * p * std::log(a) + 2.0) + 2.0 * p);
  return u > 0.0 ? mag : -mag;
}

double potential_G(double u, const ModelParams& params) {
  const double a = std::abs(u);
  if (a == 0.0) return 0.0;
  const double q = params.p() + 1.0;
  return std::pow(a, q) * (2.0 / (q * q) - 2.0 * std::log(a) / q);
}

FunctionalTerms functional_terms(const RadialField& phi, const ModelParams& params) {
  if (!phi.is_finite()) throw DomainError("functional_terms: field contains non-finite values");
  const auto w = volume_weights(phi.grid());
  const auto d = radial_derivative(phi);
  FunctionalTerms t;
  for (std::size_t i = 0; i < w.size(); ++i) {
    t.grad_sq += w[i] * d[i] * d[i];
    t.l2_sq += w[i] * phi[i] * phi[i];
    t.potential += w[i] * potential_G(phi[i], params);
  }
  return t;
}

double action_J(const FunctionalTerms& t, const ModelParams& params) {
  return 0.5 * t.grad_sq + 0.5 * params.mass() * t.l2_sq + t.potential;
}

double constraint_K(const FunctionalTerms& t, const ModelParams& params) {
  return 0.5 * t.grad_sq + 1.5 * params.mass() * t.l2_sq + 3.0 * t.potential;
}

double eval_J(const RadialField& phi, const ModelParams& params) {
  return action_J(functional_terms(phi, params), params);
}

double eval_K(const RadialField& phi, const ModelParams& params) {
  return constraint_K(functional_terms(phi, params), params);
}

ScalingCoefficients scaling_coefficients(const RadialField& phi, const ModelParams& params) {
  const auto t = functional_terms(phi, params);
  if (!(t.grad_sq > 0.0 || t.l2_sq > 0.0)) throw DomainError("scaling_coefficients: zero field");
  ScalingCoefficients c;
  c.A = 0.5 * t.grad_sq;
  c.B = constraint_K(t, params) - c.A;
  return c;
}

double nehari_scale(const ScalingCoefficients& c) {
  if (!(c.B < 0.0)) {
    std::ostringstream msg;
    msg << "not projectable: beta*A + beta^3*B has no positive root (A = " << c.A << ", B = " << c.B
        << ")";
    throw NotProjectable(msg.str());
  }
  return std::sqrt(-c.A / c.B);
}

NehariProjection project_to_nehari(const RadialField& phi, const ModelParams& params) {
  const auto coeffs = scaling_coefficients(phi, params);
  const double beta0 = nehari_scale(coeffs);
  const double k0 = coeffs.A + coeffs.B;
  if (std::abs(k0) <= 1e-14 * h1_norm_sq(phi)) return {1.0, phi};

  auto residual = [&](double beta) {
    const RadialField psi = dilate(phi, beta);
    return std::pair{eval_K(psi, params) / h1_norm_sq(psi), psi};
  };

  // K(psi_beta) > 0 for small beta and < 0 for large beta; bracket around beta0.
  double lo = beta0, hi = beta0;
  auto [k_lo, psi_lo] = residual(lo);
  if (std::abs(k_lo) <= 1e-11) return {lo, psi_lo};
  double k_hi = k_lo;
  double step = 0.02;
  for (int tries = 0; tries < 60 && k_lo * k_hi > 0.0; ++tries) {
    if (k_lo > 0.0) {
      hi = lo * (1.0 + step);
      k_hi = residual(hi).first;
      if (k_hi > 0.0) lo = hi, k_lo = k_hi;
    } else {
      hi = lo;
      k_hi = k_lo;
      lo = hi / (1.0 + step);
      k_lo = residual(lo).first;
      if (k_lo < 0.0) hi = lo, k_hi = k_lo;
    }
    step *= 1.5;
  }
  if (k_lo * k_hi > 0.0) throw NotProjectable("project_to_nehari: could not bracket K = 0");

  // Illinois regula falsi on the discrete K(beta).
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    double mid = (lo * k_hi - hi * k_lo) / (k_hi - k_lo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    auto [k_mid, psi_mid] = residual(mid);
    if (std::abs(k_mid) <= 1e-11 || hi - lo <= 4e-16 * hi) return {mid, std::move(psi_mid)};
    if ((k_mid > 0.0) == (k_lo > 0.0)) {
      lo = mid, k_lo = k_mid;
      if (side == -1) k_hi *= 0.5;
      side = -1;
    } else {
      hi = mid, k_hi = k_mid;
      if (side == 1) k_lo *= 0.5;
      side = 1;
    }
  }
  throw ConvergenceError("project_to_nehari: root refinement did not converge");
}

double eval_energy(const RadialField& u, const RadialField& v, const ModelParams& params) {
  if (!(u.grid() == v.grid())) throw DomainError("eval_energy: u and v live on different grids");
  const ModelParams static_params = params.with_omega(0.0);
  return 0.5 * l2_norm_sq(v) + eval_J(u, static_params);
}

RadialField centered_laplacian(const RadialField& phi) {
  const std::size_t n = phi.grid().intervals();
  const double h = phi.grid().spacing();
  const double h2 = h * h;
  std::vector<double> lap(n + 1);
  lap[0] = 6.0 * (phi[1] - phi[0]) / h2;
  for (std::size_t i = 1; i < n; ++i) {
    const double r = phi.grid().node(i);
    lap[i] = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / h2 + (phi[i + 1] - phi[i - 1]) / (r * h);
  }
  const double d2 = (2.0 * phi[n] - 5.0 * phi[n - 1] + 4.0 * phi[n - 2] - phi[n - 3]) / h2;
  const double d1 = (3.0 * phi[n] - 4.0 * phi[n - 1] + phi[n - 2]) / (2.0 * h);
  lap[n] = d2 + 2.0 * d1 / phi.grid().radius();
  return RadialField(phi.grid(), std::move(lap));
}

RadialField ode_residual(const RadialField& phi, const ModelParams& params) {
  const RadialField lap = centered_laplacian(phi);
  std::vector<double> res(phi.size());
  for (std::size_t i = 0; i < res.size(); ++i) {
    res[i] = -lap[i] + params.mass() * phi[i] - nonlinearity_f(phi[i], params);
  }
  return RadialField(phi.grid(), std::move(res));
}

double residual_norm(const RadialField& phi, const ModelParams& params) {
  const RadialField res = ode_residual(phi, params);
  return std::sqrt(l2_norm_sq(res));
}

}  // namespace logkg
