#include "logkg/radial_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "logkg/error.hpp"

namespace logkg {

namespace {

void require_finite(const RadialField& u, const char* what) {
  if (!u.is_finite()) {
    throw DomainError(std::string(what) + ": field contains non-finite values");
  }
}

double weighted_sum(const std::vector<double>& w, const std::vector<double>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i];
  return acc;
}

// Cubic Lagrange interpolation at x (in source coordinates). Index -1 is
// mirrored to +1 (even extension through the origin).
double interpolate_cubic(const RadialField& u, double x) {
  const RadialGrid& g = u.grid();
  const auto n = static_cast<long>(g.intervals());
  const double s = x / g.spacing();
  const double nearest = std::round(s);
  if (std::abs(s - nearest) < 1e-12 && nearest >= 0 && nearest <= static_cast<double>(n)) {
    return u[static_cast<std::size_t>(nearest)];
  }
  if (s > static_cast<double>(n)) return 0.0;
  long j = static_cast<long>(std::floor(s));
  long k = std::clamp(j - 1, -1L, n - 3);
  const double t = s - static_cast<double>(k);
  auto at = [&](long idx) { return u[static_cast<std::size_t>(idx < 0 ? -idx : idx)]; };
  const double f0 = at(k), f1 = at(k + 1), f2 = at(k + 2), f3 = at(k + 3);
  const double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
  const double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
  const double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
  const double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
  return l0 * f0 + l1 * f1 + l2 * f2 + l3 * f3;
}

}  // namespace

RadialGrid::RadialGrid(double radius, std::size_t intervals)
    : radius_(radius), intervals_(intervals), spacing_(radius / static_cast<double>(intervals)) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw DomainError("RadialGrid: radius must be positive and finite");
  }
  if (intervals < kMinIntervals) {
    throw DomainError("RadialGrid: need at least " + std::to_string(kMinIntervals) + " intervals");
  }
}

RadialGrid RadialGrid::from_nodes(std::span<const double> nodes, double rel_tol) {
  if (nodes.size() < kMinIntervals + 1) {
    throw DomainError("RadialGrid: too few nodes (" + std::to_string(nodes.size()) + ")");
  }
  const std::size_t n = nodes.size() - 1;
  const double radius = nodes.back();
  if (!(radius > 0.0)) throw DomainError("RadialGrid: last node must be positive");
  RadialGrid grid(radius, n);
  const double tol = rel_tol * grid.spacing();
  for (std::size_t i = 0; i <= n; ++i) {
    if (std::abs(nodes[i] - grid.node(i)) > tol) {
      throw DomainError("RadialGrid: nodes are not uniform from r = 0 (row " + std::to_string(i) + ")");
    }
  }
  return grid;
}

RadialField::RadialField(RadialGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DomainError("RadialField: expected " + std::to_string(grid_.size()) + " values, got " +
                      std::to_string(values_.size()));
  }
}

RadialField RadialField::zeros(const RadialGrid& grid) {
  return RadialField(grid, std::vector<double>(grid.size(), 0.0));
}

RadialField RadialField::sample(const RadialGrid& grid, const std::function<double(double)>& fn) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.node(i));
  return RadialField(grid, std::move(v));
}

bool RadialField::is_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double RadialField::max_abs() const noexcept {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

RadialField RadialField::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return RadialField(grid_, std::move(v));
}

std::vector<double> volume_weights(const RadialGrid& grid) {
  const std::size_t n = grid.intervals();
  const double h = grid.spacing();
  std::vector<double> w(n + 1, 0.0);
  const std::size_t simpson_end = (n % 2 == 0) ? n : n - 3;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (simpson_end != n) {
    const std::size_t i = simpson_end;
    w[i] += 3.0 * h / 8.0;
    w[i + 1] += 9.0 * h / 8.0;
    w[i + 2] += 9.0 * h / 8.0;
    w[i + 3] += 3.0 * h / 8.0;
  }
  const double four_pi = 4.0 * std::numbers::pi;
  for (std::size_t i = 0; i <= n; ++i) {
    const double r = grid.node(i);
    w[i] *= four_pi * r * r;
  }
  return w;
}

double integrate_volume(const RadialField& f) {
  require_finite(f, "integrate_volume");
  return weighted_sum(volume_weights(f.grid()), f.values());
}

std::vector<double> radial_derivative(const RadialField& u) {
  const std::size_t n = u.grid().intervals();
  const double h = u.grid().spacing();
  std::vector<double> d(n + 1);
  d[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
  d[n] = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h);
  return d;
}

double l2_norm_sq(const RadialField& u) {
  require_finite(u, "l2_norm_sq");
  const auto w = volume_weights(u.grid());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * u[i] * u[i];
  return acc;
}

double grad_l2_norm_sq(const RadialField& u) {
  require_finite(u, "grad_l2_norm_sq");
  const auto w = volume_weights(u.grid());
  const auto d = radial_derivative(u);
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * d[i] * d[i];
  return acc;
}

double h1_norm_sq(const RadialField& u) { return grad_l2_norm_sq(u) + l2_norm_sq(u); }

double lp_norm(const RadialField& u, double alpha) {
  if (!(alpha > 1.0)) throw DomainError("lp_norm: exponent must exceed 1");
  require_finite(u, "lp_norm");
  const auto w = volume_weights(u.grid());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * std::pow(std::abs(u[i]), alpha);
  return std::pow(acc, 1.0 / alpha);
}

RadialField dilate(const RadialField& u, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("dilate: beta must be positive");
  if (beta == 1.0) return u;
  const RadialGrid& g = u.grid();
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = interpolate_cubic(u, g.node(i) / beta);
  return RadialField(g, std::move(v));
}

RadialField resample(const RadialField& u, const RadialGrid& target) {
  if (target == u.grid()) return u;
  std::vector<double> v(target.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = target.node(i);
    v[i] = r > u.grid().radius() ? 0.0 : interpolate_cubic(u, r);
  }
  return RadialField(target, std::move(v));
}

double strauss_ratio(const RadialField& u) {
  const double h1 = h1_norm_sq(u);
  if (!(h1 > 0.0)) throw DomainError("strauss_ratio: zero field");
  double sup = 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) sup = std::max(sup, u.grid().node(i) * std::abs(u[i]));
  return sup / std::sqrt(h1);
}

double strauss_bound() noexcept { return 1.0 / std::sqrt(4.0 * std::numbers::pi); }

double gn_theta(double alpha) { return 3.0 * (alpha - 2.0) / (2.0 * alpha); }

double gn_ratio(const RadialField& u, double alpha) {
  if (!(alpha > 2.0 && alpha < 6.0)) throw DomainError("gn_ratio: alpha must lie in (2, 6)");
  const double l2 = std::sqrt(l2_norm_sq(u));
  const double grad = std::sqrt(grad_l2_norm_sq(u));
  if (!(l2 > 0.0) || !(grad > 0.0)) throw DomainError("gn_ratio: zero field");
  const double theta = gn_theta(alpha);
  return lp_norm(u, alpha) / (std::pow(l2, 1.0 - theta) * std::pow(grad, theta));
}

double sobolev_constant_3d() noexcept {
  // Talenti/Aubin: S_3 = 1 / (sqrt(3) * (pi/2)^(2/3)).
  return 1.0 / (std::sqrt(3.0) * std::cbrt(std::numbers::pi * std::numbers::pi / 4.0));
}

double gn_ratio_bound(double alpha) { return std::pow(sobolev_constant_3d(), gn_theta(alpha)); }

}  // namespace logkg
