#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace logkg {

/// Uniform mesh r_i = i * dr, i = 0..n, on [0, R].
class RadialGrid {
 public:
  static constexpr std::size_t kMinIntervals = 16;

  RadialGrid(double radius, std::size_t intervals);

  /// Rebuilds a grid from sampled nodes; throws unless they start at 0 and
  /// are uniform to `rel_tol` of the spacing.
  static RadialGrid from_nodes(std::span<const double> nodes, double rel_tol = 1e-9);

  double radius() const noexcept { return radius_; }
  std::size_t intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_ + 1; }
  double spacing() const noexcept { return spacing_; }
  double node(std::size_t i) const noexcept {
    return i == intervals_ ? radius_ : static_cast<double>(i) * spacing_;
  }

  friend bool operator==(const RadialGrid&, const RadialGrid&) = default;

 private:
  double radius_;
  std::size_t intervals_;
  double spacing_;
};

/// Real radial function sampled on a RadialGrid. Values are not required to be
/// finite on construction (a blown-up state is still representable); every
/// quadrature entry point rejects non-finite input.
class RadialField {
 public:
  RadialField(RadialGrid grid, std::vector<double> values);

  static RadialField zeros(const RadialGrid& grid);
  static RadialField sample(const RadialGrid& grid, const std::function<double(double)>& fn);

  const RadialGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  bool is_finite() const noexcept;
  double max_abs() const noexcept;

  RadialField scaled(double c) const;

 private:
  RadialGrid grid_;
  std::vector<double> values_;
};

/// Quadrature weights w_i with sum_i w_i f_i ~ 4*pi * int_0^R f(r) r^2 dr
/// (composite Simpson; the last three intervals use the 3/8 rule when n is odd).
std::vector<double> volume_weights(const RadialGrid& grid);

double integrate_volume(const RadialField& f);

/// du/dr: centred interior, u'(0) = 0 from the even ghost u(-dr) = u(dr),
/// second-order one-sided at r = R.
std::vector<double> radial_derivative(const RadialField& u);

double l2_norm_sq(const RadialField& u);
double grad_l2_norm_sq(const RadialField& u);
double h1_norm_sq(const RadialField& u);
double lp_norm(const RadialField& u, double alpha);

/// psi(r) = u(r / beta) by 4-point Lagrange interpolation, zero beyond R.
RadialField dilate(const RadialField& u, double beta);

/// Interpolates `u` onto another grid (zero beyond the source radius).
RadialField resample(const RadialField& u, const RadialGrid& target);

/// sup_{r_i > 0} r_i |u(r_i)| / ||u||_{H^1}.
double strauss_ratio(const RadialField& u);

/// Upper bound of strauss_ratio for radial H^1(R^3) functions: 1/sqrt(4*pi).
/// Follows from r^2 u(r)^2 <= 2 int_r^inf s^2 |u u'| ds and Cauchy-Schwarz.
double strauss_bound() noexcept;

/// ||u||_alpha / (||u||_2^{1-theta} ||grad u||_2^theta), theta = 3(alpha-2)/(2 alpha).
double gn_ratio(const RadialField& u, double alpha);

/// Interpolation exponent theta for the three-dimensional G-N ratio.
double gn_theta(double alpha);

/// Sharp Sobolev constant S with ||u||_6 <= S ||grad u||_2 in R^3.
double sobolev_constant_3d() noexcept;

/// Upper bound S^theta for gn_ratio: Holder interpolation between L^2 and L^6
/// followed by the sharp Sobolev inequality.
double gn_ratio_bound(double alpha);

}  // namespace logkg
