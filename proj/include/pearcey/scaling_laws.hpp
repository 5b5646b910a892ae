#pragma once

#include <functional>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace pearcey {

/// The Pearcey parameter rho. Any finite real is admissible.
struct ModelParams {
  double rho = 0.0;

  /// Left edge |rho|^{3/2} / (3 sqrt 3) of the region where mu is increasing.
  /// For rho <= 0 mu increases on all of s > 0 and the edge is 0.
  double s_min() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Constants of the rigidity upper bounds. Both slopes equal sqrt(2/a) times
/// the corresponding variance coefficient, with a = 1/pi^2.
struct RigidityConstants {
  static constexpr double variance_coeff = 1.0 / (std::numbers::pi * std::numbers::pi);
  static constexpr double counting_slope = 4.0 * std::numbers::sqrt2 / (3.0 * std::numbers::pi);
  static constexpr double point_slope = std::numbers::sqrt2 / std::numbers::pi;

  double epsilon = 0.05;

  double counting_threshold() const { return counting_slope + epsilon; }
  double point_threshold() const { return point_slope + epsilon; }
};

struct Band {
  double lo;
  double hi;
};

/// mu(s) = 3 sqrt3/(4 pi) s^{4/3} - sqrt3 rho/(2 pi) s^{2/3}. Throws DomainError for s <= 0.
double mu(const ModelParams& params, double s);
double mu_prime(const ModelParams& params, double s);
/// sigma^2(s) = 4/(3 pi^2) ln s. Negative for s < 1.
double sigma2(double s);

/// Smallest k for which mu_inv is defined (exclusive): mu(s_min) for rho > 0, 0 otherwise.
double mu_inv_lower_limit(const ModelParams& params);
/// Inverse of mu on its increasing branch s > s_min.
double mu_inv(const ModelParams& params, double k);

/// mu(x) -/+ (4 sqrt2/(3 pi) + eps) ln x, for x > 1.
Band counting_band(const ModelParams& params, double eps, double x);
/// mu_inv(k -/+ (sqrt2/pi + eps) ln k), for k > 1.
Band point_band(const ModelParams& params, double eps, double k);

/// Black-box (mu, mu', sigma^2, mu^{-1}) quadruple checked by audit_conditions.
struct ScalingModel {
  std::function<double(double)> mean;
  std::function<double(double)> mean_prime;
  std::function<double(double)> variance;
  std::function<double(double)> mean_inverse;

  static ScalingModel pearcey(const ModelParams& params);
};

struct AuditReport {
  bool mu_increasing = false;
  bool s_mu_prime_weakly_increasing = false;
  bool sigma2_of_mu_inv_concave = false;
  /// s mu'(s) / sigma^2(s) increases along the grid (its limit must be +infinity).
  bool ratio_increasing = false;
  /// Least-squares slope of sigma^2(mu^{-1}(k)) against ln k over the grid image.
  double slope_estimate_a = 0.0;
  std::vector<double> ratio_smuprime_over_sigma2_trend;

  bool all_passed() const {
    return mu_increasing && s_mu_prime_weakly_increasing && sigma2_of_mu_inv_concave && ratio_increasing;
  }
};

/// Audits the hypotheses of the general rigidity theorem on an increasing grid of
/// at least 8 points, all above max(s_min, 1). Throws InputError otherwise.
AuditReport audit_conditions(const ScalingModel& model, std::span<const double> grid);
AuditReport audit_conditions(const ModelParams& params, std::span<const double> grid);

/// `count` points geometrically spaced over [lo, hi].
std::vector<double> geometric_grid(double lo, double hi, std::size_t count);

}  // namespace pearcey
