#include "pearcey/scaling_laws.hpp"

#include <cmath>
#include <string>

#include "pearcey/errors.hpp"

namespace pearcey {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;

void require_positive(double s, const char* what) {
  if (!(s > 0.0)) {
    throw DomainError(std::string(what) + ": argument must be positive, got " + std::to_string(s));
  }
}

}  // namespace

double ModelParams::s_min() const {
  const double r = std::abs(rho);
  return r * std::sqrt(r) / (3.0 * kSqrt3);
}

double mu(const ModelParams& params, double s) {
  require_positive(s, "mu");
  const double s23 = std::cbrt(s * s);
  return 3.0 * kSqrt3 / (4.0 * kPi) * s23 * s23 - kSqrt3 * params.rho / (2.0 * kPi) * s23;
}

double mu_prime(const ModelParams& params, double s) {
  require_positive(s, "mu_prime");
  const double s13 = std::cbrt(s);
  return kSqrt3 / kPi * s13 - kSqrt3 * params.rho / (3.0 * kPi) / s13;
}

double sigma2(double s) {
  require_positive(s, "sigma2");
  return 4.0 / (3.0 * kPi * kPi) * std::log(s);
}

double mu_inv_lower_limit(const ModelParams& params) {
  // mu(s_min) = -rho^2 / (4 sqrt3 pi), where the radicand of the inverse vanishes.
  if (params.rho > 0.0) return -params.rho * params.rho / (4.0 * kSqrt3 * kPi);
  return 0.0;
}

double mu_inv(const ModelParams& params, double k) {
  if (!(k > mu_inv_lower_limit(params))) {
    throw DomainError("mu_inv: k = " + std::to_string(k) + " outside the invertible range (> " +
                      std::to_string(mu_inv_lower_limit(params)) + ")");
  }
  const double rho = params.rho;
  const double c = 4.0 * kSqrt3 * kPi * k;
  const double root = std::sqrt(c + rho * rho);
  // rho + root cancels for rho < 0; use the conjugate form there.
  const double base = rho >= 0.0 ? (rho + root) / 3.0 : c / (root - rho) / 3.0;
  return base * std::sqrt(base);
}

Band counting_band(const ModelParams& params, double eps, double x) {
  if (!(x > 1.0)) throw DomainError("counting_band: x must exceed 1");
  if (!(eps > 0.0)) throw DomainError("counting_band: eps must be positive");
  const double centre = mu(params, x);
  const double half = (RigidityConstants::counting_slope + eps) * std::log(x);
  return {centre - half, centre + half};
}

Band point_band(const ModelParams& params, double eps, double k) {
  if (!(k > 1.0)) throw DomainError("point_band: k must exceed 1");
  if (!(eps > 0.0)) throw DomainError("point_band: eps must be positive");
  const double half = (RigidityConstants::point_slope + eps) * std::log(k);
  return {mu_inv(params, k - half), mu_inv(params, k + half)};
}

ScalingModel ScalingModel::pearcey(const ModelParams& params) {
  return ScalingModel{
      [params](double s) { return mu(params, s); },
      [params](double s) { return mu_prime(params, s); },
      [](double s) { return sigma2(s); },
      [params](double k) { return mu_inv(params, k); },
  };
}

AuditReport audit_conditions(const ScalingModel& model, std::span<const double> grid) {
  if (grid.size() < 8) throw InputError("audit_conditions: grid needs at least 8 points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InputError("audit_conditions: grid must be strictly increasing");
  }

  const std::size_t n = grid.size();
  std::vector<double> mean(n), s_mean_prime(n), ks(n), comp(n), log_k(n);
  AuditReport report;
  report.ratio_smuprime_over_sigma2_trend.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = grid[i];
    mean[i] = model.mean(s);
    s_mean_prime[i] = s * model.mean_prime(s);
    report.ratio_smuprime_over_sigma2_trend[i] = s_mean_prime[i] / model.variance(s);
  }

  report.mu_increasing = true;
  report.s_mu_prime_weakly_increasing = true;
  report.ratio_increasing = true;
  for (std::size_t i = 1; i < n; ++i) {
    report.mu_increasing &= mean[i] > mean[i - 1];
    report.s_mu_prime_weakly_increasing &= s_mean_prime[i] >= s_mean_prime[i - 1];
    report.ratio_increasing &=
        report.ratio_smuprime_over_sigma2_trend[i] > report.ratio_smuprime_over_sigma2_trend[i - 1];
  }

  // sigma^2 o mu^{-1} as a function of k on the image grid k_i = mu(s_i).
  for (std::size_t i = 0; i < n; ++i) {
    ks[i] = mean[i];
    comp[i] = model.variance(model.mean_inverse(ks[i]));
  }
  report.sigma2_of_mu_inv_concave = report.mu_increasing;
  if (report.mu_increasing) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double left = (comp[i] - comp[i - 1]) / (ks[i] - ks[i - 1]);
      const double right = (comp[i + 1] - comp[i]) / (ks[i + 1] - ks[i]);
      report.sigma2_of_mu_inv_concave &= right < left;
    }
  }

  // Slope of comp against ln k. Points with k <= 0 carry no information.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ks[i] > 0.0)) continue;
    const double x = std::log(ks[i]);
    sx += x;
    sy += comp[i];
    sxx += x * x;
    sxy += x * comp[i];
    ++used;
  }
  if (used >= 2) {
    const double m = static_cast<double>(used);
    report.slope_estimate_a = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return report;
}

AuditReport audit_conditions(const ModelParams& params, std::span<const double> grid) {
  const double floor = std::max(params.s_min(), 1.0);
  for (double s : grid) {
    if (!(s > floor)) {
      throw InputError("audit_conditions: grid point " + std::to_string(s) + " not above max(s_min, 1) = " +
                       std::to_string(floor));
    }
  }
  return audit_conditions(ScalingModel::pearcey(params), grid);
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw InputError("geometric_grid: need 0 < lo < hi and count >= 2");
  std::vector<double> grid(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
  grid.back() = hi;
  return grid;
}

}  // namespace pearcey
