#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pearcey/ensemble.hpp"
#include "pearcey/scaling_laws.hpp"

namespace pearcey {

/// Right-continuous counting function N(x) = #{k : jumps[k] <= x}.
class StepFunction {
 public:
  StepFunction() = default;
  /// Throws InputError unless jumps are strictly increasing and non-negative.
  explicit StepFunction(std::vector<double> jumps);

  std::size_t operator()(double x) const;
  /// N(x-).
  std::size_t left_limit(double x) const;
  const std::vector<double>& jumps() const { return jumps_; }

 private:
  std::vector<double> jumps_;
};

StepFunction counting_step(const SpectrumSample& sample);

enum class SupKind { Counting, Points };

struct SupStatistic {
  double value = 0.0;
  double arg_location = 0.0;
  SupKind kind = SupKind::Counting;
  double window_lower = 0.0;
  double window_upper = 0.0;
};

/// sup over x in (s, x_max] of |N(x) - mu(x)| / ln x. Exact on the positive part; the
/// negative part is maximised on each constant piece by a 32-point grid plus golden-section
/// refinement. Throws DomainError unless 1 < s < x_max.
SupStatistic sup_counting_deviation(const StepFunction& step, const ModelParams& params, double s, double x_max);

/// max over k in [k0, k_max] of |mu(x_k) - k| / ln k.
SupStatistic sup_point_deviation(const SpectrumSample& sample, const ModelParams& params, std::size_t k0,
                                 std::size_t k_max);

enum class CltMode { CountingAtS, PointAtK };

struct CLTSample {
  std::vector<double> standardized_values;
  CltMode mode = CltMode::CountingAtS;
  double parameter = 0.0;
};

/// (N_n(s) - mu(s)) / sigma(s), one value per trial.
CLTSample clt_counting_sample(std::span<const SpectrumSample> samples, const ModelParams& params, double s);
/// pi (mu(x_k) - k) / sqrt(ln k), one value per trial.
CLTSample clt_point_sample(std::span<const SpectrumSample> samples, const ModelParams& params, std::size_t k);

/// Simulates `configs` on `threads` workers, in config order.
std::vector<SpectrumSample> simulate_all(std::span<const EnsembleConfig> configs, unsigned threads = 1);

CLTSample clt_counting_sample(std::span<const EnsembleConfig> configs, double s, unsigned threads = 1);
CLTSample clt_point_sample(std::span<const EnsembleConfig> configs, std::size_t k, unsigned threads = 1);

/// Standard normal CDF.
double normal_cdf(double z);

/// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of `values` and `reference`.
double ks_statistic(std::span<const double> values, const std::function<double(double)>& reference);

struct Coverage {
  double counting_fraction = 0.0;
  double point_fraction = 0.0;
};

/// Per-trial sup statistics over the analysis windows, for reuse across several epsilons.
struct SupTable {
  std::vector<double> counting;
  std::vector<double> points;
};

SupTable sup_table(std::span<const SpectrumSample> samples, const ModelParams& params, double s, double x_max,
                   std::size_t k0, std::size_t k_max);

Coverage coverage_from(const SupTable& table, double eps);

/// Fraction of trials whose sup statistics lie under 4 sqrt2/(3 pi) + eps and sqrt2/pi + eps.
Coverage band_coverage(std::span<const SpectrumSample> samples, const ModelParams& params, double eps, double s,
                       double x_max, std::size_t k0, std::size_t k_max);
Coverage band_coverage(std::span<const EnsembleConfig> configs, double eps, double s, double x_max, std::size_t k0,
                       std::size_t k_max, unsigned threads = 1);

struct ExpMomentPoint {
  double s = 0.0;
  double gamma = 0.0;
  /// log E[e^{gamma N(s)}] - gamma mu(s) - gamma^2 sigma^2(s) / 2; empty when unusable.
  std::optional<double> r;
  std::optional<double> stderr_r;

  friend bool operator==(const ExpMomentPoint&, const ExpMomentPoint&) = default;
};

/// Empirical exponential-moment ratio at each s of `s_grid` (increasing, all > 1).
/// Requires |gamma| <= 2.
std::vector<ExpMomentPoint> exp_moment_ratio(std::span<const SpectrumSample> samples, const ModelParams& params,
                                             double gamma, std::span<const double> s_grid);
std::vector<ExpMomentPoint> exp_moment_ratio(std::span<const EnsembleConfig> configs, double gamma,
                                             std::span<const double> s_grid, unsigned threads = 1);

}  // namespace pearcey
