#include "pearcey/rigidity_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pearcey/errors.hpp"
#include "pearcey/parallel.hpp"

namespace pearcey {

StepFunction::StepFunction(std::vector<double> jumps) : jumps_(std::move(jumps)) {
  for (std::size_t i = 0; i < jumps_.size(); ++i) {
    if (!(jumps_[i] >= 0.0)) throw InputError("StepFunction: jump locations must be non-negative");
    if (i > 0 && !(jumps_[i] > jumps_[i - 1])) {
      throw InputError("StepFunction: duplicate or unsorted jump at index " + std::to_string(i));
    }
  }
}

std::size_t StepFunction::operator()(double x) const {
  return static_cast<std::size_t>(std::upper_bound(jumps_.begin(), jumps_.end(), x) - jumps_.begin());
}

std::size_t StepFunction::left_limit(double x) const {
  return static_cast<std::size_t>(std::lower_bound(jumps_.begin(), jumps_.end(), x) - jumps_.begin());
}

StepFunction counting_step(const SpectrumSample& sample) { return StepFunction(sample.magnitudes); }

namespace {

/// Largest (mu(x) - level) / ln x on [a, b]: 32-point grid, then golden section around the best node.
std::pair<double, double> max_negative_part(const ModelParams& params, double level, double a, double b) {
  auto f = [&](double x) { return (mu(params, x) - level) / std::log(x); };
  constexpr int grid = 32;
  double best_x = a;
  double best = f(a);
  const double step = (b - a) / (grid - 1);
  for (int i = 1; i < grid; ++i) {
    const double x = i + 1 == grid ? b : a + step * i;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  double lo = std::max(a, best_x - step);
  double hi = std::min(b, best_x + step);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - ratio * (hi - lo);
  double d = lo + ratio * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - ratio * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + ratio * (hi - lo);
      fd = f(d);
    }
  }
  for (double x : {c, d}) {
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return {best, best_x};
}

}  // namespace

SupStatistic sup_counting_deviation(const StepFunction& step, const ModelParams& params, double s, double x_max) {
  if (!(s > 1.0)) throw DomainError("sup_counting_deviation: s must exceed 1");
  if (!(x_max > s)) throw DomainError("sup_counting_deviation: x_max must exceed s");

  SupStatistic out{0.0, s, SupKind::Counting, s, x_max};
  auto consider = [&](double value, double x) {
    if (value > out.value) {
      out.value = value;
      out.arg_location = x;
    }
  };

  // Constant pieces [a, b) of N on (s, x_max]; N right-continuous, so the limit at s+ uses N(s).
  const auto& jumps = step.jumps();
  auto first = std::upper_bound(jumps.begin(), jumps.end(), s);
  auto last = std::upper_bound(jumps.begin(), jumps.end(), x_max);
  std::vector<double> edges{s};
  edges.insert(edges.end(), first, last);
  if (edges.back() < x_max) edges.push_back(x_max);

  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    const double level = static_cast<double>(step(a));
    // (level - mu)/ln x decreases on the piece, so its sup is at the left end.
    consider(std::abs(level - mu(params, a)) / std::log(a), a);
    consider(std::abs(level - mu(params, b)) / std::log(b), b);
    const auto [neg, where] = max_negative_part(params, level, a, b);
    consider(neg, where);
  }
  // Value at x_max itself (a jump exactly at x_max lifts N there).
  consider(std::abs(static_cast<double>(step(x_max)) - mu(params, x_max)) / std::log(x_max), x_max);
  return out;
}

SupStatistic sup_point_deviation(const SpectrumSample& sample, const ModelParams& params, std::size_t k0,
                                 std::size_t k_max) {
  if (k0 < 2) throw DomainError("sup_point_deviation: k0 must be at least 2");
  if (k_max < k0) throw DomainError("sup_point_deviation: k_max must be >= k0");
  if (k_max > sample.size()) {
    throw InputError("sup_point_deviation: k_max = " + std::to_string(k_max) + " exceeds the " +
                     std::to_string(sample.size()) + " available points");
  }
  if (!(sample.point(k0) > params.s_min())) {
    throw DomainError("sup_point_deviation: x_k0 lies below the increasing domain of mu");
  }
  SupStatistic out{0.0, static_cast<double>(k0), SupKind::Points, static_cast<double>(k0),
                   static_cast<double>(k_max)};
  for (std::size_t k = k0; k <= k_max; ++k) {
    const double kk = static_cast<double>(k);
    const double value = std::abs(mu(params, sample.point(k)) - kk) / std::log(kk);
    if (value > out.value) {
      out.value = value;
      out.arg_location = kk;
    }
  }
  return out;
}

CLTSample clt_counting_sample(std::span<const SpectrumSample> samples, const ModelParams& params, double s) {
  if (!(s > 1.0)) throw DomainError("clt_counting_sample: sigma^2(s) must be positive (s > 1)");
  const double centre = mu(params, s);
  const double scale = std::sqrt(sigma2(s));
  CLTSample out{{}, CltMode::CountingAtS, s};
  out.standardized_values.reserve(samples.size());
  for (const SpectrumSample& sample : samples) {
    out.standardized_values.push_back((static_cast<double>(count_in(sample, s)) - centre) / scale);
  }
  return out;
}

CLTSample clt_point_sample(std::span<const SpectrumSample> samples, const ModelParams& params, std::size_t k) {
  if (k < 2) throw DomainError("clt_point_sample: k must be at least 2");
  const double kk = static_cast<double>(k);
  const double scale = std::numbers::pi / std::sqrt(std::log(kk));
  CLTSample out{{}, CltMode::PointAtK, kk};
  out.standardized_values.reserve(samples.size());
  for (const SpectrumSample& sample : samples) {
    if (k > sample.size()) throw InputError("clt_point_sample: k exceeds the available points");
    out.standardized_values.push_back(scale * (mu(params, sample.point(k)) - kk));
  }
  return out;
}

std::vector<SpectrumSample> simulate_all(std::span<const EnsembleConfig> configs, unsigned threads) {
  std::vector<SpectrumSample> samples(configs.size());
  parallel_for_index(configs.size(), threads, [&](std::size_t i) {
    try {
      samples[i] = simulate_trial(configs[i]);
    } catch (const std::exception& e) {
      throw TrialError(std::string("trial failed: ") + e.what(), i, configs[i].trial_seed);
    }
  });
  return samples;
}

namespace {

void require_shared_model(std::span<const EnsembleConfig> configs) {
  if (configs.empty()) throw InputError("need at least one trial configuration");
  for (const auto& c : configs) {
    if (c.n != configs.front().n || !(c.params == configs.front().params)) {
      throw InputError("all trial configurations must share n and rho");
    }
  }
}

}  // namespace

CLTSample clt_counting_sample(std::span<const EnsembleConfig> configs, double s, unsigned threads) {
  require_shared_model(configs);
  const auto samples = simulate_all(configs, threads);
  return clt_counting_sample(samples, configs.front().params, s);
}

CLTSample clt_point_sample(std::span<const EnsembleConfig> configs, std::size_t k, unsigned threads) {
  require_shared_model(configs);
  const auto samples = simulate_all(configs, threads);
  return clt_point_sample(samples, configs.front().params, k);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double ks_statistic(std::span<const double> values, const std::function<double(double)>& reference) {
  if (values.empty()) throw InputError("ks_statistic: empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw InputError("ks_statistic: non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = reference(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

SupTable sup_table(std::span<const SpectrumSample> samples, const ModelParams& params, double s, double x_max,
                   std::size_t k0, std::size_t k_max) {
  SupTable table;
  table.counting.reserve(samples.size());
  table.points.reserve(samples.size());
  for (const SpectrumSample& sample : samples) {
    table.counting.push_back(sup_counting_deviation(counting_step(sample), params, s, x_max).value);
    table.points.push_back(sup_point_deviation(sample, params, k0, k_max).value);
  }
  return table;
}

Coverage coverage_from(const SupTable& table, double eps) {
  if (!(eps > 0.0)) throw DomainError("band_coverage: eps must be positive");
  const RigidityConstants constants{eps};
  auto fraction = [](const std::vector<double>& values, double threshold) {
    if (values.empty()) return 0.0;
    const auto inside = std::count_if(values.begin(), values.end(), [&](double v) { return v <= threshold; });
    return static_cast<double>(inside) / static_cast<double>(values.size());
  };
  return {fraction(table.counting, constants.counting_threshold()), fraction(table.points, constants.point_threshold())};
}

Coverage band_coverage(std::span<const SpectrumSample> samples, const ModelParams& params, double eps, double s,
                       double x_max, std::size_t k0, std::size_t k_max) {
  return coverage_from(sup_table(samples, params, s, x_max, k0, k_max), eps);
}

Coverage band_coverage(std::span<const EnsembleConfig> configs, double eps, double s, double x_max, std::size_t k0,
                       std::size_t k_max, unsigned threads) {
  require_shared_model(configs);
  const auto samples = simulate_all(configs, threads);
  return band_coverage(samples, configs.front().params, eps, s, x_max, k0, k_max);
}

std::vector<ExpMomentPoint> exp_moment_ratio(std::span<const SpectrumSample> samples, const ModelParams& params,
                                             double gamma, std::span<const double> s_grid) {
  if (!(std::abs(gamma) <= 2.0)) throw DomainError("exp_moment_ratio: |gamma| must be at most 2");
  if (samples.empty()) throw InputError("exp_moment_ratio: no samples");
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > 1.0) || (i > 0 && !(s_grid[i] > s_grid[i - 1]))) {
      throw InputError("exp_moment_ratio: s_grid must be increasing and > 1");
    }
  }
  const double m = static_cast<double>(samples.size());
  std::vector<ExpMomentPoint> out;
  for (double s : s_grid) {
    ExpMomentPoint point{s, gamma, std::nullopt, std::nullopt};
    // log-mean-exp with the largest exponent factored out.
    std::vector<double> exponents;
    exponents.reserve(samples.size());
    for (const auto& sample : samples) exponents.push_back(gamma * static_cast<double>(count_in(sample, s)));
    const double shift = *std::max_element(exponents.begin(), exponents.end());
    double sum = 0.0, sum_sq = 0.0;
    for (double a : exponents) {
      const double e = std::exp(a - shift);
      sum += e;
      sum_sq += e * e;
    }
    const double mean = sum / m;
    const double r = shift + std::log(mean) - gamma * mu(params, s) - 0.5 * gamma * gamma * sigma2(s);
    if (std::isfinite(r)) {
      point.r = r;
      if (samples.size() > 1) {
        const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
        point.stderr_r = std::sqrt(var / m) / mean;
      }
    }
    out.push_back(point);
  }
  return out;
}

std::vector<ExpMomentPoint> exp_moment_ratio(std::span<const EnsembleConfig> configs, double gamma,
                                             std::span<const double> s_grid, unsigned threads) {
  require_shared_model(configs);
  const auto samples = simulate_all(configs, threads);
  return exp_moment_ratio(samples, configs.front().params, gamma, s_grid);
}

}  // namespace pearcey
