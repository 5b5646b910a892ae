#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>

#include "doctest.h"
#include "pearcey/errors.hpp"
#include "pearcey/rigidity_stats.hpp"
#include "pearcey/seeding.hpp"
#include "sup_oracle.hpp"

using namespace pearcey;
using doctest::Approx;

namespace {

SpectrumSample from_magnitudes(std::vector<double> mags) {
  SpectrumSample s;
  std::sort(mags.begin(), mags.end());
  s.magnitudes = mags;
  s.signed_points = mags;
  return s;
}

}  // namespace

TEST_CASE("counting step function") {
  const StepFunction n = counting_step(from_magnitudes({0.3, 1.2}));
  CHECK(n(0.2) == 0);
  CHECK(n(0.3) == 1);
  CHECK(n(1.2) == 2);
  CHECK(n.left_limit(0.3) == 0);
  CHECK(n.left_limit(1.2) == 1);
  for (double j : n.jumps()) CHECK(n(j) - n.left_limit(j) == 1);
  const StepFunction empty = counting_step(SpectrumSample{});
  CHECK(empty(0.0) == 0);
  CHECK(empty(1e9) == 0);
  CHECK_THROWS_AS(StepFunction({1.0, 1.0}), InputError);
  CHECK_THROWS_AS(StepFunction({2.0, 1.0}), InputError);
  CHECK_THROWS_AS(StepFunction({-1.0, 1.0}), InputError);
  CHECK_THROWS_AS(counting_step(from_magnitudes({0.5, 0.5})), InputError);
}

TEST_CASE("step function agrees with count_in") {
  const SpectrumSample s = simulate_trial(EnsembleConfig{50, {0.3}, 8});
  const StepFunction n = counting_step(s);
  for (double x = 0.0; x < 40.0; x += 0.13) CHECK(n(x) == count_in(s, x));
}

TEST_CASE("sup counting deviation examples") {
  const SupStatistic one = sup_counting_deviation(StepFunction({2.0}), {0.0}, 1.5, 3.0);
  CHECK(one.value == Approx(1.75111).epsilon(1e-5));
  CHECK(one.arg_location == Approx(1.5));
  CHECK(one.kind == SupKind::Counting);
  CHECK(one.window_lower == 1.5);
  CHECK(one.window_upper == 3.0);

  // N = round(mu) is close to mu, so the statistic is bounded by (1 + max|mu - round mu|) / ln s.
  const ModelParams p{0.0};
  std::vector<double> jumps;
  for (int k = 1; k <= 80; ++k) jumps.push_back(mu_inv(p, k - 0.5));
  const SupStatistic rounded = sup_counting_deviation(StepFunction(jumps), p, 3.0, 40.0);
  CHECK(rounded.value <= 1.5 / std::log(3.0));

  // No jumps in the window: only the endpoints and the interior of one piece matter.
  const SupStatistic flat = sup_counting_deviation(StepFunction({0.5, 10.0}), p, 2.0, 5.0);
  CHECK(flat.value == Approx(oracle::sup_counting({0.5, 10.0}, p, 2.0, 5.0)).epsilon(1e-9));

  CHECK_THROWS_AS(sup_counting_deviation(StepFunction({2.0}), p, 1.0, 3.0), DomainError);
  CHECK_THROWS_AS(sup_counting_deviation(StepFunction({2.0}), p, 3.0, 3.0), DomainError);
}

TEST_CASE("sup statistics match brute force on random synthetic samples") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 50; ++trial) {
    const oracle::SyntheticCase c = oracle::synthetic_case(rng, trial);
    CAPTURE(trial);
    const SupStatistic sup = sup_counting_deviation(counting_step(c.sample), c.params, c.s, c.x_max);
    CHECK(std::abs(sup.value - oracle::sup_counting(c.sample.magnitudes, c.params, c.s, c.x_max)) <= 1e-6);
    CHECK(sup.arg_location >= c.s);
    CHECK(sup.arg_location <= c.x_max);
    CHECK(sup.value >= 0.0);

    const std::size_t k0 = oracle::first_usable_k(c);
    if (k0 == 0) continue;
    const SupStatistic pt = sup_point_deviation(c.sample, c.params, k0, c.sample.size());
    CHECK(pt.value == oracle::sup_points(c.sample, c.params, k0, c.sample.size()));
    CHECK(pt.kind == SupKind::Points);
  }
}

TEST_CASE("sup point deviation examples") {
  const SpectrumSample s = from_magnitudes({1.0, 2.0, 3.0});
  const SupStatistic v = sup_point_deviation(s, {0.0}, 2, 3);
  CHECK(v.value == Approx(1.38224).epsilon(1e-4));
  CHECK(v.value == Approx((2.0 - mu({0.0}, 2.0)) / std::log(2.0)).epsilon(1e-14));
  CHECK(v.arg_location == 2.0);

  const ModelParams p{2.19};
  std::vector<double> classical;
  for (int k = 1; k <= 30; ++k) classical.push_back(mu_inv(p, k));
  const SpectrumSample c = from_magnitudes(classical);
  CHECK(sup_point_deviation(c, p, 2, 30).value <= 1e-12);
  const SupStatistic single = sup_point_deviation(s, {0.0}, 3, 3);
  CHECK(single.value == Approx(1.21093 / std::log(3.0)).epsilon(1e-4));
  CHECK(single.value == Approx((3.0 - mu({0.0}, 3.0)) / std::log(3.0)).epsilon(1e-14));

  CHECK_THROWS_AS(sup_point_deviation(s, {0.0}, 1, 3), DomainError);
  CHECK_THROWS_AS(sup_point_deviation(s, {0.0}, 3, 2), DomainError);
  CHECK_THROWS_AS(sup_point_deviation(s, {0.0}, 2, 4), InputError);
  CHECK_THROWS_AS(sup_point_deviation(from_magnitudes({0.1, 0.2, 0.3}), {2.54}, 2, 3), DomainError);
}

TEST_CASE("CLT standardisations") {
  const ModelParams p{0.0};
  const double s = mu_inv(p, 3.0);
  const SpectrumSample three = from_magnitudes({0.5, 1.0, s * 0.999, s * 2.0});
  const CLTSample zero = clt_counting_sample(std::vector<SpectrumSample>{three}, p, s);
  REQUIRE(zero.standardized_values.size() == 1);
  CHECK(std::abs(zero.standardized_values[0]) <= 1e-9);
  CHECK(zero.mode == CltMode::CountingAtS);
  CHECK(zero.parameter == s);

  // mu(s1) + sigma(s1) = 3.
  auto gap = [&](double x) { return mu(p, x) + std::sqrt(sigma2(x)) - 3.0; };
  boost::math::tools::eps_tolerance<double> tol(50);
  const auto [lo, hi] = boost::math::tools::bisect(gap, 1.5, s, tol);
  const double s1 = 0.5 * (lo + hi);
  const SpectrumSample three_at_s1 = from_magnitudes({0.5, 1.0, s1 * 0.999, s1 * 2.0});
  const CLTSample one = clt_counting_sample(std::vector<SpectrumSample>{three_at_s1}, p, s1);
  CHECK(one.standardized_values[0] == Approx(1.0).epsilon(1e-9));

  const std::size_t k = 10;
  std::vector<double> mags;
  for (std::size_t j = 1; j <= 12; ++j) mags.push_back(mu_inv(p, static_cast<double>(j)));
  const CLTSample pz = clt_point_sample(std::vector<SpectrumSample>{from_magnitudes(mags)}, p, k);
  CHECK(std::abs(pz.standardized_values[0]) <= 1e-9);
  CHECK(pz.mode == CltMode::PointAtK);
  mags[k - 1] = mu_inv(p, 10.0 + std::sqrt(std::log(10.0)) / std::numbers::pi);
  const CLTSample p1 = clt_point_sample(std::vector<SpectrumSample>{from_magnitudes(mags)}, p, k);
  CHECK(p1.standardized_values[0] == Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(clt_counting_sample(std::vector<SpectrumSample>{three}, p, 1.0), DomainError);
  CHECK_THROWS_AS(clt_point_sample(std::vector<SpectrumSample>{three}, p, 1), DomainError);
  CHECK_THROWS_AS(clt_point_sample(std::vector<SpectrumSample>{three}, p, 5), InputError);
}

TEST_CASE("CLT samples are invariant under trial relabeling") {
  std::vector<SpectrumSample> samples;
  for (std::uint64_t t = 0; t < 6; ++t) samples.push_back(simulate_trial({60, {0.0}, derive_trial_seed(3, t)}));
  const CLTSample a = clt_counting_sample(samples, {0.0}, 4.0);
  std::reverse(samples.begin(), samples.end());
  CLTSample b = clt_counting_sample(samples, {0.0}, 4.0);
  std::reverse(b.standardized_values.begin(), b.standardized_values.end());
  CHECK(a.standardized_values == b.standardized_values);
}

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(std::abs(normal_cdf(8.0) - 1.0) <= 1e-7);
  CHECK(normal_cdf(-8.0) <= 1e-7);
  CHECK(normal_cdf(1.959964) == Approx(0.975).epsilon(1e-6));
  const boost::math::normal_distribution<double> ref;
  for (double z = -6.0; z <= 6.0; z += 0.37) CHECK(std::abs(normal_cdf(z) - boost::math::cdf(ref, z)) <= 1e-7);
}

TEST_CASE("KS statistic") {
  CHECK(ks_statistic(std::vector<double>{0.0}, normal_cdf) == Approx(0.5));
  const boost::math::normal_distribution<double> ref;
  const std::size_t m = 200;
  std::vector<double> quantiles;
  for (std::size_t i = 1; i <= m; ++i) quantiles.push_back(boost::math::quantile(ref, (i - 0.5) / m));
  CHECK(ks_statistic(quantiles, normal_cdf) == Approx(0.5 / m).epsilon(1e-6));

  NormalStream draws(99);
  std::vector<double> sample(10'000);
  for (double& v : sample) v = draws();
  CHECK(ks_statistic(sample, normal_cdf) <= 0.03);

  std::vector<double> transformed;
  for (double v : sample) transformed.push_back(std::exp(v));
  const double direct = ks_statistic(sample, normal_cdf);
  const double via_exp = ks_statistic(transformed, [](double y) { return normal_cdf(std::log(y)); });
  CHECK(via_exp == Approx(direct).epsilon(1e-12));

  CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, normal_cdf), InputError);
  CHECK_THROWS_AS(ks_statistic(std::vector<double>{0.0, NAN}, normal_cdf), InputError);
}

TEST_CASE("band coverage") {
  std::vector<EnsembleConfig> configs;
  for (std::uint64_t t = 0; t < 12; ++t) configs.push_back({100, {0.0}, derive_trial_seed(11, t)});
  const auto samples = simulate_all(configs, 2);
  const double x_max = std::pow(100.0, 0.75) / 2.0;
  const auto k_max = static_cast<std::size_t>(std::floor(mu({0.0}, x_max)));
  const Coverage huge = band_coverage(samples, {0.0}, 1e9, 2.0, x_max, 2, k_max);
  CHECK(huge.counting_fraction == 1.0);
  CHECK(huge.point_fraction == 1.0);
  Coverage previous{0.0, 0.0};
  for (double eps : {0.001, 0.01, 0.05, 0.2, 1.0, 5.0}) {
    const Coverage c = band_coverage(samples, {0.0}, eps, 2.0, x_max, 2, k_max);
    CHECK(c.counting_fraction >= previous.counting_fraction);
    CHECK(c.point_fraction >= previous.point_fraction);
    previous = c;
  }
  const Coverage from_configs = band_coverage(configs, 0.05, 2.0, x_max, 2, k_max, 1);
  const Coverage from_samples = band_coverage(samples, {0.0}, 0.05, 2.0, x_max, 2, k_max);
  CHECK(from_configs.counting_fraction == from_samples.counting_fraction);
  CHECK(from_configs.point_fraction == from_samples.point_fraction);

  std::vector<double> classical;
  for (int k = 1; k <= 20; ++k) classical.push_back(mu_inv({0.0}, k));
  const std::vector<SpectrumSample> exact{from_magnitudes(classical)};
  CHECK(band_coverage(exact, {0.0}, 1e-6, 2.0, 10.0, 2, 20).point_fraction == 1.0);
  CHECK_THROWS_AS(band_coverage(exact, {0.0}, 0.0, 2.0, 10.0, 2, 20), DomainError);
}

TEST_CASE("exponential moment ratio") {
  std::vector<SpectrumSample> samples;
  for (std::uint64_t t = 0; t < 40; ++t) samples.push_back(simulate_trial({100, {0.0}, derive_trial_seed(21, t)}));
  const std::vector<double> grid{2.0, 4.0, 6.0};
  for (const auto& point : exp_moment_ratio(samples, {0.0}, 0.0, grid)) {
    REQUIRE(point.r.has_value());
    CHECK(std::abs(*point.r) <= 1e-12);
  }
  const auto r = exp_moment_ratio(samples, {0.0}, 0.5, grid);
  REQUIRE(r.size() == 3);
  for (const auto& point : r) {
    CHECK(point.r.has_value());
    CHECK(point.stderr_r.has_value());
    CHECK(*point.stderr_r > 0.0);
    CHECK(point.gamma == 0.5);
  }
  // Huge exponents stay finite through the log-mean-exp.
  const auto big = exp_moment_ratio(samples, {0.0}, 2.0, std::vector<double>{200.0});
  CHECK(big[0].r.has_value());

  CHECK_THROWS_AS(exp_moment_ratio(samples, {0.0}, 2.5, grid), DomainError);
  CHECK_THROWS_AS(exp_moment_ratio(samples, {0.0}, 0.5, std::vector<double>{3.0, 2.0}), InputError);
  CHECK_THROWS_AS(exp_moment_ratio(samples, {0.0}, 0.5, std::vector<double>{1.0}), InputError);
}

TEST_CASE("failed trials carry their index and seed") {
  std::vector<EnsembleConfig> configs;
  for (std::uint64_t t = 0; t < 5; ++t) configs.push_back({20, {0.0}, derive_trial_seed(1, t)});
  configs[3].n = 21;
  configs[4].n = 21;
  try {
    simulate_all(configs, 3);
    FAIL("expected TrialError");
  } catch (const TrialError& e) {
    CHECK(e.trial_index() == 3);
    CHECK(e.trial_seed() == derive_trial_seed(1, 3));
    // Replaying the logged trial reproduces the failure.
    CHECK_THROWS_AS(simulate_trial(EnsembleConfig{21, {0.0}, e.trial_seed()}), ConfigError);
  }
}
