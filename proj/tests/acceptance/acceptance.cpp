// Acceptance suite. Prints one PASS/FAIL line per criterion; with arguments, runs only the
// listed criteria. Exit status is non-zero when any selected criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "pearcey/ensemble.hpp"
#include "pearcey/experiment.hpp"
#include "pearcey/pearcey_kernel.hpp"
#include "pearcey/rigidity_stats.hpp"
#include "pearcey/scaling_laws.hpp"
#include "pearcey/seeding.hpp"
#include "sup_oracle.hpp"

using namespace pearcey;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "VIOLATED ") + what;
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, pattern, a, b, c);
  return buffer;
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

const std::vector<double> kFigureRhos{-3.24, -1.31, 0.0, 2.19, 2.54};

Outcome closed_form_suite() {
  Outcome out;
  double worst = 0.0;
  for (double rho : kFigureRhos) {
    const ModelParams p{rho};
    for (double k : geometric_grid(1.0, 1e4, 401)) {
      worst = std::max(worst, std::abs(mu(p, mu_inv(p, k)) - k) / std::max(1.0, k));
    }
  }
  out.require(worst <= 1e-9, fmt("max |mu(mu_inv(k)) - k| / max(1,k) = %.2e (<= 1e-9)", worst));
  using C = RigidityConstants;
  const double ratio = C::counting_slope / C::point_slope;
  out.require(std::abs(ratio - 4.0 / 3.0) <= 4e-16, fmt("counting_slope/point_slope - 4/3 = %.1e", ratio - 4.0 / 3.0));
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const bool consistent = std::abs(C::counting_slope - std::sqrt(2.0 / C::variance_coeff) * 4.0 / (3.0 * pi2)) <= 1e-15 &&
                          std::abs(C::point_slope - std::sqrt(2.0 / C::variance_coeff) * C::variance_coeff) <= 1e-15 &&
                          std::abs(C::variance_coeff - 1.0 / pi2) <= 1e-17;
  out.require(consistent, "slopes equal sqrt(2/a) times the variance coefficients with a = 1/pi^2");
  return out;
}

Outcome audit_suite() {
  Outcome out;
  const auto grid = geometric_grid(10.0, 1e8, 64);
  for (double rho : kFigureRhos) {
    const AuditReport r = audit_conditions(ModelParams{rho}, grid);
    const double rel = std::abs(r.slope_estimate_a - RigidityConstants::variance_coeff) / RigidityConstants::variance_coeff;
    out.require(r.all_passed() && rel <= 0.02,
                fmt("rho=%.2f: all conditions hold, a_hat=%.7f (rel err %.1e)", rho, r.slope_estimate_a, rel));
  }
  return out;
}

Outcome ensemble_moments() {
  Outcome out;
  const std::size_t n = 100;
  const std::size_t trials = 2000;
  for (double rho : {0.0, 1.0}) {
    double s1 = 0.0, q1 = 0.0, s2 = 0.0, q2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const HermitianMatrix m = sample_matrix(EnsembleConfig{n, {rho}, derive_trial_seed(31337, t)});
      const double tr = m.trace().real();
      const double tr2 = m.cwiseAbs2().sum();
      s1 += tr;
      q1 += tr * tr;
      s2 += tr2;
      q2 += tr2 * tr2;
    }
    const double m = static_cast<double>(trials);
    const double mean1 = s1 / m, mean2 = s2 / m;
    const double se1 = std::sqrt((q1 / m - mean1 * mean1) / (m - 1.0));
    const double se2 = std::sqrt((q2 / m - mean2 * mean2) / (m - 1.0));
    const double a = 1.0 + rho / (2.0 * std::sqrt(static_cast<double>(n)));
    const double expected2 = n * a * a + n;
    out.require(std::abs(mean1) <= 3.0 * se1, fmt("rho=%.0f: E Tr M = %.4f (3 SE = %.4f)", rho, mean1, 3.0 * se1));
    out.require(std::abs(mean2 - expected2) <= 3.0 * se2,
                fmt("rho=%.0f: E Tr M^2 = %.3f vs %.3f", rho, mean2, expected2) + fmt(" (3 SE = %.3f)", 3.0 * se2));
  }
  return out;
}

Outcome kernel_suite() {
  Outcome out;
  const ModelParams zero{0.0};
  const double phi0 = phi(zero, 0.0).real();
  const double exact = boost::math::tgamma(0.25) / std::sqrt(2.0);
  out.require(std::abs(phi0 - exact) <= 1e-6, fmt("|phi(0) - Gamma(1/4)/sqrt2| = %.1e", std::abs(phi0 - exact)));
  const double psi0 = std::abs(psi(zero, 0.0));
  out.require(psi0 <= 1e-8, fmt("|psi(0)| = %.1e", psi0));
  double residual = 0.0;
  for (double rho : {0.0, 1.0}) {
    for (int i = -50; i <= 50; ++i) {
      const double x = 0.1 * i;
      const ComplexValue f = phi({rho}, x);
      const ComplexValue r = phi_moment({rho}, x, 3) - x * f - rho * phi_moment({rho}, x, 1);
      residual = std::max(residual, std::abs(r) / (1.0 + std::abs(f)));
    }
  }
  out.require(residual <= 1e-4, fmt("max ODE residual / (1+|phi|) = %.1e", residual));
  const QuadratureSpec spec;
  const double k0 = kernel_diag(zero, 0.0, spec).value.real();
  const double k0_fine = kernel_diag(zero, 0.0, spec.doubled()).value.real();
  const double rel = std::abs(k0 - k0_fine) / std::abs(k0_fine);
  out.require(rel <= 1e-4, fmt("K(0,0) = %.7f, double resolution %.7f (rel %.1e)", k0, k0_fine, rel));
  const double count = mean_count(zero, 4.0, spec);
  out.require(std::abs(count - mu(zero, 4.0)) <= 1.0,
              fmt("mean_count(4) = %.4f vs mu(4) = %.4f", count, mu(zero, 4.0)));
  return out;
}

Outcome sup_oracle_suite() {
  Outcome out;
  std::mt19937_64 rng(20240601);
  double worst_counting = 0.0, worst_points = 0.0;
  int cases = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const oracle::SyntheticCase c = oracle::synthetic_case(rng, trial);
    const double lib = sup_counting_deviation(counting_step(c.sample), c.params, c.s, c.x_max).value;
    worst_counting = std::max(worst_counting, std::abs(lib - oracle::sup_counting(c.sample.magnitudes, c.params, c.s, c.x_max)));
    const std::size_t k0 = oracle::first_usable_k(c);
    if (k0 != 0) {
      const double pts = sup_point_deviation(c.sample, c.params, k0, c.sample.size()).value;
      worst_points = std::max(worst_points, std::abs(pts - oracle::sup_points(c.sample, c.params, k0, c.sample.size())));
    }
    ++cases;
  }
  out.require(worst_counting <= 1e-6, fmt("%.0f samples: max counting discrepancy %.1e", cases, worst_counting));
  out.require(worst_points <= 1e-6, fmt("max point discrepancy %.1e", worst_points));
  return out;
}

Outcome clt_suite() {
  Outcome out;
  ExperimentConfig c;
  c.n = 400;
  c.trials = 1000;
  c.clt_k = 25;
  c.threads = worker_count();
  const ExperimentReport r = run_experiment(c, kClt).report;
  const CltSummary& cnt = *r.clt_counting;
  const CltSummary& pt = *r.clt_point;
  out.require(std::abs(cnt.mean) <= 0.15, fmt("counting at s=%.2f: mean %.3f (|.| <= 0.15)", cnt.parameter, cnt.mean));
  out.require(cnt.variance >= 0.6 && cnt.variance <= 1.4, fmt("variance %.3f (in [0.6, 1.4])", cnt.variance));
  out.require(cnt.ks_distance <= 0.12, fmt("KS %.3f (<= 0.12)", cnt.ks_distance));
  out.require(pt.ks_distance <= 0.12, fmt("point at k=25: KS %.3f (<= 0.12)", pt.ks_distance));
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome rigidity_suite() {
  Outcome out;
  ExperimentConfig c;
  c.n = 400;
  c.rho = -1.31;
  c.trials = 200;
  c.epsilon = 0.05;
  c.s = 5.0;
  c.x_max = 30.0;
  c.threads = worker_count();
  const auto dir = std::filesystem::temp_directory_path() / "pearcey_lab_acceptance_rigidity";
  std::filesystem::remove_all(dir);
  c.output_dir = dir.string();
  const ExperimentResult res = run_experiment(c, kFigures | kRigidity);
  const RigiditySummary& rig = *res.report.rigidity;

  bool monotone = true;
  std::string fractions;
  for (std::size_t i = 0; i < rig.coverage.size(); ++i) {
    const CoverageRow& row = rig.coverage[i];
    if (i > 0) {
      monotone = monotone && row.counting_fraction >= rig.coverage[i - 1].counting_fraction &&
                 row.point_fraction >= rig.coverage[i - 1].point_fraction;
    }
    if (row.eps == c.epsilon) fractions = fmt("coverage at eps=0.05: counting %.3f, points %.3f", row.counting_fraction, row.point_fraction);
  }
  out.require(!fractions.empty(), fractions.empty() ? "coverage at eps=0.05 missing" : fractions);
  out.require(monotone, "coverage fractions non-decreasing in eps");

  const std::vector<std::pair<std::string, std::vector<std::string>>> schemas{
      {"figure1_counting.csv", {"x", "N_of_x", "mu", "band_lo", "band_hi"}},
      {"figure1_ratio.csv", {"x", "ratio", "guide_hi", "guide_lo"}},
      {"figure2_points.csv", {"k", "x_k", "mu_inv", "band_lo", "band_hi"}},
      {"figure2_ratio.csv", {"k", "ratio", "guide_hi", "guide_lo"}}};
  bool structure = true;
  for (const auto& [name, columns] : schemas) {
    const CsvTable t = parse_csv(slurp(dir / name));
    structure = structure && t.columns == columns && !t.rows.empty();
    if (columns.back() == "band_hi") {
      for (const auto& row : t.rows) structure = structure && row[3] < row[4];
    }
  }
  out.require(structure, "figure CSVs have the expected columns and band_lo < band_hi");
  out.require(rig.counting_band_touch_fraction >= 0.5 && rig.point_band_touch_fraction >= 0.5,
              fmt("ratio traces enter the guide bands in %.3f (counting) and %.3f (points) of trials",
                  rig.counting_band_touch_fraction, rig.point_band_touch_fraction));
  std::filesystem::remove_all(dir);
  return out;
}

Outcome expmoment_suite() {
  Outcome out;
  ExperimentConfig c;
  c.n = 400;
  c.rho = 0.0;
  c.trials = 2000;
  c.gamma = 0.5;
  c.s_grid = {8.0, 12.0, 16.0, 20.0};
  c.threads = worker_count();
  const ExpMomentSummary e = *run_experiment(c, kExpMoment).report.expmoment;
  out.require(e.spread.has_value() && *e.spread <= 0.5, fmt("spread of r over s_grid %.3f (<= 0.5)", e.spread.value_or(NAN)));
  out.require(e.split_half_max_z.has_value() && *e.split_half_max_z <= 3.0,
              fmt("split-half max |z| %.2f (<= 3)", e.split_half_max_z.value_or(NAN)));
  return out;
}

Outcome determinism_suite() {
  Outcome out;
  ExperimentConfig c;
  c.n = 100;
  c.trials = 40;
  c.s = 2.0;
  c.x_max = 10.0;
  c.clt_k = 8;
  c.s_grid = {2.0, 4.0, 6.0};
  c.kernel_points = 3;
  const unsigned sections = kDefaultSections | kKernel | kSpectra;
  std::string reference;
  bool identical = true;
  for (unsigned threads : {1u, 2u, 8u}) {
    const auto dir = std::filesystem::temp_directory_path() / ("pearcey_lab_acceptance_det_" + std::to_string(threads));
    std::filesystem::remove_all(dir);
    c.threads = threads;
    c.output_dir = dir.string();
    run_experiment(c, sections);
    const std::string json = slurp(dir / "report.json");
    if (reference.empty()) reference = json;
    identical = identical && json == reference && !json.empty();
    std::filesystem::remove_all(dir);
  }
  out.require(identical, fmt("report.json byte-identical for threads 1, 2, 8 (%.0f bytes)", static_cast<double>(reference.size())));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form suite", closed_form_suite},
      {"audit suite", audit_suite},
      {"ensemble moments", ensemble_moments},
      {"kernel suite", kernel_suite},
      {"sup-statistic oracle", sup_oracle_suite},
      {"CLT suite", clt_suite},
      {"rigidity evidence", rigidity_suite},
      {"exponential-moment stabilization", expmoment_suite},
      {"determinism", determinism_suite}};

  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const long id = std::strtol(argv[i], nullptr, 10);
    if (id < 1 || id > static_cast<long>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(id));
  }
  if (selected.empty()) {
    for (std::size_t i = 1; i <= criteria.size(); ++i) selected.push_back(i);
  }

  int failures = 0;
  for (std::size_t id : selected) {
    const auto& [name, run] = criteria[id - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome result;
    try {
      result = run();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s, %.1f s): %s\n", result.pass ? "PASS" : "FAIL", id, name.c_str(), seconds,
                result.detail.c_str());
    std::fflush(stdout);
    failures += result.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
