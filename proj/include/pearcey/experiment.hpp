#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pearcey/ensemble.hpp"
#include "pearcey/pearcey_kernel.hpp"
#include "pearcey/rigidity_stats.hpp"
#include "pearcey/scaling_laws.hpp"

namespace pearcey {

inline constexpr const char* kBuildId = "pearcey-lab 0.1.0";
inline constexpr const char* kThreadsEnvVar = "PEARCEY_THREADS";

/// Flat experiment configuration. Zero-valued derived fields are filled by resolved():
///   x_max = n^{3/4}/10, k0 = max(2, ceil(mu(s))), k_max = floor(mu(x_max)), clt_s = mu_inv(clt_k).
struct ExperimentConfig {
  std::size_t n = 400;
  double rho = 0.0;
  std::size_t trials = 200;
  std::uint64_t master_seed = 20210101;
  double epsilon = 0.05;
  double s = 5.0;
  double x_max = 0.0;
  std::size_t k0 = 0;
  std::size_t k_max = 0;
  std::size_t clt_k = 25;
  double clt_s = 0.0;
  double gamma = 0.5;
  std::vector<double> s_grid{8.0, 12.0, 16.0, 20.0};
  std::vector<double> eps_grid{0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
  double kernel_x_max = 4.0;
  std::size_t kernel_points = 9;
  std::string output_dir;
  unsigned threads = 1;

  /// Copy with derived fields filled in. Throws ConfigError on any invalid field.
  ExperimentConfig resolved() const;
  void validate() const;
  EnsembleConfig trial(std::size_t index) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Sets one field from its textual value. Throws ConfigError for unknown keys or bad values.
void set_config_field(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

enum Section : unsigned {
  kAudit = 1u << 0,
  kFigures = 1u << 1,
  kClt = 1u << 2,
  kRigidity = 1u << 3,
  kExpMoment = 1u << 4,
  kKernel = 1u << 5,
  kSpectra = 1u << 6,
  kDefaultSections = kAudit | kFigures | kClt | kRigidity | kExpMoment,
};

struct CltSummary {
  double parameter = 0.0;
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double ks_distance = 0.0;

  friend bool operator==(const CltSummary&, const CltSummary&) = default;
};

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
  std::size_t overflow = 0;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

struct SupSummary {
  double mean = 0.0;
  double max = 0.0;
  Histogram histogram;

  friend bool operator==(const SupSummary&, const SupSummary&) = default;
};

struct CoverageRow {
  double eps = 0.0;
  double counting_fraction = 0.0;
  double point_fraction = 0.0;

  friend bool operator==(const CoverageRow&, const CoverageRow&) = default;
};

struct RigiditySummary {
  double s = 0.0;
  double x_max = 0.0;
  std::size_t k0 = 0;
  std::size_t k_max = 0;
  std::vector<CoverageRow> coverage;
  SupSummary sup_counting;
  SupSummary sup_points;
  /// Fraction of trials whose ratio trace enters the band c - eps <= |ratio| <= c + eps.
  double counting_band_touch_fraction = 0.0;
  double point_band_touch_fraction = 0.0;

  friend bool operator==(const RigiditySummary&, const RigiditySummary&) = default;
};

struct ExpMomentSummary {
  std::vector<ExpMomentPoint> points;
  std::vector<ExpMomentPoint> first_half;
  std::vector<ExpMomentPoint> second_half;
  /// max - min of r over the grid.
  std::optional<double> spread;
  /// max over s of |r_first - r_second| / sqrt(se_first^2 + se_second^2).
  std::optional<double> split_half_max_z;

  friend bool operator==(const ExpMomentSummary&, const ExpMomentSummary&) = default;
};

struct KernelSummary {
  std::size_t points = 0;
  double max_error_estimate = 0.0;
  /// max |K(x, x) - K(-x, -x)| over the grid.
  double max_asymmetry = 0.0;

  friend bool operator==(const KernelSummary&, const KernelSummary&) = default;
};

struct AuditSummary {
  bool mu_increasing = false;
  bool s_mu_prime_weakly_increasing = false;
  bool sigma2_of_mu_inv_concave = false;
  bool ratio_increasing = false;
  double slope_estimate_a = 0.0;
  double grid_lo = 0.0;
  double grid_hi = 0.0;

  friend bool operator==(const AuditSummary&, const AuditSummary&) = default;
};

/// The JSON document. Execution settings (threads, output_dir) are not echoed, so the
/// report depends only on the experiment itself.
struct ExperimentReport {
  std::string build_id = kBuildId;
  ExperimentConfig config;
  std::optional<AuditSummary> audit;
  std::optional<CltSummary> clt_counting;
  std::optional<CltSummary> clt_point;
  std::optional<RigiditySummary> rigidity;
  std::optional<ExpMomentSummary> expmoment;
  std::optional<KernelSummary> kernel;
  std::vector<std::string> csv_files;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Header plus numeric rows; serialised with shortest round-trip formatting.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

std::string to_json_string(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

struct ExperimentResult {
  ExperimentReport report;
  /// Emitted tables keyed by file name (figure1_counting.csv, ...).
  std::map<std::string, CsvTable> tables;
};

/// Does the trace (N(x) - mu(x))/ln x on (s, x_max] take an absolute value in
/// [c - eps, c + eps], c = 4 sqrt2/(3 pi)?
bool counting_ratio_enters_band(const StepFunction& step, const ModelParams& params, double s, double x_max,
                                double eps);
/// Does some k in [k0, k_max] have |mu(x_k) - k|/ln k in [c - eps, c + eps], c = sqrt2/pi?
bool point_ratio_enters_band(const SpectrumSample& sample, const ModelParams& params, std::size_t k0,
                             std::size_t k_max, double eps);

/// Figure tables for one realisation.
CsvTable figure1_counting(const SpectrumSample& sample, const ExperimentConfig& resolved);
CsvTable figure1_ratio(const SpectrumSample& sample, const ExperimentConfig& resolved);
CsvTable figure2_points(const SpectrumSample& sample, const ExperimentConfig& resolved);
CsvTable figure2_ratio(const SpectrumSample& sample, const ExperimentConfig& resolved);

/// Runs the selected sections. Trials run in parallel on config.threads workers and are
/// merged in trial order, so the report does not depend on the thread count. A failing
/// trial aborts with TrialError carrying its index and seed. When output_dir is set the
/// CSV tables and report.json are written there.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned sections = kDefaultSections);

}  // namespace pearcey
