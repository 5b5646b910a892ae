#include "pearcey/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pearcey/errors.hpp"
#include "pearcey/parallel.hpp"
#include "pearcey/seeding.hpp"

namespace pearcey {

namespace {

using nlohmann::json;

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config: cannot parse value '" + value + "' for key '" + key + "'");
  }
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream stream(raw);
  std::string item;
  while (std::getline(stream, item, ',')) out.push_back(parse_number<double>(key, item));
  if (out.empty()) throw ConfigError("config: empty list for key '" + key + "'");
  return out;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("config: " + message);
}

}  // namespace

void set_config_field(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "n") c.n = parse_number<std::size_t>(key, value);
  else if (key == "rho") c.rho = parse_number<double>(key, value);
  else if (key == "trials") c.trials = parse_number<std::size_t>(key, value);
  else if (key == "master_seed" || key == "seed") c.master_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "epsilon" || key == "eps") c.epsilon = parse_number<double>(key, value);
  else if (key == "s") c.s = parse_number<double>(key, value);
  else if (key == "x_max") c.x_max = parse_number<double>(key, value);
  else if (key == "k0") c.k0 = parse_number<std::size_t>(key, value);
  else if (key == "k_max") c.k_max = parse_number<std::size_t>(key, value);
  else if (key == "clt_k") c.clt_k = parse_number<std::size_t>(key, value);
  else if (key == "clt_s") c.clt_s = parse_number<double>(key, value);
  else if (key == "gamma") c.gamma = parse_number<double>(key, value);
  else if (key == "s_grid") c.s_grid = parse_list(key, value);
  else if (key == "eps_grid") c.eps_grid = parse_list(key, value);
  else if (key == "kernel_x_max") c.kernel_x_max = parse_number<double>(key, value);
  else if (key == "kernel_points") c.kernel_points = parse_number<std::size_t>(key, value);
  else if (key == "output_dir" || key == "out") c.output_dir = trim(value);
  else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_config_field(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

void ExperimentConfig::validate() const {
  require(n > 0 && n % 2 == 0, "n must be a positive even integer (got " + std::to_string(n) + ")");
  require(std::isfinite(rho), "rho must be finite");
  require(trials > 0, "trials must be positive");
  require(epsilon > 0.0, "epsilon must be positive");
  require(s > 1.0, "s must exceed 1 (ln s must be positive)");
  require(x_max > s, "x_max (" + format_double(x_max) + ") must exceed s (" + format_double(s) + ")");
  require(k0 >= 2, "k0 must be at least 2");
  require(k_max >= k0, "k_max (" + std::to_string(k_max) + ") must be >= k0 (" + std::to_string(k0) + ")");
  require(k_max <= n, "k_max must not exceed n");
  require(clt_k >= 2 && clt_k <= n, "clt_k must lie in [2, n]");
  require(clt_s > 1.0, "clt_s must exceed 1");
  require(std::abs(gamma) <= 2.0, "|gamma| must be at most 2");
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    require(s_grid[i] > 1.0 && (i == 0 || s_grid[i] > s_grid[i - 1]), "s_grid must be increasing and > 1");
  }
  for (double e : eps_grid) require(e > 0.0, "eps_grid entries must be positive");
  require(kernel_x_max > 0.0, "kernel_x_max must be positive");
  require(kernel_points >= 1, "kernel_points must be positive");
  require(threads >= 1, "threads must be positive");
}

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig out = *this;
  require(n > 0 && n % 2 == 0, "n must be a positive even integer (got " + std::to_string(n) + ")");
  require(s > 1.0, "s must exceed 1 (ln s must be positive)");
  const ModelParams params{rho};
  if (out.x_max == 0.0) out.x_max = std::pow(static_cast<double>(n), 0.75) / 10.0;
  if (out.k0 == 0) out.k0 = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(mu(params, s))));
  if (out.k_max == 0 && out.x_max > 0.0) {
    const double top = std::floor(mu(params, out.x_max));
    out.k_max = top > 0.0 ? static_cast<std::size_t>(top) : 0;
  }
  if (out.clt_s == 0.0 && out.clt_k > 0) out.clt_s = mu_inv(params, static_cast<double>(out.clt_k));
  out.validate();
  return out;
}

EnsembleConfig ExperimentConfig::trial(std::size_t index) const {
  return EnsembleConfig{n, ModelParams{rho}, derive_trial_seed(master_seed, index)};
}

// ---------------------------------------------------------------------------
// CSV

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::stringstream stream(text);
  std::string line;
  if (!std::getline(stream, line)) throw InputError("csv: missing header row");
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream cells(line);
    while (std::getline(cells, cell, ',')) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) throw InputError("csv: bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != table.columns.size()) throw InputError("csv: row width does not match header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <class T>
json optional_to_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

template <class T>
std::optional<T> optional_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"n", c.n},
           {"rho", c.rho},
           {"trials", c.trials},
           {"master_seed", c.master_seed},
           {"epsilon", c.epsilon},
           {"s", c.s},
           {"x_max", c.x_max},
           {"k0", c.k0},
           {"k_max", c.k_max},
           {"clt_k", c.clt_k},
           {"clt_s", c.clt_s},
           {"gamma", c.gamma},
           {"s_grid", c.s_grid},
           {"eps_grid", c.eps_grid},
           {"kernel_x_max", c.kernel_x_max},
           {"kernel_points", c.kernel_points}};
}

void from_json(const json& j, ExperimentConfig& c) {
  j.at("n").get_to(c.n);
  j.at("rho").get_to(c.rho);
  j.at("trials").get_to(c.trials);
  j.at("master_seed").get_to(c.master_seed);
  j.at("epsilon").get_to(c.epsilon);
  j.at("s").get_to(c.s);
  j.at("x_max").get_to(c.x_max);
  j.at("k0").get_to(c.k0);
  j.at("k_max").get_to(c.k_max);
  j.at("clt_k").get_to(c.clt_k);
  j.at("clt_s").get_to(c.clt_s);
  j.at("gamma").get_to(c.gamma);
  j.at("s_grid").get_to(c.s_grid);
  j.at("eps_grid").get_to(c.eps_grid);
  j.at("kernel_x_max").get_to(c.kernel_x_max);
  j.at("kernel_points").get_to(c.kernel_points);
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CltSummary, parameter, count, mean, variance, ks_distance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Histogram, lo, hi, counts, overflow)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SupSummary, mean, max, histogram)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CoverageRow, eps, counting_fraction, point_fraction)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RigiditySummary, s, x_max, k0, k_max, coverage, sup_counting, sup_points,
                                   counting_band_touch_fraction, point_band_touch_fraction)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(KernelSummary, points, max_error_estimate, max_asymmetry)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AuditSummary, mu_increasing, s_mu_prime_weakly_increasing,
                                   sigma2_of_mu_inv_concave, ratio_increasing, slope_estimate_a, grid_lo, grid_hi)

void to_json(json& j, const ExpMomentPoint& p) {
  j = json{{"s", p.s}, {"gamma", p.gamma}, {"r", optional_to_json(p.r)}, {"stderr", optional_to_json(p.stderr_r)}};
}

void from_json(const json& j, ExpMomentPoint& p) {
  j.at("s").get_to(p.s);
  j.at("gamma").get_to(p.gamma);
  p.r = optional_from_json<double>(j, "r");
  p.stderr_r = optional_from_json<double>(j, "stderr");
}

void to_json(json& j, const ExpMomentSummary& e) {
  j = json{{"points", e.points},
           {"first_half", e.first_half},
           {"second_half", e.second_half},
           {"spread", optional_to_json(e.spread)},
           {"split_half_max_z", optional_to_json(e.split_half_max_z)}};
}

void from_json(const json& j, ExpMomentSummary& e) {
  j.at("points").get_to(e.points);
  j.at("first_half").get_to(e.first_half);
  j.at("second_half").get_to(e.second_half);
  e.spread = optional_from_json<double>(j, "spread");
  e.split_half_max_z = optional_from_json<double>(j, "split_half_max_z");
}

std::string to_json_string(const ExperimentReport& report) {
  json summary = json::object();
  summary["audit"] = optional_to_json(report.audit);
  summary["clt_counting"] = optional_to_json(report.clt_counting);
  summary["clt_point"] = optional_to_json(report.clt_point);
  summary["rigidity"] = optional_to_json(report.rigidity);
  summary["expmoment"] = optional_to_json(report.expmoment);
  summary["kernel"] = optional_to_json(report.kernel);
  const json doc{{"build", report.build_id},
                 {"config", report.config},
                 {"summary", summary},
                 {"csv_files", report.csv_files}};
  return doc.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  const json doc = json::parse(text);
  ExperimentReport report;
  doc.at("build").get_to(report.build_id);
  doc.at("config").get_to(report.config);
  const json& summary = doc.at("summary");
  report.audit = optional_from_json<AuditSummary>(summary, "audit");
  report.clt_counting = optional_from_json<CltSummary>(summary, "clt_counting");
  report.clt_point = optional_from_json<CltSummary>(summary, "clt_point");
  report.rigidity = optional_from_json<RigiditySummary>(summary, "rigidity");
  report.expmoment = optional_from_json<ExpMomentSummary>(summary, "expmoment");
  report.kernel = optional_from_json<KernelSummary>(summary, "kernel");
  doc.at("csv_files").get_to(report.csv_files);
  return report;
}

// ---------------------------------------------------------------------------
// Band-touch checks and figure tables

namespace {

bool in_band(double value, double centre, double eps) {
  return value >= centre - eps && value <= centre + eps;
}

/// x-grid over [lo, x_max]: `points` uniform nodes plus every jump and its left neighbour.
std::vector<double> trace_grid(const StepFunction& step, double lo, double x_max, int points, bool include_lo) {
  std::vector<double> xs;
  if (include_lo) xs.push_back(lo);
  for (int i = 1; i <= points; ++i) xs.push_back(lo + (x_max - lo) * i / points);
  for (double jump : step.jumps()) {
    if (jump <= lo || jump > x_max) continue;
    xs.push_back(jump);
    const double before = std::nextafter(jump, 0.0);
    if (before > lo) xs.push_back(before);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace

bool counting_ratio_enters_band(const StepFunction& step, const ModelParams& params, double s, double x_max,
                                double eps) {
  const double centre = RigidityConstants::counting_slope;
  auto ratio = [&](double x, double level) { return std::abs(level - mu(params, x)) / std::log(x); };
  const auto& jumps = step.jumps();
  std::vector<double> edges{s};
  edges.insert(edges.end(), std::upper_bound(jumps.begin(), jumps.end(), s),
               std::upper_bound(jumps.begin(), jumps.end(), x_max));
  if (edges.back() < x_max) edges.push_back(x_max);
  // |ratio| is continuous on each constant piece: a straddle between samples means a crossing.
  constexpr int samples = 33;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    const double level = static_cast<double>(step(a));
    double previous = ratio(a, level);
    if (in_band(previous, centre, eps)) return true;
    for (int j = 1; j < samples; ++j) {
      const double x = j + 1 == samples ? b : a + (b - a) * j / (samples - 1);
      const double current = ratio(x, level);
      if (in_band(current, centre, eps)) return true;
      if ((previous - centre) * (current - centre) < 0.0) return true;
      previous = current;
    }
  }
  return false;
}

bool point_ratio_enters_band(const SpectrumSample& sample, const ModelParams& params, std::size_t k0,
                             std::size_t k_max, double eps) {
  for (std::size_t k = k0; k <= k_max && k <= sample.size(); ++k) {
    const double kk = static_cast<double>(k);
    if (in_band(std::abs(mu(params, sample.point(k)) - kk) / std::log(kk), RigidityConstants::point_slope, eps)) {
      return true;
    }
  }
  return false;
}

CsvTable figure1_counting(const SpectrumSample& sample, const ExperimentConfig& cfg) {
  const ModelParams params{cfg.rho};
  const StepFunction step = counting_step(sample);
  CsvTable table{{"x", "N_of_x", "mu", "band_lo", "band_hi"}, {}};
  for (double x : trace_grid(step, 1.0, cfg.x_max, 400, false)) {
    const Band band = counting_band(params, cfg.epsilon, x);
    table.rows.push_back({x, static_cast<double>(step(x)), mu(params, x), band.lo, band.hi});
  }
  return table;
}

CsvTable figure1_ratio(const SpectrumSample& sample, const ExperimentConfig& cfg) {
  const ModelParams params{cfg.rho};
  const StepFunction step = counting_step(sample);
  const double guide = RigidityConstants{cfg.epsilon}.counting_threshold();
  CsvTable table{{"x", "ratio", "guide_hi", "guide_lo"}, {}};
  for (double x : trace_grid(step, cfg.s, cfg.x_max, 400, true)) {
    table.rows.push_back({x, (static_cast<double>(step(x)) - mu(params, x)) / std::log(x), guide, -guide});
  }
  return table;
}

CsvTable figure2_points(const SpectrumSample& sample, const ExperimentConfig& cfg) {
  const ModelParams params{cfg.rho};
  CsvTable table{{"k", "x_k", "mu_inv", "band_lo", "band_hi"}, {}};
  for (std::size_t k = 2; k <= cfg.k_max && k <= sample.size(); ++k) {
    const double kk = static_cast<double>(k);
    const Band band = point_band(params, cfg.epsilon, kk);
    table.rows.push_back({kk, sample.point(k), mu_inv(params, kk), band.lo, band.hi});
  }
  return table;
}

CsvTable figure2_ratio(const SpectrumSample& sample, const ExperimentConfig& cfg) {
  const ModelParams params{cfg.rho};
  const double guide = RigidityConstants{cfg.epsilon}.point_threshold();
  CsvTable table{{"k", "ratio", "guide_hi", "guide_lo"}, {}};
  for (std::size_t k = cfg.k0; k <= cfg.k_max && k <= sample.size(); ++k) {
    const double kk = static_cast<double>(k);
    table.rows.push_back({kk, (mu(params, sample.point(k)) - kk) / std::log(kk), guide, -guide});
  }
  return table;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

CltSummary summarize_clt(const CLTSample& sample) {
  const auto& v = sample.standardized_values;
  CltSummary out;
  out.parameter = sample.parameter;
  out.count = v.size();
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.variance = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
  out.ks_distance = ks_statistic(v, normal_cdf);
  return out;
}

SupSummary summarize_sup(const std::vector<double>& values) {
  SupSummary out;
  out.histogram = Histogram{0.0, 2.0, std::vector<std::size_t>(40, 0), 0};
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    out.max = std::max(out.max, v);
    const auto bin = static_cast<std::size_t>(v / 2.0 * 40.0);
    if (bin < 40) ++out.histogram.counts[bin];
    else ++out.histogram.overflow;
  }
  out.mean = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
  return out;
}

ExpMomentSummary summarize_expmoment(std::span<const SpectrumSample> samples, const ExperimentConfig& cfg) {
  const ModelParams params{cfg.rho};
  ExpMomentSummary out;
  out.points = exp_moment_ratio(samples, params, cfg.gamma, cfg.s_grid);
  if (samples.size() >= 4) {
    const std::size_t half = samples.size() / 2;
    out.first_half = exp_moment_ratio(samples.subspan(0, half), params, cfg.gamma, cfg.s_grid);
    out.second_half = exp_moment_ratio(samples.subspan(half), params, cfg.gamma, cfg.s_grid);
  }
  double lo = INFINITY, hi = -INFINITY;
  bool usable = !out.points.empty();
  for (const auto& p : out.points) {
    if (!p.r) {
      usable = false;
      break;
    }
    lo = std::min(lo, *p.r);
    hi = std::max(hi, *p.r);
  }
  if (usable) out.spread = hi - lo;
  if (!out.first_half.empty()) {
    double worst = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < out.first_half.size(); ++i) {
      const auto& a = out.first_half[i];
      const auto& b = out.second_half[i];
      if (!a.r || !b.r || !a.stderr_r || !b.stderr_r) {
        ok = false;
        break;
      }
      const double se = std::hypot(*a.stderr_r, *b.stderr_r);
      worst = std::max(worst, se > 0.0 ? std::abs(*a.r - *b.r) / se : (*a.r == *b.r ? 0.0 : INFINITY));
    }
    if (ok) out.split_half_max_z = worst;
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned sections) {
  const ExperimentConfig cfg = config.resolved();
  const ModelParams params{cfg.rho};

  ExperimentResult result;
  ExperimentReport& report = result.report;
  report.config = cfg;
  report.config.threads = ExperimentConfig{}.threads;
  report.config.output_dir.clear();

  if (sections & kAudit) {
    const double lo = std::max(10.0, 2.0 * std::max(params.s_min(), 1.0));
    const double hi = std::max(1e8, lo * 1e3);
    const AuditReport audit = audit_conditions(params, geometric_grid(lo, hi, 64));
    report.audit = AuditSummary{audit.mu_increasing, audit.s_mu_prime_weakly_increasing,
                                audit.sigma2_of_mu_inv_concave, audit.ratio_increasing,
                                audit.slope_estimate_a, lo, hi};
  }

  std::vector<SpectrumSample> samples;
  if (sections & (kFigures | kClt | kRigidity | kExpMoment | kSpectra)) {
    std::vector<EnsembleConfig> trials;
    trials.reserve(cfg.trials);
    for (std::size_t i = 0; i < cfg.trials; ++i) trials.push_back(cfg.trial(i));
    samples = simulate_all(trials, config.threads);
  }

  if (sections & kFigures) {
    const SpectrumSample& plotted = samples.front();
    result.tables["figure1_counting.csv"] = figure1_counting(plotted, cfg);
    result.tables["figure1_ratio.csv"] = figure1_ratio(plotted, cfg);
    result.tables["figure2_points.csv"] = figure2_points(plotted, cfg);
    result.tables["figure2_ratio.csv"] = figure2_ratio(plotted, cfg);
  }

  if (sections & kClt) {
    report.clt_counting = summarize_clt(clt_counting_sample(samples, params, cfg.clt_s));
    report.clt_point = summarize_clt(clt_point_sample(samples, params, cfg.clt_k));
  }

  if (sections & kRigidity) {
    RigiditySummary rig;
    rig.s = cfg.s;
    rig.x_max = cfg.x_max;
    rig.k0 = cfg.k0;
    rig.k_max = cfg.k_max;
    const SupTable table = sup_table(samples, params, cfg.s, cfg.x_max, cfg.k0, cfg.k_max);
    std::set<double> eps(cfg.eps_grid.begin(), cfg.eps_grid.end());
    eps.insert(cfg.epsilon);
    for (double e : eps) {
      const Coverage cov = coverage_from(table, e);
      rig.coverage.push_back({e, cov.counting_fraction, cov.point_fraction});
    }
    rig.sup_counting = summarize_sup(table.counting);
    rig.sup_points = summarize_sup(table.points);
    std::size_t counting_touch = 0, point_touch = 0;
    for (const SpectrumSample& sample : samples) {
      counting_touch += counting_ratio_enters_band(counting_step(sample), params, cfg.s, cfg.x_max, cfg.epsilon);
      point_touch += point_ratio_enters_band(sample, params, cfg.k0, cfg.k_max, cfg.epsilon);
    }
    const double m = static_cast<double>(samples.size());
    rig.counting_band_touch_fraction = static_cast<double>(counting_touch) / m;
    rig.point_band_touch_fraction = static_cast<double>(point_touch) / m;
    report.rigidity = rig;
  }

  if (sections & kExpMoment) {
    report.expmoment = summarize_expmoment(samples, cfg);
    CsvTable table{{"s", "gamma", "r", "stderr"}, {}};
    for (const auto& p : report.expmoment->points) {
      table.rows.push_back({p.s, p.gamma, p.r.value_or(NAN), p.stderr_r.value_or(NAN)});
    }
    result.tables["expmoment.csv"] = table;
  }

  if (sections & kKernel) {
    const QuadratureSpec spec;
    const std::size_t count = cfg.kernel_points;
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i) {
      xs[i] = count == 1 ? 0.0 : -cfg.kernel_x_max + 2.0 * cfg.kernel_x_max * static_cast<double>(i) /
                                                         static_cast<double>(count - 1);
    }
    std::vector<KernelEstimate> values(count);
    parallel_for_index(count, config.threads, [&](std::size_t i) { values[i] = kernel_diag(params, xs[i], spec); });
    KernelSummary summary;
    summary.points = count;
    CsvTable table{{"x", "diag", "err_estimate"}, {}};
    for (std::size_t i = 0; i < count; ++i) {
      table.rows.push_back({xs[i], values[i].value.real(), values[i].error_estimate});
      summary.max_error_estimate = std::max(summary.max_error_estimate, values[i].error_estimate);
      summary.max_asymmetry =
          std::max(summary.max_asymmetry, std::abs(values[i].value.real() - values[count - 1 - i].value.real()));
    }
    report.kernel = summary;
    result.tables["kernel_diag.csv"] = table;
  }

  if (sections & kSpectra) {
    CsvTable table{{"trial", "index", "signed_point", "magnitude"}, {}};
    for (std::size_t t = 0; t < samples.size(); ++t) {
      for (std::size_t k = 0; k < samples[t].size(); ++k) {
        table.rows.push_back({static_cast<double>(t), static_cast<double>(k + 1), samples[t].signed_points[k],
                              samples[t].magnitudes[k]});
      }
    }
    result.tables["spectra.csv"] = table;
  }

  if (!config.output_dir.empty()) {
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    for (const auto& [name, table] : result.tables) {
      write_text(dir / name, to_csv(table));
      report.csv_files.push_back(name);
    }
    write_text(dir / "report.json", to_json_string(report));
  }
  return result;
}

}  // namespace pearcey
