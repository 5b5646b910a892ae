#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pearcey/errors.hpp"
#include "pearcey/experiment.hpp"
#include "pearcey/seeding.hpp"

namespace py = pybind11;
using namespace pearcey;

namespace {

py::dict tables_to_dict(const std::map<std::string, CsvTable>& tables) {
  py::dict out;
  for (const auto& [name, table] : tables) {
    py::dict entry;
    entry["columns"] = table.columns;
    entry["rows"] = table.rows;
    out[py::str(name)] = entry;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pearcey process rigidity experiments";
  m.attr("BUILD_ID") = kBuildId;

  static py::exception<DomainError> domain_error(m, "DomainError", PyExc_ValueError);
  static py::exception<InputError> input_error(m, "InputError", PyExc_ValueError);
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<ConvergenceError> convergence_error(m, "ConvergenceError", PyExc_ArithmeticError);
  static py::exception<TrialError> trial_error(m, "TrialError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DomainError& e) {
      py::set_error(domain_error, e.what());
    } catch (const InputError& e) {
      py::set_error(input_error, e.what());
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const ConvergenceError& e) {
      py::set_error(convergence_error, e.what());
    } catch (const TrialError& e) {
      py::object err = trial_error;
      PyErr_SetObject(err.ptr(), py::make_tuple(e.what(), e.trial_index(), e.trial_seed()).ptr());
    }
  });

  // scaling laws
  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double rho) { return ModelParams{rho}; }), py::arg("rho") = 0.0)
      .def_readwrite("rho", &ModelParams::rho)
      .def("s_min", &ModelParams::s_min)
      .def("__repr__", [](const ModelParams& p) { return "ModelParams(rho=" + std::to_string(p.rho) + ")"; });
  py::implicitly_convertible<double, ModelParams>();

  m.attr("COUNTING_SLOPE") = RigidityConstants::counting_slope;
  m.attr("POINT_SLOPE") = RigidityConstants::point_slope;
  m.attr("VARIANCE_COEFF") = RigidityConstants::variance_coeff;

  m.def("mu", &mu, py::arg("params"), py::arg("s"));
  m.def("mu_prime", &mu_prime, py::arg("params"), py::arg("s"));
  m.def("sigma2", &sigma2, py::arg("s"));
  m.def("mu_inv", &mu_inv, py::arg("params"), py::arg("k"));
  m.def("counting_band", [](const ModelParams& p, double eps, double x) {
    const Band b = counting_band(p, eps, x);
    return py::make_tuple(b.lo, b.hi);
  }, py::arg("params"), py::arg("eps"), py::arg("x"));
  m.def("point_band", [](const ModelParams& p, double eps, double k) {
    const Band b = point_band(p, eps, k);
    return py::make_tuple(b.lo, b.hi);
  }, py::arg("params"), py::arg("eps"), py::arg("k"));
  m.def("geometric_grid", &geometric_grid, py::arg("lo"), py::arg("hi"), py::arg("count"));

  py::class_<AuditReport>(m, "AuditReport")
      .def_readonly("mu_increasing", &AuditReport::mu_increasing)
      .def_readonly("s_mu_prime_weakly_increasing", &AuditReport::s_mu_prime_weakly_increasing)
      .def_readonly("sigma2_of_mu_inv_concave", &AuditReport::sigma2_of_mu_inv_concave)
      .def_readonly("ratio_increasing", &AuditReport::ratio_increasing)
      .def_readonly("slope_estimate_a", &AuditReport::slope_estimate_a)
      .def_readonly("ratio_smuprime_over_sigma2_trend", &AuditReport::ratio_smuprime_over_sigma2_trend)
      .def("all_passed", &AuditReport::all_passed);
  m.def("audit_conditions",
        [](const ModelParams& p, const std::vector<double>& grid) { return audit_conditions(p, grid); },
        py::arg("params"), py::arg("grid"));

  // ensemble
  m.def("derive_trial_seed", &derive_trial_seed, py::arg("master_seed"), py::arg("trial_index"));

  py::class_<EnsembleConfig>(m, "EnsembleConfig")
      .def(py::init([](std::size_t n, const ModelParams& p, std::uint64_t seed) { return EnsembleConfig{n, p, seed}; }),
           py::arg("n") = 400, py::arg("params") = ModelParams{}, py::arg("trial_seed") = 0)
      .def_readwrite("n", &EnsembleConfig::n)
      .def_readwrite("params", &EnsembleConfig::params)
      .def_readwrite("trial_seed", &EnsembleConfig::trial_seed);

  py::class_<SpectrumSample>(m, "SpectrumSample")
      .def(py::init([](std::vector<double> magnitudes) {
             SpectrumSample s;
             std::sort(magnitudes.begin(), magnitudes.end());
             s.signed_points = magnitudes;
             s.magnitudes = std::move(magnitudes);
             return s;
           }),
           py::arg("magnitudes"))
      .def_readonly("signed_points", &SpectrumSample::signed_points)
      .def_readonly("magnitudes", &SpectrumSample::magnitudes)
      .def_readonly("degenerate", &SpectrumSample::degenerate)
      .def("__len__", &SpectrumSample::size)
      .def("point", &SpectrumSample::point, py::arg("k"))
      .def("__eq__", [](const SpectrumSample& a, const SpectrumSample& b) { return a == b; });

  m.def("sample_matrix", &sample_matrix, py::arg("config"));
  m.def("eigenvalues", &eigenvalues, py::arg("matrix"));
  m.def("rescale", [](const std::vector<double>& eigs, std::size_t n) { return rescale(eigs, n); }, py::arg("eigs"),
        py::arg("n"));
  m.def("count_in", &count_in, py::arg("sample"), py::arg("x"));
  m.def("simulate_trial", &simulate_trial, py::arg("config"), py::call_guard<py::gil_scoped_release>());

  // kernel
  py::enum_<QuadratureRule>(m, "QuadratureRule")
      .value("GaussLegendre", QuadratureRule::GaussLegendre)
      .value("Trapezoid", QuadratureRule::Trapezoid);
  py::class_<QuadratureSpec>(m, "QuadratureSpec")
      .def(py::init<>())
      .def_readwrite("inner_truncation", &QuadratureSpec::inner_truncation)
      .def_readwrite("inner_nodes", &QuadratureSpec::inner_nodes)
      .def_readwrite("outer_cutoff", &QuadratureSpec::outer_cutoff)
      .def_readwrite("outer_nodes", &QuadratureSpec::outer_nodes)
      .def_readwrite("tail_average_windows", &QuadratureSpec::tail_average_windows)
      .def_readwrite("tail_tolerance", &QuadratureSpec::tail_tolerance)
      .def_readwrite("rule", &QuadratureSpec::rule)
      .def("doubled", &QuadratureSpec::doubled);
  py::class_<KernelEstimate>(m, "KernelEstimate")
      .def_readonly("value", &KernelEstimate::value)
      .def_readonly("error_estimate", &KernelEstimate::error_estimate)
      .def_readonly("window_averages", &KernelEstimate::window_averages)
      .def_readonly("half_cutoff_value", &KernelEstimate::half_cutoff_value);

  const QuadratureSpec default_spec;
  m.def("phi", &phi, py::arg("params"), py::arg("x"), py::arg("spec") = default_spec);
  m.def("phi_moment", &phi_moment, py::arg("params"), py::arg("x"), py::arg("m"), py::arg("spec") = default_spec);
  m.def("psi", &psi, py::arg("params"), py::arg("y"), py::arg("spec") = default_spec);
  m.def("psi_moment", &psi_moment, py::arg("params"), py::arg("y"), py::arg("m"), py::arg("spec") = default_spec);
  m.def("kernel_value", &kernel_value, py::arg("params"), py::arg("x"), py::arg("y"), py::arg("spec") = default_spec,
        py::call_guard<py::gil_scoped_release>());
  m.def("kernel_diag", &kernel_diag, py::arg("params"), py::arg("x"), py::arg("spec") = default_spec,
        py::call_guard<py::gil_scoped_release>());
  m.def("mean_count", &mean_count, py::arg("params"), py::arg("x"), py::arg("spec") = default_spec,
        py::call_guard<py::gil_scoped_release>());

  // statistics
  py::class_<StepFunction>(m, "StepFunction")
      .def(py::init<std::vector<double>>(), py::arg("jumps"))
      .def("__call__", &StepFunction::operator(), py::arg("x"))
      .def("left_limit", &StepFunction::left_limit, py::arg("x"))
      .def_property_readonly("jumps", &StepFunction::jumps);
  m.def("counting_step", &counting_step, py::arg("sample"));

  py::enum_<SupKind>(m, "SupKind").value("Counting", SupKind::Counting).value("Points", SupKind::Points);
  py::class_<SupStatistic>(m, "SupStatistic")
      .def_readonly("value", &SupStatistic::value)
      .def_readonly("arg_location", &SupStatistic::arg_location)
      .def_readonly("kind", &SupStatistic::kind)
      .def_readonly("window_lower", &SupStatistic::window_lower)
      .def_readonly("window_upper", &SupStatistic::window_upper);
  m.def("sup_counting_deviation", &sup_counting_deviation, py::arg("step"), py::arg("params"), py::arg("s"),
        py::arg("x_max"));
  m.def("sup_point_deviation", &sup_point_deviation, py::arg("sample"), py::arg("params"), py::arg("k0"),
        py::arg("k_max"));

  m.def("clt_counting_sample",
        [](const std::vector<SpectrumSample>& samples, const ModelParams& p, double s) {
          return clt_counting_sample(samples, p, s).standardized_values;
        },
        py::arg("samples"), py::arg("params"), py::arg("s"));
  m.def("clt_point_sample",
        [](const std::vector<SpectrumSample>& samples, const ModelParams& p, std::size_t k) {
          return clt_point_sample(samples, p, k).standardized_values;
        },
        py::arg("samples"), py::arg("params"), py::arg("k"));
  m.def("normal_cdf", &normal_cdf, py::arg("z"));
  m.def("ks_statistic",
        [](const std::vector<double>& values, const std::function<double(double)>& cdf) {
          return ks_statistic(values, cdf);
        },
        py::arg("values"), py::arg("reference_cdf") = std::function<double(double)>(normal_cdf));
  m.def("band_coverage",
        [](const std::vector<SpectrumSample>& samples, const ModelParams& p, double eps, double s, double x_max,
           std::size_t k0, std::size_t k_max) {
          const Coverage c = band_coverage(samples, p, eps, s, x_max, k0, k_max);
          return py::make_tuple(c.counting_fraction, c.point_fraction);
        },
        py::arg("samples"), py::arg("params"), py::arg("eps"), py::arg("s"), py::arg("x_max"), py::arg("k0"),
        py::arg("k_max"));
  m.def("exp_moment_ratio",
        [](const std::vector<SpectrumSample>& samples, const ModelParams& p, double gamma,
           const std::vector<double>& s_grid) {
          py::list out;
          for (const auto& point : exp_moment_ratio(samples, p, gamma, s_grid)) {
            out.append(py::make_tuple(point.s, point.r, point.stderr_r));
          }
          return out;
        },
        py::arg("samples"), py::arg("params"), py::arg("gamma"), py::arg("s_grid"));

  // experiment pipeline
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("n", &ExperimentConfig::n)
      .def_readwrite("rho", &ExperimentConfig::rho)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("epsilon", &ExperimentConfig::epsilon)
      .def_readwrite("s", &ExperimentConfig::s)
      .def_readwrite("x_max", &ExperimentConfig::x_max)
      .def_readwrite("k0", &ExperimentConfig::k0)
      .def_readwrite("k_max", &ExperimentConfig::k_max)
      .def_readwrite("clt_k", &ExperimentConfig::clt_k)
      .def_readwrite("clt_s", &ExperimentConfig::clt_s)
      .def_readwrite("gamma", &ExperimentConfig::gamma)
      .def_readwrite("s_grid", &ExperimentConfig::s_grid)
      .def_readwrite("eps_grid", &ExperimentConfig::eps_grid)
      .def_readwrite("kernel_x_max", &ExperimentConfig::kernel_x_max)
      .def_readwrite("kernel_points", &ExperimentConfig::kernel_points)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def("resolved", &ExperimentConfig::resolved)
      .def("set", &set_config_field, py::arg("key"), py::arg("value"));
  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));

  py::module_ sections = m.def_submodule("sections", "Section bit flags for run_experiment");
  sections.attr("AUDIT") = static_cast<unsigned>(kAudit);
  sections.attr("FIGURES") = static_cast<unsigned>(kFigures);
  sections.attr("CLT") = static_cast<unsigned>(kClt);
  sections.attr("RIGIDITY") = static_cast<unsigned>(kRigidity);
  sections.attr("EXPMOMENT") = static_cast<unsigned>(kExpMoment);
  sections.attr("KERNEL") = static_cast<unsigned>(kKernel);
  sections.attr("SPECTRA") = static_cast<unsigned>(kSpectra);
  sections.attr("DEFAULT") = static_cast<unsigned>(kDefaultSections);

  m.def("run_experiment",
        [](const ExperimentConfig& config, unsigned selected) {
          ExperimentResult result;
          {
            py::gil_scoped_release release;
            result = run_experiment(config, selected);
          }
          return py::make_tuple(to_json_string(result.report), tables_to_dict(result.tables));
        },
        py::arg("config"), py::arg("sections") = static_cast<unsigned>(kDefaultSections),
        "Returns (report_json, tables) where tables maps CSV names to {columns, rows}.");
}
