#include "pearcey/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "pearcey/errors.hpp"
#include "pearcey/seeding.hpp"

namespace pearcey {

void EnsembleConfig::validate() const {
  if (n == 0 || n % 2 != 0) {
    throw ConfigError("ensemble: n must be a positive even integer, got " + std::to_string(n));
  }
  if (!std::isfinite(params.rho)) throw ConfigError("ensemble: rho must be finite");
}

Eigen::VectorXd external_source(std::size_t n, const ModelParams& params) {
  const double a = 1.0 + params.rho / (2.0 * std::sqrt(static_cast<double>(n)));
  Eigen::VectorXd diag(static_cast<Eigen::Index>(n));
  const auto half = static_cast<Eigen::Index>(n / 2);
  diag.head(half).setConstant(a);
  diag.tail(diag.size() - half).setConstant(-a);
  return diag;
}

HermitianMatrix sample_matrix(const EnsembleConfig& config) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(config.n);
  const double diag_sd = std::sqrt(1.0 / static_cast<double>(config.n));
  const double off_sd = std::sqrt(0.5 / static_cast<double>(config.n));

  NormalStream normal(config.trial_seed);
  HermitianMatrix m(n, n);
  const Eigen::VectorXd source = external_source(config.n, config.params);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double re = off_sd * normal();
      const double im = off_sd * normal();
      m(i, j) = {re, im};
      m(j, i) = {re, -im};
    }
    m(j, j) = source(j) + diag_sd * normal();
  }
  return m;
}

namespace {

void require_hermitian(const HermitianMatrix& m) {
  if (m.rows() != m.cols()) throw InputError("eigenvalues: matrix must be square");
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1e-300)) {
    throw InputError("eigenvalues: matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
  }
}

}  // namespace

std::vector<double> eigenvalues(const HermitianMatrix& m) {
  require_hermitian(m);
  Eigen::SelfAdjointEigenSolver<HermitianMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("eigenvalues: solver failed", 0.0, 0.0);
  const Eigen::VectorXd& values = solver.eigenvalues();
  return {values.data(), values.data() + values.size()};
}

double max_eigen_residual(const HermitianMatrix& m) {
  require_hermitian(m);
  Eigen::SelfAdjointEigenSolver<HermitianMatrix> solver(m);
  const double norm = m.operatorNorm();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const Eigen::VectorXcd v = solver.eigenvectors().col(j);
    worst = std::max(worst, (m * v - solver.eigenvalues()(j) * v).norm());
  }
  return norm > 0.0 ? worst / norm : worst;
}

SpectrumSample rescale(std::span<const double> eigs, std::size_t n) {
  if (n == 0) throw InputError("rescale: matrix size must be positive");
  if (!std::is_sorted(eigs.begin(), eigs.end())) throw InputError("rescale: eigenvalues must be ascending");
  const double factor = std::pow(static_cast<double>(n), 0.75);
  SpectrumSample sample;
  sample.signed_points.reserve(eigs.size());
  sample.magnitudes.reserve(eigs.size());
  for (double lambda : eigs) {
    sample.signed_points.push_back(factor * lambda);
    sample.magnitudes.push_back(std::abs(factor * lambda));
  }
  std::sort(sample.magnitudes.begin(), sample.magnitudes.end());
  sample.degenerate = std::adjacent_find(sample.magnitudes.begin(), sample.magnitudes.end()) !=
                      sample.magnitudes.end();
  return sample;
}

std::size_t count_in(const SpectrumSample& sample, double x) {
  if (!(x >= 0.0)) throw DomainError("count_in: x must be non-negative");
  return static_cast<std::size_t>(
      std::upper_bound(sample.magnitudes.begin(), sample.magnitudes.end(), x) - sample.magnitudes.begin());
}

SpectrumSample simulate_trial(const EnsembleConfig& config) {
  return rescale(eigenvalues(sample_matrix(config)), config.n);
}

}  // namespace pearcey
