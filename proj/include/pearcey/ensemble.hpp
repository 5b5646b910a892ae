#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pearcey/scaling_laws.hpp"

namespace pearcey {

using HermitianMatrix = Eigen::MatrixXcd;

struct EnsembleConfig {
  std::size_t n = 400;  ///< matrix size, positive and even
  ModelParams params;
  std::uint64_t trial_seed = 0;

  void validate() const;
};

/// One trial's eigenvalues in Pearcey coordinates.
struct SpectrumSample {
  std::vector<double> signed_points;  ///< n^{3/4} lambda_j, ascending
  std::vector<double> magnitudes;     ///< |n^{3/4} lambda_j|, ascending
  bool degenerate = false;            ///< repeated magnitudes, e.g. an all-zero spectrum

  std::size_t size() const { return magnitudes.size(); }
  /// x_k for 1 <= k <= size().
  double point(std::size_t k) const { return magnitudes.at(k - 1); }

  friend bool operator==(const SpectrumSample&, const SpectrumSample&) = default;
};

/// The external source: +-(1 + rho/(2 sqrt n)), each with multiplicity n/2
/// (positive half first).
Eigen::VectorXd external_source(std::size_t n, const ModelParams& params);

/// Draws M = A + H, with H Hermitian Gaussian: diagonal N(0, 1/n), off-diagonal real and
/// imaginary parts N(0, 1/(2n)). This is the density exp(-n Tr(M^2/2 - AM)) after completing
/// the square. Entries are drawn column by column over the upper triangle
/// (j = 0..n-1, i = 0..j; the diagonal takes one draw, off-diagonals take re then im).
HermitianMatrix sample_matrix(const EnsembleConfig& config);

/// Ascending eigenvalues. Throws InputError if M is not Hermitian to 1e-12 relative.
std::vector<double> eigenvalues(const HermitianMatrix& m);

/// Largest residual ||M v - lambda v|| / ||M|| over all eigenpairs.
double max_eigen_residual(const HermitianMatrix& m);

SpectrumSample rescale(std::span<const double> eigs, std::size_t n);

/// Number of points with magnitude <= x (closed interval [-x, x]).
std::size_t count_in(const SpectrumSample& sample, double x);

/// sample_matrix -> eigenvalues -> rescale.
SpectrumSample simulate_trial(const EnsembleConfig& config);

}  // namespace pearcey
