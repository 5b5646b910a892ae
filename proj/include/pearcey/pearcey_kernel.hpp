#pragma once

#include <complex>
#include <vector>

#include "pearcey/scaling_laws.hpp"

namespace pearcey {

using ComplexValue = std::complex<double>;

enum class QuadratureRule {
  GaussLegendre,  ///< composite 20-point Gauss-Legendre panels
  Trapezoid,      ///< composite trapezoid with Romberg extrapolation
};

/// Discretisation of the Pearcey contour integrals.
///
/// The inner integrals are taken along deformed contours (a horizontal line through the
/// saddle height for phi, vertically shifted rays for psi) whose length grows with the
/// argument; `inner_truncation` is the minimum half-length, and must satisfy
/// exp(-T^4/4 + |rho| T^2/2) < 1e-16. Node counts are per unit path length.
struct QuadratureSpec {
  double inner_truncation = 5.0;
  int inner_nodes = 128;
  double outer_cutoff = 40.0;
  int outer_nodes = 64;
  int tail_average_windows = 4;
  /// Window averages must agree to this (relative to max(1, |value|)).
  double tail_tolerance = 1e-3;
  QuadratureRule rule = QuadratureRule::GaussLegendre;

  /// Throws ConfigError if the truncation or node counts are insufficient for `params`.
  void validate(const ModelParams& params) const;

  QuadratureSpec doubled() const;
};

/// phi(x) = int_R exp(-t^4/4 - rho t^2/2 + i t x) dt. Real and even in x.
ComplexValue phi(const ModelParams& params, double x, const QuadratureSpec& spec = {});

/// m-th derivative of phi: int_R (i t)^m exp(...) dt, 0 <= m <= 4.
ComplexValue phi_moment(const ModelParams& params, double x, int m, const QuadratureSpec& spec = {});

/// psi(y) = int_Sigma exp(t^4/4 + rho t^2/2 + i t y) dt over the four rays
/// (e^{i pi/4} inf -> 0), (0 -> e^{3i pi/4} inf), (e^{-3i pi/4} inf -> 0), (0 -> e^{-i pi/4} inf).
ComplexValue psi(const ModelParams& params, double y, const QuadratureSpec& spec = {});

/// m-th derivative of psi, 0 <= m <= 4.
ComplexValue psi_moment(const ModelParams& params, double y, int m, const QuadratureSpec& spec = {});

struct KernelEstimate {
  ComplexValue value;
  double error_estimate = 0.0;
  /// Window averages of the compensated partial integral, oldest first.
  std::vector<ComplexValue> window_averages;
  /// Same estimate with the outer integral stopped at half the cutoff.
  ComplexValue half_cutoff_value;
};

/// K(x, y) from the double-integral representation.
///
/// Partial integrals satisfy
///   (2 pi)^{-2} int_0^Z phi(x+z) psi(y+z) dz = K(x+Z, y+Z) - K(x, y),
/// so K(x, y) is recovered as the far-field kernel at (x+Z, y+Z) minus the partial integral.
/// The far field is exp(-G) sin(P) / (pi (u - v)) with P + iG the integral of the saddle
/// point t*(w) of t^3 + rho t = i w from v to u. The remaining oscillation has phase pi mu, so
/// the difference is averaged over windows in which mu(mid + z) rises by 2. Throws
/// ConvergenceError when the window averages disagree by more than spec.tail_tolerance.
KernelEstimate kernel_value(const ModelParams& params, double x, double y, const QuadratureSpec& spec = {});

KernelEstimate kernel_diag(const ModelParams& params, double x, const QuadratureSpec& spec = {});

/// E N(x) = int_{-x}^{x} K(t, t) dt by adaptive Gauss-Kronrod quadrature.
double mean_count(const ModelParams& params, double x, const QuadratureSpec& spec = {});

}  // namespace pearcey
