#include "pearcey/pearcey_kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pearcey/errors.hpp"

namespace pearcey {

namespace {

using namespace std::complex_literals;

constexpr double kPi = std::numbers::pi;
constexpr int kPanelOrder = 20;
/// Contours are cut where the integrand has dropped by e^{-40} below its peak.
constexpr double kTailDrop = 40.0;
constexpr double kTruncationLogTol = -36.841361487904734;  // ln(1e-16)

struct GaussPanel {
  std::array<double, kPanelOrder> nodes;    // on [-1, 1]
  std::array<double, kPanelOrder> weights;
};

const GaussPanel& gauss_panel() {
  static const GaussPanel panel = [] {
    using rule = boost::math::quadrature::gauss<double, kPanelOrder>;
    GaussPanel p{};
    const auto& x = rule::abscissa();
    const auto& w = rule::weights();
    constexpr int half = kPanelOrder / 2;
    for (int i = 0; i < half; ++i) {
      p.nodes[half - 1 - i] = -x[i];
      p.weights[half - 1 - i] = w[i];
      p.nodes[half + i] = x[i];
      p.weights[half + i] = w[i];
    }
    return p;
  }();
  return panel;
}

/// Minimises a function on [lo, hi]: coarse scan followed by golden-section refinement.
template <class F>
double argmin_scan_golden(F&& f, double lo, double hi, int scan_points = 48) {
  double best_x = lo;
  double best_f = f(lo);
  const double step = (hi - lo) / scan_points;
  for (int i = 1; i <= scan_points; ++i) {
    const double x = lo + step * i;
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 40; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return f(x) < best_f ? x : best_x;
}

/// int_a^b f(u) du with the requested rule and node density (nodes per unit length).
template <class F>
ComplexValue integrate_segment(F&& f, double a, double b, double density, QuadratureRule rule) {
  const double length = b - a;
  if (rule == QuadratureRule::GaussLegendre) {
    const auto& panel = gauss_panel();
    const int panels = std::max(1, static_cast<int>(std::ceil(length * density / kPanelOrder)));
    const double width = length / panels;
    ComplexValue sum = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double centre = a + width * (p + 0.5);
      ComplexValue part = 0.0;
      for (int i = 0; i < kPanelOrder; ++i) part += panel.weights[i] * f(centre + 0.5 * width * panel.nodes[i]);
      sum += 0.5 * width * part;
    }
    return sum;
  }

  // Romberg: trapezoid sums on 4 nested levels, finest with ~density * length intervals.
  constexpr int levels = 4;
  int intervals = std::max(2, static_cast<int>(std::ceil(length * density / 8.0)));
  std::array<ComplexValue, levels> table{};
  double h = length / intervals;
  ComplexValue sum = 0.5 * (f(a) + f(b));
  for (int i = 1; i < intervals; ++i) sum += f(a + h * i);
  table[0] = h * sum;
  for (int level = 1; level < levels; ++level) {
    for (int i = 0; i < intervals; ++i) sum += f(a + h * (i + 0.5));
    intervals *= 2;
    h *= 0.5;
    table[level] = h * sum;
  }
  for (int order = 1; order < levels; ++order) {
    const double factor = std::pow(4.0, order);
    for (int level = levels - 1; level >= order; --level) {
      table[level] = (factor * table[level] - table[level - 1]) / (factor - 1.0);
    }
  }
  return table[levels - 1];
}

ComplexValue power_it(ComplexValue t, int m) {
  ComplexValue it = 1i * t;
  ComplexValue out = 1.0;
  for (int k = 0; k < m; ++k) out *= it;
  return out;
}

void require_moment(int m) {
  if (m < 0 || m > 4) throw InputError("moment order must be in [0, 4], got " + std::to_string(m));
}

/// Horizontal contour Im t = height for phi(|x|).
struct LineContour {
  double height;
  double half_length;
};

LineContour phi_contour(double rho, double ax, double min_half_length) {
  // Re exponent on Im t = h, written in v = (Re t)^2:
  //   -v^2/4 + (3h^2 - rho)/2 v - h^4/4 + rho h^2/2 - h|x|.
  auto peak = [&](double h) {
    const double b = 0.5 * (3.0 * h * h - rho);
    return (b > 0.0 ? b * b : 0.0) - 0.25 * h * h * h * h + 0.5 * rho * h * h - h * ax;
  };
  const double h_hi = std::cbrt(ax) + std::sqrt(std::abs(rho)) + 1.0;
  const double h = ax > 0.0 ? argmin_scan_golden(peak, 0.0, h_hi) : 0.0;
  const double top = peak(h);

  auto g = [&](double u) {
    const double u2 = u * u;
    return -0.25 * (u2 * u2 - 6.0 * u2 * h * h + h * h * h * h) - 0.5 * rho * (u2 - h * h) - h * ax;
  };
  auto slope = [&](double u) { return -u * u * u + 3.0 * u * h * h - rho * u; };
  double u = min_half_length;
  while (g(u) > top - kTailDrop || slope(u) > 0.0) u += 0.25;
  return {h, u};
}

ComplexValue phi_impl(double rho, double x, int m, const QuadratureSpec& spec) {
  const LineContour line = phi_contour(rho, std::abs(x), spec.inner_truncation);
  // The saddle sits in the upper half plane for x > 0 and the lower one for x < 0.
  const double height = x >= 0.0 ? line.height : -line.height;
  auto integrand = [&](double u) {
    const ComplexValue t(u, height);
    const ComplexValue t2 = t * t;
    return power_it(t, m) * std::exp(-0.25 * t2 * t2 - 0.5 * rho * t2 + 1i * t * x);
  };
  return integrate_segment(integrand, -line.half_length, line.half_length, spec.inner_nodes, spec.rule);
}

struct Ray {
  double angle;
  double orientation;  // -1: from infinity into the vertex, +1: out of the vertex
};

constexpr std::array<Ray, 2> kUpperRays{{{kPi / 4.0, -1.0}, {3.0 * kPi / 4.0, 1.0}}};
constexpr std::array<Ray, 2> kLowerRays{{{-3.0 * kPi / 4.0, -1.0}, {-kPi / 4.0, 1.0}}};

double psi_exponent_re(double rho, double y, ComplexValue t) {
  const ComplexValue t2 = t * t;
  return std::real(0.25 * t2 * t2 + 0.5 * rho * t2 + 1i * t * y);
}

/// Integral over one V (two rays sharing a vertex i*c). The vertex is moved vertically so
/// that the largest value of |integrand| along the V is as small as possible.
ComplexValue psi_v(double rho, double y, int m, const std::array<Ray, 2>& rays, const QuadratureSpec& spec) {
  const double scale = std::cbrt(std::abs(y)) + std::sqrt(std::abs(rho)) + 1.0;
  const double reach = 2.0 * scale + 3.0;
  auto peak_for = [&](double c) {
    double top = -INFINITY;
    for (const Ray& ray : rays) {
      const ComplexValue dir = std::polar(1.0, ray.angle);
      for (int i = 0; i <= 64; ++i) {
        top = std::max(top, psi_exponent_re(rho, y, 1i * c + dir * (reach * i / 64.0)));
      }
    }
    return top;
  };
  const double c = argmin_scan_golden(peak_for, -scale, scale, 32);
  const double top = peak_for(c);

  ComplexValue total = 0.0;
  for (const Ray& ray : rays) {
    const ComplexValue dir = std::polar(1.0, ray.angle);
    const ComplexValue vertex = 1i * c;
    auto re_at = [&](double r) { return psi_exponent_re(rho, y, vertex + dir * r); };
    double r_max = spec.inner_truncation;
    while (re_at(r_max) > top - kTailDrop || re_at(r_max + 0.25) > re_at(r_max)) r_max += 0.25;
    auto integrand = [&](double r) {
      const ComplexValue t = vertex + dir * r;
      const ComplexValue t2 = t * t;
      return power_it(t, m) * std::exp(0.25 * t2 * t2 + 0.5 * rho * t2 + 1i * t * y);
    };
    total += ray.orientation * dir * integrate_segment(integrand, 0.0, r_max, spec.inner_nodes, spec.rule);
  }
  return total;
}

ComplexValue psi_impl(double rho, double y, int m, const QuadratureSpec& spec) {
  return psi_v(rho, y, m, kUpperRays, spec) + psi_v(rho, y, m, kLowerRays, spec);
}

/// Upper-right root of t^3 + rho t = i w, the saddle that governs phi and psi for large w.
ComplexValue far_saddle(double rho, double w) {
  const ComplexValue e(std::cos(kPi / 6.0), std::sin(kPi / 6.0));
  const double c = std::cbrt(w);
  ComplexValue t = c * e - (rho / (3.0 * c)) * std::conj(e);
  for (int it = 0; it < 60; ++it) {
    const ComplexValue step = (t * t * t + rho * t - ComplexValue(0.0, w)) / (3.0 * t * t + rho);
    t -= step;
    if (std::abs(step) <= 1e-15 * std::abs(t)) break;
  }
  return t;
}

/// Far-field kernel at (u, v): e^{-G} sin(P) / (pi (u - v)) with P + iG = int_v^u t*(w) dw.
/// P carries the local sine-kernel phase, G the conjugation factor between phi and psi.
double far_field_kernel(const ModelParams& params, double u, double v) {
  const double d = u - v;
  if (std::abs(d) < 1e-9) return far_saddle(params.rho, 0.5 * (u + v)).real() / kPi;
  const auto& panel = gauss_panel();
  const double centre = 0.5 * (u + v);
  ComplexValue integral = 0.0;
  for (int i = 0; i < kPanelOrder; ++i) {
    integral += panel.weights[i] * far_saddle(params.rho, centre + 0.5 * d * panel.nodes[i]);
  }
  integral *= 0.5 * d;
  return std::exp(-integral.imag()) * std::sin(integral.real()) / (kPi * d);
}

struct OuterPanel {
  double a;
  double b;
  std::array<double, kPanelOrder> z;
  std::array<double, kPanelOrder> w;
  std::array<ComplexValue, kPanelOrder> f;
};

}  // namespace

void QuadratureSpec::validate(const ModelParams& params) const {
  const double t2 = inner_truncation * inner_truncation;
  if (!(inner_truncation > 0.0) || -0.25 * t2 * t2 + 0.5 * std::abs(params.rho) * t2 >= kTruncationLogTol) {
    throw ConfigError("quadrature: inner_truncation " + std::to_string(inner_truncation) +
                      " too small for rho = " + std::to_string(params.rho) +
                      " (need exp(-T^4/4 + |rho| T^2/2) < 1e-16)");
  }
  if (inner_nodes < 64 || outer_nodes < 64) throw ConfigError("quadrature: node counts must be >= 64");
  if (!(outer_cutoff > 0.0)) throw ConfigError("quadrature: outer_cutoff must be positive");
  if (tail_average_windows < 2) throw ConfigError("quadrature: need at least 2 tail averaging windows");
  if (!(tail_tolerance > 0.0)) throw ConfigError("quadrature: tail_tolerance must be positive");
}

QuadratureSpec QuadratureSpec::doubled() const {
  QuadratureSpec out = *this;
  out.inner_nodes *= 2;
  out.outer_nodes *= 2;
  return out;
}

ComplexValue phi(const ModelParams& params, double x, const QuadratureSpec& spec) {
  return phi_moment(params, x, 0, spec);
}

ComplexValue phi_moment(const ModelParams& params, double x, int m, const QuadratureSpec& spec) {
  require_moment(m);
  spec.validate(params);
  return phi_impl(params.rho, x, m, spec);
}

ComplexValue psi(const ModelParams& params, double y, const QuadratureSpec& spec) {
  return psi_moment(params, y, 0, spec);
}

ComplexValue psi_moment(const ModelParams& params, double y, int m, const QuadratureSpec& spec) {
  require_moment(m);
  spec.validate(params);
  return psi_impl(params.rho, y, m, spec);
}

KernelEstimate kernel_value(const ModelParams& params, double x, double y, const QuadratureSpec& spec) {
  spec.validate(params);
  const double mid0 = 0.5 * (x + y);
  const double cutoff = spec.outer_cutoff;
  const int windows = spec.tail_average_windows;

  // Window boundaries: z where mu(mid0 + z) = mu(mid0 + end) - 2j.
  auto window_bounds = [&](double end) {
    std::vector<double> bounds(static_cast<std::size_t>(windows) + 1);
    const double top = mid0 + end > 0.0 ? mu(params, mid0 + end) : -INFINITY;
    for (int j = 0; j <= windows; ++j) {
      const double level = top - 2.0 * (windows - j);
      if (!(level > mu_inv_lower_limit(params))) {
        throw ConfigError("kernel_value: outer_cutoff " + std::to_string(cutoff) + " too small for x = " +
                          std::to_string(x) + ", y = " + std::to_string(y));
      }
      bounds[static_cast<std::size_t>(j)] = j == windows ? end : mu_inv(params, level) - mid0;
    }
    if (!(bounds.front() > 0.0) || mid0 + bounds.front() <= params.s_min()) {
      throw ConfigError("kernel_value: outer_cutoff " + std::to_string(cutoff) + " too small for x = " +
                        std::to_string(x) + ", y = " + std::to_string(y));
    }
    return bounds;
  };
  const std::vector<double> full = window_bounds(cutoff);
  const std::vector<double> half = window_bounds(0.5 * cutoff);

  std::vector<double> breaks{0.0};
  breaks.insert(breaks.end(), full.begin(), full.end());
  breaks.insert(breaks.end(), half.begin(), half.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const auto& panel = gauss_panel();
  const double inv_4pi2 = 1.0 / (4.0 * kPi * kPi);
  std::vector<OuterPanel> panels;
  std::vector<ComplexValue> cumulative_at_break{0.0};
  ComplexValue running = 0.0;
  for (std::size_t g = 0; g + 1 < breaks.size(); ++g) {
    const double lo = breaks[g];
    const double hi = breaks[g + 1];
    const int count = std::max(1, static_cast<int>(std::ceil((hi - lo) * spec.outer_nodes / kPanelOrder)));
    const double width = (hi - lo) / count;
    for (int p = 0; p < count; ++p) {
      OuterPanel op;
      op.a = lo + width * p;
      op.b = p + 1 == count ? hi : lo + width * (p + 1);
      const double centre = 0.5 * (op.a + op.b);
      const double hw = 0.5 * (op.b - op.a);
      for (int i = 0; i < kPanelOrder; ++i) {
        op.z[i] = centre + hw * panel.nodes[i];
        op.w[i] = hw * panel.weights[i];
        op.f[i] = inv_4pi2 * phi_impl(params.rho, x + op.z[i], 0, spec) * psi_impl(params.rho, y + op.z[i], 0, spec);
        running += op.w[i] * op.f[i];
      }
      panels.push_back(op);
    }
    cumulative_at_break.push_back(running);
  }

  auto cumulative_at = [&](double z) {
    const auto it = std::lower_bound(breaks.begin(), breaks.end(), z);
    return cumulative_at_break[static_cast<std::size_t>(it - breaks.begin())];
  };

  // Average over [a, b] of G(z) = K_far(z) - F(z), with
  //   int_a^b F = (b - a) F(a) + int_a^b (b - z) f(z) dz.
  auto window_average = [&](double a, double b) {
    ComplexValue integral_f = (b - a) * cumulative_at(a);
    double integral_far = 0.0;
    for (const OuterPanel& op : panels) {
      if (op.a < a || op.b > b) continue;
      for (int i = 0; i < kPanelOrder; ++i) {
        integral_f += op.w[i] * (b - op.z[i]) * op.f[i];
        integral_far += op.w[i] * far_field_kernel(params, x + op.z[i], y + op.z[i]);
      }
    }
    return (integral_far - integral_f) / (b - a);
  };

  KernelEstimate out;
  for (int j = 0; j < windows; ++j) {
    out.window_averages.push_back(window_average(full[static_cast<std::size_t>(j)], full[static_cast<std::size_t>(j) + 1]));
  }
  out.value = out.window_averages.back();
  out.half_cutoff_value = window_average(half[half.size() - 2], half.back());

  double spread = 0.0;
  for (const ComplexValue& a : out.window_averages) {
    for (const ComplexValue& b : out.window_averages) spread = std::max(spread, std::abs(a - b));
  }
  out.error_estimate = std::max(spread, std::abs(out.value - out.half_cutoff_value));
  if (spread > spec.tail_tolerance * std::max(1.0, std::abs(out.value))) {
    throw ConvergenceError("kernel_value: tail window averages did not stabilise (spread " + std::to_string(spread) +
                               ") at x = " + std::to_string(x) + ", y = " + std::to_string(y),
                           out.value.real(), spread);
  }
  return out;
}

KernelEstimate kernel_diag(const ModelParams& params, double x, const QuadratureSpec& spec) {
  return kernel_value(params, x, x, spec);
}

double mean_count(const ModelParams& params, double x, const QuadratureSpec& spec) {
  if (!(x > 0.0)) throw DomainError("mean_count: x must be positive");
  auto density = [&](double t) { return kernel_diag(params, t, spec).value.real(); };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(density, -x, x, 3, 1e-6, &error);
}

}  // namespace pearcey
