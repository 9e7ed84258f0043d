#pragma once

// Truncated real Fourier series on [0, 2pi).
//
// Coefficient layout (fixed throughout the library and in the CSV format):
//   index 0      -> a0           (constant)
//   index 2l - 1 -> a_{-l}       (multiplies sin(l theta))
//   index 2l     -> a_{l}        (multiplies cos(l theta))
// so a series of order N has 2N + 1 coefficients.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bernoulli/errors.hpp"

namespace bernoulli::fourier {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr std::size_t coeff_count(int order) { return static_cast<std::size_t>(2 * order + 1); }

inline int order_of(std::size_t count) {
  require(count % 2 == 1, ErrorKind::DimensionMismatch,
          "coefficient count must be odd, got " + std::to_string(count));
  return static_cast<int>((count - 1) / 2);
}

/// Frequency l of the basis function stored at `index`.
constexpr int mode_of(std::size_t index) { return static_cast<int>((index + 1) / 2); }

constexpr bool is_sine(std::size_t index) { return index % 2 == 1; }

/// Equispaced parameter nodes theta_i = 2 pi i / M.
inline std::vector<double> equispaced(std::size_t m) {
  std::vector<double> t(m);
  for (std::size_t i = 0; i < m; ++i) t[i] = two_pi * static_cast<double>(i) / static_cast<double>(m);
  return t;
}

/// k-th derivative of the basis function at `index`.
inline double basis(std::size_t index, double theta, int deriv = 0) {
  if (index == 0) return deriv == 0 ? 1.0 : 0.0;
  const double l = mode_of(index);
  // d^k/dt^k sin(lt) = l^k sin(lt + k pi/2), same shift for cos.
  const double phase = l * theta + deriv * std::numbers::pi / 2.0;
  const double scale = std::pow(l, deriv);
  return is_sine(index) ? scale * std::sin(phase) : scale * std::cos(phase);
}

/// Value and first three derivatives of a series at one parameter value.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

inline Jet evaluate_jet(std::span<const double> coeffs, double theta) {
  Jet j;
  j.value = coeffs.empty() ? 0.0 : coeffs[0];
  const int order = order_of(coeffs.size());
  for (int l = 1; l <= order; ++l) {
    const double s = std::sin(l * theta);
    const double c = std::cos(l * theta);
    const double bs = coeffs[2 * l - 1];
    const double bc = coeffs[2 * l];
    const double l2 = static_cast<double>(l) * l;
    j.value += bs * s + bc * c;
    j.d1 += l * (bs * c - bc * s);
    j.d2 -= l2 * (bs * s + bc * c);
    j.d3 -= l2 * l * (bs * c - bc * s);
  }
  return j;
}

/// Evaluate the `deriv`-th derivative (0..3) of the series at each theta.
inline std::vector<double> evaluate(std::span<const double> coeffs, std::span<const double> thetas,
                                    int deriv = 0) {
  require(deriv >= 0 && deriv <= 3, ErrorKind::InvalidArgument, "derivative order must be in 0..3");
  std::vector<double> out(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const Jet j = evaluate_jet(coeffs, thetas[i]);
    out[i] = deriv == 0 ? j.value : deriv == 1 ? j.d1 : deriv == 2 ? j.d2 : j.d3;
  }
  return out;
}

/// Trapezoid-rule Fourier analysis of nodal values at equispaced nodes.
/// Exact for trigonometric polynomials of degree < M/2, so M > 2N is required.
inline std::vector<double> analyze(std::span<const double> values, int order) {
  const std::size_t m = values.size();
  require(m > static_cast<std::size_t>(2 * order), ErrorKind::InvalidArgument,
          "need more than 2N nodes to recover N Fourier modes");
  std::vector<double> c(coeff_count(order), 0.0);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = two_pi * static_cast<double>(i) * inv_m;
    c[0] += values[i] * inv_m;
    for (int l = 1; l <= order; ++l) {
      c[2 * l - 1] += 2.0 * inv_m * values[i] * std::sin(l * t);
      c[2 * l] += 2.0 * inv_m * values[i] * std::cos(l * t);
    }
  }
  return c;
}

/// Project a periodic function onto N modes by trapezoid quadrature on `m` nodes.
template <class F>
std::vector<double> project_function(F&& f, int order, std::size_t m = 4096) {
  const auto t = equispaced(m);
  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = f(t[i]);
  return analyze(v, order);
}

// Sobolev-type weights on coefficients.

inline double h_half_symbol(int l) { return std::sqrt(1.0 + static_cast<double>(l) * l); }

/// Discrete H^{1/2} inner product on coefficient vectors, sum_l (1+l^2)^{1/2} p_l q_l.
inline double h_half_inner(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), ErrorKind::DimensionMismatch, "h_half_inner size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += h_half_symbol(mode_of(k)) * p[k] * q[k];
  return s;
}

/// Riesz map of the H^{1/2} coefficient inner product: divides mode l by (1+l^2)^{1/2}.
inline std::vector<double> h_half_riesz(std::span<const double> raw) {
  std::vector<double> d(raw.begin(), raw.end());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] /= h_half_symbol(mode_of(k));
  return d;
}

/// H^{1/2} norm squared of the function the coefficients represent:
/// sum_l (1+l^2)^{1/2} ||mode||^2_{L2}, with ||1||^2 = 2 pi and ||cos l t||^2 = pi.
inline double h_half_function_norm_sq(std::span<const double> q) {
  double s = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double l2 = k == 0 ? two_pi : std::numbers::pi;
    s += h_half_symbol(mode_of(k)) * l2 * q[k] * q[k];
  }
  return s;
}

/// H^4-type weighted coefficient norm squared, sum (1+l^2)^4 c_l^2.
inline double h4_norm_sq(std::span<const double> c) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double w = 1.0 + static_cast<double>(mode_of(k)) * mode_of(k);
    s += w * w * w * w * c[k] * c[k];
  }
  return s;
}

// Periodic spectral operators on M equispaced nodes (M even).

/// First row of the periodic differentiation matrix, D_ij = d[(i - j) mod M].
inline std::vector<double> diff_row(std::size_t m) {
  require(m % 2 == 0 && m >= 4, ErrorKind::InvalidArgument, "spectral differentiation needs even M >= 4");
  std::vector<double> d(m, 0.0);
  const double h = two_pi / static_cast<double>(m);
  for (std::size_t k = 1; k < m; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    d[k] = 0.5 * sign / std::tan(0.5 * static_cast<double>(k) * h);
  }
  return d;
}

/// Apply the differentiation matrix built from `row` to nodal values.
inline Eigen::VectorXd differentiate(const std::vector<double>& row, const Eigen::VectorXd& v) {
  const auto m = static_cast<Eigen::Index>(row.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) s += row[static_cast<std::size_t>((i - j + m) % m)] * v[j];
    out[i] = s;
  }
  return out;
}

/// Quadrature weights R_k for integrals of log(4 sin^2((t - tau)/2)) f(tau) over a period,
/// R_k being the weight of node j when the target sits k = i - j steps away.
inline std::vector<double> log_weights(std::size_t m) {
  require(m % 2 == 0 && m >= 4, ErrorKind::InvalidArgument, "log quadrature needs even M >= 4");
  const std::size_t n = m / 2;
  const double dn = static_cast<double>(n);
  std::vector<double> r(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double dt = static_cast<double>(k) * std::numbers::pi / dn;
    double s = 0.0;
    for (std::size_t q = 1; q < n; ++q) s += std::cos(static_cast<double>(q) * dt) / static_cast<double>(q);
    r[k] = -2.0 * std::numbers::pi / dn * s - std::numbers::pi / (dn * dn) * std::cos(dn * dt);
  }
  return r;
}

}  // namespace bernoulli::fourier
