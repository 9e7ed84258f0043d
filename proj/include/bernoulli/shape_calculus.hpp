#pragma once

// Shape gradient and shape Hessian of
//   J(Gamma) = integral_D |grad u|^2 + lambda^2 dx = integral_Sigma du/dn ds + lambda^2 |D|
// with respect to the outer boundary, in radial and support-function form.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bernoulli/errors.hpp"
#include "bernoulli/fourier.hpp"
#include "bernoulli/geometry.hpp"
#include "bernoulli/laplace_solver.hpp"

namespace bernoulli {

/// Discretize an outer-boundary coefficient vector in the given parameterization.
inline DiscreteBoundary outer_boundary(std::span<const double> coeffs, Parameterization kind, std::size_t m) {
  std::vector<double> c(coeffs.begin(), coeffs.end());
  if (kind == Parameterization::radial) return discretize_radial(RadialCurve(std::move(c)), m);
  return envelope(SupportFunction(std::move(c)), m);
}

inline AnnularDomain build_domain(const RadialCurve& sigma, std::span<const double> outer, Parameterization kind,
                                  std::size_t m_inner, std::size_t m_outer, double gap_min = default_gap_min) {
  return AnnularDomain(discretize_radial(sigma, m_inner), outer_boundary(outer, kind, m_outer), gap_min);
}

struct ShapeGradientDensity {
  Eigen::VectorXd values;       // lambda^2 - (du/dn)^2 at the outer nodes
  Eigen::VectorXd arc_weights;  // speed * 2 pi / M
};

struct CoefficientGradient {
  std::vector<double> coeffs;
  std::vector<double> preconditioned;
};

inline ShapeGradientDensity shape_gradient_density(const AnnularDomain& domain, const BoundarySolution& state,
                                                   double lambda) {
  ShapeGradientDensity g;
  g.values = (lambda * lambda - state.neumann_outer.array().square()).matrix();
  g.arc_weights = domain.outer().weights;
  return g;
}

inline ShapeGradientDensity shape_gradient_density(const AnnularDomain& domain, double lambda) {
  return shape_gradient_density(domain, DirichletSolver(domain).solve_state(), lambda);
}

namespace detail {

/// Pair nodal values `f` (already multiplied by the integrand's theta-Jacobian)
/// against every basis function with the trapezoid rule in theta.
inline std::vector<double> pair_with_basis(const Eigen::VectorXd& f, int order) {
  const auto m = static_cast<std::size_t>(f.size());
  const auto thetas = fourier::equispaced(m);
  const double dt = fourier::two_pi / static_cast<double>(m);
  std::vector<double> out(fourier::coeff_count(order), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += fourier::basis(k, thetas[i]) * f[static_cast<Eigen::Index>(i)];
    out[k] = s * dt;
  }
  return out;
}

inline CoefficientGradient finish_gradient(std::vector<double> raw) {
  CoefficientGradient g;
  g.preconditioned = fourier::h_half_riesz(raw);
  g.coeffs = std::move(raw);
  return g;
}

}  // namespace detail

/// Entry k is the integral over theta of phi_k gamma g.
inline CoefficientGradient gradient_radial(const ShapeGradientDensity& density, const RadialCurve& gamma) {
  const auto m = static_cast<std::size_t>(density.values.size());
  const auto r = gamma.eval(fourier::equispaced(m));
  Eigen::VectorXd f(density.values.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = r[static_cast<std::size_t>(i)] * density.values[i];
  return detail::finish_gradient(detail::pair_with_basis(f, gamma.order()));
}

/// Entry k is the integral over theta of q_k g (h + h'').
inline CoefficientGradient gradient_support(const ShapeGradientDensity& density, const SupportFunction& h) {
  const auto m = static_cast<std::size_t>(density.values.size());
  const auto thetas = fourier::equispaced(m);
  Eigen::VectorXd f(density.values.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const auto j = h.jet(thetas[static_cast<std::size_t>(i)]);
    const double rho = j.value + j.d2;
    require(rho >= -tol_convex, ErrorKind::NotConvex, "h + h'' negative at a density node");
    f[i] = density.values[i] * rho;
  }
  return detail::finish_gradient(detail::pair_with_basis(f, h.order()));
}

inline CoefficientGradient coefficient_gradient(const ShapeGradientDensity& density, std::span<const double> outer,
                                                Parameterization kind) {
  std::vector<double> c(outer.begin(), outer.end());
  if (kind == Parameterization::radial) return gradient_radial(density, RadialCurve(std::move(c)));
  return gradient_support(density, SupportFunction(std::move(c)));
}

// Shape Hessian.
//
// Along the path x + tV of the outer boundary,
//   D^2 J[V, V] = 2 int du'/dn u' + int H (lambda^2 + (du/dn)^2) V_n^2
//               + int g (H V_tau^2 - 2 V . grad_tau V_n),
// with g = lambda^2 - (du/dn)^2 and u' harmonic, u' = 0 on Sigma, u' = -(du/dn) V_n on Gamma.
// The split below reports I1 = int du'/dn u' + H lambda^2 V_n^2 and
// I2 = int (du/dn)^2 V . grad_tau V_n separately; `remainder` holds the rest.
// For support perturbations H V_tau^2 = V . grad_tau V_n, so the last integral is
// -int g V . grad_tau V_n and vanishes at a critical shape.

struct HessianForm {
  double value = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double remainder = 0.0;
  double dirichlet_part = 0.0;  // int du'/dn u' = int_D |grad u'|^2
};

namespace detail {

inline HessianForm assemble_hessian(const DirichletSolver& solver, const BoundarySolution& state,
                                    const PerturbationField& field, double lambda) {
  const auto& outer = solver.domain().outer();
  const auto m_out = static_cast<Eigen::Index>(outer.size());
  require(field.normal_velocity.size() == m_out, ErrorKind::DimensionMismatch,
          "perturbation field must live on the outer nodes");
  const Eigen::VectorXd g_outer = -(state.neumann_outer.array() * field.normal_velocity.array()).matrix();
  const auto du = solver.solve(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(solver.domain().inner_size())),
                               g_outer);
  const Eigen::ArrayXd w = outer.weights.array();
  const Eigen::ArrayXd curv = outer.curve.curvature.array();
  const Eigen::ArrayXd vn2 = field.normal_velocity.array().square();
  const Eigen::ArrayXd vt2 = field.tangential_velocity.array().square();
  const Eigen::ArrayXd tang = field.tangential_term.array();
  const Eigen::ArrayXd flux2 = state.neumann_outer.array().square();
  const double l2 = lambda * lambda;
  const Eigen::ArrayXd g = l2 - flux2;

  HessianForm hf;
  hf.dirichlet_part = (du.neumann_outer.array() * g_outer.array() * w).sum();
  hf.i1 = hf.dirichlet_part + l2 * (curv * vn2 * w).sum();
  hf.i2 = (flux2 * tang * w).sum();
  hf.value = 2.0 * hf.dirichlet_part + ((curv * (l2 + flux2) * vn2 + g * (curv * vt2 - 2.0 * tang)) * w).sum();
  hf.remainder = hf.value - hf.i1 - hf.i2;
  return hf;
}

}  // namespace detail

/// D^2 J[V, V] for the support-function perturbation q of h, whose envelope must
/// be the outer boundary of `solver`'s domain.
inline HessianForm hessian_quadratic_form(const DirichletSolver& solver, const BoundarySolution& state,
                                          const SupportFunction& h, std::span<const double> q, double lambda) {
  const auto field = support_perturbation_field(h, q, solver.domain().outer_size());
  return detail::assemble_hessian(solver, state, field, lambda);
}

inline HessianForm hessian_quadratic_form(const AnnularDomain& domain, const SupportFunction& h,
                                          std::span<const double> q, double lambda) {
  const DirichletSolver solver(domain);
  return hessian_quadratic_form(solver, solver.solve_state(), h, q, lambda);
}

/// Radial counterpart for V = phi e_r on the outer curve gamma.
inline HessianForm hessian_quadratic_form_radial(const AnnularDomain& domain, const RadialCurve& gamma,
                                                 std::span<const double> phi, double lambda) {
  const DirichletSolver solver(domain);
  const auto field = radial_perturbation_field(gamma, phi, domain.outer_size());
  return detail::assemble_hessian(solver, solver.solve_state(), field, lambda);
}

}  // namespace bernoulli
