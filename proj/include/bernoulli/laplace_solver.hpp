#pragma once

// Dirichlet problem for the Laplacian on the doubly connected domain D between
// an inner curve Sigma and an outer curve Gamma.
//
// Representation: u = W[mu] + A log|x|, W the double-layer potential over both
// boundary components. The origin must lie inside Sigma (true for starlike
// curves in radial form and for support functions with h > 0). Boundary
// integrals use Nystrom discretization with the trapezoid rule; the Neumann
// trace of W is computed through Maue's identity with Kress's logarithmic
// quadrature and spectral differentiation.
//
// Normal convention: n is the unit normal exterior to D on both components, so
// on Sigma it points into the hole. With data u = 1 on Sigma and u = 0 on Gamma
// the traces satisfy du/dn > 0 on Sigma and du/dn < 0 on Gamma.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bernoulli/errors.hpp"
#include "bernoulli/fourier.hpp"
#include "bernoulli/geometry.hpp"

namespace bernoulli {

inline constexpr double default_gap_min = 0.02;

/// Boundary component as seen from D: geometry plus the D-exterior normal.
struct BoundaryComponent {
  DiscreteBoundary curve;
  Eigen::Matrix2Xd normals;  // exterior to D
  Eigen::VectorXd weights;   // trapezoid arclength weights

  std::size_t size() const { return curve.size(); }
};

namespace detail {

/// Even-odd ray casting against the closed polygon through `poly`'s columns.
inline bool point_in_polygon(const Eigen::Vector2d& p, const Eigen::Matrix2Xd& poly) {
  bool inside = false;
  const Eigen::Index m = poly.cols();
  for (Eigen::Index i = 0, j = m - 1; i < m; j = i++) {
    const double xi = poly(0, i), yi = poly(1, i);
    const double xj = poly(0, j), yj = poly(1, j);
    if ((yi > p.y()) != (yj > p.y())) {
      const double x_cross = xj + (p.y() - yj) * (xi - xj) / (yi - yj);
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

inline BoundaryComponent make_component(const DiscreteBoundary& b, bool inner) {
  BoundaryComponent c{b, inner ? Eigen::Matrix2Xd(-b.normals) : b.normals, b.weights()};
  return c;
}

}  // namespace detail

class AnnularDomain {
 public:
  /// Validates containment (ray casting) and the minimum node-to-node gap.
  AnnularDomain(const DiscreteBoundary& inner, const DiscreteBoundary& outer, double gap_min = default_gap_min)
      : inner_(detail::make_component(inner, true)), outer_(detail::make_component(outer, false)) {
    require(gap_min > 0.0, ErrorKind::InvalidArgument, "gap_min must be positive");
    require(detail::point_in_polygon(Eigen::Vector2d::Zero(), inner.nodes), ErrorKind::InvalidArgument,
            "the origin must lie inside the inner boundary");
    for (Eigen::Index i = 0; i < inner.nodes.cols(); ++i)
      require(detail::point_in_polygon(inner.nodes.col(i), outer.nodes), ErrorKind::GapTooSmall,
              "inner node " + std::to_string(i) + " is not inside the outer boundary");
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < inner.nodes.cols(); ++i)
      gap = std::min(gap, (outer.nodes.colwise() - inner.nodes.col(i)).colwise().norm().minCoeff());
    min_gap_ = gap;
    require(gap >= gap_min, ErrorKind::GapTooSmall,
            "boundary gap " + std::to_string(gap) + " below gap_min " + std::to_string(gap_min));
  }

  const BoundaryComponent& inner() const { return inner_; }
  const BoundaryComponent& outer() const { return outer_; }
  std::size_t inner_size() const { return inner_.size(); }
  std::size_t outer_size() const { return outer_.size(); }
  double min_gap() const { return min_gap_; }

  /// |D| = 1/2 of the boundary integral of x . n over both components.
  double area() const {
    double a = 0.0;
    for (const auto* c : {&inner_, &outer_})
      for (Eigen::Index i = 0; i < c->curve.nodes.cols(); ++i)
        a += 0.5 * c->curve.nodes.col(i).dot(c->normals.col(i)) * c->weights[i];
    return a;
  }

 private:
  BoundaryComponent inner_;
  BoundaryComponent outer_;
  double min_gap_ = 0.0;
};

struct BoundarySolution {
  Eigen::VectorXd neumann_inner;  // du/dn on Sigma, n exterior to D
  Eigen::VectorXd neumann_outer;  // du/dn on Gamma
  double energy_flux_term = 0.0;  // integral of du/dn over Sigma
  double area = 0.0;
  Eigen::VectorXd density_inner;
  Eigen::VectorXd density_outer;
  double log_coefficient = 0.0;
};

namespace detail {

/// Double-layer kernel (1/2pi) (x - y) . n_y / |x - y|^2.
inline double double_layer(const Eigen::Vector2d& x, const Eigen::Vector2d& y, const Eigen::Vector2d& ny) {
  const Eigen::Vector2d r = x - y;
  return r.dot(ny) / (fourier::two_pi * r.squaredNorm());
}

/// d/dn_x of the double-layer kernel for x away from y.
inline double double_layer_normal_derivative(const Eigen::Vector2d& x, const Eigen::Vector2d& nx,
                                             const Eigen::Vector2d& y, const Eigen::Vector2d& ny) {
  const Eigen::Vector2d r = x - y;
  const double r2 = r.squaredNorm();
  return (nx.dot(ny) / r2 - 2.0 * r.dot(ny) * r.dot(nx) / (r2 * r2)) / fourier::two_pi;
}

/// Matrix of the double-layer operator on one component, target = source.
inline Eigen::MatrixXd self_double_layer(const BoundaryComponent& c) {
  const auto m = static_cast<Eigen::Index>(c.size());
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) {
        const double s2 = c.curve.d1.col(j).squaredNorm();
        k(i, j) = c.curve.d2.col(j).dot(c.normals.col(j)) / (2.0 * fourier::two_pi * s2) * c.weights[j];
      } else {
        k(i, j) = double_layer(c.curve.nodes.col(i), c.curve.nodes.col(j), c.normals.col(j)) * c.weights[j];
      }
    }
  }
  return k;
}

inline Eigen::MatrixXd cross_double_layer(const BoundaryComponent& target, const BoundaryComponent& source) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(target.size()), static_cast<Eigen::Index>(source.size()));
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j)
      k(i, j) = double_layer(target.curve.nodes.col(i), source.curve.nodes.col(j), source.normals.col(j)) *
                source.weights[j];
  return k;
}

inline Eigen::MatrixXd cross_hypersingular(const BoundaryComponent& target, const BoundaryComponent& source) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(target.size()), static_cast<Eigen::Index>(source.size()));
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j)
      k(i, j) = double_layer_normal_derivative(target.curve.nodes.col(i), target.normals.col(i),
                                               source.curve.nodes.col(j), source.normals.col(j)) *
                source.weights[j];
  return k;
}

/// Normal derivative of the double layer on its own curve via Maue's identity,
/// T = (1/|x'|) D S D with S the parametrized single-layer operator.
inline Eigen::MatrixXd self_hypersingular(const BoundaryComponent& c) {
  const auto m = static_cast<Eigen::Index>(c.size());
  const auto r = fourier::log_weights(c.size());
  const auto row = fourier::diff_row(c.size());
  const double h = fourier::two_pi / static_cast<double>(m);
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  const auto thetas = fourier::equispaced(c.size());

  Eigen::MatrixXd s(m, m);
  Eigen::MatrixXd d(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto k = static_cast<std::size_t>((i - j + m) % m);
      d(i, j) = row[k];
      double smooth;
      if (i == j) {
        smooth = -inv4pi * std::log(c.curve.d1.col(i).squaredNorm());
      } else {
        const double half = 0.5 * (thetas[static_cast<std::size_t>(i)] - thetas[static_cast<std::size_t>(j)]);
        const double sn = std::sin(half);
        smooth = -inv4pi * std::log((c.curve.nodes.col(i) - c.curve.nodes.col(j)).squaredNorm() / (4.0 * sn * sn));
      }
      s(i, j) = -inv4pi * r[k] + h * smooth;
    }
  }
  Eigen::MatrixXd t = d * s * d;
  for (Eigen::Index i = 0; i < m; ++i) t.row(i) /= c.curve.speed[i];
  return t;
}

}  // namespace detail

/// Factorized boundary integral system for one domain. Reusable for any number
/// of right-hand sides (the state u and the derivative states u').
class DirichletSolver {
 public:
  explicit DirichletSolver(const AnnularDomain& domain) : domain_(domain) {
    const auto& in = domain.inner();
    const auto& out = domain.outer();
    const auto m1 = static_cast<Eigen::Index>(in.size());
    const auto m2 = static_cast<Eigen::Index>(out.size());
    const Eigen::Index n = m1 + m2 + 1;

    // Rows 0..m1+m2-1: interior limit -mu/2 + K mu + A log|x| = g.
    // Last row: sum of mu w over Sigma = 0, removing the constant-on-Sigma null space.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    a.block(0, 0, m1, m1) = detail::self_double_layer(in);
    a.block(0, m1, m1, m2) = detail::cross_double_layer(in, out);
    a.block(m1, 0, m2, m1) = detail::cross_double_layer(out, in);
    a.block(m1, m1, m2, m2) = detail::self_double_layer(out);
    a.topLeftCorner(m1 + m2, m1 + m2).diagonal().array() -= 0.5;
    for (Eigen::Index i = 0; i < m1; ++i) a(i, n - 1) = std::log(in.curve.nodes.col(i).norm());
    for (Eigen::Index i = 0; i < m2; ++i) a(m1 + i, n - 1) = std::log(out.curve.nodes.col(i).norm());
    a.block(n - 1, 0, 1, m1) = in.weights.transpose();

    lu_.compute(a);
    const double rc = lu_.rcond();
    require(std::isfinite(rc) && rc > 1e-12, ErrorKind::SingularSystem,
            "boundary integral system has reciprocal condition " + std::to_string(rc));

    // Neumann traces as a linear map of (mu_inner, mu_outer, A).
    trace_ = Eigen::MatrixXd::Zero(m1 + m2, n);
    trace_.block(0, 0, m1, m1) = detail::self_hypersingular(in);
    trace_.block(0, m1, m1, m2) = detail::cross_hypersingular(in, out);
    trace_.block(m1, 0, m2, m1) = detail::cross_hypersingular(out, in);
    trace_.block(m1, m1, m2, m2) = detail::self_hypersingular(out);
    for (Eigen::Index i = 0; i < m1; ++i) {
      const Eigen::Vector2d x = in.curve.nodes.col(i);
      trace_(i, n - 1) = x.dot(in.normals.col(i)) / x.squaredNorm();
    }
    for (Eigen::Index i = 0; i < m2; ++i) {
      const Eigen::Vector2d x = out.curve.nodes.col(i);
      trace_(m1 + i, n - 1) = x.dot(out.normals.col(i)) / x.squaredNorm();
    }
  }

  const AnnularDomain& domain() const { return domain_; }

  BoundarySolution solve(const Eigen::VectorXd& g_inner, const Eigen::VectorXd& g_outer) const {
    const auto m1 = static_cast<Eigen::Index>(domain_.inner_size());
    const auto m2 = static_cast<Eigen::Index>(domain_.outer_size());
    require(g_inner.size() == m1 && g_outer.size() == m2, ErrorKind::DimensionMismatch,
            "Dirichlet data must match the node counts");
    Eigen::VectorXd rhs(m1 + m2 + 1);
    rhs << g_inner, g_outer, 0.0;
    const Eigen::VectorXd x = lu_.solve(rhs);
    const Eigen::VectorXd traces = trace_ * x;

    BoundarySolution s;
    s.density_inner = x.head(m1);
    s.density_outer = x.segment(m1, m2);
    s.log_coefficient = x[m1 + m2];
    s.neumann_inner = traces.head(m1);
    s.neumann_outer = traces.tail(m2);
    s.energy_flux_term = s.neumann_inner.dot(domain_.inner().weights);
    s.area = domain_.area();
    return s;
  }

  /// State with u = 1 on Sigma and u = 0 on Gamma.
  BoundarySolution solve_state() const {
    BoundarySolution s = solve(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(domain_.inner_size())),
                               Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain_.outer_size())));
    assert(s.neumann_outer.maxCoeff() < 0.0 && s.neumann_inner.minCoeff() > 0.0);
    return s;
  }

  /// Potential at an interior point from a solution's densities.
  double evaluate(const BoundarySolution& s, const Eigen::Vector2d& x) const {
    double u = s.log_coefficient * std::log(x.norm());
    const auto add = [&](const BoundaryComponent& c, const Eigen::VectorXd& mu) {
      for (Eigen::Index j = 0; j < mu.size(); ++j)
        u += detail::double_layer(x, c.curve.nodes.col(j), c.normals.col(j)) * c.weights[j] * mu[j];
    };
    add(domain_.inner(), s.density_inner);
    add(domain_.outer(), s.density_outer);
    return u;
  }

 private:
  AnnularDomain domain_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::MatrixXd trace_;
};

inline BoundarySolution solve_dirichlet(const AnnularDomain& domain, const Eigen::VectorXd& g_inner,
                                        const Eigen::VectorXd& g_outer) {
  return DirichletSolver(domain).solve(g_inner, g_outer);
}

/// J = integral over Sigma of du/dn + lambda^2 |D| for the state u.
inline double dirichlet_energy(const AnnularDomain& domain, double lambda) {
  require(lambda >= 0.0, ErrorKind::InvalidArgument, "lambda must be nonnegative");
  const auto s = DirichletSolver(domain).solve_state();
  return s.energy_flux_term + lambda * lambda * s.area;
}

/// Debug dump of a trace as CSV lines "theta, value".
inline void write_trace_csv(std::ostream& os, const Eigen::VectorXd& trace) {
  const auto thetas = fourier::equispaced(static_cast<std::size_t>(trace.size()));
  os << "theta,neumann_value\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < trace.size(); ++i) os << thetas[static_cast<std::size_t>(i)] << ',' << trace[i] << '\n';
}

}  // namespace bernoulli
