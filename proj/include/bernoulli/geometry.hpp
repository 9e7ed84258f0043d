#pragma once

// Boundary curves given by truncated Fourier series, either as a radial
// function r(theta) e_r(theta) (starlike curves) or as the support function
// h(theta) of a convex body, plus the discrete boundary data the solver needs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bernoulli/errors.hpp"
#include "bernoulli/fourier.hpp"

namespace bernoulli {

inline constexpr double tol_convex = 1e-10;

/// Number of points used to certify sign conditions of a degree-N series.
constexpr std::size_t check_grid_size(int order) { return 16 * fourier::coeff_count(order); }

/// Default boundary node count, max(128, 8(2N+1)).
constexpr std::size_t default_node_count(int order) {
  return std::max<std::size_t>(128, 8 * fourier::coeff_count(order));
}

enum class Parameterization { radial, support };

inline std::string to_string(Parameterization p) { return p == Parameterization::radial ? "radial" : "support"; }

inline Parameterization parse_parameterization(const std::string& s) {
  if (s == "radial") return Parameterization::radial;
  if (s == "support") return Parameterization::support;
  throw Error(ErrorKind::InvalidArgument, "unknown parameterization '" + s + "'");
}

namespace detail {

inline std::pair<double, double> min_max_on_grid(std::span<const double> coeffs, int deriv_combo) {
  // deriv_combo 0: h, 1: h + h''
  const auto grid = fourier::equispaced(check_grid_size(fourier::order_of(coeffs.size())));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double t : grid) {
    const auto j = fourier::evaluate_jet(coeffs, t);
    const double v = deriv_combo == 0 ? j.value : j.value + j.d2;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace detail

/// Starlike curve theta -> r(theta) e_r(theta), r a truncated Fourier series.
class RadialCurve {
 public:
  explicit RadialCurve(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    order_ = fourier::order_of(coeffs_.size());
    const auto [lo, hi] = detail::min_max_on_grid(coeffs_, 0);
    (void)hi;
    require(lo > 0.0, ErrorKind::NonpositiveRadius,
            "radial function reaches " + std::to_string(lo) + " on the check grid");
  }

  static RadialCurve circle(double radius, int order = 0) {
    std::vector<double> c(fourier::coeff_count(order), 0.0);
    c[0] = radius;
    return RadialCurve(std::move(c));
  }

  /// Ellipse with semi-axes a (along x) and b, projected onto `order` modes.
  static RadialCurve ellipse(double a, double b, int order) {
    return RadialCurve(fourier::project_function(
        [a, b](double t) {
          const double c = std::cos(t);
          const double s = std::sin(t);
          return a * b / std::sqrt(b * b * c * c + a * a * s * s);
        },
        order));
  }

  int order() const { return order_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  double radius(double theta) const { return fourier::evaluate_jet(coeffs_, theta).value; }
  fourier::Jet jet(double theta) const { return fourier::evaluate_jet(coeffs_, theta); }

  std::vector<double> eval(std::span<const double> thetas, int deriv = 0) const {
    return fourier::evaluate(coeffs_, thetas, deriv);
  }

  std::pair<double, double> radial_range() const { return detail::min_max_on_grid(coeffs_, 0); }

 private:
  std::vector<double> coeffs_;
  int order_ = 0;
};

/// Support function h of a convex body; the boundary is the envelope h e_r + h' e_theta.
class SupportFunction {
 public:
  explicit SupportFunction(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    order_ = fourier::order_of(coeffs_.size());
    const auto [hlo, hhi] = detail::min_max_on_grid(coeffs_, 0);
    (void)hhi;
    require(hlo > 0.0, ErrorKind::NonpositiveRadius,
            "support function reaches " + std::to_string(hlo) + " on the check grid");
    const auto [clo, chi] = detail::min_max_on_grid(coeffs_, 1);
    (void)chi;
    require(clo >= -tol_convex, ErrorKind::NotConvex,
            "h + h'' reaches " + std::to_string(clo) + " on the check grid");
  }

  static SupportFunction circle(double radius, int order = 0) {
    std::vector<double> c(fourier::coeff_count(order), 0.0);
    c[0] = radius;
    return SupportFunction(std::move(c));
  }

  int order() const { return order_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  fourier::Jet jet(double theta) const { return fourier::evaluate_jet(coeffs_, theta); }

  /// Minimum of the radius of curvature h + h'' on the check grid.
  double min_curvature_radius() const { return detail::min_max_on_grid(coeffs_, 1).first; }

 private:
  std::vector<double> coeffs_;
  int order_ = 0;
};

/// Boundary sampled at M equispaced parameter values, counter-clockwise.
/// `normals` are the curve's own outward normals; the solver flips them on the
/// inner component to get the normal exterior to the annular domain.
struct DiscreteBoundary {
  Eigen::Matrix2Xd nodes;
  Eigen::Matrix2Xd d1;  // dx/dtheta
  Eigen::Matrix2Xd d2;  // d^2x/dtheta^2
  Eigen::Matrix2Xd normals;
  Eigen::Matrix2Xd tangents;
  Eigen::VectorXd speed;
  Eigen::VectorXd curvature;

  std::size_t size() const { return static_cast<std::size_t>(nodes.cols()); }

  /// Trapezoid arclength weights speed * 2 pi / M.
  Eigen::VectorXd weights() const { return speed * (fourier::two_pi / static_cast<double>(size())); }

  double length() const { return weights().sum(); }
};

namespace detail {

inline void check_node_count(std::size_t m) {
  require(m % 2 == 0 && m >= 8, ErrorKind::InvalidArgument,
          "node count must be even and at least 8, got " + std::to_string(m));
}

inline Eigen::Vector2d e_r(double t) { return {std::cos(t), std::sin(t)}; }
inline Eigen::Vector2d e_theta(double t) { return {-std::sin(t), std::cos(t)}; }

}  // namespace detail

/// Sample a radial curve at M nodes. Normals follow n = (r e_r - r' e_theta)/sqrt(r^2 + r'^2).
inline DiscreteBoundary discretize_radial(const RadialCurve& curve, std::size_t m) {
  detail::check_node_count(m);
  DiscreteBoundary b;
  b.nodes.resize(2, static_cast<Eigen::Index>(m));
  b.d1.resizeLike(b.nodes);
  b.d2.resizeLike(b.nodes);
  b.normals.resizeLike(b.nodes);
  b.tangents.resizeLike(b.nodes);
  b.speed.resize(static_cast<Eigen::Index>(m));
  b.curvature.resizeLike(b.speed);
  const auto thetas = fourier::equispaced(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double t = thetas[i];
    const auto j = curve.jet(t);
    require(j.value > 0.0, ErrorKind::NonpositiveRadius,
            "radius " + std::to_string(j.value) + " at node " + std::to_string(i));
    const Eigen::Vector2d er = detail::e_r(t);
    const Eigen::Vector2d et = detail::e_theta(t);
    const double g = j.value, gp = j.d1, gpp = j.d2;
    const double s2 = g * g + gp * gp;
    const double s = std::sqrt(s2);
    b.nodes.col(k) = g * er;
    b.d1.col(k) = gp * er + g * et;
    b.d2.col(k) = (gpp - g) * er + 2.0 * gp * et;
    b.normals.col(k) = (g * er - gp * et) / s;
    b.tangents.col(k) = (gp * er + g * et) / s;
    b.speed[k] = s;
    b.curvature[k] = (g * g + 2.0 * gp * gp - g * gpp) / (s2 * s);
  }
  return b;
}

/// Envelope E[h] = h e_r + h' e_theta of a support function sampled at M nodes.
/// Normal e_r, tangent e_theta, speed h + h'', curvature 1/(h + h'').
inline DiscreteBoundary envelope(const SupportFunction& h, std::size_t m) {
  detail::check_node_count(m);
  DiscreteBoundary b;
  b.nodes.resize(2, static_cast<Eigen::Index>(m));
  b.d1.resizeLike(b.nodes);
  b.d2.resizeLike(b.nodes);
  b.normals.resizeLike(b.nodes);
  b.tangents.resizeLike(b.nodes);
  b.speed.resize(static_cast<Eigen::Index>(m));
  b.curvature.resizeLike(b.speed);
  const auto thetas = fourier::equispaced(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double t = thetas[i];
    const auto j = h.jet(t);
    const double rho = j.value + j.d2;
    require(rho >= -tol_convex, ErrorKind::NotConvex,
            "h + h'' = " + std::to_string(rho) + " at node " + std::to_string(i));
    const Eigen::Vector2d er = detail::e_r(t);
    const Eigen::Vector2d et = detail::e_theta(t);
    b.nodes.col(k) = j.value * er + j.d1 * et;
    b.d1.col(k) = rho * et;
    b.d2.col(k) = (j.d1 + j.d3) * et - rho * er;
    b.normals.col(k) = er;
    b.tangents.col(k) = et;
    b.speed[k] = rho;
    b.curvature[k] = rho > 0.0 ? 1.0 / rho : std::numeric_limits<double>::infinity();
  }
  return b;
}

/// Nodal data of a boundary perturbation V: normal and tangential components
/// and the geometric term V . grad_tau V_n.
struct PerturbationField {
  Eigen::VectorXd normal_velocity;
  Eigen::VectorXd tangential_velocity;
  Eigen::VectorXd tangential_term;
};

/// Support-function perturbation q of h: V = q e_r + q' e_theta, V_n = q and
/// V . grad_tau V_n = (q')^2 / (h + h''), the arclength derivative of V_n along
/// the envelope times V . tau = q'.
inline PerturbationField support_perturbation_field(const SupportFunction& h, std::span<const double> q,
                                                    std::size_t m) {
  require(q.size() == h.coeffs().size(), ErrorKind::DimensionMismatch,
          "perturbation must have the same truncation order as h");
  detail::check_node_count(m);
  PerturbationField f;
  f.normal_velocity.resize(static_cast<Eigen::Index>(m));
  f.tangential_velocity.resize(static_cast<Eigen::Index>(m));
  f.tangential_term.resize(static_cast<Eigen::Index>(m));
  const auto thetas = fourier::equispaced(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto hj = h.jet(thetas[i]);
    const auto qj = fourier::evaluate_jet(q, thetas[i]);
    const double rho = hj.value + hj.d2;
    const auto k = static_cast<Eigen::Index>(i);
    f.normal_velocity[k] = qj.value;
    f.tangential_velocity[k] = qj.d1;
    f.tangential_term[k] = qj.d1 == 0.0 ? 0.0 : qj.d1 * qj.d1 / rho;
  }
  return f;
}

/// Radial perturbation phi of gamma: V = phi e_r, V_n = gamma phi / sqrt(gamma^2 + gamma'^2),
/// V . grad_tau V_n = gamma' phi / (gamma^2 + gamma'^2) * (V_n)'. This term has no sign.
inline PerturbationField radial_perturbation_field(const RadialCurve& gamma, std::span<const double> phi,
                                                   std::size_t m) {
  require(phi.size() == gamma.coeffs().size(), ErrorKind::DimensionMismatch,
          "perturbation must have the same truncation order as gamma");
  detail::check_node_count(m);
  PerturbationField f;
  f.normal_velocity.resize(static_cast<Eigen::Index>(m));
  f.tangential_velocity.resize(static_cast<Eigen::Index>(m));
  f.tangential_term.resize(static_cast<Eigen::Index>(m));
  const auto thetas = fourier::equispaced(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto g = gamma.jet(thetas[i]);
    const auto p = fourier::evaluate_jet(phi, thetas[i]);
    const double s2 = g.value * g.value + g.d1 * g.d1;
    const double s = std::sqrt(s2);
    const double vn = g.value * p.value / s;
    // (gamma phi / s)' with s' = (gamma gamma' + gamma' gamma'') / s
    const double sp = (g.value * g.d1 + g.d1 * g.d2) / s;
    const double vn_prime = (g.d1 * p.value + g.value * p.d1) / s - g.value * p.value * sp / s2;
    const auto k = static_cast<Eigen::Index>(i);
    f.normal_velocity[k] = vn;
    f.tangential_velocity[k] = g.d1 * p.value / s;
    f.tangential_term[k] = g.d1 * p.value / s2 * vn_prime;
  }
  return f;
}

// Admissible set and feasibility restoration.

struct AdmissibleSet {
  double r_lower = 0.1;
  double r_upper = 10.0;
  double coeff_norm_bound = 1e3;  // bound on sqrt(sum (1+l^2)^4 c_l^2)
  bool enforce_convexity = false;
};

struct Projection {
  std::vector<double> coeffs;
  bool active = false;         // false iff the input was returned unchanged
  double norm_scale = 1.0;     // cumulative factor applied to modes l >= 1 by the norm stage
  double range_scale = 1.0;    // cumulative factor applied to modes l >= 1 by the range stage
  double convexity_scale = 1.0;  // cumulative factor applied to modes l >= 2
};

namespace detail {

inline constexpr double feasibility_slack = 1e-12;

inline bool within_norm(std::span<const double> c, const AdmissibleSet& set) {
  return fourier::h4_norm_sq(c) <= set.coeff_norm_bound * set.coeff_norm_bound * (1.0 + feasibility_slack);
}

inline bool within_range(std::span<const double> c, const AdmissibleSet& set) {
  const auto [lo, hi] = min_max_on_grid(c, 0);
  return lo >= set.r_lower - feasibility_slack && hi <= set.r_upper + feasibility_slack;
}

inline bool convex_enough(std::span<const double> c) { return min_max_on_grid(c, 1).first >= -tol_convex; }

inline bool feasible(std::span<const double> c, const AdmissibleSet& set) {
  return within_norm(c, set) && within_range(c, set) && (!set.enforce_convexity || convex_enough(c));
}

inline void scale_modes(std::vector<double>& c, int from_mode, double s) {
  for (std::size_t k = 0; k < c.size(); ++k)
    if (fourier::mode_of(k) >= from_mode) c[k] *= s;
}

}  // namespace detail

inline bool is_admissible(std::span<const double> coeffs, const AdmissibleSet& set) {
  return detail::feasible(coeffs, set);
}

/// Cheap feasibility restoration onto the admissible set (not the metric
/// projection): rescale modes l >= 1 to meet the coefficient-norm bound, shift
/// a0 into the radial bounds, then shrink modes l >= 2 by bisection until
/// h + h'' >= 0. Admissible input is returned unchanged.
inline Projection project_admissible_report(std::span<const double> coeffs, const AdmissibleSet& set) {
  require(set.r_lower > 0.0 && set.r_lower < set.r_upper, ErrorKind::InfeasibleSet,
          "radial bounds must satisfy 0 < r_lower < r_upper");
  require(set.coeff_norm_bound >= set.r_lower, ErrorKind::InfeasibleSet,
          "coefficient-norm bound excludes every constant in [r_lower, r_upper]");
  for (double v : coeffs) require(std::isfinite(v), ErrorKind::InvalidArgument, "non-finite coefficient");

  Projection p;
  p.coeffs.assign(coeffs.begin(), coeffs.end());
  if (detail::feasible(p.coeffs, set)) return p;
  p.active = true;

  auto& c = p.coeffs;
  for (int pass = 0; pass < 32; ++pass) {
    if (!detail::within_norm(c, set)) {
      const double b2 = set.coeff_norm_bound * set.coeff_norm_bound;
      const double rest = fourier::h4_norm_sq(c) - c[0] * c[0];
      const double s = c[0] * c[0] >= b2 ? 0.0 : std::sqrt((b2 - c[0] * c[0]) / rest);
      detail::scale_modes(c, 1, s);
      p.norm_scale *= s;
      if (c[0] > set.coeff_norm_bound) c[0] = set.coeff_norm_bound;
    }
    if (!detail::within_range(c, set)) {
      auto [lo, hi] = detail::min_max_on_grid(c, 0);
      const double width = set.r_upper - set.r_lower;
      if (hi - lo > width) {
        const double s = width / (hi - lo);
        const double a0 = c[0];
        detail::scale_modes(c, 1, s);
        p.range_scale *= s;
        lo = a0 + s * (lo - a0);
        hi = a0 + s * (hi - a0);
      }
      if (lo < set.r_lower) {
        c[0] = set.r_lower + (c[0] - lo);
      } else if (hi > set.r_upper) {
        c[0] = set.r_upper - (hi - c[0]);
      }
    }
    if (set.enforce_convexity && !detail::convex_enough(c)) {
      // h + h'' = a0 + sum_{l>=2} (1 - l^2)(...), so shrinking l >= 2 reaches a0 > 0.
      const std::vector<double> base = c;
      auto shrunk = [&](double s) {
        std::vector<double> t = base;
        detail::scale_modes(t, 2, s);
        return t;
      };
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (detail::convex_enough(shrunk(mid))) lo = mid;
        else hi = mid;
      }
      c = shrunk(lo);
      p.convexity_scale *= lo;
    }
    if (detail::feasible(c, set)) return p;
  }
  throw Error(ErrorKind::InfeasibleSet, "feasibility restoration did not converge");
}

inline std::vector<double> project_admissible(std::span<const double> coeffs, const AdmissibleSet& set) {
  return project_admissible_report(coeffs, set).coeffs;
}

// Jacobian diagnostics for the map from the reference annulus onto the domain
// between sigma e_r and gamma e_r.

struct PhiMapDiagnostics {
  double a_min = 0, a_max = 0;
  double b_min = 0, b_max = 0;
  double c_absmax = 0;
  double sv_min = 0, sv_max = 0;
};

/// Singular values of the upper-triangular matrix [[a, c], [0, b]].
inline std::pair<double, double> triangular_singular_values(double a, double b, double c) {
  const double t = a * a + b * b + c * c;
  const double d = std::abs(a * b);
  const double disc = std::sqrt(std::max(0.0, t * t - 4.0 * d * d));
  const double big = std::sqrt(0.5 * (t + disc));
  const double small = big > 0.0 ? d / big : 0.0;
  return {small, big};
}

inline PhiMapDiagnostics phi_jacobian_diagnostics(const RadialCurve& sigma, const RadialCurve& gamma,
                                                  double r_sigma_upper, double r_gamma_lower,
                                                  std::size_t n_radial = 33, std::size_t n_theta = 0) {
  require(r_sigma_upper < r_gamma_lower, ErrorKind::OrderingViolated,
          "need r_sigma_upper < r_gamma_lower");
  require(n_radial >= 2, ErrorKind::InvalidArgument, "need at least two radial grid points");
  if (n_theta == 0) n_theta = check_grid_size(std::max(sigma.order(), gamma.order()));
  const double width = r_gamma_lower - r_sigma_upper;
  const auto thetas = fourier::equispaced(n_theta);

  PhiMapDiagnostics d;
  d.a_min = d.b_min = d.sv_min = std::numeric_limits<double>::infinity();
  d.a_max = d.b_max = d.sv_max = -std::numeric_limits<double>::infinity();
  for (double t : thetas) {
    const auto s = sigma.jet(t);
    const auto g = gamma.jet(t);
    require(s.value <= r_sigma_upper && g.value >= r_gamma_lower, ErrorKind::OrderingViolated,
            "sigma <= r_sigma_upper <= r_gamma_lower <= gamma fails at theta = " + std::to_string(t));
    const double a = (g.value - s.value) / width;
    for (std::size_t i = 0; i < n_radial; ++i) {
      const double r = i + 1 == n_radial
                           ? r_gamma_lower
                           : r_sigma_upper + width * static_cast<double>(i) / static_cast<double>(n_radial - 1);
      const double b = ((r - r_sigma_upper) * g.value + (r_gamma_lower - r) * s.value) / (r * width);
      const double c = ((r - r_sigma_upper) * g.d1 + (r_gamma_lower - r) * s.d1) / (r * width);
      const auto [lo, hi] = triangular_singular_values(a, b, c);
      d.a_min = std::min(d.a_min, a);
      d.a_max = std::max(d.a_max, a);
      d.b_min = std::min(d.b_min, b);
      d.b_max = std::max(d.b_max, b);
      d.c_absmax = std::max(d.c_absmax, std::abs(c));
      d.sv_min = std::min(d.sv_min, lo);
      d.sv_max = std::max(d.sv_max, hi);
    }
  }
  return d;
}

// Coefficient files: a header line naming the parameterization and N, then one
// CSV line "a0, a-1, a1, ..., a-N, aN". Extra '#' lines before the header are metadata.

inline void write_coefficients(std::ostream& os, Parameterization kind, std::span<const double> coeffs) {
  const int order = fourier::order_of(coeffs.size());
  os << "# kind=" << to_string(kind) << " N=" << order << '\n';
  std::ostringstream line;
  line.precision(17);
  for (std::size_t k = 0; k < coeffs.size(); ++k) line << (k ? ", " : "") << coeffs[k];
  os << line.str() << '\n';
}

struct CoefficientRecord {
  Parameterization kind = Parameterization::radial;
  std::vector<double> coeffs;
};

inline CoefficientRecord read_coefficients(std::istream& is) {
  CoefficientRecord rec;
  int order = -1;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto kpos = line.find("kind=");
      const auto npos = line.find("N=");
      if (kpos != std::string::npos && npos != std::string::npos) {
        std::istringstream ks(line.substr(kpos + 5));
        std::string kind;
        ks >> kind;
        rec.kind = parse_parameterization(kind);
        order = std::stoi(line.substr(npos + 2));
      }
      continue;
    }
    require(order >= 0, ErrorKind::InvalidArgument, "coefficient file lacks a 'kind=... N=...' header");
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) rec.coeffs.push_back(std::stod(cell));
    break;
  }
  require(order >= 0 && rec.coeffs.size() == fourier::coeff_count(order), ErrorKind::DimensionMismatch,
          "coefficient count does not match the header's N");
  return rec;
}

}  // namespace bernoulli
