#pragma once

// Closed forms for concentric circles: Sigma of radius r_s, Gamma of radius r_g.
//   u(r) = log(r / r_g) / log(r_s / r_g)
//   J(r_g, r_s) = 2 pi / log(r_g / r_s) + pi lambda^2 (r_g^2 - r_s^2)
//   free radius F(r_s) = 1 / (lambda W(1 / (lambda r_s)))

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "bernoulli/errors.hpp"

namespace bernoulli::oracle {

/// Principal branch of Lambert's W for x > 0, Halley iteration from log(1 + x).
inline double lambert_w(double x) {
  require(x > 0.0 && std::isfinite(x), ErrorKind::InvalidArgument, "lambert_w needs finite x > 0");
  double w = std::log1p(x);
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) break;
  }
  return w;
}

inline double free_radius(double r_sigma, double lambda) {
  require(r_sigma > 0.0 && lambda > 0.0, ErrorKind::InvalidArgument, "free_radius needs r_sigma, lambda > 0");
  return 1.0 / (lambda * lambert_w(1.0 / (lambda * r_sigma)));
}

inline double energy_circles(double r_gamma, double r_sigma, double lambda) {
  require(r_sigma > 0.0, ErrorKind::InvalidArgument, "r_sigma must be positive");
  require(r_gamma > r_sigma, ErrorKind::DegenerateAnnulus, "need r_gamma > r_sigma");
  return 2.0 * std::numbers::pi / std::log(r_gamma / r_sigma) +
         std::numbers::pi * lambda * lambda * (r_gamma * r_gamma - r_sigma * r_sigma);
}

/// d/dr_gamma of energy_circles.
inline double energy_circles_derivative(double r_gamma, double r_sigma, double lambda) {
  require(r_gamma > r_sigma && r_sigma > 0.0, ErrorKind::DegenerateAnnulus, "need r_gamma > r_sigma > 0");
  const double l = std::log(r_gamma / r_sigma);
  return -2.0 * std::numbers::pi / (r_gamma * l * l) + 2.0 * std::numbers::pi * lambda * lambda * r_gamma;
}

/// r_sigma equals r1 with probability p and r2 otherwise.
struct TwoPointRadiusLaw {
  double r1 = 0.5;
  double r2 = 1.0;
  double p = 0.5;

  void validate() const {
    require(r1 > 0.0 && r1 < r2, ErrorKind::InvalidArgument, "two-point law needs 0 < r1 < r2");
    require(p >= 0.0 && p <= 1.0, ErrorKind::InvalidArgument, "two-point law needs p in [0, 1]");
  }
};

inline double expected_energy_two_point(double r_gamma, const TwoPointRadiusLaw& law, double lambda) {
  law.validate();
  require(r_gamma > law.r2, ErrorKind::DegenerateAnnulus, "need r_gamma > r2");
  const double pi = std::numbers::pi;
  return 2.0 * pi * law.p / std::log(r_gamma / law.r1) + 2.0 * pi * (1.0 - law.p) / std::log(r_gamma / law.r2) +
         pi * lambda * lambda *
             (r_gamma * r_gamma - law.p * law.r1 * law.r1 - (1.0 - law.p) * law.r2 * law.r2);
}

/// Golden-section search for the minimizer of a unimodal f on [a, b].
template <class F>
double golden_section(F&& f, double a, double b, double tol = 1e-10) {
  require(a <= b, ErrorKind::InvalidArgument, "golden_section needs a <= b");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Minimizer of E[J] over r_gamma >= r2 + delta. Each summand is convex with
/// its minimum at F(r_i), so the minimizer lies in [F(r1), F(r2)] clipped to the constraint.
inline double minimize_expected_two_point(const TwoPointRadiusLaw& law, double lambda, double delta) {
  law.validate();
  require(delta > 0.0, ErrorKind::InvalidArgument, "delta must be positive");
  const double lo = std::max(law.r2 + delta, free_radius(law.r1, lambda));
  const double hi = std::max(law.r2 + delta, free_radius(law.r2, lambda));
  if (hi <= lo) return lo;
  return golden_section([&](double r) { return expected_energy_two_point(r, law, lambda); }, lo, hi);
}

/// Minimizer of E[J] without the gap constraint: over (r1, inf) when p = 1,
/// otherwise over (r2, inf), where E[J] blows up at r2.
inline double unconstrained_minimizer_two_point(const TwoPointRadiusLaw& law, double lambda) {
  law.validate();
  if (law.p == 1.0) return free_radius(law.r1, lambda);
  const double f2 = free_radius(law.r2, lambda);
  const double lo = std::max(law.r2 * (1.0 + 1e-12), std::min(free_radius(law.r1, lambda), f2));
  return golden_section([&](double r) { return expected_energy_two_point(r, law, lambda); }, lo, f2);
}

struct CrossingReport {
  double f_r1 = 0.0;
  double f_r2 = 0.0;
  bool crossing_regime = false;  // F(r1) < r2
  double delta = 0.05;
  bool violation = false;  // some p puts the unconstrained minimizer below r2 + delta
  double p_violation_lo = 0.0;  // violating p form the interval [p_violation_lo, 1]
  double minimizer_at_law_p = 0.0;
  double minimizer_at_p1 = 0.0;
};

/// The unconstrained minimizer decreases from F(r2) at p = 0 to F(r1) at p = 1;
/// the threshold p where it crosses r2 + delta is located by bisection.
inline CrossingReport crossing_check(const TwoPointRadiusLaw& law, double lambda, double delta = 0.05) {
  law.validate();
  require(delta > 0.0, ErrorKind::InvalidArgument, "delta must be positive");
  CrossingReport rep;
  rep.delta = delta;
  rep.f_r1 = free_radius(law.r1, lambda);
  rep.f_r2 = free_radius(law.r2, lambda);
  rep.crossing_regime = rep.f_r1 < law.r2;
  rep.minimizer_at_law_p = unconstrained_minimizer_two_point(law, lambda);
  rep.minimizer_at_p1 = rep.f_r1;

  auto minimizer = [&](double p) {
    TwoPointRadiusLaw l = law;
    l.p = p;
    return unconstrained_minimizer_two_point(l, lambda);
  };
  const double threshold = law.r2 + delta;
  rep.violation = rep.f_r1 < threshold;
  if (!rep.violation) {
    rep.p_violation_lo = 1.0;
    return rep;
  }
  if (minimizer(0.0) < threshold) {
    rep.p_violation_lo = 0.0;
    return rep;
  }
  double a = 0.0, b = 1.0;
  while (b - a > 1e-12) {
    const double mid = 0.5 * (a + b);
    if (minimizer(mid) < threshold) b = mid;
    else a = mid;
  }
  rep.p_violation_lo = b;
  return rep;
}

inline void print_report(std::ostream& os, const CrossingReport& r) {
  os << "F(r1)                 " << r.f_r1 << '\n'
     << "F(r2)                 " << r.f_r2 << '\n'
     << "crossing_regime       " << (r.crossing_regime ? "yes" : "no") << '\n'
     << "delta                 " << r.delta << '\n'
     << "minimizer(p)          " << r.minimizer_at_law_p << '\n'
     << "minimizer(p=1)        " << r.minimizer_at_p1 << '\n';
  if (r.violation)
    os << "violating_p           [" << r.p_violation_lo << ", 1]\n";
  else
    os << "violating_p           none\n";
}

}  // namespace bernoulli::oracle
