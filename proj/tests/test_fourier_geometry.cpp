#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "bernoulli/checks.hpp"
#include "bernoulli/fourier.hpp"
#include "bernoulli/geometry.hpp"

using namespace bernoulli;

namespace {

std::vector<double> random_coeffs(int order, std::mt19937_64& rng, double a0, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(fourier::coeff_count(order));
  c[0] = a0;
  for (std::size_t k = 1; k < c.size(); ++k) c[k] = scale * u(rng) / std::pow(1.0 + fourier::mode_of(k), 3);
  return c;
}

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

TEST(Fourier, RoundTripThroughNodalValues) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_coeffs(8, rng, 1.0, 0.5);
    const auto t = fourier::equispaced(64);
    const auto back = fourier::analyze(fourier::evaluate(c, t), 8);
    for (std::size_t k = 0; k < c.size(); ++k) EXPECT_NEAR(back[k], c[k], 1e-12);
  }
}

TEST(Fourier, JetMatchesBasisDerivatives) {
  std::mt19937_64 rng(3);
  const auto c = random_coeffs(5, rng, 0.7, 1.0);
  for (double theta : {0.0, 0.3, 1.7, 4.0}) {
    const auto j = fourier::evaluate_jet(c, theta);
    double d[4] = {0, 0, 0, 0};
    for (std::size_t k = 0; k < c.size(); ++k)
      for (int m = 0; m < 4; ++m) d[m] += c[k] * fourier::basis(k, theta, m);
    EXPECT_NEAR(j.value, d[0], 1e-13);
    EXPECT_NEAR(j.d1, d[1], 1e-12);
    EXPECT_NEAR(j.d2, d[2], 1e-11);
    EXPECT_NEAR(j.d3, d[3], 1e-10);
  }
}

TEST(Fourier, RieszMapIsTheHalfSobolevRepresentative) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> raw(17), q(17);
  for (auto& v : raw) v = u(rng);
  for (auto& v : q) v = u(rng);
  const auto d = fourier::h_half_riesz(raw);
  double dot = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) dot += raw[k] * q[k];
  EXPECT_NEAR(fourier::h_half_inner(d, q), dot, 1e-12);
}

TEST(Fourier, CosineHalfSobolevNorm) {
  const std::vector<double> q{0.0, 0.0, 1.0};
  EXPECT_NEAR(fourier::h_half_function_norm_sq(q), std::numbers::pi * std::sqrt(2.0), 1e-14);
}

TEST(Fourier, SpectralDerivativeOfTrigPolynomial) {
  const std::size_t m = 32;
  const auto t = fourier::equispaced(m);
  Eigen::VectorXd v(m), dv(m);
  for (std::size_t i = 0; i < m; ++i) {
    v[i] = std::sin(3 * t[i]) + 0.5 * std::cos(7 * t[i]);
    dv[i] = 3 * std::cos(3 * t[i]) - 3.5 * std::sin(7 * t[i]);
  }
  const Eigen::VectorXd d = fourier::differentiate(fourier::diff_row(m), v);
  EXPECT_LT((d - dv).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fourier, LogWeightsIntegrateLogKernel) {
  // int_0^{2pi} log(4 sin^2((t - s)/2)) cos(s) ds = -2 pi cos(t).
  const std::size_t m = 32;
  const auto r = fourier::log_weights(m);
  const auto t = fourier::equispaced(m);
  for (std::size_t i = 0; i < m; i += 5) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += r[(i - j + m) % m] * std::cos(t[j]);
    EXPECT_NEAR(s, -2.0 * std::numbers::pi * std::cos(t[i]), 1e-12);
  }
}

TEST(RadialCurve, RejectsNonpositiveRadius) {
  EXPECT_THROW(RadialCurve(std::vector<double>{0.1, 0.0, 0.2}), Error);
  try {
    RadialCurve(std::vector<double>{0.1, 0.0, 0.2});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonpositiveRadius);
  }
}

TEST(RadialCurve, EllipseProjection) {
  // Truncation at N=8 leaves an 8e-4 error at the major axis; the value below
  // comes from an independent 2^16-point quadrature of the exact radial function.
  EXPECT_NEAR(RadialCurve::ellipse(0.4, 0.2, 8).radius(0.0), 0.3991771253, 1e-9);
  const auto e = RadialCurve::ellipse(0.4, 0.2, 24);
  EXPECT_NEAR(e.radius(0.0), 0.4, 1e-6);
  EXPECT_NEAR(e.radius(std::numbers::pi / 2), 0.2, 1e-6);
}

TEST(RadialCurve, CircleDiscretization) {
  const auto b = discretize_radial(RadialCurve::circle(0.7, 2), 64);
  EXPECT_NEAR(b.length(), 2.0 * std::numbers::pi * 0.7, 1e-13);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_NEAR(b.normals.col(i).dot(b.nodes.col(i).normalized()), 1.0, 1e-14);
    EXPECT_NEAR(b.curvature[i], 1.0 / 0.7, 1e-12);
  }
}

TEST(SupportFunction, RejectsNonconvex) {
  // h = 1 + 0.2 cos 3t has h + h'' = 1 - 1.6 cos 3t < 0 somewhere.
  try {
    SupportFunction(std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.2});
    FAIL() << "expected NotConvex";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotConvex);
  }
}

TEST(SupportFunction, EnvelopeOfCircle) {
  const auto b = envelope(SupportFunction::circle(1.3, 3), 48);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_NEAR(b.nodes.col(i).norm(), 1.3, 1e-14);
    EXPECT_NEAR(b.speed[i], 1.3, 1e-14);
    EXPECT_NEAR(b.curvature[i], 1.0 / 1.3, 1e-13);
  }
}

TEST(SupportFunction, EnvelopeTurnsLeftEverywhere) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto cfg = random_configuration(8, 21, i);
    const SupportFunction h(cfg.h);
    const auto b = envelope(h, 256);
    const auto m = b.size();
    for (std::size_t j = 0; j < m; ++j) {
      const Eigen::Vector2d prev = b.nodes.col((j + m - 1) % m);
      const Eigen::Vector2d cur = b.nodes.col(j);
      const Eigen::Vector2d next = b.nodes.col((j + 1) % m);
      ASSERT_GT(cross(cur - prev, next - cur), 0.0) << "sample " << i << " node " << j;
      ASSERT_GT(cross(b.d1.col(j), b.d2.col(j)), 0.0);
    }
  }
}

TEST(SupportFunction, EnvelopeNodesAttainTheSupport) {
  // x(theta) . e_r(theta) = h(theta) on the envelope.
  const auto cfg = random_configuration(8, 4, 0);
  const SupportFunction h(cfg.h);
  const auto b = envelope(h, 64);
  const auto t = fourier::equispaced(64);
  for (std::size_t i = 0; i < t.size(); ++i)
    EXPECT_NEAR(b.nodes.col(i).dot(Eigen::Vector2d(std::cos(t[i]), std::sin(t[i]))), h.jet(t[i]).value, 1e-14);
}

TEST(PerturbationField, SupportFieldOfDilation) {
  const auto f = support_perturbation_field(SupportFunction::circle(1.0, 2), std::vector<double>{1, 0, 0, 0, 0}, 32);
  for (Eigen::Index i = 0; i < f.normal_velocity.size(); ++i) {
    EXPECT_DOUBLE_EQ(f.normal_velocity[i], 1.0);
    EXPECT_DOUBLE_EQ(f.tangential_velocity[i], 0.0);
  }
}

TEST(Projection, AdmissibleInputIsUnchanged) {
  const AdmissibleSet set{0.5, 2.0, 1e3, true};
  const std::vector<double> c{1.0, 0.01, -0.02, 0.0, 0.005};
  const auto p = project_admissible_report(c, set);
  EXPECT_FALSE(p.active);
  EXPECT_EQ(p.coeffs, c);
}

TEST(Projection, IdempotentAndFeasible) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (bool convex : {false, true}) {
    const AdmissibleSet set{0.6, 2.5, 50.0, convex};
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> c(17);
      c[0] = 1.5 + 2.0 * u(rng);
      for (std::size_t k = 1; k < c.size(); ++k) c[k] = 0.6 * u(rng) / (1.0 + fourier::mode_of(k));
      const auto once = project_admissible(c, set);
      EXPECT_TRUE(is_admissible(once, set));
      const auto twice = project_admissible(once, set);
      ASSERT_EQ(once, twice);
    }
  }
}

TEST(Projection, InfeasibleSetIsReported) {
  const std::vector<double> c{1.0};
  try {
    project_admissible(c, AdmissibleSet{2.0, 1.0, 10.0, false});
    FAIL() << "expected InfeasibleSet";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleSet);
  }
  try {
    project_admissible(c, AdmissibleSet{0.5, 1.0, 0.1, false});
    FAIL() << "expected InfeasibleSet";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleSet);
  }
}

TEST(PhiMap, ConcentricCircles) {
  // a = (1 - 0.5)/0.3; b(r) = (0.5 r - 0.15)/(0.3 r) increases from 5/6 at r=0.6 to 10/9 at r=0.9; c = 0.
  const auto d = phi_jacobian_diagnostics(RadialCurve::circle(0.5), RadialCurve::circle(1.0), 0.6, 0.9);
  EXPECT_NEAR(d.a_min, 0.5 / 0.3, 1e-14);
  EXPECT_NEAR(d.a_max, 0.5 / 0.3, 1e-14);
  EXPECT_NEAR(d.b_min, 5.0 / 6.0, 1e-14);
  EXPECT_NEAR(d.b_max, 10.0 / 9.0, 1e-14);
  EXPECT_DOUBLE_EQ(d.c_absmax, 0.0);
  EXPECT_NEAR(d.sv_min, 5.0 / 6.0, 1e-14);
  EXPECT_NEAR(d.sv_max, 0.5 / 0.3, 1e-14);
}

TEST(PhiMap, OrderingViolated) {
  try {
    phi_jacobian_diagnostics(RadialCurve::circle(0.5), RadialCurve::circle(1.0), 0.9, 0.6);
    FAIL() << "expected OrderingViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OrderingViolated);
  }
  try {
    phi_jacobian_diagnostics(RadialCurve::circle(0.7), RadialCurve::circle(1.0), 0.6, 0.9);
    FAIL() << "expected OrderingViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OrderingViolated);
  }
}

TEST(CoefficientFile, RoundTripIsExact) {
  std::mt19937_64 rng(2);
  const auto c = random_coeffs(8, rng, 0.9, 0.1);
  std::stringstream ss;
  ss << "# some metadata\n";
  write_coefficients(ss, Parameterization::support, c);
  const auto rec = read_coefficients(ss);
  EXPECT_EQ(rec.kind, Parameterization::support);
  EXPECT_EQ(rec.coeffs, c);
}
