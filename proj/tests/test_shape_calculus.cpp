#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bernoulli/analytic_oracle.hpp"
#include "bernoulli/checks.hpp"
#include "bernoulli/shape_calculus.hpp"
#include "bernoulli/sgd.hpp"

using namespace bernoulli;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> circle_coeffs(int order, double r) {
  std::vector<double> c(fourier::coeff_count(order), 0.0);
  c[0] = r;
  return c;
}

AnnularDomain concentric_domain(double r_sigma, double r_gamma, int order, Parameterization kind, std::size_t m = 128) {
  return build_domain(RadialCurve::circle(r_sigma, order), circle_coeffs(order, r_gamma), kind, m, m);
}

}  // namespace

TEST(ShapeGradient, ConcentricDensity) {
  // g = lambda^2 - (1/(r_Gamma log(r_Gamma/r_Sigma)))^2 = 1 - 1/log(2)^2.
  const auto dom = concentric_domain(0.5, 1.0, 4, Parameterization::radial);
  const auto g = shape_gradient_density(dom, 1.0);
  const double expected = 1.0 - 1.0 / (std::log(2.0) * std::log(2.0));
  EXPECT_NEAR(expected, -1.081368, 1e-6);
  for (Eigen::Index i = 0; i < g.values.size(); ++i) EXPECT_NEAR(g.values[i], expected, 1e-9);
  // Dilation V_n = 1: int g ds equals dJ/dr_Gamma of the closed form.
  EXPECT_NEAR(g.values.dot(g.arc_weights), oracle::energy_circles_derivative(1.0, 0.5, 1.0), 1e-8);
  EXPECT_NEAR(g.values.dot(g.arc_weights), -6.794442, 1e-6);
}

TEST(ShapeGradient, VanishesAtTheFreeRadius) {
  for (double lambda : {0.5, 1.0, 2.0}) {
    const double f = oracle::free_radius(0.5, lambda);
    const auto g = shape_gradient_density(concentric_domain(0.5, f, 4, Parameterization::radial), lambda);
    EXPECT_LT(g.values.cwiseAbs().maxCoeff(), 1e-9) << "lambda " << lambda;
  }
}

TEST(ShapeGradient, ZeroDensityGivesZeroGradient) {
  ShapeGradientDensity d{Eigen::VectorXd::Zero(64), Eigen::VectorXd::Ones(64)};
  const std::vector<double> h{1.0, 0.02, 0.0, 0.0, 0.01};
  for (double v : gradient_radial(d, RadialCurve(h)).coeffs) EXPECT_EQ(v, 0.0);
  for (double v : gradient_support(d, SupportFunction(h)).coeffs) EXPECT_EQ(v, 0.0);
}

TEST(ShapeGradient, ConstantDensityOnCircle) {
  // Only the a0 entry survives and equals 2 pi R c.
  const double r = 1.3, c = -0.7;
  ShapeGradientDensity d{Eigen::VectorXd::Constant(64, c), Eigen::VectorXd::Ones(64)};
  const auto gr = gradient_radial(d, RadialCurve::circle(r, 4));
  const auto gs = gradient_support(d, SupportFunction::circle(r, 4));
  EXPECT_NEAR(gr.coeffs[0], 2.0 * pi * r * c, 1e-13);
  EXPECT_NEAR(gs.coeffs[0], 2.0 * pi * r * c, 1e-13);
  for (std::size_t k = 1; k < gr.coeffs.size(); ++k) {
    EXPECT_NEAR(gr.coeffs[k], 0.0, 1e-13);
    EXPECT_NEAR(gs.coeffs[k], 0.0, 1e-13);
  }
}

TEST(ShapeGradient, LinearInDensity) {
  const auto cfg = random_configuration(8, 3, 0);
  ShapeGradientDensity d{Eigen::VectorXd::Zero(128), Eigen::VectorXd::Ones(128)};
  const auto t = fourier::equispaced(128);
  for (std::size_t i = 0; i < t.size(); ++i) d.values[static_cast<Eigen::Index>(i)] = std::sin(2 * t[i]) + 0.3;
  ShapeGradientDensity d2 = d;
  d2.values *= 2.0;
  for (auto kind : {Parameterization::radial, Parameterization::support}) {
    const auto a = coefficient_gradient(d, cfg.h, kind);
    const auto b = coefficient_gradient(d2, cfg.h, kind);
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) {
      EXPECT_EQ(b.coeffs[k], 2.0 * a.coeffs[k]);
      EXPECT_EQ(b.preconditioned[k], 2.0 * a.preconditioned[k]);
    }
  }
}

TEST(ShapeGradient, RadialFiniteDifferenceOnConcentricAnnulus) {
  // Mode a1 (sin theta) at +-1e-5; the entry vanishes by symmetry, so the
  // comparison is against the a0 scale.
  const int order = 4;
  const SolverSettings solver{128, 128, default_gap_min};
  const auto sigma = RadialCurve::circle(0.5, order);
  const auto h = circle_coeffs(order, 1.0);
  const auto e = evaluate_sample(h, Parameterization::radial, sigma, 1.0, solver);
  for (std::size_t k : {std::size_t{0}, std::size_t{1}}) {
    auto hp = h, hm = h;
    hp[k] += 1e-5;
    hm[k] -= 1e-5;
    const double fd = (evaluate_energy(hp, Parameterization::radial, sigma, 1.0, solver) -
                       evaluate_energy(hm, Parameterization::radial, sigma, 1.0, solver)) /
                      2e-5;
    EXPECT_LE(std::abs(fd - e.gradient.coeffs[k]), 1e-4 * std::abs(e.gradient.coeffs[0])) << "coefficient " << k;
  }
}

TEST(ShapeGradient, SupportFiniteDifferenceInCos2) {
  const auto cfg = random_configuration(8, 5, 1);
  const SolverSettings solver;
  const auto e = evaluate_sample(cfg.h, Parameterization::support, cfg.sigma, 1.0, solver);
  const std::size_t k = 4;  // cos 2 theta
  auto hp = cfg.h, hm = cfg.h;
  hp[k] += 1e-5;
  hm[k] -= 1e-5;
  const double fd = (evaluate_energy(hp, Parameterization::support, cfg.sigma, 1.0, solver) -
                     evaluate_energy(hm, Parameterization::support, cfg.sigma, 1.0, solver)) /
                    2e-5;
  EXPECT_LE(std::abs(fd - e.gradient.coeffs[k]), 1e-4 * std::abs(fd));
}

TEST(ShapeGradient, FiniteDifferenceSuiteOnTwoConfigurations) {
  GradientCheckOptions opt;
  opt.configurations = 2;
  opt.seed = 99;
  const auto res = gradient_fd_check(opt);
  EXPECT_EQ(res.rows.size(), 2u * 2u * 17u);
  EXPECT_LE(res.max_rel_error, 1e-3);
}

TEST(ShapeGradient, PreconditionerRieszIdentity) {
  const auto cfg = random_configuration(8, 5, 2);
  const auto e = evaluate_sample(cfg.h, Parameterization::radial, cfg.sigma, 1.0, {});
  const auto q = random_perturbation(8, 5, 2);
  double dot = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) dot += e.gradient.coeffs[k] * q[k];
  EXPECT_NEAR(fourier::h_half_inner(e.gradient.preconditioned, q), dot, 1e-12 * std::max(1.0, std::abs(dot)));
}

TEST(ShapeHessian, ZeroPerturbation) {
  const auto dom = concentric_domain(0.5, 1.0, 2, Parameterization::support);
  const auto hf = hessian_quadratic_form(dom, SupportFunction::circle(1.0, 2), std::vector<double>(5, 0.0), 1.0);
  EXPECT_EQ(hf.value, 0.0);
  EXPECT_EQ(hf.i1, 0.0);
  EXPECT_EQ(hf.i2, 0.0);
}

TEST(ShapeHessian, DirichletPartOnConcentricAnnulus) {
  // u' = A (r - a^2/r) cos theta with u'(1) = 1/log 2: int du'/dn u' = pi (1 + a^2)/(1 - a^2)/log(2)^2.
  const auto dom = concentric_domain(0.5, 1.0, 2, Parameterization::support);
  const std::vector<double> q{0.0, 0.0, 1.0, 0.0, 0.0};
  const auto hf = hessian_quadratic_form(dom, SupportFunction::circle(1.0, 2), q, 1.0);
  const double ln2 = std::log(2.0);
  EXPECT_NEAR(hf.dirichlet_part, pi * 1.25 / 0.75 / (ln2 * ln2), 1e-9);
}

TEST(ShapeHessian, SecondDifferenceOnConcentricAnnulus) {
  const int order = 2;
  const SolverSettings solver{128, 128, default_gap_min};
  const auto sigma = RadialCurve::circle(0.5, order);
  const auto h = circle_coeffs(order, 1.0);
  const std::vector<double> q{0.0, 0.0, 1.0, 0.0, 0.0};
  const auto dom = build_domain(sigma, h, Parameterization::support, 128, 128);
  const auto hf = hessian_quadratic_form(dom, SupportFunction(h), q, 1.0);
  const double eps = 1e-3;
  auto hp = h, hm = h;
  hp[2] += eps;
  hm[2] -= eps;
  const auto j = [&](const std::vector<double>& v) {
    return evaluate_energy(v, Parameterization::support, sigma, 1.0, solver);
  };
  const double fd = (j(hp) - 2.0 * j(h) + j(hm)) / (eps * eps);
  EXPECT_NEAR(hf.value / fd, 1.0, 1e-3);
  // The coercivity ratio with ||cos||^2 = pi sqrt 2.
  EXPECT_NEAR(hf.value / fourier::h_half_function_norm_sq(q), hf.value / (pi * std::sqrt(2.0)), 1e-14);
}

TEST(ShapeHessian, SecondDifferenceSuite) {
  const auto res = hessian_fd_check(8, 1.0, 3, 17);
  EXPECT_LE(res.max_rel_error, 1e-3);
}

TEST(ShapeHessian, RadialFormMatchesSecondDifference) {
  const auto cfg = random_configuration(8, 8, 3);
  const auto phi = random_perturbation(8, 8, 3);
  const SolverSettings solver;
  const RadialCurve gamma(cfg.h);
  const auto dom = build_domain(cfg.sigma, cfg.h, Parameterization::radial, 136, 136);
  const auto hf = hessian_quadratic_form_radial(dom, gamma, phi, 1.0);
  const double eps = 1e-3;
  auto hp = cfg.h, hm = cfg.h;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    hp[k] += eps * phi[k];
    hm[k] -= eps * phi[k];
  }
  const auto j = [&](const std::vector<double>& v) {
    return evaluate_energy(v, Parameterization::radial, cfg.sigma, 1.0, solver);
  };
  EXPECT_NEAR(hf.value / ((j(hp) - 2.0 * j(cfg.h) + j(hm)) / (eps * eps)), 1.0, 1e-3);
}

TEST(ShapeHessian, PolarizationIsSymmetric) {
  const auto cfg = random_configuration(8, 12, 0);
  const auto q1 = random_perturbation(8, 12, 0);
  const auto q2 = random_perturbation(8, 12, 1);
  const SupportFunction h(cfg.h);
  const auto dom = build_domain(cfg.sigma, cfg.h, Parameterization::support, 136, 136);
  const DirichletSolver ds(dom);
  const auto state = ds.solve_state();
  auto form = [&](const std::vector<double>& a, const std::vector<double>& b, double s) {
    std::vector<double> v(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) v[k] = a[k] + s * b[k];
    return hessian_quadratic_form(ds, state, h, v, 1.0).value;
  };
  const double b12 = 0.25 * (form(q1, q2, 1.0) - form(q1, q2, -1.0));
  const double b21 = 0.25 * (form(q2, q1, 1.0) - form(q2, q1, -1.0));
  EXPECT_NEAR(b12, b21, 1e-8 * std::abs(b12));
}

TEST(ShapeHessian, PositiveNearTheOptimum) {
  const auto res = coercivity_probe(8, 1.0, 100, 5);
  ASSERT_EQ(res.samples.size(), 100u);
  for (const auto& s : res.samples) {
    EXPECT_GT(s.value, 0.0) << "sample " << s.index;
    EXPECT_GE(s.i2, 0.0) << "sample " << s.index;
  }
  EXPECT_GT(res.c_e, 0.0);
}

TEST(ShapeHessian, CoercivityEstimateIsMonotone) {
  const auto res = coercivity_probe(8, 1.0, 30, 6);
  double running = std::numeric_limits<double>::infinity();
  double previous = running;
  for (const auto& s : res.samples) {
    running = std::min(running, s.ratio);
    EXPECT_LE(running, previous);
    previous = running;
  }
  EXPECT_EQ(running, res.c_e);
}

TEST(ShapeHessian, IndefiniteFarFromTheOptimum) {
  // lambda = 3 on the 0.5/1.0 annulus: g = 9 - 1/log(2)^2 > 0 on Gamma, and the
  // -int g q'^2 term makes mode 3 a descent-curvature direction.
  const auto dom = concentric_domain(0.5, 1.0, 3, Parameterization::support);
  std::vector<double> q(7, 0.0);
  q[6] = 1.0;
  const auto hf = hessian_quadratic_form(dom, SupportFunction::circle(1.0, 3), q, 3.0);
  EXPECT_LT(hf.value, 0.0);
  EXPECT_GE(hf.i2, 0.0);
}
