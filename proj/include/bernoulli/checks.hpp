#pragma once

// Finite-difference verification of the shape gradient and Hessian, and the
// empirical coercivity probe, on random admissible configurations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "bernoulli/fourier.hpp"
#include "bernoulli/geometry.hpp"
#include "bernoulli/random_boundary.hpp"
#include "bernoulli/sgd.hpp"
#include "bernoulli/shape_calculus.hpp"

namespace bernoulli {

struct CheckConfiguration {
  RadialCurve sigma;
  std::vector<double> h;  // valid both as a radial function and as a convex support function
};

/// Interior: a draw of the ellipse model. Outer: a0 in [0.8, 1.0] plus modes
/// uniform in +-0.1/(1+l)^3, which keeps h + h'' >= a0 - 0.37 > 0 and h >= 0.76.
inline CheckConfiguration random_configuration(int order, std::uint64_t seed, std::uint64_t index) {
  const auto model = ellipse_model(order, 0.05, seed);
  CheckConfiguration c{sample_interior(model, index, SamplerKind::mc), {}};
  const auto u = counter_uniforms(seed ^ 0x9e3779b97f4a7c15ull, index, 0, fourier::coeff_count(order));
  c.h.resize(u.size());
  c.h[0] = 0.8 + 0.2 * u[0];
  for (std::size_t k = 1; k < u.size(); ++k) {
    const double l = 1.0 + fourier::mode_of(k);
    c.h[k] = (2.0 * u[k] - 1.0) * 0.1 / (l * l * l);
  }
  return c;
}

/// Random perturbation with coefficients uniform in +-1/(1+l).
inline std::vector<double> random_perturbation(int order, std::uint64_t seed, std::uint64_t index) {
  const auto u = counter_uniforms(seed ^ 0x5851f42d4c957f2dull, index, 0, fourier::coeff_count(order));
  std::vector<double> q(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) q[k] = (2.0 * u[k] - 1.0) / (1.0 + fourier::mode_of(k));
  return q;
}

/// Coefficient indices of the listed frequencies (both sine and cosine for l >= 1).
inline std::vector<std::size_t> coefficient_indices(const std::vector<int>& modes, int order) {
  std::vector<std::size_t> idx;
  for (int l : modes) {
    require(l >= 0 && l <= order, ErrorKind::InvalidArgument, "mode " + std::to_string(l) + " out of range");
    if (l == 0) {
      idx.push_back(0);
    } else {
      idx.push_back(static_cast<std::size_t>(2 * l - 1));
      idx.push_back(static_cast<std::size_t>(2 * l));
    }
  }
  return idx;
}

struct GradientCheckRow {
  std::size_t configuration = 0;
  Parameterization kind = Parameterization::radial;
  std::size_t coefficient = 0;
  double analytic = 0.0;
  double finite_difference = 0.0;
  double rel_error = 0.0;
};

struct GradientCheckResult {
  std::vector<GradientCheckRow> rows;
  double max_rel_error = 0.0;
};

struct GradientCheckOptions {
  int order = 8;
  double lambda = 1.0;
  std::size_t configurations = 20;
  std::vector<int> modes;  // empty: all 0..N
  std::uint64_t seed = 7;
  SolverSettings solver;
  std::vector<Parameterization> kinds{Parameterization::radial, Parameterization::support};
  double step = 0.0;  // 0: cbrt(machine epsilon) times max(1, |a0|)
};

/// Relative error of an analytic entry against its centered difference. Entries
/// that vanish by near-symmetry are measured against 1e-6 of the largest entry.
inline double fd_relative_error(double analytic, double fd, double scale) {
  return std::abs(analytic - fd) / std::max(std::abs(fd), 1e-6 * scale);
}

inline GradientCheckResult gradient_fd_check(const GradientCheckOptions& opt) {
  std::vector<int> modes = opt.modes;
  if (modes.empty())
    for (int l = 0; l <= opt.order; ++l) modes.push_back(l);
  const auto idx = coefficient_indices(modes, opt.order);

  GradientCheckResult res;
  for (std::size_t c = 0; c < opt.configurations; ++c) {
    const auto cfg = random_configuration(opt.order, opt.seed, c);
    for (auto kind : opt.kinds) {
      const auto eval = evaluate_sample(cfg.h, kind, cfg.sigma, opt.lambda, opt.solver);
      const double eps = opt.step > 0.0 ? opt.step
                                        : std::cbrt(std::numeric_limits<double>::epsilon()) *
                                              std::max(1.0, std::abs(cfg.h[0]));
      std::vector<double> fd(idx.size());
      parallel_for(idx.size(), [&](std::size_t i) {
        auto hp = cfg.h;
        auto hm = cfg.h;
        hp[idx[i]] += eps;
        hm[idx[i]] -= eps;
        fd[i] = (evaluate_energy(hp, kind, cfg.sigma, opt.lambda, opt.solver) -
                 evaluate_energy(hm, kind, cfg.sigma, opt.lambda, opt.solver)) /
                (2.0 * eps);
      });
      double scale = 0.0;
      for (double v : eval.gradient.coeffs) scale = std::max(scale, std::abs(v));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        GradientCheckRow row{c, kind, idx[i], eval.gradient.coeffs[idx[i]], fd[i], 0.0};
        row.rel_error = fd_relative_error(row.analytic, row.finite_difference, scale);
        res.max_rel_error = std::max(res.max_rel_error, row.rel_error);
        res.rows.push_back(row);
      }
    }
  }
  return res;
}

struct HessianCheckRow {
  std::size_t configuration = 0;
  double value = 0.0;
  double second_difference = 0.0;
  double rel_error = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
};

struct HessianCheckResult {
  std::vector<HessianCheckRow> rows;
  double max_rel_error = 0.0;
};

/// Second differences (J(h + eps q) - 2 J(h) + J(h - eps q)) / eps^2 in the
/// support parameterization against the assembled quadratic form.
inline HessianCheckResult hessian_fd_check(int order, double lambda, std::size_t configurations, std::uint64_t seed,
                                           const SolverSettings& solver = {}, double eps = 1e-3) {
  HessianCheckResult res;
  res.rows.resize(configurations);
  parallel_for(configurations, [&](std::size_t c) {
    const auto cfg = random_configuration(order, seed, c);
    const auto q = random_perturbation(order, seed, c);
    const SupportFunction h(cfg.h);
    const auto domain = build_domain(cfg.sigma, cfg.h, Parameterization::support, solver.inner_nodes(order),
                                     solver.outer_nodes(order), solver.gap_min);
    const auto hf = hessian_quadratic_form(domain, h, q, lambda);
    auto hp = cfg.h;
    auto hm = cfg.h;
    for (std::size_t k = 0; k < q.size(); ++k) {
      hp[k] += eps * q[k];
      hm[k] -= eps * q[k];
    }
    const auto j = [&](const std::vector<double>& v) {
      return evaluate_energy(v, Parameterization::support, cfg.sigma, lambda, solver);
    };
    const double fd = (j(hp) - 2.0 * j(cfg.h) + j(hm)) / (eps * eps);
    res.rows[c] = {c, hf.value, fd, std::abs(hf.value - fd) / std::abs(fd), hf.i1, hf.i2};
  });
  for (const auto& r : res.rows) res.max_rel_error = std::max(res.max_rel_error, r.rel_error);
  return res;
}

struct CoercivitySample {
  std::size_t index = 0;
  double value = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double norm_sq = 0.0;
  double ratio = 0.0;
};

struct CoercivityResult {
  std::vector<CoercivitySample> samples;
  double c_e = std::numeric_limits<double>::infinity();  // min ratio
  double min_value = std::numeric_limits<double>::infinity();
  double min_i2 = std::numeric_limits<double>::infinity();
};

/// Minimum over sampled (h, sigma, q) of D^2 J[q, q] / ||q||^2_{H^{1/2}} in the
/// support parameterization. Running minima over the first n samples are nonincreasing in n.
inline CoercivityResult coercivity_probe(int order, double lambda, std::size_t num_samples, std::uint64_t seed,
                                         const SolverSettings& solver = {}) {
  CoercivityResult res;
  res.samples.resize(num_samples);
  parallel_for(num_samples, [&](std::size_t s) {
    const auto cfg = random_configuration(order, seed, s);
    const auto q = random_perturbation(order, seed, s);
    const SupportFunction h(cfg.h);
    const auto domain = build_domain(cfg.sigma, cfg.h, Parameterization::support, solver.inner_nodes(order),
                                     solver.outer_nodes(order), solver.gap_min);
    const auto hf = hessian_quadratic_form(domain, h, q, lambda);
    const double n2 = fourier::h_half_function_norm_sq(q);
    res.samples[s] = {s, hf.value, hf.i1, hf.i2, n2, hf.value / n2};
  });
  for (const auto& s : res.samples) {
    res.c_e = std::min(res.c_e, s.ratio);
    res.min_value = std::min(res.min_value, s.value);
    res.min_i2 = std::min(res.min_i2, s.i2);
  }
  return res;
}

}  // namespace bernoulli
