#pragma once

// Projected stochastic gradient method
//   h_{n+1} = P(h_n - t_n G(h_n, xi_n)),  t_n = theta / (n + offset),
// with G the H^{1/2}-preconditioned coefficient gradient of one sample, and
// sample-average estimators of E[J] and E[grad J].

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "bernoulli/errors.hpp"
#include "bernoulli/fourier.hpp"
#include "bernoulli/geometry.hpp"
#include "bernoulli/laplace_solver.hpp"
#include "bernoulli/parallel.hpp"
#include "bernoulli/random_boundary.hpp"
#include "bernoulli/shape_calculus.hpp"

namespace bernoulli {

struct StepSchedule {
  double theta = 1.0 / 400.0;
  double offset = 0.0;

  double at(long n) const { return theta / (static_cast<double>(n) + offset); }
};

struct SolverSettings {
  std::size_t m_inner = 0;  // 0 selects default_node_count(N)
  std::size_t m_outer = 0;
  double gap_min = default_gap_min;

  std::size_t inner_nodes(int order) const { return m_inner ? m_inner : default_node_count(order); }
  std::size_t outer_nodes(int order) const { return m_outer ? m_outer : default_node_count(order); }
};

/// Value and preconditioned gradient of J(., sigma) at one outer boundary.
struct SampleEvaluation {
  double value = 0.0;
  CoefficientGradient gradient;
};

inline SampleEvaluation evaluate_sample(std::span<const double> outer, Parameterization kind,
                                        const RadialCurve& sigma, double lambda, const SolverSettings& solver) {
  const int order = fourier::order_of(outer.size());
  const auto domain = build_domain(sigma, outer, kind, solver.inner_nodes(order), solver.outer_nodes(order),
                                   solver.gap_min);
  const DirichletSolver ds(domain);
  const auto state = ds.solve_state();
  SampleEvaluation e;
  e.value = state.energy_flux_term + lambda * lambda * state.area;
  e.gradient = coefficient_gradient(shape_gradient_density(domain, state, lambda), outer, kind);
  return e;
}

inline double evaluate_energy(std::span<const double> outer, Parameterization kind, const RadialCurve& sigma,
                              double lambda, const SolverSettings& solver) {
  const int order = fourier::order_of(outer.size());
  return dirichlet_energy(
      build_domain(sigma, outer, kind, solver.inner_nodes(order), solver.outer_nodes(order), solver.gap_min),
      lambda);
}

/// G(h, xi): the preconditioned coefficient gradient for one interior sample.
inline CoefficientGradient stochastic_gradient(std::span<const double> h, const RadialCurve& sigma, double lambda,
                                               Parameterization kind, const SolverSettings& solver = {}) {
  return evaluate_sample(h, kind, sigma, lambda, solver).gradient;
}

/// Discrete H^{1/2} norm of a preconditioned gradient.
inline double gradient_norm(std::span<const double> preconditioned) {
  return std::sqrt(fourier::h_half_inner(preconditioned, preconditioned));
}

struct SgdConfig {
  double lambda = 1.0;
  long iterations = 1000;  // K
  StepSchedule schedule;
  Parameterization kind = Parameterization::radial;
  std::uint64_t seed = 1;
  RandomBoundaryModel model = ellipse_model();
  SamplerKind sampler = SamplerKind::mc;
  AdmissibleSet admissible{0.65, 3.0, 1e3, false};
  double initial_radius = 0.75;
  SolverSettings solver;
  int max_step_halvings = 5;

  int order() const { return model.order(); }

  RandomBoundaryModel seeded_model() const {
    RandomBoundaryModel m = model;
    m.seed = seed;
    return m;
  }

  void validate() const {
    require(lambda > 0.0, ErrorKind::InvalidArgument, "lambda must be positive");
    require(iterations >= 0, ErrorKind::InvalidArgument, "K must be nonnegative");
    require(schedule.theta >= 0.0 && schedule.offset > -1.0, ErrorKind::InvalidArgument,
            "schedule needs theta >= 0 and offset > -1");
    require(initial_radius > 0.0, ErrorKind::InvalidArgument, "initial radius must be positive");
    require(max_step_halvings >= 0, ErrorKind::InvalidArgument, "max_step_halvings must be nonnegative");
    model.validate();
  }
};

struct StepRecord {
  long n = 0;
  double t = 0.0;             // step size actually used
  double j_sample = 0.0;      // J(h_n, sigma_n)
  double grad_norm = 0.0;     // H^{1/2} norm of G(h_n, xi_n)
  bool projection_active = false;
  int halvings = 0;
  int resample_attempts = 1;
};

struct SgdState {
  std::vector<double> h;
  long n = 1;
  std::uint64_t rng_cursor = 0;
  std::vector<StepRecord> history;
};

inline SgdState initial_state(const SgdConfig& cfg) {
  SgdState s;
  s.h.assign(fourier::coeff_count(cfg.order()), 0.0);
  s.h[0] = cfg.initial_radius;
  return s;
}

/// One step of the recursion. The sample index is the cursor, never a function of h.
/// If the updated boundary violates the gap to the current sample, t is halved
/// (up to max_step_halvings times) for this step only.
inline SgdState sgd_step(SgdState state, const SgdConfig& cfg) {
  const auto model = cfg.seeded_model();
  const auto sample = sample_interior_counted(model, state.rng_cursor, cfg.sampler);
  const double t = cfg.schedule.at(state.n);

  SampleEvaluation eval;
  try {
    eval = evaluate_sample(state.h, cfg.kind, sample.curve, cfg.lambda, cfg.solver);
  } catch (const Error& e) {
    throw Error(ErrorKind::RunAborted, "step " + std::to_string(state.n) + ": " + e.what());
  }

  StepRecord rec;
  rec.n = state.n;
  rec.j_sample = eval.value;
  rec.grad_norm = gradient_norm(eval.gradient.preconditioned);
  rec.resample_attempts = sample.attempts;

  const int order = cfg.order();
  double step = t;
  for (int halving = 0;; ++halving) {
    std::vector<double> trial = state.h;
    for (std::size_t k = 0; k < trial.size(); ++k) trial[k] -= step * eval.gradient.preconditioned[k];
    try {
      auto proj = project_admissible_report(trial, cfg.admissible);
      (void)build_domain(sample.curve, proj.coeffs, cfg.kind, cfg.solver.inner_nodes(order),
                         cfg.solver.outer_nodes(order), cfg.solver.gap_min);
      state.h = std::move(proj.coeffs);
      rec.projection_active = proj.active;
      rec.halvings = halving;
      rec.t = step;
      break;
    } catch (const Error& e) {
      const bool retry = e.kind() == ErrorKind::GapTooSmall || e.kind() == ErrorKind::NonpositiveRadius ||
                         e.kind() == ErrorKind::NotConvex;
      if (!retry || halving >= cfg.max_step_halvings)
        throw Error(ErrorKind::RunAborted, "step " + std::to_string(state.n) + " rejected after " +
                                               std::to_string(halving) + " halvings: " + e.what());
      step *= 0.5;
    }
  }
  state.history.push_back(rec);
  ++state.n;
  ++state.rng_cursor;
  return state;
}

using SgdObserver = std::function<void(const SgdState&)>;

/// K steps from the initial circle. The observer, if set, sees the initial state
/// and the state after every step.
inline SgdState run_sgd(const SgdConfig& cfg, const SgdObserver& observer = {}) {
  cfg.validate();
  SgdState s = initial_state(cfg);
  s.h = project_admissible(s.h, cfg.admissible);
  if (observer) observer(s);
  for (long k = 0; k < cfg.iterations; ++k) {
    s = sgd_step(std::move(s), cfg);
    if (observer) observer(s);
  }
  return s;
}

// Estimators.

struct EstimatorResult {
  double mean_value = 0.0;
  std::size_t num_samples = 0;
  SamplerKind sampler_kind = SamplerKind::qmc_halton;
  std::vector<double> per_sample;
};

struct ExpectationEstimate {
  EstimatorResult objective;
  std::vector<double> mean_gradient;  // preconditioned, coefficientwise mean
  double norm_of_mean = 0.0;
  double mean_of_norms = 0.0;
};

/// Sample-average estimate of E[J] and E[G] using sample_fn(i) for i < n.
/// Samples are evaluated in parallel and reduced in index order.
template <class SampleFn>
ExpectationEstimate estimate_expectation(std::span<const double> h, Parameterization kind, SampleFn&& sample_fn,
                                         std::size_t n, double lambda, const SolverSettings& solver,
                                         bool with_gradient, unsigned threads = default_thread_count()) {
  require(n >= 1, ErrorKind::InvalidArgument, "need at least one sample");
  std::vector<SampleEvaluation> evals(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const RadialCurve sigma = sample_fn(i);
        if (with_gradient) {
          evals[i] = evaluate_sample(h, kind, sigma, lambda, solver);
        } else {
          evals[i].value = evaluate_energy(h, kind, sigma, lambda, solver);
        }
      },
      threads);

  ExpectationEstimate est;
  est.objective.num_samples = n;
  est.objective.per_sample.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    est.objective.per_sample[i] = evals[i].value;
    sum += evals[i].value;
  }
  est.objective.mean_value = sum / static_cast<double>(n);
  if (with_gradient) {
    est.mean_gradient.assign(h.size(), 0.0);
    double norms = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < h.size(); ++k) est.mean_gradient[k] += evals[i].gradient.preconditioned[k];
      norms += gradient_norm(evals[i].gradient.preconditioned);
    }
    for (double& g : est.mean_gradient) g /= static_cast<double>(n);
    est.norm_of_mean = gradient_norm(est.mean_gradient);
    est.mean_of_norms = norms / static_cast<double>(n);
  }
  return est;
}

inline ExpectationEstimate estimate_expectation(std::span<const double> h, Parameterization kind,
                                                const RandomBoundaryModel& model, SamplerKind sampler,
                                                std::size_t n, double lambda, const SolverSettings& solver,
                                                bool with_gradient, unsigned threads = default_thread_count()) {
  auto fn = [&](std::size_t i) { return sample_interior(model, i, sampler); };
  auto est = estimate_expectation(h, kind, fn, n, lambda, solver, with_gradient, threads);
  est.objective.sampler_kind = sampler;
  return est;
}

inline EstimatorResult estimate_expected_objective(std::span<const double> h, const RandomBoundaryModel& model,
                                                   double lambda, std::size_t n, SamplerKind kind,
                                                   Parameterization param = Parameterization::radial,
                                                   const SolverSettings& solver = {}) {
  return estimate_expectation(h, param, model, kind, n, lambda, solver, false).objective;
}

inline ExpectationEstimate estimate_expected_gradient_norm(std::span<const double> h,
                                                           const RandomBoundaryModel& model, double lambda,
                                                           std::size_t n, SamplerKind kind,
                                                           Parameterization param = Parameterization::radial,
                                                           const SolverSettings& solver = {}) {
  return estimate_expectation(h, param, model, kind, n, lambda, solver, true);
}

/// Mean radius a0 of an iterate.
inline double mean_radius(std::span<const double> h) { return h.empty() ? 0.0 : h[0]; }

}  // namespace bernoulli
