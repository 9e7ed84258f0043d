#pragma once

// Convergence-rate measurement: R seeded SGD runs, estimator evaluations of
// E[J(h_K)] and ||E[G(h_K)]|| at a grid of K, and log-log slope fits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bernoulli/analytic_oracle.hpp"
#include "bernoulli/errors.hpp"
#include "bernoulli/sgd.hpp"

namespace bernoulli {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least squares of log10(y) against log10(x) over the points with y > 0.
inline SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_points = 4) {
  require(x.size() == y.size(), ErrorKind::DimensionMismatch, "slope fit needs matching x and y");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log10(x[i]));
      ly.push_back(std::log10(y[i]));
    }
  }
  require(lx.size() >= min_points, ErrorKind::InvalidArgument,
          "slope fit needs at least " + std::to_string(min_points) + " usable points, got " +
              std::to_string(lx.size()));
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = lx.size();
  return f;
}

enum class ReferenceKind { oracle, reference_run };

struct RateConfig {
  SgdConfig sgd;
  std::vector<long> k_grid{100, 200, 500, 1000, 2000, 5000, 10000};
  int runs = 3;
  std::uint64_t first_seed = 1;
  std::size_t estimator_samples = 1000;
  SamplerKind estimator_kind = SamplerKind::qmc_halton;
  ReferenceKind reference = ReferenceKind::reference_run;
  long reference_iterations = 20000;
  std::uint64_t reference_seed = 1000;
  // The reference iterate is the average of the last `reference_tail` fraction of iterates.
  double reference_tail = 0.5;
};

struct RatePoint {
  long k = 0;
  double expected_j = 0.0;   // mean over runs of the estimator of E[J(h_K)]
  double gap = 0.0;          // expected_j - J*
  double grad_norm = 0.0;    // mean over runs of ||estimated E[G(h_K)]||
  std::vector<double> per_run_j;
  std::vector<double> per_run_grad_norm;
};

struct RateReport {
  std::vector<RatePoint> points;
  double j_star = 0.0;
  std::string j_star_source;
  std::vector<double> reference_h;
  SlopeFit cost;
  SlopeFit gradient;
};

namespace detail {

inline std::size_t estimator_sample_count(const RateConfig& rc) {
  return rc.sgd.model.deterministic() ? 1 : rc.estimator_samples;
}

inline ExpectationEstimate evaluate_iterate(const RateConfig& rc, const std::vector<double>& h) {
  return estimate_expectation(h, rc.sgd.kind, rc.sgd.seeded_model(), rc.estimator_kind, estimator_sample_count(rc),
                              rc.sgd.lambda, rc.sgd.solver, true);
}

}  // namespace detail

/// Averaged iterate of a long run, used to define J*.
inline std::vector<double> reference_iterate(const RateConfig& rc) {
  SgdConfig cfg = rc.sgd;
  cfg.iterations = rc.reference_iterations;
  cfg.seed = rc.reference_seed;
  const long tail_start =
      rc.reference_iterations - static_cast<long>(std::floor(rc.reference_tail * static_cast<double>(rc.reference_iterations)));
  std::vector<double> sum(fourier::coeff_count(cfg.order()), 0.0);
  long count = 0;
  run_sgd(cfg, [&](const SgdState& s) {
    if (s.n - 1 >= tail_start && s.n - 1 >= 1) {
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += s.h[k];
      ++count;
    }
  });
  require(count > 0, ErrorKind::InvalidArgument, "reference run has an empty averaging window");
  for (double& v : sum) v /= static_cast<double>(count);
  return sum;
}

/// J* for the configuration: the closed form for a circular deterministic
/// interior, otherwise the estimator at the reference iterate.
inline double reference_value(const RateConfig& rc, std::string& source, std::vector<double>& h_ref) {
  if (rc.reference == ReferenceKind::oracle) {
    const auto& mean = rc.sgd.model.mean_curve.coeffs();
    bool circle = rc.sgd.model.deterministic();
    for (std::size_t k = 1; k < mean.size(); ++k) circle = circle && mean[k] == 0.0;
    require(circle, ErrorKind::InvalidArgument, "oracle J* needs a deterministic circular interior");
    const double rs = mean[0];
    const double rg = oracle::free_radius(rs, rc.sgd.lambda);
    source = "oracle";
    h_ref.assign(mean.size(), 0.0);
    h_ref[0] = rg;
    return oracle::energy_circles(rg, rs, rc.sgd.lambda);
  }
  h_ref = reference_iterate(rc);
  source = "reference_run";
  return detail::evaluate_iterate(rc, h_ref).objective.mean_value;
}

inline RateReport measure_rates(const RateConfig& rc) {
  require(rc.runs >= 1, ErrorKind::InvalidArgument, "need at least one run");
  require(!rc.k_grid.empty() && std::is_sorted(rc.k_grid.begin(), rc.k_grid.end()), ErrorKind::InvalidArgument,
          "K grid must be nonempty and sorted");
  RateReport rep;
  rep.j_star = reference_value(rc, rep.j_star_source, rep.reference_h);

  rep.points.resize(rc.k_grid.size());
  for (std::size_t i = 0; i < rc.k_grid.size(); ++i) rep.points[i].k = rc.k_grid[i];

  for (int r = 0; r < rc.runs; ++r) {
    SgdConfig cfg = rc.sgd;
    cfg.seed = rc.first_seed + static_cast<std::uint64_t>(r);
    cfg.iterations = rc.k_grid.back();
    std::vector<std::vector<double>> snapshots(rc.k_grid.size());
    run_sgd(cfg, [&](const SgdState& s) {
      const long k = s.n - 1;  // iterations completed
      for (std::size_t i = 0; i < rc.k_grid.size(); ++i)
        if (rc.k_grid[i] == k) snapshots[i] = s.h;
    });
    for (std::size_t i = 0; i < rc.k_grid.size(); ++i) {
      const auto est = detail::evaluate_iterate(rc, snapshots[i]);
      rep.points[i].per_run_j.push_back(est.objective.mean_value);
      rep.points[i].per_run_grad_norm.push_back(est.norm_of_mean);
    }
  }

  std::vector<double> ks, gaps, norms;
  for (auto& p : rep.points) {
    const double n = static_cast<double>(p.per_run_j.size());
    p.expected_j = 0.0;
    p.grad_norm = 0.0;
    for (std::size_t r = 0; r < p.per_run_j.size(); ++r) {
      p.expected_j += p.per_run_j[r] / n;
      p.grad_norm += p.per_run_grad_norm[r] / n;
    }
    p.gap = p.expected_j - rep.j_star;
    ks.push_back(static_cast<double>(p.k));
    gaps.push_back(p.gap);
    norms.push_back(p.grad_norm);
  }
  rep.cost = loglog_slope(ks, gaps);
  rep.gradient = loglog_slope(ks, norms);
  return rep;
}

}  // namespace bernoulli
