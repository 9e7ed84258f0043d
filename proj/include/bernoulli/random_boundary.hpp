#pragma once

// Random interior boundary r_sigma(theta, omega) = mean(theta) + sum_k xi_k phi_k(theta)
// with independent xi_k uniform on [-a_k, a_k].

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bernoulli/errors.hpp"
#include "bernoulli/fourier.hpp"
#include "bernoulli/geometry.hpp"

namespace bernoulli {

enum class SamplerKind { mc, qmc_halton };

inline std::string to_string(SamplerKind k) { return k == SamplerKind::mc ? "mc" : "qmc-halton"; }

inline SamplerKind parse_sampler_kind(const std::string& s) {
  if (s == "mc") return SamplerKind::mc;
  if (s == "qmc" || s == "qmc-halton" || s == "halton") return SamplerKind::qmc_halton;
  throw Error(ErrorKind::InvalidArgument, "unknown sampler kind '" + s + "'");
}

inline constexpr int max_resample_attempts = 100;

/// Counter-based uniform stream: the k-th coordinate of draw (index, attempt)
/// depends only on (seed, index, attempt, k).
inline std::vector<double> counter_uniforms(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt,
                                            std::size_t dim) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(index), hi(index), lo(attempt), hi(attempt)};
  std::mt19937_64 gen(seq);
  std::vector<double> u(dim);
  for (auto& x : u) x = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return u;
}

inline constexpr std::array<unsigned, 32> halton_primes = {2,  3,  5,  7,  11, 13, 17, 19, 23,  29,  31,
                                                           37, 41, 43, 47, 53, 59, 61, 67, 71,  73,  79,
                                                           83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

inline double radical_inverse(std::uint64_t n, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (n > 0) {
    r += static_cast<double>(n % base) * f;
    n /= base;
    f *= inv;
  }
  return r;
}

/// Halton point number index + 1 (the all-zero point 0 is skipped).
inline std::vector<double> halton_point(std::uint64_t index, std::size_t dim) {
  require(dim <= halton_primes.size(), ErrorKind::InvalidArgument, "Halton dimension too large");
  std::vector<double> u(dim);
  for (std::size_t k = 0; k < dim; ++k) u[k] = radical_inverse(index + 1, halton_primes[k]);
  return u;
}

struct RandomBoundaryModel {
  RadialCurve mean_curve = RadialCurve::circle(0.3);
  std::vector<double> amplitudes;  // half-widths, one per coefficient
  double r_lower = 0.05;           // every sample must satisfy r_lower <= r_sigma <= r_upper
  double r_upper = 0.6;
  std::uint64_t seed = 1;

  int order() const { return mean_curve.order(); }

  bool deterministic() const {
    for (double a : amplitudes)
      if (a != 0.0) return false;
    return true;
  }

  void validate() const {
    require(amplitudes.size() == mean_curve.coeffs().size(), ErrorKind::DimensionMismatch,
            "need one amplitude per mean-curve coefficient");
    for (double a : amplitudes) require(a >= 0.0, ErrorKind::InvalidArgument, "amplitudes must be nonnegative");
    require(0.0 < r_lower && r_lower < r_upper, ErrorKind::InvalidArgument, "need 0 < r_lower < r_upper");
  }
};

/// Amplitudes A / (1 + l)^2 for every coefficient of order N.
inline std::vector<double> decaying_amplitudes(int order, double a) {
  std::vector<double> amp(fourier::coeff_count(order));
  for (std::size_t k = 0; k < amp.size(); ++k) {
    const double l = 1.0 + fourier::mode_of(k);
    amp[k] = a / (l * l);
  }
  return amp;
}

/// Ellipse baseline with semi-axes 0.4 and 0.2 and decaying amplitudes.
inline RandomBoundaryModel ellipse_model(int order = 8, double amplitude = 0.05, std::uint64_t seed = 1) {
  RandomBoundaryModel m;
  m.mean_curve = RadialCurve::ellipse(0.4, 0.2, order);
  m.amplitudes = decaying_amplitudes(order, amplitude);
  m.r_lower = 0.05;
  m.r_upper = 0.6;
  m.seed = seed;
  return m;
}

/// Uniform half-width 0.5 on every coefficient, as written for the ellipse experiment.
inline RandomBoundaryModel ellipse_model_literal(int order = 8, std::uint64_t seed = 1) {
  RandomBoundaryModel m = ellipse_model(order, 0.05, seed);
  m.amplitudes.assign(fourier::coeff_count(order), 0.5);
  return m;
}

inline RandomBoundaryModel circle_model(double radius, int order = 8) {
  RandomBoundaryModel m;
  m.mean_curve = RadialCurve::circle(radius, order);
  m.amplitudes.assign(fourier::coeff_count(order), 0.0);
  m.r_lower = 0.5 * radius;
  m.r_upper = 1.5 * radius;
  return m;
}

namespace detail {

inline bool within_radial_bounds(const std::vector<double>& c, const RandomBoundaryModel& m) {
  const auto [lo, hi] = min_max_on_grid(c, 0);
  return lo >= m.r_lower && hi <= m.r_upper;
}

}  // namespace detail

struct InteriorSample {
  RadialCurve curve;
  int attempts = 1;
};

inline InteriorSample sample_interior_counted(const RandomBoundaryModel& model, std::uint64_t index,
                                              SamplerKind kind) {
  model.validate();
  if (model.deterministic()) return {model.mean_curve, 1};
  const std::size_t dim = model.amplitudes.size();
  for (int attempt = 0; attempt < max_resample_attempts; ++attempt) {
    // QMC retries move to far-away Halton indices so they never reuse the point set's head.
    const auto u = kind == SamplerKind::mc
                       ? counter_uniforms(model.seed, index, static_cast<std::uint64_t>(attempt), dim)
                       : halton_point(index + (static_cast<std::uint64_t>(attempt) << 40), dim);
    std::vector<double> c = model.mean_curve.coeffs();
    for (std::size_t k = 0; k < dim; ++k) c[k] += (2.0 * u[k] - 1.0) * model.amplitudes[k];
    if (detail::within_radial_bounds(c, model)) return {RadialCurve(std::move(c)), attempt + 1};
  }
  throw Error(ErrorKind::ResampleLimitExceeded,
              "no sample within the radial bounds after " + std::to_string(max_resample_attempts) + " attempts");
}

inline RadialCurve sample_interior(const RandomBoundaryModel& model, std::uint64_t index, SamplerKind kind) {
  return sample_interior_counted(model, index, kind).curve;
}

/// Pointwise variance of r_sigma(theta): sum of a_k^2 phi_k(theta)^2 / 3.
inline double sample_variance_at(const RandomBoundaryModel& model, double theta) {
  double v = 0.0;
  for (std::size_t k = 0; k < model.amplitudes.size(); ++k) {
    const double b = fourier::basis(k, theta);
    v += model.amplitudes[k] * model.amplitudes[k] * b * b / 3.0;
  }
  return v;
}

}  // namespace bernoulli
