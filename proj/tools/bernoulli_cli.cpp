// Command-line driver: oracle reports, single solves, derivative checks, SGD
// runs, rate regression and the coercivity probe.
//
// Exit codes: 0 success, 1 tolerance failure or aborted run, 2 usage error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bernoulli/analytic_oracle.hpp"
#include "bernoulli/checks.hpp"
#include "bernoulli/experiment_config.hpp"
#include "bernoulli/laplace_solver.hpp"
#include "bernoulli/rates.hpp"
#include "bernoulli/sgd.hpp"
#include "bernoulli/shape_calculus.hpp"

namespace fs = std::filesystem;
using namespace bernoulli;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_tolerance = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag values are collected during parsing and applied on top of the config file.
struct Overrides {
  std::string config_path;
  std::string output_dir;
  std::vector<std::pair<std::string, std::string>> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [this, key](const std::string& v) { values.emplace_back(key, v); },
                                          help);
  }
  void add_flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& value,
                const std::string& help) {
    app->add_flag_callback(flag, [this, key, value] { values.emplace_back(key, value); }, help);
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    for (const auto& [k, v] : values) cfg.set(k, v);
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "Configuration file (key = value lines, or a previous output file)");
  app->add_option("--output-dir", o.output_dir, "Output directory (overrides the environment and config)");
  o.add(app, "--lambda", "lambda", "Flux constant lambda");
  o.add(app, "--N", "N", "Fourier truncation order");
  o.add(app, "--seed", "seed", "Random seed");
  o.add(app, "--parameterization", "parameterization", "Outer boundary parameterization: radial or support");
  app->add_option_function<std::string>(
      "--M",
      [&o](const std::string& v) {
        o.values.emplace_back("m_inner", v);
        o.values.emplace_back("m_outer", v);
      },
      "Quadrature nodes per boundary");
}

void add_model(CLI::App* app, Overrides& o) {
  o.add(app, "--r-sigma", "r_sigma", "Radius of the circular interior boundary");
  o.add(app, "--amplitude", "amplitude", "Amplitude A of the perturbation half-widths A/(1+l)^2");
  o.add_flag(app, "--deterministic", "interior", "circle", "Deterministic circular interior of radius r_sigma");
  o.add_flag(app, "--paper-amplitudes", "interior", "ellipse-literal",
             "Ellipse interior with all perturbation half-widths 0.5");
}

void add_sgd(CLI::App* app, Overrides& o) {
  o.add(app, "--K", "K", "Number of SGD iterations");
  o.add(app, "--theta-step", "theta_step", "Step size numerator theta in t_n = theta/(n + offset)");
  o.add(app, "--offset", "offset", "Step size offset");
  o.add(app, "--sampler", "sampler", "Per-step sampler: mc or qmc");
  o.add(app, "--estimator-samples", "estimator_samples", "Samples per expectation estimate");
}

std::string output_directory(const Overrides& o, const RunConfig& cfg) {
  const std::string dir = resolve_output_dir(o.output_dir, cfg);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const std::string& dir, const std::string& name, const RunConfig& cfg,
                          const std::string& command) {
  const auto path = fs::path(dir) / name;
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::InvalidArgument, "cannot write " + path.string());
  os << "# command: " << command << '\n';
  cfg.write_header(os);
  os << std::setprecision(17);
  return os;
}

RadialCurve interior_for_solve(const RunConfig& cfg, long sample) {
  const auto model = cfg.model();
  if (sample < 0) return model.mean_curve;
  return sample_interior(model, static_cast<std::uint64_t>(sample), cfg.sampler);
}

std::vector<double> circle_coeffs(int order, double r) {
  std::vector<double> c(fourier::coeff_count(order), 0.0);
  c[0] = r;
  return c;
}

// oracle

int cmd_oracle(const Overrides& o, bool have_r_sigma, const std::vector<double>& two_point) {
  if (!have_r_sigma && two_point.empty()) throw UsageError("oracle needs --r-sigma or --two-point R1 R2");
  RunConfig cfg = o.resolve();
  if (!two_point.empty()) {
    cfg.r1 = two_point[0];
    cfg.r2 = two_point[1];
  }
  std::cout << std::setprecision(10);
  if (have_r_sigma) {
    const double f = oracle::free_radius(cfg.r_sigma, cfg.lambda);
    std::cout << "lambda                " << cfg.lambda << '\n'
              << "r_sigma               " << cfg.r_sigma << '\n'
              << "F(r_sigma)            " << f << '\n'
              << "J(F, r_sigma)         " << oracle::energy_circles(f, cfg.r_sigma, cfg.lambda) << '\n';
  }
  if (two_point.empty()) return exit_ok;

  const oracle::TwoPointRadiusLaw law{cfg.r1, cfg.r2, cfg.p};
  law.validate();
  const auto rep = oracle::crossing_check(law, cfg.lambda, cfg.delta);
  const double constrained = oracle::minimize_expected_two_point(law, cfg.lambda, cfg.delta);
  oracle::print_report(std::cout, rep);
  std::cout << "constrained_minimizer " << constrained << '\n'
            << "E[J](minimizer)       " << oracle::expected_energy_two_point(constrained, law, cfg.lambda) << '\n';

  const std::string dir = output_directory(o, cfg);
  auto os = open_output(dir, "oracle_scan.csv", cfg, "oracle");
  os << "r_gamma,E_J\n";
  const double lo = cfg.r2 + cfg.delta;
  const double hi = std::max(lo, rep.f_r2) + 1.0;
  constexpr int points = 201;
  for (int i = 0; i < points; ++i) {
    const double r = lo + (hi - lo) * i / (points - 1);
    os << r << ',' << oracle::expected_energy_two_point(r, law, cfg.lambda) << '\n';
  }
  std::cout << "scan                  " << (fs::path(dir) / "oracle_scan.csv").string() << '\n';
  return exit_ok;
}

// solve

int cmd_solve(const Overrides& o, long sample, const std::string& outer_file, bool dump) {
  const RunConfig cfg = o.resolve();
  const RadialCurve sigma = interior_for_solve(cfg, sample);
  std::vector<double> outer = circle_coeffs(cfg.order, cfg.outer_radius);
  Parameterization kind = cfg.kind;
  if (!outer_file.empty()) {
    std::ifstream in(outer_file);
    require(static_cast<bool>(in), ErrorKind::InvalidArgument, "cannot open " + outer_file);
    auto rec = read_coefficients(in);
    outer = std::move(rec.coeffs);
    kind = rec.kind;
  }
  const int order = fourier::order_of(outer.size());
  const auto solver = cfg.solver();
  const auto domain = build_domain(sigma, outer, kind, solver.inner_nodes(order), solver.outer_nodes(order),
                                   solver.gap_min);
  const DirichletSolver ds(domain);
  const auto state = ds.solve_state();
  const double j = state.energy_flux_term + cfg.lambda * cfg.lambda * state.area;
  const double flux_out = state.neumann_outer.dot(domain.outer().weights);
  const auto density = shape_gradient_density(domain, state, cfg.lambda);
  const auto grad = coefficient_gradient(density, outer, kind);

  std::cout << std::setprecision(10) << "J                     " << j << '\n'
            << "flux_inner            " << state.energy_flux_term << '\n'
            << "flux_outer            " << flux_out << '\n'
            << "flux_balance          " << std::abs(state.energy_flux_term + flux_out) << '\n'
            << "area                  " << state.area << '\n'
            << "min_gap               " << domain.min_gap() << '\n'
            << "neumann_outer_range   [" << state.neumann_outer.minCoeff() << ", "
            << state.neumann_outer.maxCoeff() << "]\n"
            << "gradient_norm         " << gradient_norm(grad.preconditioned) << '\n';
  if (!dump) return exit_ok;

  const std::string dir = output_directory(o, cfg);
  {
    auto os = open_output(dir, "trace_inner.csv", cfg, "solve");
    write_trace_csv(os, state.neumann_inner);
  }
  {
    auto os = open_output(dir, "trace_outer.csv", cfg, "solve");
    write_trace_csv(os, state.neumann_outer);
  }
  {
    auto os = open_output(dir, "density.csv", cfg, "solve");
    const auto thetas = fourier::equispaced(static_cast<std::size_t>(density.values.size()));
    os << "theta,g\n";
    for (Eigen::Index i = 0; i < density.values.size(); ++i)
      os << thetas[static_cast<std::size_t>(i)] << ',' << density.values[i] << '\n';
  }
  {
    auto os = open_output(dir, "gradient.csv", cfg, "solve");
    write_coefficients(os, kind, grad.coeffs);
  }
  std::cout << "traces                " << dir << '\n';
  return exit_ok;
}

// gradcheck

int cmd_gradcheck(const Overrides& o) {
  const RunConfig cfg = o.resolve();
  GradientCheckOptions opt;
  opt.order = cfg.order;
  opt.lambda = cfg.lambda;
  opt.configurations = static_cast<std::size_t>(cfg.check_configurations);
  opt.modes.assign(cfg.modes.begin(), cfg.modes.end());
  opt.seed = cfg.seed;
  opt.solver = cfg.solver();
  const auto g = gradient_fd_check(opt);
  const auto h = hessian_fd_check(cfg.order, cfg.lambda, static_cast<std::size_t>(cfg.hessian_configurations),
                                  cfg.seed, cfg.solver());

  std::cout << "config kind    coeff   analytic            finite_difference   rel_error\n";
  for (const auto& r : g.rows)
    std::printf("%6zu %-8s %5zu  % .12e  % .12e  %.3e\n", r.configuration, to_string(r.kind).c_str(),
                r.coefficient, r.analytic, r.finite_difference, r.rel_error);
  std::cout << "config hessian             second_difference   rel_error   I1          I2\n";
  for (const auto& r : h.rows)
    std::printf("%6zu  % .12e  % .12e  %.3e  % .4e  % .4e\n", r.configuration, r.value, r.second_difference,
                r.rel_error, r.i1, r.i2);

  const bool grad_ok = g.max_rel_error <= cfg.gradient_tolerance;
  const bool hess_ok = h.max_rel_error <= cfg.hessian_tolerance;
  std::printf("max gradient rel error %.3e (tolerance %.1e) %s\n", g.max_rel_error, cfg.gradient_tolerance,
              grad_ok ? "ok" : "FAILED");
  std::printf("max hessian rel error  %.3e (tolerance %.1e) %s\n", h.max_rel_error, cfg.hessian_tolerance,
              hess_ok ? "ok" : "FAILED");

  const std::string dir = output_directory(o, cfg);
  auto os = open_output(dir, "gradcheck.csv", cfg, "gradcheck");
  os << "configuration,kind,coefficient,analytic,finite_difference,rel_error\n";
  for (const auto& r : g.rows)
    os << r.configuration << ',' << to_string(r.kind) << ',' << r.coefficient << ',' << r.analytic << ','
       << r.finite_difference << ',' << r.rel_error << '\n';
  return grad_ok && hess_ok ? exit_ok : exit_tolerance;
}

// optimize

int cmd_optimize(const Overrides& o) {
  const RunConfig cfg = o.resolve();
  const SgdConfig sgd = cfg.sgd();
  const std::string dir = output_directory(o, cfg);
  auto traj = open_output(dir, "trajectory.csv", cfg, "optimize");
  traj << "n,t_n,J_sample,grad_norm_proxy\n";

  std::vector<std::pair<long, std::vector<double>>> kept;
  auto keep = [&](long k) {
    return k == sgd.iterations || std::find(cfg.snapshots.begin(), cfg.snapshots.end(), k) != cfg.snapshots.end();
  };
  SgdState final_state;
  long projected = 0;
  long halved = 0;
  try {
    final_state = run_sgd(sgd, [&](const SgdState& s) {
      if (!s.history.empty()) {
        const auto& r = s.history.back();
        traj << r.n << ',' << r.t << ',' << r.j_sample << ',' << r.grad_norm << '\n';
        projected += r.projection_active ? 1 : 0;
        halved += r.halvings > 0 ? 1 : 0;
      }
      const long k = s.n - 1;
      if (keep(k)) kept.emplace_back(k, s.h);
    });
  } catch (const Error& e) {
    std::cerr << "optimize: run aborted: " << e.what() << '\n';
    return exit_tolerance;
  }

  for (const auto& [k, h] : kept) {
    const std::string name = k == sgd.iterations ? "final_coeffs.csv" : "snapshot_" + std::to_string(k) + ".csv";
    auto os = open_output(dir, name, cfg, "optimize");
    write_coefficients(os, sgd.kind, h);
  }
  if (std::find(cfg.snapshots.begin(), cfg.snapshots.end(), sgd.iterations) != cfg.snapshots.end()) {
    auto os = open_output(dir, "snapshot_" + std::to_string(sgd.iterations) + ".csv", cfg, "optimize");
    write_coefficients(os, sgd.kind, final_state.h);
  }

  const auto model = sgd.seeded_model();
  const std::size_t samples = model.deterministic() ? 1 : static_cast<std::size_t>(cfg.estimator_samples);
  auto est = open_output(dir, "estimates.csv", cfg, "optimize");
  est << "K,E_J_estimate,E_grad_norm\n";
  for (const auto& [k, h] : kept) {
    const auto e = estimate_expectation(h, sgd.kind, model, cfg.estimator_kind, samples, sgd.lambda, sgd.solver, true);
    est << k << ',' << e.objective.mean_value << ',' << e.norm_of_mean << '\n';
    std::printf("K=%-6ld E[J]=%.10f |E[G]|=%.6e\n", k, e.objective.mean_value, e.norm_of_mean);
  }

  const long steps = static_cast<long>(final_state.history.size());
  std::printf("iterations            %ld\n", steps);
  std::printf("mean_radius           %.10f\n", mean_radius(final_state.h));
  std::printf("projection_active     %ld of %ld steps\n", projected, steps);
  std::printf("halved_steps          %ld\n", halved);
  if (cfg.interior == InteriorModel::circle) {
    const double f = oracle::free_radius(cfg.r_sigma, cfg.lambda);
    std::printf("free_radius           %.10f\n", f);
    std::printf("radius_error          %.3e\n", mean_radius(final_state.h) - f);
  }
  std::printf("output                %s\n", dir.c_str());
  return exit_ok;
}

// rates

int cmd_rates(const Overrides& o) {
  const RunConfig cfg = o.resolve();
  if (cfg.k_grid.size() < 4) {
    std::cerr << "rates: need at least 4 K values for a slope fit, got " << cfg.k_grid.size() << '\n';
    return exit_tolerance;
  }
  RateReport rep;
  try {
    rep = measure_rates(cfg.rates());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::RunAborted) {
      std::cerr << "rates: " << e.what() << '\n';
      return exit_tolerance;
    }
    throw;
  }

  const std::string dir = output_directory(o, cfg);
  {
    auto os = open_output(dir, "rates.csv", cfg, "rates");
    os << "# J_star = " << std::setprecision(17) << rep.j_star << " (" << rep.j_star_source << ")\n";
    os << "K,E_J_estimate,E_grad_norm,gap\n";
    for (const auto& p : rep.points) os << p.k << ',' << p.expected_j << ',' << p.grad_norm << ',' << p.gap << '\n';
  }
  {
    auto os = open_output(dir, "rates_runs.csv", cfg, "rates");
    os << "run,K,E_J_estimate,E_grad_norm\n";
    for (const auto& p : rep.points)
      for (std::size_t r = 0; r < p.per_run_j.size(); ++r)
        os << r << ',' << p.k << ',' << p.per_run_j[r] << ',' << p.per_run_grad_norm[r] << '\n';
  }
  {
    auto os = open_output(dir, "slopes.csv", cfg, "rates");
    os << "quantity,slope,intercept,points\n"
       << "cost_gap," << rep.cost.slope << ',' << rep.cost.intercept << ',' << rep.cost.points << '\n'
       << "gradient_norm," << rep.gradient.slope << ',' << rep.gradient.intercept << ',' << rep.gradient.points
       << '\n';
  }

  std::printf("J_star                %.10f (%s)\n", rep.j_star, rep.j_star_source.c_str());
  for (const auto& p : rep.points)
    std::printf("K=%-6ld E[J]=%.10f gap=%.4e |E[G]|=%.4e\n", p.k, p.expected_j, p.gap, p.grad_norm);
  const bool cost_ok = std::abs(rep.cost.slope + 1.0) <= 0.15;
  const bool grad_ok = std::abs(rep.gradient.slope + 0.5) <= 0.15;
  std::printf("cost slope            %.4f (target -1.0 +- 0.15) %s\n", rep.cost.slope, cost_ok ? "ok" : "FAILED");
  std::printf("gradient slope        %.4f (target -0.5 +- 0.15) %s\n", rep.gradient.slope,
              grad_ok ? "ok" : "FAILED");
  return cost_ok && grad_ok ? exit_ok : exit_tolerance;
}

// coercivity

int cmd_coercivity(const Overrides& o) {
  const RunConfig cfg = o.resolve();
  const auto res =
      coercivity_probe(cfg.order, cfg.lambda, static_cast<std::size_t>(cfg.coercivity_samples), cfg.seed, cfg.solver());
  const std::string dir = output_directory(o, cfg);
  auto os = open_output(dir, "coercivity.csv", cfg, "coercivity");
  os << "index,value,i1,i2,norm_sq,ratio\n";
  for (const auto& s : res.samples)
    os << s.index << ',' << s.value << ',' << s.i1 << ',' << s.i2 << ',' << s.norm_sq << ',' << s.ratio << '\n';
  std::printf("samples               %zu\n", res.samples.size());
  std::printf("c_E                   %.6e\n", res.c_e);
  std::printf("min D2J[q,q]          %.6e\n", res.min_value);
  std::printf("min I2                %.6e\n", res.min_i2);
  const bool ok = !res.samples.empty() && res.c_e > 0.0 && res.min_i2 >= 0.0;
  std::printf("positivity            %s\n", ok ? "ok" : "FAILED");
  return ok ? exit_ok : exit_tolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bernoulli free boundary problem with a random interior boundary"};
  app.require_subcommand(1);

  Overrides o_oracle, o_solve, o_grad, o_opt, o_rates, o_coer;

  auto* oracle_cmd = app.add_subcommand("oracle", "Closed-form results for concentric circles");
  add_common(oracle_cmd, o_oracle);
  auto* r_sigma_opt = oracle_cmd->add_option_function<std::string>(
      "--r-sigma", [&](const std::string& v) { o_oracle.values.emplace_back("r_sigma", v); },
      "Interior circle radius");
  std::vector<double> two_point;
  oracle_cmd->add_option("--two-point", two_point, "Two-point radius law: R1 R2")->expected(2);
  o_oracle.add(oracle_cmd, "--p", "p", "Probability of R1");
  o_oracle.add(oracle_cmd, "--delta", "delta", "Minimum gap between r_gamma and R2");

  auto* solve_cmd = app.add_subcommand("solve", "One Dirichlet solve with energy, traces and gradient");
  add_common(solve_cmd, o_solve);
  add_model(solve_cmd, o_solve);
  o_solve.add(solve_cmd, "--outer-radius", "outer_radius", "Radius of the circular outer boundary");
  long sample = -1;
  solve_cmd->add_option("--sample", sample, "Interior sample index (default: mean interior curve)");
  std::string outer_file;
  solve_cmd->add_option("--outer-coeffs", outer_file, "Outer boundary coefficient file");
  bool dump = false;
  solve_cmd->add_flag("--dump-traces", dump, "Write Neumann traces and the gradient density as CSV");

  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference checks of the shape gradient and Hessian");
  add_common(grad_cmd, o_grad);
  o_grad.add(grad_cmd, "--modes", "modes", "Comma-separated frequencies to check (default: all)");
  o_grad.add(grad_cmd, "--configs", "check_configurations", "Number of random configurations");
  o_grad.add(grad_cmd, "--hessian-configs", "hessian_configurations", "Number of Hessian configurations");

  auto* opt_cmd = app.add_subcommand("optimize", "Projected stochastic gradient run");
  add_common(opt_cmd, o_opt);
  add_model(opt_cmd, o_opt);
  add_sgd(opt_cmd, o_opt);
  o_opt.add(opt_cmd, "--snapshots", "snapshots", "Comma-separated iteration counts to save");

  auto* rates_cmd = app.add_subcommand("rates", "Convergence rates over seeded runs");
  add_common(rates_cmd, o_rates);
  add_model(rates_cmd, o_rates);
  add_sgd(rates_cmd, o_rates);
  o_rates.add(rates_cmd, "--runs", "runs", "Number of seeded runs");
  o_rates.add(rates_cmd, "--k-grid", "k_grid", "Comma-separated iteration counts");
  o_rates.add(rates_cmd, "--reference-iterations", "reference_iterations", "Length of the reference run");

  auto* coer_cmd = app.add_subcommand("coercivity", "Empirical lower bound of the shape Hessian");
  add_common(coer_cmd, o_coer);
  o_coer.add(coer_cmd, "--samples", "coercivity_samples", "Number of sampled (h, sigma, q)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (oracle_cmd->parsed()) return cmd_oracle(o_oracle, r_sigma_opt->count() > 0, two_point);
    if (solve_cmd->parsed()) return cmd_solve(o_solve, sample, outer_file, dump);
    if (grad_cmd->parsed()) return cmd_gradcheck(o_grad);
    if (opt_cmd->parsed()) return cmd_optimize(o_opt);
    if (rates_cmd->parsed()) return cmd_rates(o_rates);
    if (coer_cmd->parsed()) return cmd_coercivity(o_coer);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return exit_usage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidArgument ? exit_usage : exit_tolerance;
  }
  return exit_usage;
}
