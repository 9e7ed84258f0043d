#pragma once

// Text configuration for experiment runs.
//
//   # comment
//   format_version = 1
//   lambda = 1
//   k_grid = 100, 200, 500
//
// Output files repeat the fully resolved configuration as "# config: key = value"
// header lines; such files are accepted as configuration input, and their data
// lines are skipped.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bernoulli/errors.hpp"
#include "bernoulli/rates.hpp"
#include "bernoulli/sgd.hpp"

namespace bernoulli {

inline constexpr int config_format_version = 1;
inline constexpr const char* config_header_prefix = "# config: ";
inline constexpr const char* output_dir_env = "BERNOULLI_OUTPUT_DIR";

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  require(pos == v.size() && pos > 0, ErrorKind::InvalidArgument, "bad number for " + key + ": '" + v + "'");
  return d;
}

inline long parse_long(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long n = 0;
  try {
    n = std::stol(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  require(pos == v.size() && pos > 0, ErrorKind::InvalidArgument, "bad integer for " + key + ": '" + v + "'");
  return n;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::InvalidArgument, "bad boolean for " + key + ": '" + v + "'");
}

inline std::vector<long> parse_long_list(const std::string& key, const std::string& v) {
  std::vector<long> out;
  std::istringstream is(v);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(parse_long(key, cell));
  }
  return out;
}

inline std::string join(const std::vector<long>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s;
}

inline std::string format_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

}  // namespace detail

/// Interior boundary model selector.
enum class InteriorModel { ellipse, ellipse_literal, circle };

inline std::string to_string(InteriorModel m) {
  switch (m) {
    case InteriorModel::ellipse: return "ellipse";
    case InteriorModel::ellipse_literal: return "ellipse-literal";
    case InteriorModel::circle: return "circle";
  }
  return "ellipse";
}

inline InteriorModel parse_interior_model(const std::string& s) {
  if (s == "ellipse") return InteriorModel::ellipse;
  if (s == "ellipse-literal") return InteriorModel::ellipse_literal;
  if (s == "circle") return InteriorModel::circle;
  throw Error(ErrorKind::InvalidArgument, "unknown interior model '" + s + "'");
}

/// Every parameter a run can depend on. Defaults describe the ellipse experiment.
struct RunConfig {
  int order = 8;
  double lambda = 1.0;
  long iterations = 1000;
  std::uint64_t seed = 1;
  double theta_step = 0.15;
  double offset = 1.0;
  InteriorModel interior = InteriorModel::ellipse;
  double amplitude = 0.05;
  double r_sigma = 0.5;  // circle interior radius
  double sigma_r_lower = 0.05;
  double sigma_r_upper = 0.6;
  double initial_radius = 0.75;
  Parameterization kind = Parameterization::radial;
  SamplerKind sampler = SamplerKind::mc;
  double r_lower = 0.65;
  double r_upper = 3.0;
  double coeff_norm_bound = 1e3;
  bool enforce_convexity = false;
  long m_inner = 0;
  long m_outer = 0;
  double gap_min = default_gap_min;
  int max_step_halvings = 5;
  std::vector<long> snapshots{10, 20, 1000};
  long estimator_samples = 1000;
  SamplerKind estimator_kind = SamplerKind::qmc_halton;
  int runs = 3;
  std::vector<long> k_grid{100, 200, 500, 1000, 2000, 5000, 10000};
  long reference_iterations = 20000;
  std::uint64_t reference_seed = 1000;
  double reference_tail = 0.5;
  // Checks.
  std::vector<long> modes;  // empty: all frequencies 0..N
  long check_configurations = 20;
  long hessian_configurations = 5;
  long coercivity_samples = 100;
  double gradient_tolerance = 1e-3;
  double hessian_tolerance = 1e-3;
  // Single solves and the two-point law.
  double outer_radius = 1.0;
  double r1 = 0.5;
  double r2 = 1.9;
  double p = 0.5;
  double delta = 0.05;
  std::string output_dir = "out";

  void set(const std::string& key, const std::string& raw) {
    using namespace detail;
    const std::string v = trim(raw);
    if (key == "format_version") {
      require(parse_long(key, v) == config_format_version, ErrorKind::InvalidArgument,
              "unsupported format_version " + v);
    } else if (key == "N") {
      order = static_cast<int>(parse_long(key, v));
    } else if (key == "lambda") {
      lambda = parse_double(key, v);
    } else if (key == "K") {
      iterations = parse_long(key, v);
    } else if (key == "seed") {
      seed = static_cast<std::uint64_t>(parse_long(key, v));
    } else if (key == "theta_step") {
      theta_step = parse_double(key, v);
    } else if (key == "offset") {
      offset = parse_double(key, v);
    } else if (key == "interior") {
      interior = parse_interior_model(v);
    } else if (key == "amplitude") {
      amplitude = parse_double(key, v);
    } else if (key == "r_sigma") {
      r_sigma = parse_double(key, v);
    } else if (key == "sigma_r_lower") {
      sigma_r_lower = parse_double(key, v);
    } else if (key == "sigma_r_upper") {
      sigma_r_upper = parse_double(key, v);
    } else if (key == "initial_radius") {
      initial_radius = parse_double(key, v);
    } else if (key == "parameterization") {
      kind = parse_parameterization(v);
    } else if (key == "sampler") {
      sampler = parse_sampler_kind(v);
    } else if (key == "r_lower") {
      r_lower = parse_double(key, v);
    } else if (key == "r_upper") {
      r_upper = parse_double(key, v);
    } else if (key == "coeff_norm_bound") {
      coeff_norm_bound = parse_double(key, v);
    } else if (key == "enforce_convexity") {
      enforce_convexity = parse_bool(key, v);
    } else if (key == "m_inner") {
      m_inner = parse_long(key, v);
    } else if (key == "m_outer") {
      m_outer = parse_long(key, v);
    } else if (key == "gap_min") {
      gap_min = parse_double(key, v);
    } else if (key == "max_step_halvings") {
      max_step_halvings = static_cast<int>(parse_long(key, v));
    } else if (key == "snapshots") {
      snapshots = parse_long_list(key, v);
    } else if (key == "estimator_samples") {
      estimator_samples = parse_long(key, v);
    } else if (key == "estimator_kind") {
      estimator_kind = parse_sampler_kind(v);
    } else if (key == "runs") {
      runs = static_cast<int>(parse_long(key, v));
    } else if (key == "k_grid") {
      k_grid = parse_long_list(key, v);
    } else if (key == "reference_iterations") {
      reference_iterations = parse_long(key, v);
    } else if (key == "reference_seed") {
      reference_seed = static_cast<std::uint64_t>(parse_long(key, v));
    } else if (key == "reference_tail") {
      reference_tail = parse_double(key, v);
    } else if (key == "modes") {
      modes = parse_long_list(key, v);
    } else if (key == "check_configurations") {
      check_configurations = parse_long(key, v);
    } else if (key == "hessian_configurations") {
      hessian_configurations = parse_long(key, v);
    } else if (key == "coercivity_samples") {
      coercivity_samples = parse_long(key, v);
    } else if (key == "gradient_tolerance") {
      gradient_tolerance = parse_double(key, v);
    } else if (key == "hessian_tolerance") {
      hessian_tolerance = parse_double(key, v);
    } else if (key == "outer_radius") {
      outer_radius = parse_double(key, v);
    } else if (key == "r1") {
      r1 = parse_double(key, v);
    } else if (key == "r2") {
      r2 = parse_double(key, v);
    } else if (key == "p") {
      p = parse_double(key, v);
    } else if (key == "delta") {
      delta = parse_double(key, v);
    } else if (key == "output_dir") {
      output_dir = v;
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
    }
  }

  /// Resolved key/value pairs in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const {
    using detail::format_double;
    return {
        {"format_version", std::to_string(config_format_version)},
        {"N", std::to_string(order)},
        {"lambda", format_double(lambda)},
        {"K", std::to_string(iterations)},
        {"seed", std::to_string(seed)},
        {"theta_step", format_double(theta_step)},
        {"offset", format_double(offset)},
        {"interior", to_string(interior)},
        {"amplitude", format_double(amplitude)},
        {"r_sigma", format_double(r_sigma)},
        {"sigma_r_lower", format_double(sigma_r_lower)},
        {"sigma_r_upper", format_double(sigma_r_upper)},
        {"initial_radius", format_double(initial_radius)},
        {"parameterization", to_string(kind)},
        {"sampler", to_string(sampler)},
        {"r_lower", format_double(r_lower)},
        {"r_upper", format_double(r_upper)},
        {"coeff_norm_bound", format_double(coeff_norm_bound)},
        {"enforce_convexity", enforce_convexity ? "true" : "false"},
        {"m_inner", std::to_string(m_inner)},
        {"m_outer", std::to_string(m_outer)},
        {"gap_min", format_double(gap_min)},
        {"max_step_halvings", std::to_string(max_step_halvings)},
        {"snapshots", detail::join(snapshots)},
        {"estimator_samples", std::to_string(estimator_samples)},
        {"estimator_kind", to_string(estimator_kind)},
        {"runs", std::to_string(runs)},
        {"k_grid", detail::join(k_grid)},
        {"reference_iterations", std::to_string(reference_iterations)},
        {"reference_seed", std::to_string(reference_seed)},
        {"reference_tail", format_double(reference_tail)},
        {"modes", detail::join(modes)},
        {"check_configurations", std::to_string(check_configurations)},
        {"hessian_configurations", std::to_string(hessian_configurations)},
        {"coercivity_samples", std::to_string(coercivity_samples)},
        {"gradient_tolerance", format_double(gradient_tolerance)},
        {"hessian_tolerance", format_double(hessian_tolerance)},
        {"outer_radius", format_double(outer_radius)},
        {"r1", format_double(r1)},
        {"r2", format_double(r2)},
        {"p", format_double(p)},
        {"delta", format_double(delta)},
        {"output_dir", output_dir},
    };
  }

  /// Header lines for output files. The output directory is left out so that a
  /// rerun into another directory still reproduces the file byte for byte.
  void write_header(std::ostream& os) const {
    for (const auto& [k, v] : entries())
      if (k != "output_dir") os << config_header_prefix << k << " = " << v << '\n';
  }

  void validate() const {
    require(order >= 0, ErrorKind::InvalidArgument, "N must be nonnegative");
    require(lambda > 0.0, ErrorKind::InvalidArgument, "lambda must be positive");
    require(iterations >= 0, ErrorKind::InvalidArgument, "K must be nonnegative");
    require(theta_step >= 0.0, ErrorKind::InvalidArgument, "theta_step must be nonnegative");
    require(amplitude >= 0.0, ErrorKind::InvalidArgument, "amplitude must be nonnegative");
    require(r_sigma > 0.0 && initial_radius > 0.0, ErrorKind::InvalidArgument, "radii must be positive");
    require(estimator_samples >= 1 && runs >= 1, ErrorKind::InvalidArgument,
            "estimator_samples and runs must be positive");
    require(m_inner >= 0 && m_outer >= 0, ErrorKind::InvalidArgument, "node counts must be nonnegative");
    require(check_configurations >= 0 && hessian_configurations >= 0 && coercivity_samples >= 0,
            ErrorKind::InvalidArgument, "check counts must be nonnegative");
    require(outer_radius > 0.0 && delta > 0.0, ErrorKind::InvalidArgument, "outer_radius and delta must be positive");
  }

  RandomBoundaryModel model() const {
    RandomBoundaryModel m;
    switch (interior) {
      case InteriorModel::ellipse: m = ellipse_model(order, amplitude, seed); break;
      case InteriorModel::ellipse_literal: m = ellipse_model_literal(order, seed); break;
      case InteriorModel::circle:
        m = circle_model(r_sigma, order);
        m.seed = seed;
        return m;
    }
    m.r_lower = sigma_r_lower;
    m.r_upper = sigma_r_upper;
    return m;
  }

  SgdConfig sgd() const {
    validate();
    SgdConfig c;
    c.lambda = lambda;
    c.iterations = iterations;
    c.schedule = {theta_step, offset};
    c.kind = kind;
    c.seed = seed;
    c.model = model();
    c.sampler = sampler;
    c.admissible = {r_lower, r_upper, coeff_norm_bound, enforce_convexity};
    c.initial_radius = initial_radius;
    c.solver = solver();
    c.max_step_halvings = max_step_halvings;
    return c;
  }

  SolverSettings solver() const {
    return {static_cast<std::size_t>(m_inner), static_cast<std::size_t>(m_outer), gap_min};
  }

  RateConfig rates() const {
    RateConfig r;
    r.sgd = sgd();
    r.k_grid = k_grid;
    r.runs = runs;
    r.first_seed = seed;
    r.estimator_samples = static_cast<std::size_t>(estimator_samples);
    r.estimator_kind = estimator_kind;
    r.reference = (interior == InteriorModel::circle) ? ReferenceKind::oracle : ReferenceKind::reference_run;
    r.reference_iterations = reference_iterations;
    r.reference_seed = reference_seed;
    r.reference_tail = reference_tail;
    return r;
  }
};

/// Apply "key = value" lines from configuration text.
inline void apply_config_text(RunConfig& cfg, const std::string& text) {
  const bool has_header = text.find(config_header_prefix) != std::string::npos;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string body = detail::trim(line);
    if (body.empty()) continue;
    if (body.rfind(config_header_prefix, 0) == 0) {
      body = body.substr(std::string(config_header_prefix).size());
    } else if (body[0] == '#') {
      continue;
    } else if (body.find('=') == std::string::npos) {
      require(has_header, ErrorKind::InvalidArgument, "line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const auto eq = body.find('=');
    require(eq != std::string::npos, ErrorKind::InvalidArgument,
            "line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(detail::trim(body.substr(0, eq)), body.substr(eq + 1));
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::InvalidArgument, "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

/// Output directory: explicit choice, else the environment override, else the config value.
inline std::string resolve_output_dir(const std::string& flag_value, const RunConfig& cfg) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv(output_dir_env); env && *env) return env;
  return cfg.output_dir;
}

}  // namespace bernoulli
