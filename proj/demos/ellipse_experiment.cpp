// Short stochastic run around the ellipse interior.
//   ellipse_experiment [config-file] [K]

#include <cstdio>
#include <cstdlib>

#include "bernoulli/experiment_config.hpp"
#include "bernoulli/sgd.hpp"

using namespace bernoulli;

int main(int argc, char** argv) {
  RunConfig rc;
  rc.iterations = 200;
  rc.theta_step = 0.15;
  rc.offset = 1.0;
  try {
    if (argc > 1) load_config_file(rc, argv[1]);
    if (argc > 2) rc.iterations = std::atol(argv[2]);
    const auto cfg = rc.sgd();

    std::printf("%6s %10s %12s %12s %10s\n", "n", "t_n", "J_sample", "|G|", "a0");
    const auto final_state = run_sgd(cfg, [&](const SgdState& s) {
      if (s.history.empty()) return;
      const auto& r = s.history.back();
      if (r.n <= 10 || r.n % 50 == 0)
        std::printf("%6ld %10.5f %12.6f %12.6f %10.6f\n", r.n, r.t, r.j_sample, r.grad_norm, s.h[0]);
    });

    const auto est = estimate_expectation(final_state.h, cfg.kind, cfg.seeded_model(), SamplerKind::qmc_halton, 200,
                                          cfg.lambda, cfg.solver, true);
    std::printf("\nfinal coefficients:");
    for (double c : final_state.h) std::printf(" %.6f", c);
    std::printf("\nE[J] ~ %.6f (200 Halton samples), |E[G]| ~ %.6f\n", est.objective.mean_value, est.norm_of_mean);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
