#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "bernoulli/experiment_config.hpp"

using namespace bernoulli;

TEST(RunConfig, HeaderRoundTrip) {
  RunConfig a;
  a.lambda = 2.5;
  a.iterations = 123;
  a.seed = 77;
  a.interior = InteriorModel::circle;
  a.kind = Parameterization::support;
  a.k_grid = {10, 20, 40, 80};
  a.modes = {0, 3};
  a.theta_step = 0.1 / 3.0;
  std::ostringstream os;
  a.write_header(os);
  os << "n,t_n,J_sample,grad_norm_proxy\n1,0.1,8.0,1.0\n";

  RunConfig b;
  apply_config_text(b, os.str());
  auto ea = a.entries();
  auto eb = b.entries();
  ASSERT_EQ(ea.size(), eb.size());
  for (std::size_t i = 0; i < ea.size(); ++i)
    if (ea[i].first != "output_dir") EXPECT_EQ(ea[i], eb[i]);
  EXPECT_EQ(b.theta_step, a.theta_step);
}

TEST(RunConfig, PlainConfigText) {
  RunConfig c;
  apply_config_text(c, "# experiment\nformat_version = 1\nlambda = 2\nK=50\nsnapshots = 5, 10\n\n");
  EXPECT_EQ(c.lambda, 2.0);
  EXPECT_EQ(c.iterations, 50);
  EXPECT_EQ(c.snapshots, (std::vector<long>{5, 10}));
}

TEST(RunConfig, Errors) {
  RunConfig c;
  EXPECT_THROW(apply_config_text(c, "no_such_key = 1\n"), Error);
  EXPECT_THROW(apply_config_text(c, "lambda = fast\n"), Error);
  EXPECT_THROW(apply_config_text(c, "format_version = 2\n"), Error);
  EXPECT_THROW(apply_config_text(c, "just text\n"), Error);
  c.lambda = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(RunConfig, SgdAndRateWiring) {
  RunConfig c;
  c.interior = InteriorModel::circle;
  c.r_sigma = 0.4;
  const auto s = c.sgd();
  EXPECT_TRUE(s.model.deterministic());
  EXPECT_EQ(s.model.mean_curve.coeffs()[0], 0.4);
  EXPECT_EQ(c.rates().reference, ReferenceKind::oracle);
  c.interior = InteriorModel::ellipse;
  EXPECT_EQ(c.rates().reference, ReferenceKind::reference_run);
  EXPECT_FALSE(c.sgd().model.deterministic());
  c.interior = InteriorModel::ellipse_literal;
  EXPECT_EQ(c.sgd().model.amplitudes[3], 0.5);
}

TEST(RunConfig, OutputDirectoryPrecedence) {
  RunConfig c;
  c.output_dir = "from_config";
  unsetenv(output_dir_env);
  EXPECT_EQ(resolve_output_dir("", c), "from_config");
  setenv(output_dir_env, "from_env", 1);
  EXPECT_EQ(resolve_output_dir("", c), "from_env");
  EXPECT_EQ(resolve_output_dir("from_flag", c), "from_flag");
  unsetenv(output_dir_env);
}
