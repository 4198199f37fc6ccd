// Copyright 2026 The rsoc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "rsoc/io/config.hpp"

namespace {

using ::testing::HasSubstr;
using rsoc::ConfigError;
using rsoc::parse_config_string;

std::string error_of(const std::string& text) {
  try {
    (void)parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, MinimalConfigUsesDefaults) {
  const auto cfg = parse_config_string("model.J = 0.2\nmodel.t_f = 1\n");
  EXPECT_EQ(cfg.model.J, 0.2);
  EXPECT_EQ(cfg.model.nu, rsoc::ModelParams{}.nu);
  EXPECT_EQ(cfg.model.phi, rsoc::ModelParams{}.phi);
  EXPECT_EQ(cfg.M, 64u);
  EXPECT_EQ(cfg.L, 6.0);
  EXPECT_EQ(cfg.n_x, 241u);
  EXPECT_EQ(cfg.solver.n_H, 64u);
  EXPECT_EQ(cfg.solver.n_h, 64u);
  EXPECT_EQ(cfg.solver.n_paths, 2000u);
  EXPECT_EQ(cfg.solver.damping, 0.5);
  EXPECT_EQ(cfg.solver.tol, 1e-3);
  EXPECT_EQ(cfg.solver.window, 5u);
  EXPECT_EQ(cfg.oracle.mode, rsoc::OracleMode::riccati);
  EXPECT_EQ(cfg.oracle.finite_size_c, 2.0);
  EXPECT_TRUE(cfg.output_dir.empty());
  EXPECT_FALSE(cfg.debug_dump);
}

TEST(Config, ParsesListsModesAndComments) {
  const auto cfg = parse_config_string(
      "# comment\n"
      "\n"
      "model.nu = 0, 0, 0.5\n"
      "  model.phi = 0.5 , -1, 0.5  \n"
      "oracle.mode = feynman-kac\n"
      "solver.seed = 18446744073709551615\n"
      "output.dir = runs/a\n"
      "debug.dump = true\n");
  EXPECT_EQ(cfg.model.nu, rsoc::harmonic(1.0));
  EXPECT_EQ(cfg.model.phi, rsoc::quadratic_target(1.0));
  EXPECT_EQ(cfg.oracle.mode, rsoc::OracleMode::feynman_kac);
  EXPECT_EQ(cfg.solver.seed, 18446744073709551615ull);
  EXPECT_EQ(cfg.output_dir, "runs/a");
  EXPECT_TRUE(cfg.debug_dump);
}

TEST(Config, EvenGridIsRejectedByName) {
  EXPECT_THAT(error_of("grid.n_x = 240\n"), HasSubstr("grid.n_x"));
}

TEST(Config, DampingAboveOneIsRejected) {
  EXPECT_THAT(error_of("solver.damping = 1.5\n"), HasSubstr("solver.damping"));
}

TEST(Config, UnknownKeyIsRejectedWithLine) {
  const auto msg = error_of("model.J = 0\nsolver.nH = 3\n");
  EXPECT_THAT(msg, HasSubstr("solver.nH"));
  EXPECT_THAT(msg, HasSubstr(":2:"));
  EXPECT_THAT(msg, HasSubstr("unknown key"));
}

TEST(Config, MalformedValuesNameTheKey) {
  EXPECT_THAT(error_of("model.J = abc\n"), HasSubstr("model.J"));
  EXPECT_THAT(error_of("solver.n_H = -3\n"), HasSubstr("solver.n_H"));
  EXPECT_THAT(error_of("solver.n_H = 2.5\n"), HasSubstr("solver.n_H"));
  EXPECT_THAT(error_of("oracle.mode = exact\n"), HasSubstr("oracle.mode"));
  EXPECT_THAT(error_of("debug.dump = maybe\n"), HasSubstr("debug.dump"));
  EXPECT_THAT(error_of("model.nu = 0, , 1\n"), HasSubstr("model.nu"));
  EXPECT_THAT(error_of("model.J =\n"), HasSubstr("model.J"));
  EXPECT_THAT(error_of("model.J 0.2\n"), HasSubstr("key = value"));
}

TEST(Config, ConstraintViolationsNameTheKey) {
  EXPECT_THAT(error_of("model.J = -1\n"), HasSubstr("model.J"));
  EXPECT_THAT(error_of("model.nu = 0, 1\n"), HasSubstr("model.nu"));
  EXPECT_THAT(error_of("model.t_f = 0\n"), HasSubstr("model.t_f"));
  EXPECT_THAT(error_of("grid.M = 1\n"), HasSubstr("grid.M"));
  EXPECT_THAT(error_of("solver.window = 0\n"), HasSubstr("solver.window"));
  EXPECT_THAT(error_of("oracle.n_instances = 3\n"), HasSubstr("oracle.n_instances"));
  EXPECT_THAT(error_of("oracle.mode = feynman-kac\noracle.n_paths = 10\n"), HasSubstr("oracle.n_paths"));
}

TEST(Config, DuplicateKeyIsRejected) {
  EXPECT_THAT(error_of("model.J = 0\nmodel.J = 1\n"), HasSubstr("more than once"));
}

TEST(Config, EchoRoundTrips) {
  const auto cfg = parse_config_string(
      "model.J = 0.123456789012345\nmodel.nu = 0.1, 0, 0.5, 0, 0.0416666666666667\n"
      "model.t_f = 0.75\ngrid.M = 48\nsolver.tol = 2.5e-4\noracle.mode = feynman-kac\noutput.dir = x y\n");
  std::ostringstream echo;
  rsoc::write_config(echo, cfg);
  const auto again = parse_config_string(echo.str());
  std::ostringstream echo2;
  rsoc::write_config(echo2, again);
  EXPECT_EQ(echo.str(), echo2.str());
  EXPECT_EQ(again.model.J, cfg.model.J);
  EXPECT_EQ(again.model.nu, cfg.model.nu);
  EXPECT_EQ(again.solver.tol, cfg.solver.tol);
  EXPECT_EQ(again.output_dir, "x y");
}

TEST(Config, EchoOfDefaultsParses) {
  std::ostringstream echo;
  rsoc::write_config(echo, rsoc::RunConfig{});
  EXPECT_NO_THROW((void)parse_config_string(echo.str()));
  EXPECT_THAT(echo.str(), HasSubstr("model.nu = 0, 0, 0.5, 0, 0.041666666666666664\n"));
}

TEST(Config, MissingFile) {
  EXPECT_THROW((void)rsoc::load_config("/nonexistent/run.conf"), ConfigError);
}

TEST(Config, DiscretizationFollowsGridBlock) {
  const auto cfg = parse_config_string("model.t_f = 2\ngrid.M = 32\ngrid.L = 4\ngrid.n_x = 81\n");
  const auto d = cfg.discretization();
  EXPECT_EQ(d.time.horizon(), 2.0);
  EXPECT_EQ(d.time.steps(), 32u);
  EXPECT_EQ(d.space.size(), 81u);
  EXPECT_EQ(d.space.dx(), 0.1);
}

}  // namespace
