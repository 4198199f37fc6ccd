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

#include <gtest/gtest.h>

#include <cmath>

#include "rsoc/model.hpp"

namespace {

using rsoc::ModelParams;
using rsoc::Polynomial;
using rsoc::SpaceGrid;
using rsoc::TimeGrid;

TEST(Model, DefaultPotential) {
  const ModelParams p;
  EXPECT_EQ(rsoc::eval_nu(p, 0.0), 0.0);
  EXPECT_NEAR(rsoc::eval_nu(p, 1.0), 13.0 / 24.0, 1e-15);
  EXPECT_NEAR(rsoc::eval_nu(p, 2.0), 2.0 + 16.0 / 24.0, 1e-14);
}

TEST(Model, DefaultTerminalCost) {
  const ModelParams p;
  EXPECT_EQ(rsoc::eval_phi(p, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(rsoc::eval_phi(p, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(rsoc::eval_phi(p, 3.0), 2.0);
}

TEST(Model, TerminalWeight) {
  const ModelParams p;
  const SpaceGrid grid{6.0, 241};
  const auto w = rsoc::terminal_weight(p, grid);
  EXPECT_DOUBLE_EQ(w[grid.nearest(1.0)], 1.0);
  EXPECT_NEAR(w[grid.center()], std::exp(-0.5), 1e-15);
  for (double v : w) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
  }

  ModelParams flat;
  flat.phi = Polynomial{};
  for (double v : rsoc::terminal_weight(flat, grid)) EXPECT_EQ(v, 1.0);
}

TEST(Model, PotentialIsConfiningFarOut) {
  const ModelParams p;
  const double L = 6.0;
  EXPECT_GT(rsoc::eval_nu(p, 10 * L), rsoc::eval_nu(p, 5 * L));
  EXPECT_GT(rsoc::eval_nu(p, -10 * L), rsoc::eval_nu(p, -5 * L));
  EXPECT_GT(rsoc::eval_nu(p, 10 * L), 1e5);
}

TEST(Model, Validation) {
  ModelParams p;
  EXPECT_NO_THROW(p.validate());
  p.J = -0.1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = ModelParams{};
  p.t_f = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = ModelParams{};
  p.nu = Polynomial{0.0, 0.0, 0.5, 1.0};  // odd leading power
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.nu = Polynomial{0.0, 0.0, -0.5};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.nu = Polynomial{1.0};
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Model, PolynomialTrimsTrailingZeros) {
  const Polynomial p{1.0, 2.0, 0.0, 0.0};
  EXPECT_EQ(p.degree(), 1u);
  EXPECT_EQ(p.derivative(), Polynomial{2.0});
  EXPECT_TRUE(Polynomial{}.is_zero());
}

TEST(Grids, TimeGridNodes) {
  const TimeGrid tg{1.0, 64};
  EXPECT_EQ(tg.size(), 65u);
  EXPECT_EQ(tg[0], 0.0);
  EXPECT_EQ(tg[64], 1.0);
  for (std::size_t i = 1; i < tg.size(); ++i) EXPECT_GT(tg[i], tg[i - 1]);
  EXPECT_THROW(TimeGrid(1.0, 1), std::invalid_argument);
}

TEST(Grids, SpaceGridHasExactZero) {
  for (std::size_t n : {3u, 241u, 481u, 1001u}) {
    const SpaceGrid sg{6.0, n};
    EXPECT_EQ(sg[sg.center()], 0.0);
    EXPECT_NEAR(sg[0], -6.0, 1e-12);
    EXPECT_NEAR(sg[n - 1], 6.0, 1e-12);
    EXPECT_EQ(sg.nearest(0.0), sg.center());
  }
  EXPECT_THROW(SpaceGrid(6.0, 240), std::invalid_argument);
  EXPECT_THROW(SpaceGrid(0.0, 241), std::invalid_argument);
}

}  // namespace
