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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include "rsoc/commands.hpp"
#include "support/oracles.hpp"

namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

class Commands : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("rsoc_commands_" + std::string(info->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  rsoc::CommandStreams streams() { return {out_, err_, 0}; }

  static std::string slurp(const fs::path& p) {
    std::ifstream in{p, std::ios::binary};
    return {std::istreambuf_iterator<char>(in), {}};
  }

  static rsoc::Json json(const fs::path& p) { return rsoc::Json::parse(slurp(p)); }

  // Small run settings; lines of `extra` override keys of the base.
  static rsoc::RunConfig small(const std::string& extra = "") {
    std::map<std::string, std::string> keys{{"grid.M", "32"},          {"grid.n_x", "121"},
                                            {"solver.n_H", "4"},       {"solver.n_h", "4"},
                                            {"solver.n_paths", "200"}, {"oracle.N", "8"},
                                            {"oracle.n_instances", "4"}};
    std::istringstream in{extra};
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      keys[line.substr(0, eq - 1)] = line.substr(eq + 2);
    }
    std::string text;
    for (const auto& [k, v] : keys) text += k + " = " + v + "\n";
    return rsoc::parse_config_string(text);
  }

  fs::path root_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(Commands, SolveRsDecoupledMatchesSingleAgent) {
  const auto cfg = small();
  ASSERT_EQ(rsoc::cmd_solve_rs(cfg, root_ / "rs", streams()), rsoc::kExitOk) << err_.str();
  ASSERT_EQ(rsoc::cmd_single_agent(cfg, root_ / "sa", streams()), rsoc::kExitOk) << err_.str();
  const auto rs = json(root_ / "rs" / "summary.json");
  const auto sa = json(root_ / "sa" / "single_agent.json");
  EXPECT_EQ(rs["schema_version"], 1);
  EXPECT_TRUE(rs["converged"].get<bool>());
  EXPECT_NEAR(rs["r0"]["value"].get<double>() / sa["cost"].get<double>(), 1.0, 1e-12);
  for (const char* f : {"D.csv", "F.csv", "trace.csv", "profiles.csv", "config.effective"}) {
    EXPECT_TRUE(fs::exists(root_ / "rs" / f)) << f;
  }
  EXPECT_THAT(slurp(root_ / "rs" / "trace.csv"), HasSubstr("iteration,delta_D,delta_F"));
  EXPECT_THAT(slurp(root_ / "rs" / "profiles.csv"), HasSubstr("tau,m,D_diag,F_diag\n0,0,0,0\n"));
  const auto d = rsoc::load_kernel_csv((root_ / "rs" / "D.csv").string());
  EXPECT_EQ(d.size(), 33u);
  EXPECT_TRUE(fs::exists(root_ / "sa" / "c.csv"));
}

TEST_F(Commands, ForcedNonConvergenceExitsTwo) {
  const auto cfg = small("model.J = 0.3\nsolver.max_iter = 1\n");
  EXPECT_EQ(rsoc::cmd_solve_rs(cfg, root_, streams()), rsoc::kExitNotConverged);
  std::istringstream trace{slurp(root_ / "trace.csv")};
  std::string line;
  int rows = 0;
  while (std::getline(trace, line)) ++rows;
  EXPECT_EQ(rows, 2);  // header + one iteration
  EXPECT_FALSE(json(root_ / "summary.json")["converged"].get<bool>());
}

TEST_F(Commands, SummaryIsByteIdenticalAcrossRuns) {
  const auto cfg = small("model.J = 0.3\nsolver.max_iter = 2\n");
  (void)rsoc::cmd_solve_rs(cfg, root_ / "a", streams());
  (void)rsoc::cmd_solve_rs(cfg, root_ / "b", streams());
  for (const char* f : {"summary.json", "D.csv", "F.csv", "trace.csv", "config.effective"}) {
    EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
  }
}

TEST_F(Commands, ConfigEchoReproducesRun) {
  const auto cfg = small("model.J = 0.3\nsolver.max_iter = 1\n");
  (void)rsoc::cmd_solve_rs(cfg, root_ / "a", streams());
  const auto echoed = rsoc::load_config((root_ / "a" / "config.effective").string());
  (void)rsoc::cmd_solve_rs(echoed, root_ / "b", streams());
  EXPECT_EQ(slurp(root_ / "a" / "summary.json"), slurp(root_ / "b" / "summary.json"));
}

TEST_F(Commands, RiccatiOracleRejectsQuarticModel) {
  const auto cfg = small("model.J = 0.2\n");
  EXPECT_EQ(rsoc::cmd_oracle(cfg, root_, streams()), rsoc::kExitFatal);
  EXPECT_THAT(err_.str(), HasSubstr("riccati"));
}

TEST_F(Commands, RiccatiOracleDecoupled) {
  const auto cfg = small("model.nu = 0, 0, 0.5\nmodel.phi = 0.5, -1, 0.5\n");
  ASSERT_EQ(rsoc::cmd_oracle(cfg, root_, streams()), rsoc::kExitOk) << err_.str();
  const auto doc = json(root_ / "oracle.json");
  EXPECT_EQ(doc["error"].get<double>(), 0.0);
  EXPECT_NEAR(doc["mean"].get<double>(), rsoc::testing::lq_cost(1.0, 1.0), 1e-6);
  EXPECT_EQ(doc["instances"].size(), 4u);
  EXPECT_THAT(slurp(root_ / "instances.csv"), HasSubstr("instance,cost,error\n"));
}

TEST_F(Commands, FeynmanKacOracleSingleAgent) {
  const auto cfg = small(
      "model.nu = 0, 0, 0.5\nmodel.phi = 0, 0, 0.5\noracle.mode = feynman-kac\noracle.N = 1\n"
      "oracle.n_paths = 4000\n");
  ASSERT_EQ(rsoc::cmd_oracle(cfg, root_, streams()), rsoc::kExitOk) << err_.str();
  const auto doc = json(root_ / "oracle.json");
  double worst = 0.0;
  for (const auto& inst : doc["instances"]) {
    worst = std::max(worst, std::abs(inst["cost"].get<double>() - 0.5) / inst["error"].get<double>());
  }
  EXPECT_LT(worst, 3.0);
}

TEST_F(Commands, CompareIdenticalSummariesPass) {
  const auto cfg = small();
  ASSERT_EQ(rsoc::cmd_single_agent(cfg, root_, streams()), rsoc::kExitOk);
  const auto p = root_ / "single_agent.json";
  EXPECT_EQ(rsoc::cmd_compare(p, p, root_ / "cmp", streams()), rsoc::kExitOk);
  const auto doc = json(root_ / "cmp" / "compare.json");
  EXPECT_EQ(doc["difference"].get<double>(), 0.0);
  EXPECT_TRUE(doc["pass"].get<bool>());
}

TEST_F(Commands, CompareDecoupledPairPasses) {
  const auto cfg = small("model.nu = 0, 0, 0.5\nmodel.phi = 0.5, -1, 0.5\ngrid.M = 64\ngrid.n_x = 241\n");
  ASSERT_EQ(rsoc::cmd_solve_rs(cfg, root_ / "rs", streams()), rsoc::kExitOk) << err_.str();
  ASSERT_EQ(rsoc::cmd_oracle(cfg, root_ / "or", streams()), rsoc::kExitOk) << err_.str();
  EXPECT_EQ(rsoc::cmd_compare(root_ / "rs" / "summary.json", root_ / "or" / "oracle.json", {}, streams()),
            rsoc::kExitOk);
  const auto r = rsoc::compare_summaries(json(root_ / "rs" / "summary.json"), json(root_ / "or" / "oracle.json"));
  EXPECT_LE(std::abs(r.difference), 1e-4);
  EXPECT_EQ(r.finite_size, 2.0 / 8.0);
}

TEST_F(Commands, CompareBeyondToleranceExitsThree) {
  rsoc::Json a;
  a["schema_version"] = 1;
  a["kind"] = "rs";
  a["estimate"] = {{"value", 0.5}, {"error", 0.01}};
  a["config"] = {{"model.J", "0.2"}};
  rsoc::Json b = a;
  b["kind"] = "oracle";
  b["estimate"] = {{"value", 0.6}, {"error", 0.01}};
  b["N"] = 256;
  b["finite_size_c"] = 2.0;
  rsoc::command_detail::write_json(root_ / "a.json", a);
  rsoc::command_detail::write_json(root_ / "b.json", b);
  EXPECT_EQ(rsoc::cmd_compare(root_ / "a.json", root_ / "b.json", {}, streams()), rsoc::kExitCompareFailed);
  const auto r = rsoc::compare_summaries(a, b);
  EXPECT_NEAR(r.tolerance, 0.02 + 2.0 / 256.0, 1e-15);
  EXPECT_FALSE(r.pass);
}

TEST_F(Commands, CompareRejectsMissingOrIncompatibleFiles) {
  EXPECT_EQ(rsoc::cmd_compare(root_ / "none.json", root_ / "none.json", {}, streams()), rsoc::kExitFatal);
  rsoc::Json a;
  a["schema_version"] = 1;
  a["kind"] = "rs";
  a["estimate"] = {{"value", 0.5}, {"error", 0.0}};
  a["config"] = {{"model.J", "0.2"}};
  rsoc::Json b = a;
  b["config"]["model.J"] = "0.3";
  rsoc::command_detail::write_json(root_ / "a.json", a);
  rsoc::command_detail::write_json(root_ / "b.json", b);
  EXPECT_EQ(rsoc::cmd_compare(root_ / "a.json", root_ / "b.json", {}, streams()), rsoc::kExitFatal);
  EXPECT_THAT(err_.str(), HasSubstr("model.J"));
  rsoc::command_detail::write_text(root_ / "junk.json", "{\"x\": 1}");
  EXPECT_EQ(rsoc::cmd_compare(root_ / "a.json", root_ / "junk.json", {}, streams()), rsoc::kExitFatal);
}

TEST_F(Commands, DebugDumpWritesSlices) {
  const auto cfg = small("debug.dump = true\n");
  ASSERT_EQ(rsoc::cmd_single_agent(cfg, root_, streams()), rsoc::kExitOk);
  for (const char* f : {"psi.csv", "c.csv", "pi.csv"}) EXPECT_TRUE(fs::exists(root_ / "debug" / f)) << f;
}

TEST(OutputDir, Resolution) {
  ::unsetenv("RSOC_OUTPUT_ROOT");
  EXPECT_EQ(rsoc::resolve_output_dir("given", "cfg", "oracle"), fs::path("given"));
  EXPECT_EQ(rsoc::resolve_output_dir("", "cfg", "oracle"), fs::path("cfg"));
  EXPECT_EQ(rsoc::resolve_output_dir("", "", "oracle"), fs::path("oracle"));
  ::setenv("RSOC_OUTPUT_ROOT", "/data/runs", 1);
  EXPECT_EQ(rsoc::resolve_output_dir("", "", "oracle"), fs::path("/data/runs/oracle"));
  EXPECT_EQ(rsoc::resolve_output_dir("", "cfg", "oracle"), fs::path("/data/runs/cfg"));
  EXPECT_EQ(rsoc::resolve_output_dir("", "/abs", "oracle"), fs::path("/abs"));
  ::unsetenv("RSOC_OUTPUT_ROOT");
}

}  // namespace
