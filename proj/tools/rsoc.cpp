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


// rsoc: replica-symmetric solver and finite-N oracles for the disordered
// control problem. Numerical settings come from one config file per run.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "rsoc/commands.hpp"

namespace {

struct RunOptions {
  std::string config;
  std::string out;
};

void add_run_options(CLI::App* cmd, RunOptions& opts) {
  cmd->add_option("config", opts.config, "Run configuration (flat 'section.key = value' file)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", opts.out, "Output directory (default: output.dir or the command name under "
                                        "$RSOC_OUTPUT_ROOT)");
}

template <typename Command>
int run_with_config(const RunOptions& opts, const std::string& name, int verbosity, Command command) {
  rsoc::RunConfig cfg;
  try {
    cfg = rsoc::load_config(opts.config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rsoc::kExitFatal;
  }
  const auto dir = rsoc::resolve_output_dir(opts.out, cfg.output_dir, name);
  return command(cfg, dir, rsoc::CommandStreams{std::cout, std::cerr, verbosity});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replica-symmetric disordered optimal control solver"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "Print progress to stderr (repeat for more)");

  RunOptions solve_opts;
  auto* solve = app.add_subcommand("solve-rs", "Iterate the RS kernels to self-consistency and report r0");
  add_run_options(solve, solve_opts);

  RunOptions oracle_opts;
  auto* oracle = app.add_subcommand("oracle", "Quenched finite-N cost via Riccati or Feynman-Kac");
  add_run_options(oracle, oracle_opts);

  RunOptions single_opts;
  auto* single = app.add_subcommand("single-agent", "Zero-field 1D solve: c(x, t) slices and -ln psi(0,0)");
  add_run_options(single, single_opts);

  std::string first;
  std::string second;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Compare two summaries within the combined tolerance");
  compare->add_option("first", first, "First summary JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("second", second, "Second summary JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("-o,--out", compare_out, "Directory for compare.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rsoc::kExitFatal;
  }

  if (*solve) return run_with_config(solve_opts, "solve-rs", verbosity, rsoc::cmd_solve_rs);
  if (*oracle) return run_with_config(oracle_opts, "oracle", verbosity, rsoc::cmd_oracle);
  if (*single) return run_with_config(single_opts, "single-agent", verbosity, rsoc::cmd_single_agent);
  return rsoc::cmd_compare(first, second, compare_out, rsoc::CommandStreams{std::cout, std::cerr, verbosity});
}
