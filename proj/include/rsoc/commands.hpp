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


#ifndef RSOC_COMMANDS_HPP
#define RSOC_COMMANDS_HPP

#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsoc/effective_agent.hpp"
#include "rsoc/error.hpp"
#include "rsoc/gaussian_fields.hpp"
#include "rsoc/io/config.hpp"
#include "rsoc/io/csv.hpp"
#include "rsoc/nbody_oracle.hpp"
#include "rsoc/pde1d.hpp"
#include "rsoc/rs_solver.hpp"

/**
 * \file
 * \brief The CLI subcommands as library calls. Each returns a process exit
 * code: 0 success, 1 fatal error, 2 non-convergence, 3 comparison failure.
 */

namespace rsoc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitCompareFailed = 3;
inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

struct CommandStreams {
  std::ostream& out;  ///< results meant for the user
  std::ostream& err;  ///< diagnostics and progress
  int verbosity = 0;
};

/**
 * Output directory of a run: an explicit path wins, then output.dir;
 * relative directories live under $RSOC_OUTPUT_ROOT (default ".").
 * Without either, the command name is used.
 */
[[nodiscard]] inline std::filesystem::path resolve_output_dir(const std::string& explicit_dir,
                                                              const std::string& config_dir,
                                                              const std::string& command) {
  if (!explicit_dir.empty()) return explicit_dir;
  std::filesystem::path dir = config_dir.empty() ? command : config_dir;
  if (dir.is_absolute()) return dir;
  const char* root = std::getenv("RSOC_OUTPUT_ROOT");
  return (root != nullptr && *root != '\0') ? std::filesystem::path(root) / dir : dir;
}

namespace command_detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out{path, std::ios::binary};
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

inline void write_json(const std::filesystem::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

inline Json config_json(const RunConfig& cfg) {
  Json obj = Json::object();
  for (const auto& [key, value] : config_entries(cfg)) obj[key] = value;
  return obj;
}

inline void echo_config(const std::filesystem::path& dir, const RunConfig& cfg) {
  std::ofstream out{dir / "config.effective", std::ios::binary};
  if (!out) throw std::runtime_error("cannot write the config echo in " + dir.string());
  write_config(out, cfg);
}

inline std::filesystem::path prepare(const std::filesystem::path& dir, const RunConfig& cfg) {
  std::filesystem::create_directories(dir);
  echo_config(dir, cfg);
  return dir;
}

/// Debug dump of psi, c and pi for the zero-field agent.
inline void dump_zero_field(const std::filesystem::path& dir, const RunConfig& cfg) {
  const auto disc = cfg.discretization();
  const auto debug = dir / "debug";
  std::filesystem::create_directories(debug);
  const auto psi = solve_psi_backward(cfg.model, std::vector<double>(disc.time.size(), 0.0), disc.space, disc.time,
                                      disc.psi_substeps);
  const auto value = cole_hopf(psi, disc.floor_rel);
  const auto fp = solve_fp_forward(drift_from_value(value, disc.u_max), disc.space.center(), 0, disc.fp_substeps);
  save_grid_function_csv((debug / "psi.csv").string(), psi);
  save_grid_function_csv((debug / "c.csv").string(), value.c);
  save_grid_function_csv((debug / "pi.csv").string(), fp.pi);
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }
}

}  // namespace command_detail

/// Writes D.csv, F.csv, trace.csv, profiles.csv and summary.json.
inline int cmd_solve_rs(const RunConfig& cfg, const std::filesystem::path& dir, CommandStreams io) {
  return command_detail::guarded(io.err, [&] {
    cfg.validate();
    command_detail::prepare(dir, cfg);
    if (cfg.debug_dump) command_detail::dump_zero_field(dir, cfg);
    const auto disc = cfg.discretization();

    std::ofstream trace{dir / "trace.csv", std::ios::binary};
    if (!trace) throw std::runtime_error("cannot write trace.csv");
    trace << "iteration,delta_D,delta_F,ess_mean,ess_min,low_ess_fraction,clipped_mass_D,clipped_mass_F,r0,r0_error\n";
    const auto observer = [&](const IterationRecord& r) {
      const std::vector<double> row{static_cast<double>(r.iteration), r.delta_D, r.delta_F, r.ess_mean, r.ess_min,
                                    r.low_ess_fraction, r.clipped_mass_D, r.clipped_mass_F, r.r0, r.r0_error};
      csv::write_row(trace, row);
      trace.flush();
      if (io.verbosity > 0) {
        io.err << "iteration " << r.iteration << ": dD=" << r.delta_D << " dF=" << r.delta_F << " r0=" << r.r0
               << " +- " << r.r0_error << " ess_min=" << r.ess_min << '\n';
      }
    };
    const auto state = solve_rs(cfg.model, disc, cfg.solver, observer);

    save_kernel_csv((dir / "D.csv").string(), state.D);
    save_kernel_csv((dir / "F.csv").string(), state.F);
    {
      std::ofstream prof{dir / "profiles.csv", std::ios::binary};
      prof << "tau,m,D_diag,F_diag\n";
      for (std::size_t i = 0; i < disc.time.size(); ++i) {
        const std::vector<double> row{disc.time[i], state.mean_m[i], state.D(i, i), state.F(i, i)};
        csv::write_row(prof, row);
      }
    }
    for (const auto& w : state.warnings) io.err << "warning: " << w << '\n';

    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = "rs";
    doc["estimate"] = {{"value", state.r0.value}, {"error", state.r0.error}};
    doc["r0"] = {{"value", state.r0.value},
                 {"kernel_term", state.r0.kernel_term},
                 {"log_norm_term", state.r0.log_norm_term},
                 {"error", state.r0.error}};
    doc["converged"] = state.converged;
    doc["iterations"] = state.iteration;
    doc["n_log_norms"] = state.log_norms.size();
    doc["warnings"] = state.warnings;
    doc["config"] = command_detail::config_json(cfg);
    command_detail::write_json(dir / "summary.json", doc);

    io.out << "r0 = " << csv::format_double(state.r0.value) << " +- " << csv::format_double(state.r0.error)
           << (state.converged ? "" : " (not converged)") << '\n';
    return state.converged ? kExitOk : kExitNotConverged;
  });
}

/// Writes oracle.json and instances.csv.
inline int cmd_oracle(const RunConfig& cfg, const std::filesystem::path& dir, CommandStreams io) {
  return command_detail::guarded(io.err, [&] {
    cfg.validate();
    if (cfg.oracle.mode == OracleMode::riccati && !is_quadratic_model(cfg.model)) {
      throw ConfigError("oracle.mode: riccati requires quadratic model.nu and model.phi; use feynman-kac");
    }
    command_detail::prepare(dir, cfg);
    const TimeGrid tg{cfg.model.t_f, cfg.M};
    const auto result = quenched_average(cfg.model, cfg.oracle.N, cfg.oracle.n_instances, cfg.oracle.mode, tg,
                                         cfg.oracle.n_paths, cfg.oracle.seed, cfg.oracle.substeps);
    {
      std::ofstream inst{dir / "instances.csv", std::ios::binary};
      inst << "instance,cost,error\n";
      for (std::size_t k = 0; k < result.instances.size(); ++k) {
        const std::vector<double> row{static_cast<double>(k), result.instances[k].cost, result.instances[k].error};
        csv::write_row(inst, row);
      }
    }
    if (result.refusals > 0) io.err << "note: resampled " << result.refusals << " unconfined instances\n";

    Json instances = Json::array();
    for (const auto& r : result.instances) instances.push_back({{"cost", r.cost}, {"error", r.error}});
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = "oracle";
    doc["estimate"] = {{"value", result.mean}, {"error", result.error}};
    doc["mode"] = cfg.oracle.mode == OracleMode::riccati ? "riccati" : "feynman-kac";
    doc["N"] = cfg.oracle.N;
    doc["finite_size_c"] = cfg.oracle.finite_size_c;
    doc["mean"] = result.mean;
    doc["error"] = result.error;
    doc["refusals"] = result.refusals;
    doc["instances"] = std::move(instances);
    doc["config"] = command_detail::config_json(cfg);
    command_detail::write_json(dir / "oracle.json", doc);

    io.out << "per-agent cost = " << csv::format_double(result.mean) << " +- " << csv::format_double(result.error)
           << '\n';
    return kExitOk;
  });
}

/// Zero-field single-agent solve: c.csv slices and single_agent.json.
inline int cmd_single_agent(const RunConfig& cfg, const std::filesystem::path& dir, CommandStreams io) {
  return command_detail::guarded(io.err, [&] {
    cfg.validate();
    command_detail::prepare(dir, cfg);
    const auto disc = cfg.discretization();
    const auto psi = solve_psi_backward(cfg.model, std::vector<double>(disc.time.size(), 0.0), disc.space,
                                        disc.time, disc.psi_substeps);
    const auto value = cole_hopf(psi, disc.floor_rel);
    save_grid_function_csv((dir / "c.csv").string(), value.c);
    if (cfg.debug_dump) command_detail::dump_zero_field(dir, cfg);
    const double cost = value.c(0, disc.space.center());

    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = "single-agent";
    doc["estimate"] = {{"value", cost}, {"error", 0.0}};
    doc["cost"] = cost;
    doc["masked_nodes"] = value.masked_count;
    doc["config"] = command_detail::config_json(cfg);
    command_detail::write_json(dir / "single_agent.json", doc);
    io.out << "-ln psi(0,0) = " << csv::format_double(cost) << '\n';
    return kExitOk;
  });
}

struct CompareReport {
  double difference = 0.0;
  double tolerance = 0.0;
  double finite_size = 0.0;
  bool pass = false;
};

namespace command_detail {

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

inline void require_schema(const Json& doc, const std::filesystem::path& path) {
  if (!doc.contains("schema_version") || doc["schema_version"] != kSchemaVersion || !doc.contains("estimate") ||
      !doc.contains("config")) {
    throw std::runtime_error(path.string() + ": not a summary document of schema version " +
                             std::to_string(kSchemaVersion));
  }
}

}  // namespace command_detail

/**
 * Compares two summaries (any of rs, oracle, single-agent). The tolerance is
 * the sum of both standard errors plus c / N when one side is an oracle.
 * Both runs must describe the same model.
 */
[[nodiscard]] inline CompareReport compare_summaries(const Json& a, const Json& b) {
  for (const char* key : {"model.J", "model.nu", "model.phi", "model.t_f"}) {
    if (a["config"].value(key, std::string{}) != b["config"].value(key, std::string{})) {
      throw std::runtime_error(std::string("summaries describe different models (") + key + " differs)");
    }
  }
  CompareReport r;
  r.difference = a["estimate"]["value"].get<double>() - b["estimate"]["value"].get<double>();
  for (const Json* doc : {&a, &b}) {
    if ((*doc)["kind"] == "oracle") {
      r.finite_size = std::max(r.finite_size, (*doc)["finite_size_c"].get<double>() / (*doc)["N"].get<double>());
    }
  }
  r.tolerance = a["estimate"]["error"].get<double>() + b["estimate"]["error"].get<double>() + r.finite_size;
  r.pass = std::abs(r.difference) <= r.tolerance;
  return r;
}

/// Writes compare.json into dir (when non-empty) and prints the report.
inline int cmd_compare(const std::filesystem::path& first, const std::filesystem::path& second,
                       const std::filesystem::path& dir, CommandStreams io) {
  return command_detail::guarded(io.err, [&] {
    const auto a = command_detail::read_json(first);
    const auto b = command_detail::read_json(second);
    command_detail::require_schema(a, first);
    command_detail::require_schema(b, second);
    const auto r = compare_summaries(a, b);

    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = "compare";
    doc["first"] = first.string();
    doc["second"] = second.string();
    doc["difference"] = r.difference;
    doc["tolerance"] = r.tolerance;
    doc["finite_size_allowance"] = r.finite_size;
    doc["pass"] = r.pass;
    if (!dir.empty()) {
      std::filesystem::create_directories(dir);
      command_detail::write_json(dir / "compare.json", doc);
    }
    io.out << doc.dump(2) << '\n';
    return r.pass ? kExitOk : kExitCompareFailed;
  });
}

}  // namespace rsoc

#endif  // RSOC_COMMANDS_HPP
