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


#ifndef RSOC_IO_CONFIG_HPP
#define RSOC_IO_CONFIG_HPP

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rsoc/effective_agent.hpp"
#include "rsoc/error.hpp"
#include "rsoc/io/csv.hpp"
#include "rsoc/model.hpp"
#include "rsoc/nbody_oracle.hpp"
#include "rsoc/rs_solver.hpp"

/**
 * \file
 * \brief Run configuration: a flat `section.key = value` document.
 *
 * Lines starting with '#' are comments. Lists (polynomial coefficients,
 * lowest power first) are comma separated. Unknown keys are rejected.
 */

namespace rsoc {

struct OracleConfig {
  std::size_t N = 64;
  std::size_t n_instances = 32;
  OracleMode mode = OracleMode::riccati;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  std::size_t substeps = 8;
  /// Finite-size allowance c in the comparison tolerance c / N.
  double finite_size_c = 2.0;
};

struct RunConfig {
  ModelParams model;
  std::size_t M = 64;
  double L = 6.0;
  std::size_t n_x = 241;
  std::size_t psi_substeps = 8;
  std::size_t fp_substeps = 8;
  std::size_t path_substeps = 1;
  double floor_rel = 1e-12;
  double u_max = 50.0;
  SolverConfig solver;
  OracleConfig oracle;
  std::string output_dir;
  bool debug_dump = false;

  [[nodiscard]] Discretization discretization() const {
    Discretization d;
    d.space = SpaceGrid{L, n_x};
    d.time = TimeGrid{model.t_f, M};
    d.psi_substeps = psi_substeps;
    d.fp_substeps = fp_substeps;
    d.path_substeps = path_substeps;
    d.floor_rel = floor_rel;
    d.u_max = u_max;
    return d;
  }

  /// Throws std::invalid_argument naming the offending key.
  void validate() const {
    model.validate();
    (void)discretization();
    if (psi_substeps < 1) throw std::invalid_argument("grid.psi_substeps must be >= 1");
    if (fp_substeps < 1) throw std::invalid_argument("grid.fp_substeps must be >= 1");
    if (path_substeps < 1) throw std::invalid_argument("grid.path_substeps must be >= 1");
    if (!(floor_rel > 0.0 && floor_rel < 1.0)) throw std::invalid_argument("grid.floor_rel must be in (0, 1)");
    if (!(u_max > 0.0)) throw std::invalid_argument("grid.u_max must be > 0");
    solver.validate();
    if (oracle.N < 1) throw std::invalid_argument("oracle.N must be >= 1");
    if (oracle.n_instances < 4) throw std::invalid_argument("oracle.n_instances must be >= 4");
    if (oracle.mode == OracleMode::feynman_kac && oracle.n_paths < 1000) {
      throw std::invalid_argument("oracle.n_paths must be >= 1000");
    }
    if (oracle.substeps < 1) throw std::invalid_argument("oracle.substeps must be >= 1");
    if (!(oracle.finite_size_c >= 0.0)) throw std::invalid_argument("oracle.finite_size_c must be >= 0");
  }
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double to_double(std::string_view v) { return csv::parse_double(v); }

inline std::uint64_t to_uint(std::string_view v) {
  v = trim(v);
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || v.empty()) {
    throw std::invalid_argument("not a non-negative integer: '" + std::string(v) + "'");
  }
  return out;
}

inline std::size_t to_size(std::string_view v) { return static_cast<std::size_t>(to_uint(v)); }

inline bool to_bool(std::string_view v) {
  v = trim(v);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("not a boolean: '" + std::string(v) + "'");
}

inline Polynomial to_polynomial(std::string_view v) {
  std::vector<double> coeffs;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    coeffs.push_back(to_double(v.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return Polynomial{coeffs};
}

inline std::string from_polynomial(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::string out;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(p.degree()); ++k) {
    if (k != 0) out += ", ";
    out += csv::format_double(p.coeff(k));
  }
  return out;
}

inline OracleMode to_mode(std::string_view v) {
  v = trim(v);
  if (v == "riccati") return OracleMode::riccati;
  if (v == "feynman-kac") return OracleMode::feynman_kac;
  throw std::invalid_argument("expected riccati or feynman-kac, got '" + std::string(v) + "'");
}

inline std::string from_mode(OracleMode m) { return m == OracleMode::riccati ? "riccati" : "feynman-kac"; }

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define RSOC_CONFIG_FIELD(key, member, parse, format) \
  Field { key, [](RunConfig& c, std::string_view v) { c.member = parse(v); }, \
          [](const RunConfig& c) { return format(c.member); } }

inline std::string fmt_size(std::uint64_t v) { return std::to_string(v); }
inline std::string fmt_bool(bool v) { return v ? "true" : "false"; }
inline std::string fmt_string(const std::string& v) { return v; }
inline std::string to_string_value(std::string_view v) { return std::string(trim(v)); }

inline const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      RSOC_CONFIG_FIELD("model.J", model.J, to_double, csv::format_double),
      RSOC_CONFIG_FIELD("model.nu", model.nu, to_polynomial, from_polynomial),
      RSOC_CONFIG_FIELD("model.phi", model.phi, to_polynomial, from_polynomial),
      RSOC_CONFIG_FIELD("model.t_f", model.t_f, to_double, csv::format_double),
      RSOC_CONFIG_FIELD("grid.M", M, to_size, fmt_size),
      RSOC_CONFIG_FIELD("grid.L", L, to_double, csv::format_double),
      RSOC_CONFIG_FIELD("grid.n_x", n_x, to_size, fmt_size),
      RSOC_CONFIG_FIELD("grid.psi_substeps", psi_substeps, to_size, fmt_size),
      RSOC_CONFIG_FIELD("grid.fp_substeps", fp_substeps, to_size, fmt_size),
      RSOC_CONFIG_FIELD("grid.path_substeps", path_substeps, to_size, fmt_size),
      RSOC_CONFIG_FIELD("grid.floor_rel", floor_rel, to_double, csv::format_double),
      RSOC_CONFIG_FIELD("grid.u_max", u_max, to_double, csv::format_double),
      RSOC_CONFIG_FIELD("solver.n_H", solver.n_H, to_size, fmt_size),
      RSOC_CONFIG_FIELD("solver.n_h", solver.n_h, to_size, fmt_size),
      RSOC_CONFIG_FIELD("solver.n_paths", solver.n_paths, to_size, fmt_size),
      RSOC_CONFIG_FIELD("solver.damping", solver.damping, to_double, csv::format_double),
      RSOC_CONFIG_FIELD("solver.tol", solver.tol, to_double, csv::format_double),
      RSOC_CONFIG_FIELD("solver.window", solver.window, to_size, fmt_size),
      RSOC_CONFIG_FIELD("solver.max_iter", solver.max_iter, to_size, fmt_size),
      RSOC_CONFIG_FIELD("solver.seed", solver.seed, to_uint, fmt_size),
      RSOC_CONFIG_FIELD("solver.jitter", solver.jitter, to_double, csv::format_double),
      RSOC_CONFIG_FIELD("solver.eval_n_H", solver.eval_n_H, to_size, fmt_size),
      RSOC_CONFIG_FIELD("oracle.N", oracle.N, to_size, fmt_size),
      RSOC_CONFIG_FIELD("oracle.n_instances", oracle.n_instances, to_size, fmt_size),
      RSOC_CONFIG_FIELD("oracle.mode", oracle.mode, to_mode, from_mode),
      RSOC_CONFIG_FIELD("oracle.n_paths", oracle.n_paths, to_size, fmt_size),
      RSOC_CONFIG_FIELD("oracle.seed", oracle.seed, to_uint, fmt_size),
      RSOC_CONFIG_FIELD("oracle.substeps", oracle.substeps, to_size, fmt_size),
      RSOC_CONFIG_FIELD("oracle.finite_size_c", oracle.finite_size_c, to_double, csv::format_double),
      RSOC_CONFIG_FIELD("output.dir", output_dir, to_string_value, fmt_string),
      RSOC_CONFIG_FIELD("debug.dump", debug_dump, to_bool, fmt_bool),
  };
  return table;
}

#undef RSOC_CONFIG_FIELD

}  // namespace config_detail

/// Parses and validates a config document; `source` prefixes error messages.
[[nodiscard]] inline RunConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  std::map<std::string, const config_detail::Field*, std::less<>> index;
  for (const auto& f : config_detail::fields()) index.emplace(f.key, &f);

  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = config_detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key{config_detail::trim(text.substr(0, eq))};
    const auto value = config_detail::trim(text.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) throw ConfigError(where + key + ": unknown key");
    if (!seen.insert(key).second) throw ConfigError(where + key + ": set more than once");
    if (value.empty()) throw ConfigError(where + key + ": missing value");
    try {
      it->second->set(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

[[nodiscard]] inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in{text};
  return parse_config(in);
}

[[nodiscard]] inline RunConfig load_config(const std::string& path) {
  std::ifstream in{path};
  if (!in) throw ConfigError(path + ": cannot open config file");
  return parse_config(in, path);
}

/// (key, value) pairs of every key with a non-empty effective value.
[[nodiscard]] inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : config_detail::fields()) {
    auto value = f.get(cfg);
    if (!value.empty()) out.emplace_back(f.key, std::move(value));
  }
  return out;
}

/// Effective config echo; parsing the output reproduces cfg.
inline void write_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& [key, value] : config_entries(cfg)) out << key << " = " << value << '\n';
}

}  // namespace rsoc

#endif  // RSOC_IO_CONFIG_HPP
