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

#ifndef RSOC_EFFECTIVE_AGENT_HPP
#define RSOC_EFFECTIVE_AGENT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "rsoc/error.hpp"
#include "rsoc/gaussian_fields.hpp"
#include "rsoc/model.hpp"
#include "rsoc/pde1d.hpp"
#include "rsoc/random.hpp"
#include "rsoc/stats.hpp"

/**
 * \file
 * \brief Observables of the effective agent for one field realization, and
 * their reweighted average over a population of inner fields.
 */

namespace rsoc {

/// Grids plus the numerical knobs of the single-agent solvers.
struct Discretization {
  SpaceGrid space{6.0, 241};
  TimeGrid time{1.0, 64};
  std::size_t psi_substeps = 8;
  std::size_t fp_substeps = 8;
  std::size_t path_substeps = 1;
  double floor_rel = 1e-12;
  double u_max = 50.0;

  [[nodiscard]] static Discretization with_horizon(double t_f, std::size_t steps = 64) {
    Discretization d;
    d.time = TimeGrid{t_f, steps};
    return d;
  }
};

struct HSampleResult {
  double log_weight = 0.0;  ///< -c(0, 0 | h, H)
  double weight = 0.0;      ///< psi(0, 0)
  std::vector<double> m;    ///< mean position from the Fokker-Planck density
  std::vector<double> second_moment;  ///< <x^2> from the Fokker-Planck density
  std::vector<double> m_particles;
  std::vector<double> m_particles_error;
  Eigen::MatrixXd C;  ///< <x(tau_i) x(tau_j)> from controlled trajectories
  std::vector<double> c_diag_error;
  std::size_t masked_nodes = 0;
  double fp_mass_error = 0.0;
  double fp_boundary_mass = 0.0;
};

struct HPopulationResult {
  std::vector<double> m;
  Eigen::MatrixXd C;
  double log_N_h = 0.0;
  double N_h = 0.0;
  double ess = 0.0;
  std::size_t size = 0;
};

/// g(tau_i) = J (h(tau_i) + H(tau_i)).
[[nodiscard]] inline std::vector<double> total_field(double J, const FieldPath& h, const FieldPath& H) {
  if (h.values.size() != H.values.size()) throw std::invalid_argument("field paths have different lengths");
  std::vector<double> g(h.values.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = J * (h.values[i] + H.values[i]);
  return g;
}

/**
 * Simulates n_paths controlled trajectories from x = 0 with Euler-Maruyama.
 * The drift is evaluated at the start of each sub-step, linearly interpolated
 * in time between grid rows; returns positions at the time nodes, one
 * column per node.
 */
[[nodiscard]] inline Eigen::MatrixXd simulate_controlled_paths(const DriftField& drift, std::size_t n_paths,
                                                              std::size_t substeps, Rng& rng) {
  const auto& tg = drift.u.time();
  const auto& sg = drift.u.space();
  const std::size_t nx = sg.size();
  const std::size_t n_sub = tg.steps() * substeps;

  // Drift rows at every sub-step start.
  std::vector<double> rows(n_sub * nx);
  for (std::size_t i = 0; i < tg.steps(); ++i) {
    const auto a = drift.u.row(i);
    const auto b = drift.u.row(i + 1);
    for (std::size_t s = 0; s < substeps; ++s) {
      const double frac = static_cast<double>(s) / static_cast<double>(substeps);
      double* out = rows.data() + (i * substeps + s) * nx;
      for (std::size_t k = 0; k < nx; ++k) out[k] = (1.0 - frac) * a[k] + frac * b[k];
    }
  }

  Eigen::MatrixXd positions = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_paths),
                                                    static_cast<Eigen::Index>(tg.size()));
  std::normal_distribution<double> normal;
  const double h = tg.dt() / static_cast<double>(substeps);
  const double sh = std::sqrt(h);
  const double inv_dx = 1.0 / sg.dx();
  const double center = static_cast<double>(sg.center());
  const double last = static_cast<double>(nx - 1);
  for (std::size_t p = 0; p < n_paths; ++p) {
    double x = 0.0;
    for (std::size_t j = 0; j < n_sub; ++j) {
      const double* row = rows.data() + j * nx;
      const double pos = x * inv_dx + center;
      double u;
      if (pos <= 0.0) {
        u = row[0];
      } else if (pos >= last) {
        u = row[nx - 1];
      } else {
        const auto k = static_cast<std::size_t>(pos);
        const double w = pos - static_cast<double>(k);
        u = (1.0 - w) * row[k] + w * row[k + 1];
      }
      x += u * h + sh * normal(rng);
      if ((j + 1) % substeps == 0) {
        positions(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>((j + 1) / substeps)) = x;
      }
    }
  }
  return positions;
}

/// Deterministic part of the agent: value function, drift and FP moments for one total field g.
struct AgentSolution {
  double log_weight = 0.0;
  double weight = 0.0;
  std::vector<double> m;
  std::vector<double> second_moment;
  std::size_t masked_nodes = 0;
  double fp_mass_error = 0.0;
  double fp_boundary_mass = 0.0;
  DriftField drift{GridFunction{SpaceGrid{1.0, 3}, TimeGrid{1.0, 2}}, 50.0};
};

[[nodiscard]] inline AgentSolution solve_agent(const ModelParams& params, std::span<const double> g,
                                               const Discretization& disc) {
  const auto& sg = disc.space;
  const auto& tg = disc.time;
  const auto psi = solve_psi_backward(params, g, sg, tg, disc.psi_substeps);
  const auto value = cole_hopf(psi, disc.floor_rel);
  AgentSolution out;
  out.drift = drift_from_value(value, disc.u_max);
  const auto fp = solve_fp_forward(out.drift, sg.center(), 0, disc.fp_substeps);
  out.log_weight = -value.c(0, sg.center());
  out.weight = psi(0, sg.center());
  out.masked_nodes = value.masked_count;
  out.fp_mass_error = fp.max_mass_error;
  out.fp_boundary_mass = fp.max_boundary_mass;
  out.m.resize(tg.size());
  out.second_moment.resize(tg.size());
  for (std::size_t i = 0; i < tg.size(); ++i) {
    out.m[i] = density_moment(fp.pi, i, 1);
    out.second_moment[i] = density_moment(fp.pi, i, 2);
  }
  return out;
}

/// Adds the trajectory estimates (C and particle moments) to a solved agent.
[[nodiscard]] inline HSampleResult sample_agent(const AgentSolution& sol, std::size_t n_paths, std::size_t substeps,
                                                Rng& rng) {
  if (n_paths < 2) throw std::invalid_argument("agent_observables: n_paths must be >= 2");
  const auto& tg = sol.drift.u.time();
  HSampleResult out;
  out.log_weight = sol.log_weight;
  out.weight = sol.weight;
  out.m = sol.m;
  out.second_moment = sol.second_moment;
  out.masked_nodes = sol.masked_nodes;
  out.fp_mass_error = sol.fp_mass_error;
  out.fp_boundary_mass = sol.fp_boundary_mass;

  const Eigen::MatrixXd x = simulate_controlled_paths(sol.drift, n_paths, substeps, rng);
  const auto n = static_cast<Eigen::Index>(tg.size());
  const double inv = 1.0 / static_cast<double>(n_paths);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  c.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), inv);
  out.C = c.selfadjointView<Eigen::Lower>();

  out.m_particles.resize(tg.size());
  out.m_particles_error.resize(tg.size());
  out.c_diag_error.resize(tg.size());
  std::vector<double> column(n_paths);
  std::vector<double> squares(n_paths);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < n_paths; ++p) {
      column[p] = x(static_cast<Eigen::Index>(p), i);
      squares[p] = column[p] * column[p];
    }
    const auto m = mean_with_error(column);
    out.m_particles[static_cast<std::size_t>(i)] = m.value;
    out.m_particles_error[static_cast<std::size_t>(i)] = m.error;
    out.c_diag_error[static_cast<std::size_t>(i)] = mean_with_error(squares).error;
  }
  return out;
}

/**
 * Observables of the effective agent driven by g = J (h + H): the sample
 * weight psi(0,0), m(tau) from the Fokker-Planck density started at (0, 0),
 * and C(tau, tau') from trajectories under the optimal drift.
 */
[[nodiscard]] inline HSampleResult agent_observables(const ModelParams& params, const FieldPath& h,
                                                     const FieldPath& H, const Discretization& disc,
                                                     std::size_t n_paths, Rng& rng) {
  if (!(h.grid == disc.time) || !(H.grid == disc.time)) {
    throw std::invalid_argument("agent_observables: field grid mismatch");
  }
  if (n_paths < 2) throw std::invalid_argument("agent_observables: n_paths must be >= 2");
  return sample_agent(solve_agent(params, total_field(params.J, h, H), disc), n_paths, disc.path_substeps, rng);
}

/**
 * Self-normalized average over inner fields:
 * [[O]] = sum_k w_k O_k / sum_k w_k, N_h = mean_k w_k, ESS = (sum w)^2 / sum w^2.
 */
[[nodiscard]] inline HPopulationResult population_average(std::span<const HSampleResult> samples) {
  if (samples.empty()) throw std::invalid_argument("population_average: no samples");
  std::vector<double> log_w(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) log_w[k] = samples[k].log_weight;
  const double top = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(top)) throw NumericalError("population_average: all sample weights are zero");

  const std::size_t nt = samples.front().m.size();
  HPopulationResult out;
  out.size = samples.size();
  out.m.assign(nt, 0.0);
  out.C = Eigen::MatrixXd::Zero(samples.front().C.rows(), samples.front().C.cols());
  double total = 0.0;
  for (const auto& s : samples) {
    const double w = std::exp(s.log_weight - top);
    total += w;
    for (std::size_t i = 0; i < nt; ++i) out.m[i] += w * s.m[i];
    out.C += w * s.C;
  }
  for (double& v : out.m) v /= total;
  out.C /= total;
  out.C = 0.5 * (out.C + out.C.transpose()).eval();
  out.log_N_h = top + std::log(total / static_cast<double>(samples.size()));
  out.N_h = std::exp(out.log_N_h);
  out.ess = effective_sample_size(log_w);
  return out;
}

}  // namespace rsoc

#endif  // RSOC_EFFECTIVE_AGENT_HPP
