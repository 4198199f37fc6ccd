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

#ifndef RSOC_RS_SOLVER_HPP
#define RSOC_RS_SOLVER_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rsoc/effective_agent.hpp"
#include "rsoc/gaussian_fields.hpp"
#include "rsoc/model.hpp"
#include "rsoc/parallel.hpp"
#include "rsoc/random.hpp"
#include "rsoc/stats.hpp"

/**
 * \file
 * \brief Replica-symmetric self-consistency loop for the kernels D and F.
 *
 * Given (D, F), outer fields H ~ N(0, F) and inner fields h ~ N(0, D - F)
 * drive the effective agent; the kernels are re-estimated as
 *   D = < [[C]] >_H,   F = < [[m]] [[m]]^T >_H,
 * and the cost is r0 = J^2/4 int int (D^2 - F^2) - < ln N_h >_H.
 */

namespace rsoc {

struct SolverConfig {
  std::size_t n_H = 64;
  std::size_t n_h = 64;
  std::size_t n_paths = 2000;
  double damping = 0.5;
  double tol = 1e-3;
  std::size_t window = 5;
  std::size_t max_iter = 50;
  std::uint64_t seed = 1;
  double jitter = 1e-10;
  /// Outer samples of an extra r0 pass with frozen kernels; 0 disables it.
  std::size_t eval_n_H = 0;

  void validate() const {
    if (n_H < 2) throw std::invalid_argument("solver.n_H must be >= 2");
    if (n_h < 1) throw std::invalid_argument("solver.n_h must be >= 1");
    if (n_paths < 2) throw std::invalid_argument("solver.n_paths must be >= 2");
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("solver.damping must be in (0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("solver.tol must be > 0");
    if (window < 1) throw std::invalid_argument("solver.window must be >= 1");
    if (max_iter < 1) throw std::invalid_argument("solver.max_iter must be >= 1");
    if (!(jitter >= 0.0)) throw std::invalid_argument("solver.jitter must be >= 0");
    if (eval_n_H == 1) throw std::invalid_argument("solver.eval_n_H must be 0 or >= 2");
  }
};

struct R0Result {
  double value = 0.0;
  double kernel_term = 0.0;    ///< J^2/4 int int (D^2 - F^2)
  double log_norm_term = 0.0;  ///< -< ln N_h >_H
  double error = 0.0;          ///< standard error from the H-sample spread of ln N_h
};

struct IterationRecord {
  std::size_t iteration = 0;
  double delta_D = 0.0;
  double delta_F = 0.0;
  double ess_mean = 0.0;
  double ess_min = 0.0;
  double low_ess_fraction = 0.0;  ///< fraction of H samples with ESS < 0.1 n_h
  double clipped_mass_D = 0.0;    ///< repair diagnostic of D - F
  double clipped_mass_F = 0.0;
  double r0 = 0.0;
  double r0_error = 0.0;
};

struct IterationEstimate {
  TwoTimeKernel D;
  TwoTimeKernel F;
  std::vector<double> log_norms;  ///< ln N_h, one per outer sample
  std::vector<double> ess;
  std::vector<double> mean_m;     ///< < [[m]] >_H
  double clipped_mass_D = 0.0;
  double clipped_mass_F = 0.0;
  double max_boundary_mass = 0.0;  ///< largest FP edge-cell mass over all agents
  std::vector<std::string> warnings;
};

struct RSState {
  TwoTimeKernel D;
  TwoTimeKernel F;
  std::size_t iteration = 0;
  std::vector<IterationRecord> history;
  std::vector<double> log_norms;
  std::vector<double> mean_m;
  R0Result r0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Kernels from a single zero-field agent: D0 = C0, F0 = m0 m0^T.
[[nodiscard]] inline std::pair<TwoTimeKernel, TwoTimeKernel> initialize_kernels(const ModelParams& params,
                                                                               const Discretization& disc,
                                                                               std::size_t n_paths, Rng& rng) {
  const auto zero = FieldPath::zero(disc.time);
  const auto agent = agent_observables(params, zero, zero, disc, n_paths, rng);
  const Eigen::Map<const Eigen::VectorXd> m(agent.m.data(), static_cast<Eigen::Index>(agent.m.size()));
  return {TwoTimeKernel{disc.time, agent.C}, TwoTimeKernel{disc.time, m * m.transpose()}};
}

/// One Monte Carlo evaluation of the self-consistency map at kernels (D, F).
[[nodiscard]] inline IterationEstimate rs_iteration(const TwoTimeKernel& D, const TwoTimeKernel& F,
                                                    const ModelParams& params, const Discretization& disc,
                                                    const SolverConfig& cfg, std::uint64_t iteration_seed,
                                                    std::size_t n_H) {
  const auto& tg = disc.time;
  const auto outer = psd_project(F, cfg.jitter);
  const auto inner = psd_project(kernel_difference(D, F), cfg.jitter);

  // At J = 0 the agent does not see the fields; its PDE part is shared.
  std::optional<AgentSolution> decoupled;
  if (params.J == 0.0) decoupled = solve_agent(params, std::vector<double>(tg.size(), 0.0), disc);

  std::vector<HPopulationResult> populations(n_H);
  std::vector<double> boundary_mass(n_H, 0.0);
  parallel_for(n_H, [&](std::size_t a) {
    Rng rng = make_rng(iteration_seed, a);
    const FieldPath H = sample_field(outer, rng);
    std::vector<HSampleResult> samples;
    samples.reserve(cfg.n_h);
    for (std::size_t k = 0; k < cfg.n_h; ++k) {
      const FieldPath h = sample_field(inner, rng);
      if (decoupled) {
        samples.push_back(sample_agent(*decoupled, cfg.n_paths, disc.path_substeps, rng));
      } else {
        samples.push_back(agent_observables(params, h, H, disc, cfg.n_paths, rng));
      }
    }
    for (const auto& s : samples) boundary_mass[a] = std::max(boundary_mass[a], s.fp_boundary_mass);
    populations[a] = population_average(samples);
  });

  const auto n = static_cast<Eigen::Index>(tg.size());
  Eigen::MatrixXd d_est = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd f_est = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> mean_m(tg.size(), 0.0);
  IterationEstimate est{TwoTimeKernel{tg}, TwoTimeKernel{tg}, {}, {}, {}, inner.clipped_mass(),
                        outer.clipped_mass(), 0.0, {}};
  for (const auto& pop : populations) {
    const Eigen::Map<const Eigen::VectorXd> m(pop.m.data(), n);
    d_est += pop.C;
    f_est += m * m.transpose();
    for (std::size_t i = 0; i < tg.size(); ++i) mean_m[i] += pop.m[i];
    est.log_norms.push_back(pop.log_N_h);
    est.ess.push_back(pop.ess);
  }
  const double scale = 1.0 / static_cast<double>(n_H);
  d_est *= scale;
  f_est *= scale;
  for (double& v : mean_m) v *= scale;
  est.D = TwoTimeKernel{tg, 0.5 * (d_est + d_est.transpose())};
  est.F = TwoTimeKernel{tg, 0.5 * (f_est + f_est.transpose())};
  est.mean_m = std::move(mean_m);
  est.max_boundary_mass = *std::max_element(boundary_mass.begin(), boundary_mass.end());
  if (est.max_boundary_mass > 1e-8) {
    est.warnings.push_back("Fokker-Planck mass at the domain edge reached " +
                           std::to_string(est.max_boundary_mass) + "; consider a larger grid.L");
  }
  if (est.clipped_mass_D > 0.1) {
    est.warnings.push_back("PSD repair of D - F clipped " + std::to_string(est.clipped_mass_D) + " of the spectrum");
  }
  if (est.clipped_mass_F > 0.1) {
    est.warnings.push_back("PSD repair of F clipped " + std::to_string(est.clipped_mass_F) + " of the spectrum");
  }
  return est;
}

/// (1 - alpha) old + alpha est, symmetrized exactly.
[[nodiscard]] inline TwoTimeKernel damped_update(const TwoTimeKernel& old, const TwoTimeKernel& est, double alpha) {
  if (!(old.grid() == est.grid())) throw std::invalid_argument("damped_update: time grids differ");
  const Eigen::MatrixXd mixed = (1.0 - alpha) * old.values() + alpha * est.values();
  return TwoTimeKernel{old.grid(), 0.5 * (mixed + mixed.transpose())};
}

/// True when the mean of the last `window` residuals is below tol.
[[nodiscard]] inline bool check_convergence(std::span<const double> residuals, double tol, std::size_t window) {
  if (window == 0 || residuals.size() < window) return false;
  const auto tail = residuals.last(window);
  return std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(window) < tol;
}

/// Double trapezoid quadrature of K(tau, tau') over the time grid.
[[nodiscard]] inline double double_trapezoid(const Eigen::MatrixXd& k, const TimeGrid& tg) {
  const auto n = static_cast<std::size_t>(k.rows());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double wj = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      acc += wi * wj * k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return acc * tg.dt() * tg.dt();
}

[[nodiscard]] inline R0Result evaluate_r0(const TwoTimeKernel& D, const TwoTimeKernel& F, double J,
                                          std::span<const double> log_norms) {
  if (log_norms.empty()) throw std::invalid_argument("evaluate_r0: no ln N_h samples");
  const Eigen::MatrixXd integrand = D.values().cwiseAbs2() - F.values().cwiseAbs2();
  R0Result r;
  r.kernel_term = 0.25 * J * J * double_trapezoid(integrand, D.grid());
  const auto ln = mean_with_error(log_norms);
  r.log_norm_term = -ln.value;
  r.error = ln.error;
  r.value = r.kernel_term + r.log_norm_term;
  return r;
}

using IterationObserver = std::function<void(const IterationRecord&)>;

/**
 * Full self-consistency run: initialize, iterate with damping until the
 * windowed residual falls below tol (or max_iter), then evaluate r0.
 *
 * At J = 0 the fields do not enter the agent, so the map does not depend on
 * the kernels; a single iteration is run and the result is marked converged.
 */
[[nodiscard]] inline RSState solve_rs(const ModelParams& params, const Discretization& disc, const SolverConfig& cfg,
                                      const IterationObserver& observer = {}) {
  params.validate();
  cfg.validate();
  if (params.t_f != disc.time.horizon()) throw std::invalid_argument("model.t_f does not match the time grid");

  Rng init_rng = make_rng(cfg.seed, 0);
  auto [d0, f0] = initialize_kernels(params, disc, cfg.n_paths, init_rng);
  RSState state{std::move(d0), std::move(f0), 0, {}, {}, {}, {}, false, {}};
  std::vector<double> residuals;

  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    auto est = rs_iteration(state.D, state.F, params, disc, cfg, derive_seed(cfg.seed, it), cfg.n_H);
    auto d_new = damped_update(state.D, est.D, cfg.damping);
    auto f_new = damped_update(state.F, est.F, cfg.damping);

    IterationRecord rec;
    rec.iteration = it;
    rec.delta_D = (d_new.values() - state.D.values()).cwiseAbs().maxCoeff();
    rec.delta_F = (f_new.values() - state.F.values()).cwiseAbs().maxCoeff();
    rec.ess_mean = mean(est.ess);
    rec.ess_min = *std::min_element(est.ess.begin(), est.ess.end());
    rec.low_ess_fraction =
        static_cast<double>(std::count_if(est.ess.begin(), est.ess.end(),
                                          [&](double e) { return e < 0.1 * static_cast<double>(cfg.n_h); })) /
        static_cast<double>(est.ess.size());
    rec.clipped_mass_D = est.clipped_mass_D;
    rec.clipped_mass_F = est.clipped_mass_F;

    state.D = std::move(d_new);
    state.F = std::move(f_new);
    state.iteration = it;
    state.log_norms = std::move(est.log_norms);
    state.mean_m = std::move(est.mean_m);
    for (auto& w : est.warnings) state.warnings.push_back("iteration " + std::to_string(it) + ": " + w);

    const auto r0 = evaluate_r0(state.D, state.F, params.J, state.log_norms);
    rec.r0 = r0.value;
    rec.r0_error = r0.error;
    state.history.push_back(rec);
    residuals.push_back(std::max(rec.delta_D, rec.delta_F));
    if (observer) observer(rec);

    if (params.J == 0.0 || check_convergence(residuals, cfg.tol, cfg.window)) {
      state.converged = true;
      break;
    }
  }

  if (cfg.eval_n_H >= 2) {
    auto est = rs_iteration(state.D, state.F, params, disc, cfg,
                            derive_seed(cfg.seed, std::numeric_limits<std::uint32_t>::max()), cfg.eval_n_H);
    state.log_norms = std::move(est.log_norms);
  }
  state.r0 = evaluate_r0(state.D, state.F, params.J, state.log_norms);
  return state;
}

}  // namespace rsoc

#endif  // RSOC_RS_SOLVER_HPP
