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

#ifndef RSOC_NBODY_ORACLE_HPP
#define RSOC_NBODY_ORACLE_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsoc/error.hpp"
#include "rsoc/model.hpp"
#include "rsoc/parallel.hpp"
#include "rsoc/random.hpp"
#include "rsoc/stats.hpp"

/**
 * \file
 * \brief Finite-N ground truth for the disordered control problem.
 *
 * For quadratic data the cost-to-go is f(x, t) = x^T P x / 2 + q^T x + r with
 *   -dP/dt = A - P^2,  -dq/dt = b - P q,  -dr/dt = tr(P)/2 - |q|^2/2 + c,
 * where V(x) = x^T A x / 2 + b^T x + c. For general nu the Feynman-Kac path
 * average of exp(-action) is used instead.
 */

namespace rsoc {

/// Symmetric coupling matrix J_ij = J z_ij / sqrt(N) with zero diagonal.
struct DisorderInstance {
  std::size_t N = 0;
  double J = 0.0;
  Eigen::MatrixXd couplings;
};

struct RiccatiSolution {
  std::vector<Eigen::MatrixXd> P;  ///< P(tau_i); empty unless the path was requested
  std::vector<Eigen::VectorXd> q;
  std::vector<double> r;           ///< r(tau_i)
  double cost = 0.0;               ///< f(0, 0) = r(0)
  double per_agent = 0.0;
  double max_asymmetry = 0.0;
};

enum class OracleMode { riccati, feynman_kac };

struct InstanceResult {
  double cost = 0.0;   ///< per-agent cost
  double error = 0.0;  ///< Monte Carlo error (0 for Riccati)
};

struct QuenchedResult {
  double mean = 0.0;
  double error = 0.0;  ///< standard error over disorder instances
  std::size_t refusals = 0;
  std::vector<InstanceResult> instances;
};

[[nodiscard]] inline DisorderInstance sample_disorder(std::size_t N, double J, Rng& rng) {
  if (N < 1) throw std::invalid_argument("sample_disorder: N must be >= 1");
  if (!(J >= 0.0)) throw std::invalid_argument("sample_disorder: J must be >= 0");
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(N);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  const double scale = J / std::sqrt(static_cast<double>(N));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double z = normal(rng);
      c(i, j) = scale * z;
      c(j, i) = c(i, j);
    }
  }
  return {N, J, std::move(c)};
}

/// Backward RK4 for the Riccati system on tg, with each stage symmetrized.
[[nodiscard]] inline RiccatiSolution riccati_integrate(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double c,
                                                       const Eigen::MatrixXd& P_final,
                                                       const Eigen::VectorXd& q_final, double r_final,
                                                       const TimeGrid& tg, bool keep_path = true) {
  struct Stage {
    Eigen::MatrixXd P;
    Eigen::VectorXd q;
    double r;
  };
  auto rate = [&](const Eigen::MatrixXd& P, const Eigen::VectorXd& q) {
    Eigen::MatrixXd dP = A - P * P;
    dP = 0.5 * (dP + dP.transpose()).eval();
    return Stage{std::move(dP), b - P * q, 0.5 * P.trace() - 0.5 * q.squaredNorm() + c};
  };
  auto symmetrize = [](Eigen::MatrixXd m) { return Eigen::MatrixXd(0.5 * (m + m.transpose())); };

  RiccatiSolution sol;
  sol.r.assign(tg.size(), 0.0);
  if (keep_path) {
    sol.P.assign(tg.size(), Eigen::MatrixXd{});
    sol.q.assign(tg.size(), Eigen::VectorXd{});
  }
  Eigen::MatrixXd P = P_final;
  Eigen::VectorXd q = q_final;
  double r = r_final;
  auto store = [&](std::size_t i) {
    sol.r[i] = r;
    sol.max_asymmetry = std::max(sol.max_asymmetry, (P - P.transpose()).cwiseAbs().maxCoeff());
    if (keep_path) {
      sol.P[i] = P;
      sol.q[i] = q;
    }
  };
  store(tg.steps());

  // Integrate in reversed time s = t_f - t, where d/ds = -d/dt.
  const double h = tg.dt();
  for (std::size_t i = tg.steps(); i-- > 0;) {
    const auto k1 = rate(P, q);
    const auto k2 = rate(symmetrize(P + 0.5 * h * k1.P), q + 0.5 * h * k1.q);
    const auto k3 = rate(symmetrize(P + 0.5 * h * k2.P), q + 0.5 * h * k2.q);
    const auto k4 = rate(symmetrize(P + h * k3.P), q + h * k3.q);
    P = symmetrize(P + h / 6.0 * (k1.P + 2.0 * k2.P + 2.0 * k3.P + k4.P));
    q += h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
    r += h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
    store(i);
  }
  sol.cost = sol.r.front();
  sol.per_agent = sol.cost / static_cast<double>(P.rows());
  return sol;
}

/// True when nu and phi are polynomials of degree <= 2 and nu is confining.
[[nodiscard]] inline bool is_quadratic_model(const ModelParams& params) {
  return params.nu.degree() == 2 && params.nu.leading() > 0.0 && params.phi.degree() <= 2 &&
         params.phi.coeff(2) >= 0.0;
}

/// Quadratic potential matrix A = nu''(0) I + couplings.
[[nodiscard]] inline Eigen::MatrixXd coupling_matrix(const DisorderInstance& instance, const ModelParams& params) {
  const auto n = static_cast<Eigen::Index>(instance.N);
  return 2.0 * params.nu.coeff(2) * Eigen::MatrixXd::Identity(n, n) + instance.couplings;
}

[[nodiscard]] inline bool is_positive_definite(const Eigen::MatrixXd& a) {
  const Eigen::LLT<Eigen::MatrixXd> llt{a};
  return llt.info() == Eigen::Success;
}

/**
 * Exact optimal cost of a quadratic instance. Throws std::invalid_argument
 * for non-quadratic data and NotConfinedError when A is not positive definite.
 */
[[nodiscard]] inline RiccatiSolution riccati_solve(const DisorderInstance& instance, const ModelParams& params,
                                                   const TimeGrid& tg, bool keep_path = true) {
  if (!is_quadratic_model(params)) {
    throw std::invalid_argument("riccati_solve requires quadratic nu and phi");
  }
  const auto n = static_cast<Eigen::Index>(instance.N);
  const Eigen::MatrixXd A = coupling_matrix(instance, params);
  if (!is_positive_definite(A)) {
    throw NotConfinedError("riccati_solve: coupling matrix is not positive definite (unconfined model)");
  }
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(n, params.nu.coeff(1));
  const double c = static_cast<double>(instance.N) * params.nu.coeff(0);
  const Eigen::MatrixXd P_final = 2.0 * params.phi.coeff(2) * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd q_final = Eigen::VectorXd::Constant(n, params.phi.coeff(1));
  const double r_final = static_cast<double>(instance.N) * params.phi.coeff(0);
  return riccati_integrate(A, b, c, P_final, q_final, r_final, tg, keep_path);
}

/**
 * Feynman-Kac estimate of -(1/N) ln psi(0, 0) for an N-agent instance.
 * Free Brownian paths from the origin; the action integral uses the
 * trapezoid rule on `substeps` sub-steps per grid step. The error is the
 * leave-one-out jackknife error of the logarithm.
 */
[[nodiscard]] inline Estimate fk_nbody_estimate(const DisorderInstance& instance, const ModelParams& params,
                                                const TimeGrid& tg, std::size_t n_paths, Rng& rng,
                                                std::size_t substeps = 8) {
  if (n_paths < 1000) throw std::invalid_argument("fk_nbody_estimate: n_paths must be >= 1000");
  const auto n = static_cast<Eigen::Index>(instance.N);
  std::normal_distribution<double> normal;
  const double h = tg.dt() / static_cast<double>(substeps);
  const double sh = std::sqrt(h);
  const std::size_t total_steps = tg.steps() * substeps;

  const bool coupled = instance.couplings.cwiseAbs().maxCoeff() > 0.0;
  Eigen::VectorXd cx(n);
  auto potential = [&](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) v += params.nu(x(i));
    if (coupled) {
      cx.noalias() = instance.couplings * x;
      v += 0.5 * x.dot(cx);
    }
    return v;
  };

  std::vector<double> log_weights(n_paths);
  Eigen::VectorXd x(n);
  bool any_positive = false;
  for (std::size_t p = 0; p < n_paths; ++p) {
    x.setZero();
    double v_old = potential(x);
    double action = 0.0;
    for (std::size_t s = 0; s < total_steps; ++s) {
      for (Eigen::Index i = 0; i < n; ++i) x(i) += sh * normal(rng);
      const double v_new = potential(x);
      action += 0.5 * (v_old + v_new) * h;
      v_old = v_new;
    }
    for (Eigen::Index i = 0; i < n; ++i) action += params.phi(x(i));
    log_weights[p] = -action;
    any_positive = any_positive || std::exp(-action) > 0.0;
  }
  if (!any_positive) {
    throw NumericalError("fk_nbody_estimate: all path weights underflow; reduce t_f or N");
  }
  return jackknife_neg_log_mean(log_weights, 1.0 / static_cast<double>(instance.N));
}

/**
 * Mean and disorder standard error of the per-agent cost over independent
 * instances. Riccati refusals (indefinite A) are resampled; more than
 * 20% refusals relative to n_instances is fatal.
 */
[[nodiscard]] inline QuenchedResult quenched_average(const ModelParams& params, std::size_t N,
                                                     std::size_t n_instances, OracleMode mode, const TimeGrid& tg,
                                                     std::size_t n_paths, std::uint64_t seed,
                                                     std::size_t substeps = 8) {
  if (n_instances < 4) throw std::invalid_argument("quenched_average: n_instances must be >= 4");
  if (mode == OracleMode::riccati && !is_quadratic_model(params)) {
    throw std::invalid_argument("oracle mode riccati requires quadratic nu and phi");
  }

  QuenchedResult out;
  std::vector<DisorderInstance> instances;
  std::vector<std::uint64_t> streams;
  for (std::uint64_t attempt = 0; instances.size() < n_instances; ++attempt) {
    Rng rng = make_rng(seed, attempt);
    auto instance = sample_disorder(N, params.J, rng);
    if (mode == OracleMode::riccati && !is_positive_definite(coupling_matrix(instance, params))) {
      ++out.refusals;
      if (static_cast<double>(out.refusals) > 0.2 * static_cast<double>(n_instances)) {
        throw NotConfinedError("quenched_average: more than 20% of sampled instances are unconfined; reduce J");
      }
      continue;
    }
    instances.push_back(std::move(instance));
    streams.push_back(attempt);
  }

  out.instances.resize(n_instances);
  parallel_for(n_instances, [&](std::size_t k) {
    if (mode == OracleMode::riccati) {
      out.instances[k] = {riccati_solve(instances[k], params, tg, false).per_agent, 0.0};
    } else {
      Rng rng = make_rng(derive_seed(seed, streams[k]), 1);
      const auto est = fk_nbody_estimate(instances[k], params, tg, n_paths, rng, substeps);
      out.instances[k] = {est.value, est.error};
    }
  });

  std::vector<double> costs;
  for (const auto& r : out.instances) costs.push_back(r.cost);
  const auto summary = mean_with_error(costs);
  out.mean = summary.value;
  out.error = summary.error;
  return out;
}

}  // namespace rsoc

#endif  // RSOC_NBODY_ORACLE_HPP
