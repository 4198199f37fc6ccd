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

#ifndef RSOC_PDE1D_HPP
#define RSOC_PDE1D_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsoc/error.hpp"
#include "rsoc/gaussian_fields.hpp"
#include "rsoc/io/csv.hpp"
#include "rsoc/model.hpp"
#include "rsoc/random.hpp"
#include "rsoc/stats.hpp"
#include "rsoc/tridiagonal.hpp"

/**
 * \file
 * \brief One-dimensional solvers for the effective agent.
 *
 * The value function is obtained through the linear equation
 *   -d_t psi = [-nu(x) - g(t) x + 1/2 d_xx] psi,   psi(x, t_f) = exp(-phi(x)),
 * and c = -log psi. The optimally controlled density follows
 *   d_t pi = 1/2 d_xx pi - d_x(u pi),   u = -d_x c.
 * The field g(t) = J (h(t) + H(t)) is piecewise constant, equal to its value
 * at the left node of each time step.
 */

namespace rsoc {

/// Scalar field over (time x space), stored row-major by time.
class GridFunction {
 public:
  GridFunction(SpaceGrid space, TimeGrid time, double fill = 0.0)
      : space_(space), time_(time), values_(space.size() * time.size(), fill) {}

  [[nodiscard]] const SpaceGrid& space() const noexcept { return space_; }
  [[nodiscard]] const TimeGrid& time() const noexcept { return time_; }

  [[nodiscard]] double& operator()(std::size_t i, std::size_t k) noexcept { return values_[i * space_.size() + k]; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t k) const noexcept {
    return values_[i * space_.size() + k];
  }
  [[nodiscard]] std::span<double> row(std::size_t i) noexcept {
    return {values_.data() + i * space_.size(), space_.size()};
  }
  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * space_.size(), space_.size()};
  }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  [[nodiscard]] bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  SpaceGrid space_;
  TimeGrid time_;
  std::vector<double> values_;
};

/// c = -log psi with a domain mask (1 = node inside the usable domain).
struct ValueFunction {
  GridFunction c;
  std::vector<std::uint8_t> mask;
  std::size_t masked_count = 0;

  [[nodiscard]] bool valid(std::size_t i, std::size_t k) const noexcept { return mask[i * c.space().size() + k] != 0; }

  /// Wraps an analytic value function with every node in the domain.
  [[nodiscard]] static ValueFunction unmasked(GridFunction values) {
    const std::size_t n = values.space().size() * values.time().size();
    return {std::move(values), std::vector<std::uint8_t>(n, 1), 0};
  }
};

/// Optimal drift u(x_k, tau_i), bounded by |u| <= cap.
struct DriftField {
  GridFunction u;
  double cap = 50.0;

  /// Linear interpolation in space at row i; positions outside the grid use the edge value.
  [[nodiscard]] double at(std::size_t i, double x) const noexcept { return interpolate(u.row(i), x); }

  /// Drift at time tau_i + frac * dt, linear in time between rows i and i + 1.
  [[nodiscard]] double at(std::size_t i, double frac, double x) const noexcept {
    if (frac <= 0.0 || i + 1 >= u.time().size()) return at(i, x);
    return (1.0 - frac) * at(i, x) + frac * at(i + 1, x);
  }

 private:
  [[nodiscard]] double interpolate(std::span<const double> row, double x) const noexcept {
    const auto& sg = u.space();
    const double pos = x / sg.dx() + static_cast<double>(sg.center());
    if (pos <= 0.0) return row.front();
    const double last = static_cast<double>(sg.size() - 1);
    if (pos >= last) return row.back();
    const auto k = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(k);
    return (1.0 - w) * row[k] + w * row[k + 1];
  }
};

struct DensityEvolution {
  GridFunction pi;
  double max_mass_error = 0.0;
  double max_boundary_mass = 0.0;  ///< largest mass found in the two edge cells
};

namespace detail {

inline void check_grids(std::span<const double> g, const TimeGrid& tg) {
  if (g.size() != tg.size()) throw std::invalid_argument("field length does not match the time grid");
}

/// B(z) = z / (exp(z) - 1).
[[nodiscard]] inline double bernoulli(double z) noexcept {
  if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z;
  if (z > 700.0) return z * std::exp(-z);
  return z / std::expm1(z);
}

}  // namespace detail

/**
 * Backward Crank-Nicolson solve of the linear psi equation with Dirichlet
 * psi = 0 at x = +-L.
 *
 * Space uses the fourth-order compact stencil B psi_t = 1/2 d2 psi / dx^2 -
 * B (V psi) with B = (1, 10, 1) / 12, which keeps every system tridiagonal.
 * Each grid step is split into `substeps` sub-steps; the first two sub-steps
 * from t_f are replaced by four implicit Euler half sub-steps (Rannacher
 * start) to damp the mismatch between the terminal data and the boundary.
 *
 * Throws NumericalError if any interior value is not strictly positive.
 */
[[nodiscard]] inline GridFunction solve_psi_backward(const ModelParams& params, std::span<const double> g,
                                                     const SpaceGrid& sg, const TimeGrid& tg,
                                                     std::size_t substeps = 8) {
  detail::check_grids(g, tg);
  if (substeps == 0) throw std::invalid_argument("substeps must be >= 1");
  const std::size_t n = sg.size();
  const std::size_t interior = n - 2;
  const double dx = sg.dx();
  const double diff = 0.5 / (dx * dx);
  const double h = tg.dt() / static_cast<double>(substeps);
  constexpr double kSide = 1.0 / 12.0;
  constexpr double kMid = 10.0 / 12.0;

  GridFunction psi{sg, tg};
  {
    const auto tw = terminal_weight(params, sg);
    auto last = psi.row(tg.steps());
    std::copy(tw.begin(), tw.end(), last.begin());
    last.front() = 0.0;
    last.back() = 0.0;
  }

  std::vector<double> nu(interior);
  for (std::size_t k = 0; k < interior; ++k) nu[k] = params.nu(sg[k + 1]);

  std::vector<double> lower(interior), diag(interior), upper(interior), rhs(interior), pot(interior);
  TridiagonalSolver thomas{interior};
  std::vector<double> state(psi.row(tg.steps()).begin() + 1, psi.row(tg.steps()).end() - 1);

  // (B + sign * alpha * Lambda) applied to state, Lambda = diff * d2 - B V.
  auto apply = [&](double signed_alpha) {
    for (std::size_t k = 0; k < interior; ++k) {
      const double left = k > 0 ? state[k - 1] : 0.0;
      const double right = k + 1 < interior ? state[k + 1] : 0.0;
      const double vleft = k > 0 ? pot[k - 1] * left : 0.0;
      const double vright = k + 1 < interior ? pot[k + 1] * right : 0.0;
      const double b = kSide * (left + right) + kMid * state[k];
      const double lambda =
          diff * (left - 2.0 * state[k] + right) - (kSide * (vleft + vright) + kMid * pot[k] * state[k]);
      rhs[k] = b + signed_alpha * lambda;
    }
    std::copy(rhs.begin(), rhs.end(), state.begin());
  };
  // Solves (B - alpha * Lambda) x = state in place.
  auto invert = [&](double alpha) {
    for (std::size_t k = 0; k < interior; ++k) {
      diag[k] = kMid + alpha * (2.0 * diff + kMid * pot[k]);
      lower[k] = k > 0 ? kSide - alpha * (diff - kSide * pot[k - 1]) : 0.0;
      upper[k] = k + 1 < interior ? kSide - alpha * (diff - kSide * pot[k + 1]) : 0.0;
    }
    thomas.solve(lower, diag, upper, state);
  };

  std::size_t taken = 0;
  for (std::size_t i = tg.steps(); i-- > 0;) {
    for (std::size_t k = 0; k < interior; ++k) pot[k] = nu[k] + g[i] * sg[k + 1];
    for (std::size_t s = 0; s < substeps; ++s, ++taken) {
      if (taken < 2) {
        for (int half = 0; half < 2; ++half) {
          apply(0.0);
          invert(0.5 * h);
        }
      } else {
        apply(0.5 * h);
        invert(0.5 * h);
      }
    }
    auto out = psi.row(i);
    for (std::size_t k = 0; k < interior; ++k) {
      if (!(state[k] > 0.0)) {
        std::ostringstream msg;
        msg << "solve_psi_backward: non-positive psi=" << state[k] << " at x=" << sg[k + 1] << ", t=" << tg[i]
            << " (increase L or refine the time step)";
        throw NumericalError(msg.str());
      }
      out[k + 1] = state[k];
    }
  }
  return psi;
}

/**
 * c = -log psi on nodes where psi exceeds floor_rel * (row maximum); other
 * nodes are masked. Throws NumericalError when psi(0, 0) itself is masked.
 */
[[nodiscard]] inline ValueFunction cole_hopf(const GridFunction& psi, double floor_rel = 1e-12) {
  const auto& sg = psi.space();
  const auto& tg = psi.time();
  ValueFunction out{GridFunction{sg, tg}, std::vector<std::uint8_t>(sg.size() * tg.size(), 0), 0};
  for (std::size_t i = 0; i < tg.size(); ++i) {
    const auto row = psi.row(i);
    const double top = *std::max_element(row.begin(), row.end());
    const double floor = floor_rel * top;
    for (std::size_t k = 0; k < sg.size(); ++k) {
      if (row[k] > floor && top > 0.0) {
        out.c(i, k) = -std::log(row[k]);
        out.mask[i * sg.size() + k] = 1;
      } else {
        out.c(i, k) = floor > 0.0 ? -std::log(floor) : 0.0;
        ++out.masked_count;
      }
    }
  }
  if (!out.valid(0, sg.center())) {
    throw NumericalError("cole_hopf: psi(0,0) is below the positivity floor; the sample weight is undefined");
  }
  return out;
}

/**
 * u = -d_x c by central differences, second-order one-sided differences at
 * mask edges, clamped to +-u_max. Masked nodes receive the inward cap.
 */
[[nodiscard]] inline DriftField drift_from_value(const ValueFunction& value, double u_max = 50.0) {
  const auto& sg = value.c.space();
  const auto& tg = value.c.time();
  const std::size_t n = sg.size();
  const double dx = sg.dx();
  DriftField drift{GridFunction{sg, tg}, u_max};
  for (std::size_t i = 0; i < tg.size(); ++i) {
    const auto c = value.c.row(i);
    auto u = drift.u.row(i);
    auto ok = [&](std::size_t k) { return value.valid(i, k); };
    for (std::size_t k = 0; k < n; ++k) {
      double v = 0.0;
      if (!ok(k)) {
        v = sg[k] < 0.0 ? u_max : (sg[k] > 0.0 ? -u_max : 0.0);
      } else {
        const bool left = k > 0 && ok(k - 1);
        const bool right = k + 1 < n && ok(k + 1);
        double slope = 0.0;
        if (left && right) {
          slope = (c[k + 1] - c[k - 1]) / (2.0 * dx);
        } else if (right) {
          slope = (k + 2 < n && ok(k + 2)) ? (-3.0 * c[k] + 4.0 * c[k + 1] - c[k + 2]) / (2.0 * dx)
                                           : (c[k + 1] - c[k]) / dx;
        } else if (left) {
          slope = (k >= 2 && ok(k - 2)) ? (3.0 * c[k] - 4.0 * c[k - 1] + c[k - 2]) / (2.0 * dx)
                                        : (c[k] - c[k - 1]) / dx;
        }
        v = -slope;
      }
      u[k] = std::clamp(v, -u_max, u_max);
    }
  }
  return drift;
}

/**
 * Forward Fokker-Planck propagation from a discrete delta at (x0_index,
 * t0_index). Chang-Cooper (exponentially fitted) fluxes with zero flux at
 * both ends, implicit Euler in time: mass and positivity are preserved.
 * Within a grid step the drift is interpolated linearly in time between the
 * two bounding rows and evaluated at the end of each sub-step.
 */
[[nodiscard]] inline DensityEvolution solve_fp_forward(const DriftField& drift, std::size_t x0_index,
                                                       std::size_t t0_index, std::size_t substeps = 4) {
  const auto& sg = drift.u.space();
  const auto& tg = drift.u.time();
  if (x0_index >= sg.size()) throw std::invalid_argument("solve_fp_forward: start node out of range");
  if (t0_index >= tg.steps()) throw std::invalid_argument("solve_fp_forward: start time must precede t_f");
  if (substeps == 0) throw std::invalid_argument("substeps must be >= 1");

  const std::size_t n = sg.size();
  const double dx = sg.dx();
  const double diffusion = 0.5;
  const double h = tg.dt() / static_cast<double>(substeps);

  DensityEvolution out{GridFunction{sg, tg}, 0.0, 0.0};
  std::vector<double> state(n, 0.0);
  state[x0_index] = 1.0 / dx;
  std::copy(state.begin(), state.end(), out.pi.row(t0_index).begin());

  // Face k sits between nodes k and k+1; flux = fwd[k] * pi_k - bwd[k] * pi_{k+1}.
  std::vector<double> fwd(n - 1), bwd(n - 1);
  std::vector<double> lower(n), diag(n), upper(n);
  TridiagonalSolver thomas{n};

  auto record = [&](std::size_t i) {
    double mass = 0.0;
    for (double p : state) mass += p * dx;
    const double err = std::abs(mass - 1.0);
    out.max_mass_error = std::max(out.max_mass_error, err);
    out.max_boundary_mass = std::max({out.max_boundary_mass, state.front() * dx, state.back() * dx});
    if (err > 1e-6) {
      std::ostringstream msg;
      msg << "solve_fp_forward: mass drift " << err << " at t=" << tg[i];
      throw NumericalError(msg.str());
    }
    std::copy(state.begin(), state.end(), out.pi.row(i).begin());
  };

  std::vector<double> u(n);
  for (std::size_t i = t0_index; i < tg.steps(); ++i) {
    const auto left = drift.u.row(i);
    const auto right = drift.u.row(i + 1);
    for (std::size_t s = 1; s <= substeps; ++s) {
      const double w = static_cast<double>(s) / static_cast<double>(substeps);
      for (std::size_t k = 0; k < n; ++k) u[k] = (1.0 - w) * left[k] + w * right[k];
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const double peclet = 0.5 * (u[k] + u[k + 1]) * dx / diffusion;
        fwd[k] = diffusion / dx * detail::bernoulli(-peclet);
        bwd[k] = diffusion / dx * detail::bernoulli(peclet);
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double out_flux = (k + 1 < n ? fwd[k] : 0.0) + (k > 0 ? bwd[k - 1] : 0.0);
        diag[k] = 1.0 + h * out_flux / dx;
        lower[k] = k > 0 ? -h * fwd[k - 1] / dx : 0.0;
        upper[k] = k + 1 < n ? -h * bwd[k] / dx : 0.0;
      }
      thomas.solve(lower, diag, upper, state);
    }
    record(i + 1);
  }
  return out;
}

/// Trapezoid quadrature of x^p * pi(x, tau_i).
[[nodiscard]] inline double density_moment(const GridFunction& pi, std::size_t i, int power) {
  const auto& sg = pi.space();
  const auto row = pi.row(i);
  double acc = 0.0;
  for (std::size_t k = 0; k < sg.size(); ++k) {
    const double w = (k == 0 || k + 1 == sg.size()) ? 0.5 : 1.0;
    acc += w * std::pow(sg[k], power) * row[k];
  }
  return acc * sg.dx();
}

/// Trapezoid quadrature of f(x) * row_i(x).
template <class Fn>
[[nodiscard]] double integrate_row(const GridFunction& fn, std::size_t i, Fn&& weight) {
  const auto& sg = fn.space();
  const auto row = fn.row(i);
  double acc = 0.0;
  for (std::size_t k = 0; k < sg.size(); ++k) {
    const double w = (k == 0 || k + 1 == sg.size()) ? 0.5 : 1.0;
    acc += w * weight(sg[k]) * row[k];
  }
  return acc * sg.dx();
}

/**
 * rho(x, t | y, t') = pi(x, t | y, t') psi(y, t') / psi(x, t) for t >= t'.
 * Nodes where psi is below the Cole-Hopf floor are skipped (left at zero).
 */
[[nodiscard]] inline GridFunction rho_from_pi(const GridFunction& pi, const GridFunction& psi, std::size_t y_index,
                                              std::size_t t0_index, double floor_rel = 1e-12) {
  const auto& sg = pi.space();
  const auto& tg = pi.time();
  GridFunction rho{sg, tg};
  const double anchor = psi(t0_index, y_index);
  for (std::size_t i = t0_index; i < tg.size(); ++i) {
    const auto p = psi.row(i);
    const double floor = floor_rel * *std::max_element(p.begin(), p.end());
    for (std::size_t k = 0; k < sg.size(); ++k) {
      if (p[k] > floor) rho(i, k) = pi(i, k) * anchor / p[k];
    }
  }
  return rho;
}

/**
 * Feynman-Kac estimate of psi(0, 0): mean of
 * exp(-int_0^{t_f} [nu(x) + g x] dt - phi(x(t_f))) over free Brownian paths
 * from x = 0. The time integral uses the trapezoid rule on `substeps`
 * sub-steps per grid step. Returns the mean and its standard error.
 */
[[nodiscard]] inline Estimate feynman_kac_psi(const ModelParams& params, std::span<const double> g,
                                              const TimeGrid& tg, std::size_t n_paths, Rng& rng,
                                              std::size_t substeps = 8) {
  detail::check_grids(g, tg);
  if (n_paths < 100) throw std::invalid_argument("feynman_kac_psi: n_paths must be >= 100");
  std::normal_distribution<double> normal;
  const double h = tg.dt() / static_cast<double>(substeps);
  const double sh = std::sqrt(h);
  std::vector<double> weights(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    double x = 0.0;
    double action = 0.0;
    for (std::size_t i = 0; i < tg.steps(); ++i) {
      double v_old = params.nu(x) + g[i] * x;
      for (std::size_t s = 0; s < substeps; ++s) {
        x += sh * normal(rng);
        const double v_new = params.nu(x) + g[i] * x;
        action += 0.5 * (v_old + v_new) * h;
        v_old = v_new;
      }
    }
    weights[p] = std::exp(-action - params.phi(x));
  }
  return mean_with_error(weights);
}

/// Header row of x values, then one row per time node.
inline void write_grid_function_csv(std::ostream& out, const GridFunction& fn) {
  csv::write_row(out, fn.space().nodes());
  for (std::size_t i = 0; i < fn.time().size(); ++i) csv::write_row(out, fn.row(i));
}

inline void save_grid_function_csv(const std::string& path, const GridFunction& fn) {
  std::ofstream out{path};
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_grid_function_csv(out, fn);
}

}  // namespace rsoc

#endif  // RSOC_PDE1D_HPP
