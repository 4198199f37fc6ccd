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

#ifndef RSOC_MODEL_HPP
#define RSOC_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/**
 * \file
 * \brief Problem definition shared by every solver: polynomial potentials,
 * model parameters and the space/time discretization grids.
 */

namespace rsoc {

/// Polynomial with coefficients ordered by power: p(x) = sum_k coeffs[k] x^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) { trim(); }

  [[nodiscard]] double operator()(double x) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      acc = acc * x + *it;
    }
    return acc;
  }

  [[nodiscard]] Polynomial derivative() const {
    std::vector<double> d;
    for (std::size_t k = 1; k < coeffs_.size(); ++k) {
      d.push_back(static_cast<double>(k) * coeffs_[k]);
    }
    return Polynomial{std::move(d)};
  }

  /// Degree of the polynomial; the zero polynomial has degree 0.
  [[nodiscard]] std::size_t degree() const noexcept { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }
  [[nodiscard]] double leading() const noexcept { return coeffs_.empty() ? 0.0 : coeffs_.back(); }
  [[nodiscard]] double coeff(std::size_t k) const noexcept { return k < coeffs_.size() ? coeffs_[k] : 0.0; }
  [[nodiscard]] const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] bool is_zero() const noexcept { return coeffs_.empty(); }

  /// True when the polynomial grows to +infinity in both directions.
  [[nodiscard]] bool is_confining() const noexcept {
    return degree() >= 2 && degree() % 2 == 0 && leading() > 0.0;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0.0) {
      coeffs_.pop_back();
    }
  }

  std::vector<double> coeffs_;
};

/// Physical problem: coupling strength, local potential, terminal cost and horizon.
struct ModelParams {
  double J = 0.0;
  Polynomial nu{0.0, 0.0, 0.5, 0.0, 1.0 / 24.0};
  Polynomial phi{0.5, -1.0, 0.5};
  double t_f = 1.0;

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const {
    if (!(J >= 0.0) || !std::isfinite(J)) {
      throw std::invalid_argument("model.J must be a finite value >= 0");
    }
    if (!(t_f > 0.0) || !std::isfinite(t_f)) {
      throw std::invalid_argument("model.t_f must be a finite value > 0");
    }
    if (!nu.is_confining()) {
      throw std::invalid_argument("model.nu must have an even leading power >= 2 with a positive coefficient");
    }
    if (phi.degree() > 0 && !phi.is_confining()) {
      throw std::invalid_argument("model.phi must be constant or have an even leading power with a positive coefficient");
    }
    for (double c : nu.coeffs()) {
      if (!std::isfinite(c)) throw std::invalid_argument("model.nu has a non-finite coefficient");
    }
    for (double c : phi.coeffs()) {
      if (!std::isfinite(c)) throw std::invalid_argument("model.phi has a non-finite coefficient");
    }
  }
};

/// Uniform grid tau_i = i * t_f / M, i = 0..M.
class TimeGrid {
 public:
  TimeGrid(double t_f, std::size_t steps) : t_f_(t_f), steps_(steps) {
    if (steps < 2) throw std::invalid_argument("grid.M must be >= 2");
    if (!(t_f > 0.0)) throw std::invalid_argument("time grid horizon must be > 0");
  }

  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
  [[nodiscard]] std::size_t size() const noexcept { return steps_ + 1; }
  [[nodiscard]] double horizon() const noexcept { return t_f_; }
  [[nodiscard]] double dt() const noexcept { return t_f_ / static_cast<double>(steps_); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept {
    return i == steps_ ? t_f_ : static_cast<double>(i) * dt();
  }
  [[nodiscard]] std::vector<double> nodes() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = (*this)[i];
    return out;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t_f_;
  std::size_t steps_;
};

/// Uniform grid on [-L, L] with an odd node count so that x = 0 is a node.
class SpaceGrid {
 public:
  SpaceGrid(double half_width, std::size_t nodes) : half_width_(half_width), nodes_(nodes) {
    if (!(half_width > 0.0)) throw std::invalid_argument("grid.L must be > 0");
    if (nodes < 3 || nodes % 2 == 0) throw std::invalid_argument("grid.n_x must be odd and >= 3");
  }

  [[nodiscard]] std::size_t size() const noexcept { return nodes_; }
  [[nodiscard]] double half_width() const noexcept { return half_width_; }
  [[nodiscard]] double dx() const noexcept { return 2.0 * half_width_ / static_cast<double>(nodes_ - 1); }
  [[nodiscard]] std::size_t center() const noexcept { return (nodes_ - 1) / 2; }

  // Offsets from the center keep x = 0 exact.
  [[nodiscard]] double operator[](std::size_t k) const noexcept {
    return (static_cast<double>(k) - static_cast<double>(center())) * dx();
  }
  [[nodiscard]] std::vector<double> nodes() const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = (*this)[k];
    return out;
  }

  /// Index of the node closest to x (clamped to the grid).
  [[nodiscard]] std::size_t nearest(double x) const noexcept {
    const double pos = std::round(x / dx()) + static_cast<double>(center());
    if (pos <= 0.0) return 0;
    if (pos >= static_cast<double>(nodes_ - 1)) return nodes_ - 1;
    return static_cast<std::size_t>(pos);
  }

  friend bool operator==(const SpaceGrid&, const SpaceGrid&) = default;

 private:
  double half_width_;
  std::size_t nodes_;
};

[[nodiscard]] inline double eval_nu(const ModelParams& params, double x) noexcept { return params.nu(x); }

[[nodiscard]] inline double eval_phi(const ModelParams& params, double x) noexcept { return params.phi(x); }

/// exp(-phi(x_k)) on every space node: the terminal condition of the backward solve.
[[nodiscard]] inline std::vector<double> terminal_weight(const ModelParams& params, const SpaceGrid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out[k] = std::exp(-params.phi(grid[k]));
  }
  return out;
}

/// nu(x) = a x^2 / 2.
[[nodiscard]] inline Polynomial harmonic(double a) { return Polynomial{0.0, 0.0, 0.5 * a}; }

/// phi(x) = (x - target)^2 / 2.
[[nodiscard]] inline Polynomial quadratic_target(double target) {
  return Polynomial{0.5 * target * target, -target, 0.5};
}

}  // namespace rsoc

#endif  // RSOC_MODEL_HPP
