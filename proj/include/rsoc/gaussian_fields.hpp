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

#ifndef RSOC_GAUSSIAN_FIELDS_HPP
#define RSOC_GAUSSIAN_FIELDS_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rsoc/io/csv.hpp"
#include "rsoc/model.hpp"
#include "rsoc/random.hpp"

/**
 * \file
 * \brief Two-time covariance kernels and Gaussian random field paths on a time grid.
 */

namespace rsoc {

/// Matrix K[i][j] = K(tau_i, tau_j) over a time grid.
class TwoTimeKernel {
 public:
  explicit TwoTimeKernel(TimeGrid grid) : grid_(grid), values_(Eigen::MatrixXd::Zero(grid.size(), grid.size())) {}

  TwoTimeKernel(TimeGrid grid, Eigen::MatrixXd values) : grid_(grid), values_(std::move(values)) {
    if (values_.rows() != static_cast<Eigen::Index>(grid_.size()) || values_.cols() != values_.rows()) {
      throw std::invalid_argument("kernel matrix dimensions do not match the time grid");
    }
    if (!values_.allFinite()) {
      throw std::invalid_argument("kernel has non-finite entries");
    }
  }

  [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  [[nodiscard]] std::size_t size() const noexcept { return grid_.size(); }

  [[nodiscard]] double asymmetry() const { return (values_ - values_.transpose()).cwiseAbs().maxCoeff(); }
  [[nodiscard]] bool is_symmetric(double tol = 0.0) const { return asymmetry() <= tol; }
  [[nodiscard]] double max_abs() const { return values_.cwiseAbs().maxCoeff(); }

 private:
  TimeGrid grid_;
  Eigen::MatrixXd values_;
};

/// One realization of a Gaussian field sampled on the time grid nodes.
struct FieldPath {
  TimeGrid grid;
  std::vector<double> values;

  [[nodiscard]] static FieldPath zero(const TimeGrid& grid) { return {grid, std::vector<double>(grid.size(), 0.0)}; }
};

/// Matrix root of a PSD-repaired covariance, with repair diagnostics.
class CovarianceFactor {
 public:
  CovarianceFactor(TimeGrid grid, Eigen::MatrixXd root, double clipped_mass, double max_eigenvalue)
      : grid_(grid), root_(std::move(root)), clipped_mass_(clipped_mass), max_eigenvalue_(max_eigenvalue) {}

  [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] const Eigen::MatrixXd& root() const noexcept { return root_; }
  [[nodiscard]] Eigen::MatrixXd covariance() const { return root_ * root_.transpose(); }
  /// Sum of |negative eigenvalues| over sum of |eigenvalues| of the input.
  [[nodiscard]] double clipped_mass() const noexcept { return clipped_mass_; }
  [[nodiscard]] double max_eigenvalue() const noexcept { return max_eigenvalue_; }

 private:
  TimeGrid grid_;
  Eigen::MatrixXd root_;
  double clipped_mass_;
  double max_eigenvalue_;
};

[[nodiscard]] inline TwoTimeKernel kernel_difference(const TwoTimeKernel& d, const TwoTimeKernel& f) {
  if (!(d.grid() == f.grid())) throw std::invalid_argument("kernel_difference: time grids differ");
  return TwoTimeKernel{d.grid(), d.values() - f.values()};
}

/**
 * Eigenvalue-clipping repair: negative eigenvalues are set to zero, then
 * jitter * (largest eigenvalue) is added on the diagonal before factorizing.
 */
[[nodiscard]] inline CovarianceFactor psd_project(const TwoTimeKernel& kernel, double jitter = 1e-10) {
  const double scale = std::max(1.0, kernel.max_abs());
  if (!kernel.is_symmetric(1e-12 * scale)) {
    throw std::invalid_argument("psd_project: kernel is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (kernel.values() + kernel.values().transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{sym};
  if (eig.info() != Eigen::Success) throw std::runtime_error("psd_project: eigendecomposition failed");

  Eigen::VectorXd lambda = eig.eigenvalues();
  const double total = lambda.cwiseAbs().sum();
  double negative = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) < 0.0) {
      negative += -lambda(k);
      lambda(k) = 0.0;
    }
  }
  const double top = lambda.maxCoeff();
  lambda.array() += jitter * top;
  const Eigen::MatrixXd root = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
  return CovarianceFactor{kernel.grid(), root, total > 0.0 ? negative / total : 0.0, top};
}

/// R z with z i.i.d. standard normal.
[[nodiscard]] inline FieldPath sample_field(const CovarianceFactor& factor, Rng& rng) {
  std::normal_distribution<double> normal;
  const auto n = factor.root().cols();
  Eigen::VectorXd z(n);
  for (Eigen::Index k = 0; k < n; ++k) z(k) = normal(rng);
  const Eigen::VectorXd v = factor.root() * z;
  return {factor.grid(), std::vector<double>(v.data(), v.data() + v.size())};
}

/// CSV layout: first row holds the grid times, then one row per matrix row.
inline void write_kernel_csv(std::ostream& out, const TwoTimeKernel& kernel) {
  const auto times = kernel.grid().nodes();
  csv::write_row(out, times);
  std::vector<double> row(kernel.size());
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    for (std::size_t j = 0; j < kernel.size(); ++j) row[j] = kernel(i, j);
    csv::write_row(out, row);
  }
}

inline void save_kernel_csv(const std::string& path, const TwoTimeKernel& kernel) {
  std::ofstream out{path};
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_kernel_csv(out, kernel);
}

[[nodiscard]] inline TwoTimeKernel read_kernel_csv(std::istream& in) {
  const auto rows = csv::read_numeric_rows(in);
  if (rows.size() < 4) throw std::runtime_error("kernel CSV: too few rows");
  const auto& times = rows.front();
  const std::size_t n = times.size();
  if (rows.size() != n + 1) throw std::runtime_error("kernel CSV: row count does not match the time header");
  if (times.front() != 0.0) throw std::runtime_error("kernel CSV: time grid must start at 0");
  const TimeGrid grid{times.back(), n - 1};
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(times[i] - grid[i]) > 1e-12 * grid.horizon()) {
      throw std::runtime_error("kernel CSV: time grid is not uniform");
    }
  }
  Eigen::MatrixXd values(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i + 1].size() != n) throw std::runtime_error("kernel CSV: ragged row " + std::to_string(i + 1));
    for (std::size_t j = 0; j < n; ++j) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i + 1][j];
    }
  }
  return TwoTimeKernel{grid, std::move(values)};
}

[[nodiscard]] inline TwoTimeKernel load_kernel_csv(const std::string& path) {
  std::ifstream in{path};
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_kernel_csv(in);
}

}  // namespace rsoc

#endif  // RSOC_GAUSSIAN_FIELDS_HPP
