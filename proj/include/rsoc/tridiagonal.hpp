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

#ifndef RSOC_TRIDIAGONAL_HPP
#define RSOC_TRIDIAGONAL_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace rsoc {

/**
 * Thomas algorithm for a tridiagonal system, solved in place.
 *
 * lower[k] multiplies x[k-1] (lower[0] unused), upper[k] multiplies x[k+1]
 * (upper[n-1] unused). Intended for M-matrices, where no pivoting is needed
 * and a nonnegative right-hand side yields a nonnegative solution.
 */
class TridiagonalSolver {
 public:
  explicit TridiagonalSolver(std::size_t n) : scratch_(n) {}

  void solve(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
             std::span<double> rhs_in_solution_out) {
    const std::size_t n = diag.size();
    auto& x = rhs_in_solution_out;
    double pivot = diag[0];
    x[0] /= pivot;
    for (std::size_t k = 1; k < n; ++k) {
      scratch_[k] = upper[k - 1] / pivot;
      pivot = diag[k] - lower[k] * scratch_[k];
      x[k] = (x[k] - lower[k] * x[k - 1]) / pivot;
    }
    for (std::size_t k = n - 1; k-- > 0;) {
      x[k] -= scratch_[k + 1] * x[k + 1];
    }
  }

 private:
  std::vector<double> scratch_;
};

}  // namespace rsoc

#endif  // RSOC_TRIDIAGONAL_HPP
