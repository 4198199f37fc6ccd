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

#ifndef RSOC_STATS_HPP
#define RSOC_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>

namespace rsoc {

struct Estimate {
  double value = 0.0;
  double error = 0.0;  ///< one standard error
};

[[nodiscard]] inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample mean with its standard error (unbiased variance / n).
[[nodiscard]] inline Estimate mean_with_error(std::span<const double> xs) {
  const double m = mean(xs);
  if (xs.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const auto n = static_cast<double>(xs.size());
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

/// log(sum_k exp(v_k)), stable for large negative entries.
[[nodiscard]] inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - top);
  return top + std::log(acc);
}

/// Effective sample size (sum w)^2 / sum w^2 from log-weights.
[[nodiscard]] inline double effective_sample_size(std::span<const double> log_weights) {
  if (log_weights.empty()) return 0.0;
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(top)) return 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (double lw : log_weights) {
    const double w = std::exp(lw - top);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

/**
 * Leave-one-out jackknife for -scale * log(mean(exp(log_weights))).
 *
 * Returns the plain estimate together with the jackknife standard error, which
 * accounts for the nonlinearity of the logarithm.
 */
[[nodiscard]] inline Estimate jackknife_neg_log_mean(std::span<const double> log_weights, double scale) {
  const std::size_t n = log_weights.size();
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - top);
  const double full = -scale * (top + std::log(total / static_cast<double>(n)));
  if (n < 2) return {full, 0.0};

  double loo_mean = 0.0;
  for (double lw : log_weights) {
    const double rest = std::max(total - std::exp(lw - top), std::numeric_limits<double>::min());
    loo_mean += -scale * (top + std::log(rest / static_cast<double>(n - 1)));
  }
  loo_mean /= static_cast<double>(n);
  double var = 0.0;
  for (double lw : log_weights) {
    const double rest = std::max(total - std::exp(lw - top), std::numeric_limits<double>::min());
    const double loo = -scale * (top + std::log(rest / static_cast<double>(n - 1)));
    var += (loo - loo_mean) * (loo - loo_mean);
  }
  var *= static_cast<double>(n - 1) / static_cast<double>(n);
  return {full, std::sqrt(var)};
}

}  // namespace rsoc

#endif  // RSOC_STATS_HPP
