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

#ifndef RSOC_ERROR_HPP
#define RSOC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace rsoc {

/// Fatal numerical failure (a solve that cannot produce a meaningful result).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quadratic model whose coupling matrix is not positive definite.
class NotConfinedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Invalid run configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rsoc

#endif  // RSOC_ERROR_HPP
