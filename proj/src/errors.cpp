// Copyright 2026 The lptv-pn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lptv/errors.hpp"

#include <sstream>
#include <utility>

namespace lptv {
namespace {

std::string describe_singular(int harmonic, double omega) {
  std::ostringstream os;
  os << "transfer function evaluated on a pole at harmonic " << harmonic
     << " (omega = " << omega << " rad/sample)";
  return os.str();
}

std::string describe_solver(double omega, double condition) {
  std::ostringstream os;
  os << "closed-loop system (I - L) is singular or ill-conditioned at omega = " << omega
     << " rad/sample (condition estimate " << condition << ")";
  return os.str();
}

}  // namespace

SingularEvaluationError::SingularEvaluationError(int harmonic, double omega)
    : Error(describe_singular(harmonic, omega)), harmonic_(harmonic), omega_(omega) {}

SolverError::SolverError(double omega, double condition)
    : Error(describe_solver(omega, condition)), omega_(omega), condition_(condition) {}

ConfigError::ConfigError(std::string key_path, const std::string& message)
    : Error(key_path.empty() ? message : key_path + ": " + message),
      key_path_(std::move(key_path)) {}

InstabilityError::InstabilityError(std::size_t sample_index)
    : Error("simulation state became non-finite at sample " + std::to_string(sample_index)),
      sample_index_(sample_index) {}

EstimatorError::EstimatorError(std::size_t available, std::size_t required)
    : Error("series too short for the requested estimate: " + std::to_string(available) +
            " samples available, " + std::to_string(required) + " required"),
      required_(required) {}

}  // namespace lptv
