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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lptv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A transfer function was evaluated on one of its (non-removable) poles.
class SingularEvaluationError : public Error {
 public:
  SingularEvaluationError(int harmonic, double omega);
  int harmonic() const { return harmonic_; }
  double omega() const { return omega_; }

 private:
  int harmonic_;
  double omega_;
};

// (I - L) was singular or too ill-conditioned to trust.
class SolverError : public Error {
 public:
  SolverError(double omega, double condition);
  double omega() const { return omega_; }
  double condition() const { return condition_; }

 private:
  double omega_;
  double condition_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& message);
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

// Jitter integration band is not covered by the frequency grid.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// Time-domain state went non-finite.
class InstabilityError : public Error {
 public:
  explicit InstabilityError(std::size_t sample_index);
  std::size_t sample_index() const { return sample_index_; }

 private:
  std::size_t sample_index_;
};

class EstimatorError : public Error {
 public:
  EstimatorError(std::size_t available, std::size_t required);
  std::size_t required() const { return required_; }

 private:
  std::size_t required_;
};

class ComparisonError : public Error {
 public:
  using Error::Error;
};

}  // namespace lptv
