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

#include <iosfwd>
#include <vector>

#include "lptv/config.hpp"

namespace lptv {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitComparison = 4,
};

struct BenchRow {
  int N;
  double seconds_per_point;  // median over the timed frequencies
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double exponent;  // least-squares slope of log t against log N
};

// Times the model with M = N - 1 and P = 2 for each N, single-threaded.
BenchResult bench(const PllConfig& base, const BenchSpec& spec);
double fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// Runs a resolved configuration, writing artifacts under run.out_dir.
// Returns the exit code; errors propagate as exceptions.
int run(const ParsedConfig& cfg, std::ostream& log);

// Full command line entry point. Errors are reported as JSON on stderr.
int cli_main(int argc, char** argv);

}  // namespace lptv
