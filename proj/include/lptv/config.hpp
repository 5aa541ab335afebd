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

// Run configuration: a nested JSON document with sections "pll", "run",
// "sim" and "compare". Every field is optional; missing fields take the
// default profile. Unknown keys are rejected with their key path.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lptv/pll_model.hpp"
#include "lptv/sim_oracle.hpp"
#include "lptv/spectra.hpp"

namespace lptv {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { analyze, sweep, simulate, compare, bench };

const char* to_string(Command c);
Command parse_command(std::string_view name);

struct GridSpec {
  double f_min = 1e4;
  double f_max = 0.0;  // 0 means just below f_DCO/2
  std::size_t points = 1u << 14;
  Spacing spacing = Spacing::log;

  bool operator==(const GridSpec&) const = default;
};

struct SweepSpec {
  SweepParam param = SweepParam::P;
  std::vector<int> values;

  bool operator==(const SweepSpec&) const = default;
};

struct CompareSettings {
  double f_lo = 1e5;
  double f_hi = 2e8;
  CompareTolerance tol;
  int exclusion_bins = 2;
  bool notch_dsm = true;  // also exclude multiples of f_DSM

  bool operator==(const CompareSettings& o) const {
    return f_lo == o.f_lo && f_hi == o.f_hi && tol.mean_abs_db == o.tol.mean_abs_db &&
           tol.max_abs_db == o.tol.max_abs_db && exclusion_bins == o.exclusion_bins &&
           notch_dsm == o.notch_dsm;
  }
};

struct BenchSpec {
  std::vector<int> N = {18, 50, 100, 150, 200, 300};
  std::size_t points = 8;  // timed frequencies per N

  bool operator==(const BenchSpec&) const = default;
};

struct RunSpec {
  Command command = Command::analyze;
  std::filesystem::path config_path;  // not part of the rendered document
  std::filesystem::path out_dir = ".";
  GridSpec grid;
  SweepSpec sweep;
  std::uint64_t seed = 1;
  SourceSet sources;
  JitterBand band;
  double spot_hz = 1e6;
  WelchConfig welch;
  CompareSettings compare;
  BenchSpec bench;
  bool write_series = false;

  bool operator==(const RunSpec& o) const;
};

struct ParsedConfig {
  PllConfig pll;
  RunSpec run;

  bool operator==(const ParsedConfig&) const = default;
};

// Throws ConfigError with the offending key path.
ParsedConfig parse_config(std::string_view text);
ParsedConfig load_config(const std::filesystem::path& path);
// Fully resolved document; parse_config(render_config(c)) == c.
std::string render_config(const ParsedConfig& cfg);

// Flag syntaxes: "fmin,fmax,points,log|lin", "P=1..18" or "M=2,3,5",
// "ref,dsm,dco".
GridSpec parse_grid(std::string_view text);
SweepSpec parse_sweep(std::string_view text);
SourceSet parse_sources(std::string_view text);

std::vector<double> resolve_grid(const GridSpec& grid, const PllConfig& cfg);

}  // namespace lptv
