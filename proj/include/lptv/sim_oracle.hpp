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

// Time-domain reference simulator of the DCO-rate PLL block diagram and a
// Welch PSD estimator used to cross-check the conversion-matrix model.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "lptv/conversion_matrix.hpp"
#include "lptv/pll_model.hpp"

namespace lptv {

enum class WindowShape { hann, rectangular };

struct WelchConfig {
  std::size_t segment_length = 1u << 14;  // power of two
  double overlap = 0.5;                   // [0, 0.9]
  WindowShape window = WindowShape::hann;
  std::size_t averages = 500;

  std::size_t step() const;
  // Samples needed for `averages` overlapped segments.
  std::size_t required_samples() const;
  void validate() const;
};

struct SimRun {
  PllConfig cfg;
  std::uint64_t seed = 1;
  std::size_t total_samples = 0;  // DCO-rate samples, warmup included
  std::size_t warmup = 0;
  SourceSet sources;
  // Optional shaping of the white TDC noise at the reference rate.
  std::optional<RationalTransfer> reference_shaping;

  void validate(std::size_t segment_length) const;
};

// Run with the default warmup (20 segments) and exactly enough samples for
// the Welch configuration.
SimRun make_run(const PllConfig& cfg, const WelchConfig& welch, std::uint64_t seed,
                SourceSet sources);

// Output phase phi_PLL[n] (rad) at f_DCO, warmup discarded. Each source
// draws from its own stream derived from the seed, so runs with different
// source sets share noise realizations. Throws InstabilityError when the
// state diverges.
std::vector<double> simulate(const SimRun& run);

struct PsdEstimate {
  std::vector<double> freq_hz;
  std::vector<double> psd;  // one-sided, rad^2/Hz
  std::size_t averages = 0;

  // SSB phase noise: 10 log10(psd / 2).
  std::vector<double> ssb_dbc() const;
};

PsdEstimate welch_psd(std::span<const double> series, double sample_rate, const WelchConfig& wcfg);

struct CompareTolerance {
  double mean_abs_db = 0.5;
  double max_abs_db = 1.5;
};

struct CompareReport {
  double max_abs_db = 0.0;
  double mean_abs_db = 0.0;
  double mean_db = 0.0;  // sim - model
  double worst_freq_hz = 0.0;
  std::size_t bins = 0;
  bool pass = false;
};

// Model curve (any grid, interpolated linearly in (log f, dB)) against an
// estimate, over [f_lo, f_hi], skipping +-exclusion_bins around each notch.
CompareReport compare(std::span<const double> model_freq_hz, std::span<const double> model_db,
                      const PsdEstimate& sim, double f_lo, double f_hi,
                      std::span<const double> notch_hz, CompareTolerance tol = {},
                      int exclusion_bins = 2);

// Multiples of `spacing` below `f_max`.
std::vector<double> multiples(double spacing, double f_max);

// Multiples of f_REF, plus multiples of f_DSM when `include_dsm`, below f_DCO/2.
std::vector<double> default_notches(const PllConfig& cfg, bool include_dsm);

struct OracleCheck {
  CompareReport report;
  PsdEstimate estimate;
  std::vector<double> freq_hz;  // estimator bins inside the band
  std::vector<double> model_db;
  std::vector<double> sim_db;
};

// Simulates `sources`, evaluates the model directly on the estimator bins
// inside [f_lo, f_hi] and compares total SSB phase noise.
OracleCheck check_against_oracle(const PllConfig& cfg, SourceSet sources, const WelchConfig& welch,
                                 std::uint64_t seed, double f_lo, double f_hi,
                                 std::span<const double> notch_hz, CompareTolerance tol = {},
                                 int exclusion_bins = 2);

// Binary series file: "LPTVPHS1", f64 sample rate, u64 count, f64 samples,
// all little-endian.
void write_series(const std::filesystem::path& path, std::span<const double> series,
                  double sample_rate);
std::vector<double> read_series(const std::filesystem::path& path, double* sample_rate = nullptr);

}  // namespace lptv
