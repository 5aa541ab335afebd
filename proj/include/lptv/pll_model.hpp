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

// DCO-rate conversion-matrix model of an integer-N type-II digital PLL with
// a time-varying proportional gain (fast phase-error correction, FPEC).
//
// Block structure at the DCO rate (period K = N):
//   divider      w_R1[n] / N          (samples the output every N samples)
//   proportional ZOH_N then (N*K_P0/P) * w_RP[n]
//   integral     K_I / (1 - z^-1)
//   DCO          (K_DCO / f_DCO) * z^-1 / (1 - z^-1)
// Noise enters as reference/TDC (rate f_REF), DSM quantization (rate
// f_DCO/M, through ZOH_M) and DCO phase noise (rate f_DCO).

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lptv/conversion_matrix.hpp"
#include "lptv/spectra.hpp"

namespace lptv {

// DCO white-FM variance giving -110 dBc/Hz DCO-only output PN at a 10 MHz
// offset for the default profile.
inline constexpr double kDefaultDcoNoiseVariance = 3.3327e-5;

struct PllConfig {
  int N = 18;         // f_DCO / f_REF
  int M = 1;          // f_DCO / f_DSM
  int P = 18;         // FPEC window length, 1..N
  double f_ref = 35e6;
  double K_PD = 300.0;  // rad^-1
  double K_P0 = 0.4;
  double K_I = 0.4 / 32.0;
  double K_DCO = 4e6;  // Hz/LSB
  double dco_noise_variance = kDefaultDcoNoiseVariance;
  bool use_decorrelation = true;
  bool use_fractional_resampling = false;

  double f_dco() const { return N * f_ref; }
  // Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const PllConfig&) const = default;
};

// K_PD = 1 / (2*pi*f_REF*dt_res).
double kpd_from_resolution(double f_ref, double dt_res);

struct SourceSet {
  bool ref = true;
  bool dsm = true;
  bool dco = true;

  static SourceSet only_ref() { return {true, false, false}; }
  static SourceSet only_dsm() { return {false, true, false}; }
  static SourceSet only_dco() { return {false, false, true}; }
  std::vector<std::string> names() const;
  bool operator==(const SourceSet&) const = default;
};

PeriodicWindow divider_window(int N);
PeriodicWindow fpec_window(int N, int P);

ConversionMatrix loop_gain(const PllConfig& cfg, double omega);

struct PathGains {
  ConversionMatrix ref;
  ConversionMatrix dsm;
  ConversionMatrix dco;
};

PathGains path_gains(const PllConfig& cfg, double omega);

// Per-source DSB output PSDs (per normalized frequency, DCO rate) at one
// frequency.
struct PointResult {
  double ref = 0.0;
  double dsm = 0.0;
  double dco = 0.0;
  double condition = 0.0;
};

// Frequency-independent part of the model, built once and shared across
// grid points. Evaluation is const and thread-safe.
class PllModel {
 public:
  explicit PllModel(PllConfig cfg, SourceSet sources = {});

  const PllConfig& config() const { return cfg_; }
  const SourceSet& sources() const { return sources_; }

  ComplexMatrix loop_gain(double omega) const;
  PathGains path_gains(double omega) const;
  PointResult evaluate(double omega) const;

  // Replaces the white TDC floor with an arbitrary reference PSD (f_REF rate).
  void set_reference_psd(PsdFunction psd);

 private:
  struct Lti {
    ComplexVector dco, zoh_n, zoh_m, integral, delay;
  };
  Lti lti(double omega) const;
  ComplexMatrix loop_filter(const Lti& h) const;

  PllConfig cfg_;
  SourceSet sources_;
  ComplexMatrix divider_;     // W_R1 / N
  ComplexMatrix fpec_;        // (N*K_P0/P) * W_RP
  ComplexMatrix resample_;    // fractional variant only
  ComplexMatrix decor_ref_, decor_dsm_;
  RationalTransfer h_dco_, zoh_n_, zoh_m_, integral_, dsm_delay_;
  NoiseSource ref_src_, dsm_src_, dco_src_;
};

struct PointFailure {
  std::size_t index;
  double freq_hz;
  std::string message;
};

struct AnalysisResult {
  PnCurve pn;
  std::vector<double> condition;    // per grid point; NaN where failed
  std::vector<double> wall_time_s;  // per grid point
  std::vector<PointFailure> failures;

  bool ok() const { return failures.empty(); }
};

struct AnalyzeOptions {
  SourceSet sources;
  JitterBand band;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::optional<PsdFunction> reference_psd;
};

// Default grid: log-spaced, 10 kHz to just below f_DCO/2, 2^14 points.
std::vector<double> default_grid(const PllConfig& cfg, std::size_t points = 1u << 14);

AnalysisResult analyze(const PllConfig& cfg, const std::vector<double>& grid_hz,
                       const AnalyzeOptions& opts = {});
// Same as analyze() but requires use_fractional_resampling.
AnalysisResult analyze_fractional(const PllConfig& cfg, const std::vector<double>& grid_hz,
                                  const AnalyzeOptions& opts = {});

enum class SweepParam { P, M };

struct SweepRow {
  int value;
  double spot_pn_dbc;
  double jitter_s;
};

struct SweepTable {
  SweepParam param;
  double spot_hz;
  std::vector<SweepRow> rows;
};

SweepTable sweep(const PllConfig& cfg, SweepParam param, const std::vector<int>& values,
                 const std::vector<double>& grid_hz, double spot_hz = 1e6,
                 const AnalyzeOptions& opts = {});

}  // namespace lptv
