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

// Noise PSDs, uncorrelated upsampling and phase-noise bookkeeping.
//
// PSD convention: every discrete PSD is a two-sided density per normalized
// frequency, so a white sequence of variance v has S(omega) = v. Dividing by
// the sample rate gives rad^2/Hz, and L(f) = 10 log10(S / f_s) dBc/Hz.

#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lptv/conversion_matrix.hpp"

namespace lptv {

enum class SourceKind { dco, dsm, reference, custom };

const char* to_string(SourceKind kind);

using PsdFunction = std::function<double(double omega)>;

// Native-rate noise source, upsampled by `upsample` (f_DCO / native rate).
class NoiseSource {
 public:
  NoiseSource(SourceKind kind, PsdFunction psd, int upsample, double variance = 0.0);

  SourceKind kind() const { return kind_; }
  int upsample() const { return upsample_; }
  double variance() const { return variance_; }

  double native_psd(double omega) const { return psd_(wrap_angle(omega)); }
  // Time-averaged PSD of the zero-inserted sequence at the DCO rate:
  // S(mod(L*omega, 2*pi)) / L.
  double upsampled_psd(double omega) const;

 private:
  SourceKind kind_;
  PsdFunction psd_;
  int upsample_;
  double variance_;
};

double upsampled_psd(const NoiseSource& src, double omega);

// White frequency noise of variance `variance` through an accumulator:
// variance / |1 - exp(-j omega)|^2 at the DCO rate. Unbounded at omega = 0.
NoiseSource dco_noise(double variance);
// Uniform 1/12 LSB^2 quantization noise shaped by (1 - z^-1)^2, at f_DCO/M.
NoiseSource dsm_qnoise(int M);
// TDC quantization lumped into the reference: (1/12)/K_PD^2 rad^2, white, at f_DCO/N.
NoiseSource tdc_ref_noise(double K_PD, int N);

// sqrt(g) where mod(n, g) == 0 and 0 elsewhere, with g = gcd(L, N).
PeriodicWindow decorrelation_window(int L, int N);
// 1 where mod(n, N/gcd(L, N)) == 0, else 0.
PeriodicWindow correlated_shift_sequence(int L, int N);

// sum_k |H_{0,k}|^2 S(omega - 2*pi*k/K), with `baseband_row` ordered by
// matrix column position (rightmost column is k = 0).
double output_psd(const ComplexRow& baseband_row, const PsdFunction& input_psd, double omega);
double output_psd(const ConversionMatrix& h, const PsdFunction& input_psd, double omega);

inline constexpr double kPnFloorDbc = -400.0;

// 10 log10(S / f_dco); -infinity for a zero density.
double ssb_phase_noise(double s_dsb, double f_dco);
// Same, clamped to kPnFloorDbc so tables stay finite.
double clamp_pn(double pn_dbc);

// sqrt(2 * integral 10^(L/10) df) / (2*pi*f_out), trapezoidal on the given
// grid restricted to [f_lo, f_hi]. Throws CoverageError when the grid does
// not span the band.
double rms_jitter(std::span<const double> freq_hz, std::span<const double> pn_dbc, double f_lo,
                  double f_hi, double f_out);

enum class Spacing { log, linear };

std::vector<double> make_grid(double f_min, double f_max, std::size_t points, Spacing spacing);

struct JitterBand {
  double f_lo = 1e4;
  double f_hi = 0.0;  // 0 means f_DCO / 2
};

// Per-source and total SSB phase noise on a common grid.
struct PnCurve {
  std::vector<double> freq_hz;
  std::vector<std::string> sources;                    // column order
  std::map<std::string, std::vector<double>> per_source;  // dBc/Hz
  std::vector<double> total;                           // dBc/Hz
  std::map<std::string, double> jitter_s;              // per source and "total"
  JitterBand band;
  double f_out = 0.0;

  // Sums per-source linear powers into `total`.
  void recompute_total();
  // Fills `jitter_s` from the stored columns.
  void recompute_jitter();
  // Linear interpolation of a column in (log f, dB).
  double interpolate(const std::vector<double>& column, double f_hz) const;
};

}  // namespace lptv
