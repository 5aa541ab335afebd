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

#include "lptv/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "lptv/errors.hpp"

namespace lptv {
namespace {

// Relative slack when checking that a grid spans an integration band.
constexpr double kCoverageSlack = 1e-6;

double db_to_power(double db) { return std::isfinite(db) ? std::pow(10.0, db / 10.0) : 0.0; }

}  // namespace

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::dco: return "dco";
    case SourceKind::dsm: return "dsm";
    case SourceKind::reference: return "ref";
    case SourceKind::custom: return "custom";
  }
  return "unknown";
}

NoiseSource::NoiseSource(SourceKind kind, PsdFunction psd, int upsample, double variance)
    : kind_(kind), psd_(std::move(psd)), upsample_(upsample), variance_(variance) {
  if (upsample_ < 1) throw std::invalid_argument("upsample factor must be >= 1");
  if (!psd_) throw std::invalid_argument("noise source needs a PSD");
}

double NoiseSource::upsampled_psd(double omega) const {
  return psd_(wrap_angle(upsample_ * wrap_angle(omega))) / upsample_;
}

double upsampled_psd(const NoiseSource& src, double omega) { return src.upsampled_psd(omega); }

NoiseSource dco_noise(double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("DCO noise variance must be positive");
  return NoiseSource(
      SourceKind::dco,
      [variance](double omega) { return variance / std::norm(1.0 - std::polar(1.0, -omega)); },
      1, variance);
}

NoiseSource dsm_qnoise(int M) {
  constexpr double kLsbVariance = 1.0 / 12.0;
  return NoiseSource(
      SourceKind::dsm,
      [](double omega) {
        const double m = std::norm(1.0 - std::polar(1.0, -omega));
        return kLsbVariance * m * m;
      },
      M, kLsbVariance);
}

NoiseSource tdc_ref_noise(double K_PD, int N) {
  if (!(K_PD > 0.0)) throw std::invalid_argument("K_PD must be positive");
  const double v = (1.0 / 12.0) / (K_PD * K_PD);
  return NoiseSource(SourceKind::reference, [v](double) { return v; }, N, v);
}

PeriodicWindow decorrelation_window(int L, int N) {
  if (L < 1 || N < 1) throw std::invalid_argument("L and N must be >= 1");
  const int g = std::gcd(L, N);
  std::vector<double> w(static_cast<std::size_t>(N), 0.0);
  for (int n = 0; n < N; n += g) w[n] = std::sqrt(static_cast<double>(g));
  return PeriodicWindow(std::move(w));
}

PeriodicWindow correlated_shift_sequence(int L, int N) {
  if (L < 1 || N < 1) throw std::invalid_argument("L and N must be >= 1");
  const int step = N / std::gcd(L, N);
  std::vector<double> w(static_cast<std::size_t>(N), 0.0);
  for (int n = 0; n < N; n += step) w[n] = 1.0;
  return PeriodicWindow(std::move(w));
}

double output_psd(const ComplexRow& baseband_row, const PsdFunction& input_psd, double omega) {
  const int K = static_cast<int>(baseband_row.size());
  double s = 0.0;
  for (int p = 0; p < K; ++p) {
    const double g = std::norm(baseband_row(p));
    if (g == 0.0) continue;
    s += g * input_psd(wrap_angle(shifted_omega(omega, harmonic_of(p, K), K)));
  }
  return s;
}

double output_psd(const ConversionMatrix& h, const PsdFunction& input_psd, double omega) {
  return output_psd(h.baseband_row(), input_psd, omega);
}

double ssb_phase_noise(double s_dsb, double f_dco) {
  if (s_dsb <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(s_dsb / f_dco);
}

double clamp_pn(double pn_dbc) {
  if (std::isnan(pn_dbc)) return pn_dbc;
  return std::max(pn_dbc, kPnFloorDbc);
}

double rms_jitter(std::span<const double> freq_hz, std::span<const double> pn_dbc, double f_lo,
                  double f_hi, double f_out) {
  if (freq_hz.size() != pn_dbc.size()) throw std::invalid_argument("grid/PN length mismatch");
  if (!(f_lo < f_hi)) throw std::invalid_argument("jitter band must satisfy f_lo < f_hi");
  if (freq_hz.size() < 2 || freq_hz.front() > f_lo * (1.0 + kCoverageSlack) ||
      freq_hz.back() < f_hi * (1.0 - kCoverageSlack))
    throw CoverageError("frequency grid does not cover the jitter band");

  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < freq_hz.size(); ++i) {
    const double fa = freq_hz[i], fb = freq_hz[i + 1];
    const double lo = std::max(fa, f_lo), hi = std::min(fb, f_hi);
    if (hi <= lo) continue;
    const double pa = db_to_power(pn_dbc[i]), pb = db_to_power(pn_dbc[i + 1]);
    auto at = [&](double f) { return pa + (pb - pa) * (f - fa) / (fb - fa); };
    integral += 0.5 * (at(lo) + at(hi)) * (hi - lo);
  }
  return std::sqrt(2.0 * integral) / (kTwoPi * f_out);
}

std::vector<double> make_grid(double f_min, double f_max, std::size_t points, Spacing spacing) {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!(f_min > 0.0) || !(f_max > f_min)) throw std::invalid_argument("grid needs 0 < f_min < f_max");
  std::vector<double> f(points);
  const double steps = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / steps;
    f[i] = spacing == Spacing::log ? f_min * std::pow(f_max / f_min, t) : f_min + (f_max - f_min) * t;
  }
  f.front() = f_min;
  f.back() = f_max;
  return f;
}

void PnCurve::recompute_total() {
  total.assign(freq_hz.size(), 0.0);
  for (std::size_t i = 0; i < freq_hz.size(); ++i) {
    double p = 0.0;
    bool failed = false;
    for (const auto& name : sources) {
      const double v = per_source.at(name)[i];
      if (std::isnan(v)) failed = true;
      p += db_to_power(v);
    }
    total[i] = failed ? std::numeric_limits<double>::quiet_NaN() : clamp_pn(10.0 * std::log10(p));
  }
}

void PnCurve::recompute_jitter() {
  jitter_s.clear();
  const double hi = band.f_hi > 0.0 ? band.f_hi : freq_hz.back();
  for (const auto& name : sources)
    jitter_s[name] = rms_jitter(freq_hz, per_source.at(name), band.f_lo, hi, f_out);
  jitter_s["total"] = rms_jitter(freq_hz, total, band.f_lo, hi, f_out);
}

double PnCurve::interpolate(const std::vector<double>& column, double f_hz) const {
  if (freq_hz.empty()) throw std::invalid_argument("empty curve");
  if (f_hz <= freq_hz.front()) return column.front();
  if (f_hz >= freq_hz.back()) return column.back();
  const auto it = std::upper_bound(freq_hz.begin(), freq_hz.end(), f_hz);
  const std::size_t i = static_cast<std::size_t>(it - freq_hz.begin()) - 1;
  const double t = std::log(f_hz / freq_hz[i]) / std::log(freq_hz[i + 1] / freq_hz[i]);
  return column[i] + t * (column[i + 1] - column[i]);
}

}  // namespace lptv
