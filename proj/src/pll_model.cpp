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

#include "lptv/pll_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <utility>

#include "lptv/errors.hpp"

namespace lptv {
namespace {

ComplexMatrix decorrelation_matrix(int L, int N) {
  return mul_conversion_matrix(decorrelation_window(L, N)).matrix();
}

}  // namespace

void PllConfig::validate() const {
  if (N < 1) throw ConfigError("pll.N", "must be >= 1");
  if (M < 1) throw ConfigError("pll.M", "must be >= 1");
  if (P < 1 || P > N) throw ConfigError("pll.P", "must satisfy 1 <= P <= N");
  if (!(f_ref > 0.0) || !std::isfinite(f_ref)) throw ConfigError("pll.f_ref", "must be positive");
  if (!(K_PD > 0.0) || !std::isfinite(K_PD)) throw ConfigError("pll.K_PD", "must be positive");
  if (!(K_P0 >= 0.0) || !std::isfinite(K_P0)) throw ConfigError("pll.K_P0", "must be non-negative");
  if (!(K_I >= 0.0) || !std::isfinite(K_I)) throw ConfigError("pll.K_I", "must be non-negative");
  if (!(K_DCO > 0.0) || !std::isfinite(K_DCO)) throw ConfigError("pll.K_DCO", "must be positive");
  if (!(dco_noise_variance > 0.0) || !std::isfinite(dco_noise_variance))
    throw ConfigError("pll.dco_noise_variance", "must be positive");
}

double kpd_from_resolution(double f_ref, double dt_res) {
  if (!(f_ref > 0.0) || !(dt_res > 0.0))
    throw std::invalid_argument("f_ref and TDC resolution must be positive");
  return 1.0 / (kTwoPi * f_ref * dt_res);
}

std::vector<std::string> SourceSet::names() const {
  std::vector<std::string> out;
  if (ref) out.emplace_back("ref");
  if (dsm) out.emplace_back("dsm");
  if (dco) out.emplace_back("dco");
  return out;
}

PeriodicWindow divider_window(int N) {
  if (N < 1) throw std::invalid_argument("divider ratio must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(N), 0.0);
  w[0] = 1.0;
  return PeriodicWindow(std::move(w));
}

PeriodicWindow fpec_window(int N, int P) {
  if (P < 1 || P > N) throw ConfigError("pll.P", "FPEC window length must satisfy 1 <= P <= N");
  std::vector<double> w(static_cast<std::size_t>(N), 0.0);
  std::fill_n(w.begin(), P, 1.0);
  return PeriodicWindow(std::move(w));
}

// ---------------------------------------------------------------------------
// PllModel

PllModel::PllModel(PllConfig cfg, SourceSet sources)
    : cfg_((cfg.validate(), std::move(cfg))),
      sources_(sources),
      h_dco_(RationalTransfer::delayed_accumulator(cfg_.K_DCO / cfg_.f_dco())),
      zoh_n_(RationalTransfer::zero_order_hold(cfg_.N)),
      zoh_m_(RationalTransfer::zero_order_hold(cfg_.M)),
      integral_(RationalTransfer::accumulator(cfg_.K_I)),
      dsm_delay_(RationalTransfer::delay(2 * cfg_.M)),
      ref_src_(tdc_ref_noise(cfg_.K_PD, cfg_.N)),
      dsm_src_(dsm_qnoise(cfg_.M)),
      dco_src_(dco_noise(cfg_.dco_noise_variance)) {
  const int N = cfg_.N;
  divider_ = mul_conversion_matrix(divider_window(N)).matrix() / static_cast<double>(N);
  fpec_ = mul_conversion_matrix(fpec_window(N, cfg_.P)).matrix() *
          (static_cast<double>(N) * cfg_.K_P0 / cfg_.P);
  if (cfg_.use_fractional_resampling) resample_ = fractional_resample_matrix(cfg_.M, N).matrix();
  if (cfg_.use_decorrelation) {
    decor_ref_ = decorrelation_matrix(N, N);
    decor_dsm_ = decorrelation_matrix(cfg_.M, N);
  }
}

void PllModel::set_reference_psd(PsdFunction psd) {
  ref_src_ = NoiseSource(SourceKind::reference, std::move(psd), cfg_.N);
}

PllModel::Lti PllModel::lti(double omega) const {
  const int K = cfg_.N;
  Lti h;
  h.dco = lti_diagonal(h_dco_, omega, K);
  h.zoh_n = lti_diagonal(zoh_n_, omega, K);
  h.zoh_m = lti_diagonal(zoh_m_, omega, K);
  h.integral = lti_diagonal(integral_, omega, K);
  if (cfg_.use_fractional_resampling) h.delay = lti_diagonal(dsm_delay_, omega, K);
  return h;
}

ComplexMatrix PllModel::loop_filter(const Lti& h) const {
  ComplexMatrix lf = fpec_ * h.zoh_n.asDiagonal();
  if (cfg_.use_fractional_resampling) {
    // integrator -> M-periodic resampling -> ZOH_M -> z^-2M
    const ComplexVector left = h.delay.cwiseProduct(h.zoh_m);
    lf.noalias() += left.asDiagonal() * resample_ * h.integral.asDiagonal();
  } else {
    lf.diagonal() += h.integral;
  }
  return lf;
}

ComplexMatrix PllModel::loop_gain(double omega) const {
  const Lti h = lti(omega);
  ComplexMatrix pref = cfg_.K_PD * (h.dco.asDiagonal() * loop_filter(h));
  return -(pref * divider_);
}

PathGains PllModel::path_gains(double omega) const {
  const Lti h = lti(omega);
  ComplexMatrix pref = cfg_.K_PD * (h.dco.asDiagonal() * loop_filter(h));
  const ComplexVector dsm = h.dco.cwiseProduct(h.zoh_m);
  return {ConversionMatrix(std::move(pref)), ConversionMatrix::diagonal(dsm),
          ConversionMatrix::identity(cfg_.N)};
}

PointResult PllModel::evaluate(double omega) const {
  const Lti h = lti(omega);
  const ComplexMatrix pref = cfg_.K_PD * (h.dco.asDiagonal() * loop_filter(h));
  const ComplexMatrix loop = -(pref * divider_);
  const ClosedLoopSolver solver(loop, omega);
  const ComplexRow& r = solver.baseband_gain();

  PointResult out;
  out.condition = solver.condition();
  if (sources_.ref) {
    ComplexRow row = r * pref;
    if (cfg_.use_decorrelation) row = row * decor_ref_;
    out.ref = output_psd(row, [this](double w) { return ref_src_.upsampled_psd(w); }, omega);
  }
  if (sources_.dsm) {
    ComplexRow row = r.cwiseProduct(h.dco.cwiseProduct(h.zoh_m).transpose());
    if (cfg_.use_decorrelation) row = row * decor_dsm_;
    out.dsm = output_psd(row, [this](double w) { return dsm_src_.upsampled_psd(w); }, omega);
  }
  if (sources_.dco)
    out.dco = output_psd(r, [this](double w) { return dco_src_.upsampled_psd(w); }, omega);
  return out;
}

ConversionMatrix loop_gain(const PllConfig& cfg, double omega) {
  return ConversionMatrix(PllModel(cfg).loop_gain(omega));
}

PathGains path_gains(const PllConfig& cfg, double omega) { return PllModel(cfg).path_gains(omega); }

// ---------------------------------------------------------------------------
// Grid analysis

std::vector<double> default_grid(const PllConfig& cfg, std::size_t points) {
  // Stop just short of f_DCO/2, which is a multiple of f_REF for even N.
  return make_grid(1e4, 0.5 * cfg.f_dco() * (1.0 - 1e-7), points, Spacing::log);
}

AnalysisResult analyze(const PllConfig& cfg, const std::vector<double>& grid_hz,
                       const AnalyzeOptions& opts) {
  PllModel model(cfg, opts.sources);
  if (opts.reference_psd) model.set_reference_psd(*opts.reference_psd);
  const double f_dco = cfg.f_dco();
  for (double f : grid_hz)
    if (!(f > 0.0) || f > 0.5 * f_dco * (1.0 + 1e-12))
      throw std::invalid_argument("grid frequencies must lie in (0, f_DCO/2]");

  const std::size_t n = grid_hz.size();
  std::vector<PointResult> points(n);
  std::vector<double> wall(n, 0.0);
  std::vector<std::string> error(n);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        points[i] = model.evaluate(kTwoPi * grid_hz[i] / f_dco);
      } catch (const Error& e) {
        error[i] = e.what();
      }
      wall[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n / 64, 1)));
  if (threads <= 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }

  AnalysisResult res;
  res.wall_time_s = std::move(wall);
  res.condition.resize(n);
  PnCurve& pn = res.pn;
  pn.freq_hz = grid_hz;
  pn.sources = opts.sources.names();
  pn.f_out = f_dco;
  pn.band = opts.band;
  if (pn.band.f_hi <= 0.0) pn.band.f_hi = 0.5 * f_dco;
  for (const auto& name : pn.sources) pn.per_source[name].resize(n);

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < n; ++i) {
    const bool failed = !error[i].empty();
    if (failed) res.failures.push_back({i, grid_hz[i], error[i]});
    res.condition[i] = failed ? kNaN : points[i].condition;
    auto put = [&](const char* name, double s) {
      if (auto it = pn.per_source.find(name); it != pn.per_source.end())
        it->second[i] = failed ? kNaN : clamp_pn(ssb_phase_noise(s, f_dco));
    };
    put("ref", points[i].ref);
    put("dsm", points[i].dsm);
    put("dco", points[i].dco);
  }
  pn.recompute_total();
  try {
    pn.recompute_jitter();
  } catch (const CoverageError&) {
    pn.jitter_s.clear();
  }
  return res;
}

AnalysisResult analyze_fractional(const PllConfig& cfg, const std::vector<double>& grid_hz,
                                  const AnalyzeOptions& opts) {
  if (!cfg.use_fractional_resampling)
    throw ConfigError("pll.use_fractional_resampling", "must be true for the fractional analysis");
  return analyze(cfg, grid_hz, opts);
}

SweepTable sweep(const PllConfig& cfg, SweepParam param, const std::vector<int>& values,
                 const std::vector<double>& grid_hz, double spot_hz, const AnalyzeOptions& opts) {
  SweepTable table{param, spot_hz, {}};
  for (int v : values) {
    PllConfig c = cfg;
    (param == SweepParam::P ? c.P : c.M) = v;
    c.validate();
    const AnalysisResult r = analyze(c, grid_hz, opts);
    const auto jit = r.pn.jitter_s.find("total");
    table.rows.push_back({v, r.pn.interpolate(r.pn.total, spot_hz),
                          jit == r.pn.jitter_s.end() ? std::numeric_limits<double>::quiet_NaN()
                                                     : jit->second});
  }
  return table;
}

}  // namespace lptv
