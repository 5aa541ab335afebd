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

#include "lptv/sim_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <random>
#include <stdexcept>

#include <fftw3.h>

#include "lptv/errors.hpp"

namespace lptv {
namespace {

constexpr char kSeriesMagic[8] = {'L', 'P', 'T', 'V', 'P', 'H', 'S', '1'};
constexpr std::size_t kWarmupSegments = 20;

enum StreamId : std::uint64_t { kRefStream = 1, kDsmStream = 2, kDcoStream = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, StreamId id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

// Direct-form I IIR filter for a RationalTransfer in z^-1.
class IirFilter {
 public:
  explicit IirFilter(const RationalTransfer& tf)
      : b_(tf.numerator()), a_(tf.denominator()), x_(b_.size(), 0.0), y_(a_.size(), 0.0) {
    if (a_.front() == 0.0) throw std::invalid_argument("shaping filter needs a_0 != 0");
  }

  double operator()(double in) {
    std::rotate(x_.rbegin(), x_.rbegin() + 1, x_.rend());
    x_[0] = in;
    double acc = 0.0;
    for (std::size_t i = 0; i < b_.size(); ++i) acc += b_[i] * x_[i];
    for (std::size_t i = 1; i < a_.size(); ++i) acc -= a_[i] * y_[i - 1];
    acc /= a_.front();
    if (y_.size() > 1) {
      std::rotate(y_.rbegin(), y_.rbegin() + 1, y_.rend());
      y_[0] = acc;
    }
    return acc;
  }

 private:
  std::vector<double> b_, a_, x_, y_;
};

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

std::vector<double> make_window(WindowShape shape, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (shape == WindowShape::hann)
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::size_t WelchConfig::step() const {
  const auto hop = static_cast<std::size_t>(std::llround((1.0 - overlap) * segment_length));
  return std::max<std::size_t>(hop, 1);
}

std::size_t WelchConfig::required_samples() const {
  return segment_length + (averages - 1) * step();
}

void WelchConfig::validate() const {
  if (segment_length < 2 || !std::has_single_bit(segment_length))
    throw std::invalid_argument("Welch segment length must be a power of two >= 2");
  if (!(overlap >= 0.0 && overlap <= 0.9))
    throw std::invalid_argument("Welch overlap must be in [0, 0.9]");
  if (averages < 1) throw std::invalid_argument("Welch needs at least one average");
}

void SimRun::validate(std::size_t segment_length) const {
  cfg.validate();
  if (total_samples < warmup + 2 * segment_length)
    throw std::invalid_argument("simulation needs total >= warmup + 2 * segment length");
}

SimRun make_run(const PllConfig& cfg, const WelchConfig& welch, std::uint64_t seed,
                SourceSet sources) {
  welch.validate();
  SimRun run;
  run.cfg = cfg;
  run.seed = seed;
  run.sources = sources;
  run.warmup = kWarmupSegments * welch.segment_length;
  run.total_samples = run.warmup + std::max(welch.required_samples(), 2 * welch.segment_length);
  return run;
}

// ---------------------------------------------------------------------------
// Simulation

std::vector<double> simulate(const SimRun& run) {
  const PllConfig& c = run.cfg;
  c.validate();
  if (run.total_samples <= run.warmup)
    throw std::invalid_argument("simulation has no samples after warmup");

  auto ref_rng = make_stream(run.seed, kRefStream);
  auto dsm_rng = make_stream(run.seed, kDsmStream);
  auto dco_rng = make_stream(run.seed, kDcoStream);
  std::uniform_real_distribution<double> lsb(-0.5, 0.5);
  std::normal_distribution<double> dco_step(0.0, std::sqrt(c.dco_noise_variance));
  std::optional<IirFilter> ref_shape;
  if (run.reference_shaping) ref_shape.emplace(*run.reference_shaping);

  const double kdco = c.K_DCO / c.f_dco();
  const double prop_gain = static_cast<double>(c.N) * c.K_P0 / c.P;
  const double inv_n = 1.0 / c.N;

  // Start at the locked, zero-error fixed point.
  double phi = 0.0, u = 0.0, held_error = 0.0, acc = 0.0, dsm_value = 0.0;
  double q1 = 0.0, q2 = 0.0;              // DSM noise history (f_DSM samples)
  double acc_hist[3] = {0.0, 0.0, 0.0};   // integrator sampled at f_DSM
  int ref_phase = 0, dsm_phase = 0;

  std::vector<double> out;
  out.reserve(run.total_samples - run.warmup);
  for (std::size_t n = 0; n < run.total_samples; ++n) {
    phi += kdco * u;
    if (run.sources.dco) phi += dco_step(dco_rng);

    if (ref_phase == 0) {
      double ref = 0.0;
      if (run.sources.ref) {
        double q = lsb(ref_rng);
        if (ref_shape) q = (*ref_shape)(q);
        ref = q / c.K_PD;
      }
      held_error = c.K_PD * (ref - phi * inv_n);
      acc += c.K_I * held_error;
    }
    if (dsm_phase == 0) {
      if (run.sources.dsm) {
        const double q = lsb(dsm_rng);
        dsm_value = q - 2.0 * q1 + q2;
        q2 = q1;
        q1 = q;
      }
      acc_hist[2] = acc_hist[1];
      acc_hist[1] = acc_hist[0];
      acc_hist[0] = acc;
    }

    const double prop = ref_phase < c.P ? prop_gain * held_error : 0.0;
    const double integral = c.use_fractional_resampling ? acc_hist[2] : acc;
    u = prop + integral + dsm_value;

    if (!std::isfinite(phi) || !std::isfinite(u)) throw InstabilityError(n);
    if (n >= run.warmup) out.push_back(phi);
    if (++ref_phase == c.N) ref_phase = 0;
    if (++dsm_phase == c.M) dsm_phase = 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Welch

std::vector<double> PsdEstimate::ssb_dbc() const {
  std::vector<double> out(psd.size());
  for (std::size_t i = 0; i < psd.size(); ++i) out[i] = ssb_phase_noise(psd[i] / 2.0, 1.0);
  return out;
}

PsdEstimate welch_psd(std::span<const double> series, double sample_rate, const WelchConfig& wcfg) {
  wcfg.validate();
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  const std::size_t need = wcfg.required_samples();
  if (series.size() < need) throw EstimatorError(series.size(), need);

  const std::size_t nseg = wcfg.segment_length;
  const std::size_t nbins = nseg / 2 + 1;
  const std::vector<double> window = make_window(wcfg.window, nseg);
  double window_power = 0.0;
  for (double w : window) window_power += w * w;

  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * nseg)));
  std::unique_ptr<fftw_complex, FftwFree> spec(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nbins)));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan(fftw_plan_dft_r2c_1d(
      static_cast<int>(nseg), in.get(), spec.get(), FFTW_ESTIMATE));

  std::vector<double> acc(nbins, 0.0);
  for (std::size_t s = 0; s < wcfg.averages; ++s) {
    const double* seg = series.data() + s * wcfg.step();
    double mean = 0.0;
    for (std::size_t i = 0; i < nseg; ++i) mean += seg[i];
    mean /= static_cast<double>(nseg);
    for (std::size_t i = 0; i < nseg; ++i) in.get()[i] = (seg[i] - mean) * window[i];
    fftw_execute(plan.get());
    for (std::size_t k = 0; k < nbins; ++k)
      acc[k] += spec.get()[k][0] * spec.get()[k][0] + spec.get()[k][1] * spec.get()[k][1];
  }

  PsdEstimate est;
  est.averages = wcfg.averages;
  est.freq_hz.resize(nbins);
  est.psd.resize(nbins);
  const double scale = 1.0 / (sample_rate * window_power * static_cast<double>(wcfg.averages));
  for (std::size_t k = 0; k < nbins; ++k) {
    const bool edge = k == 0 || k == nbins - 1;
    est.freq_hz[k] = sample_rate * static_cast<double>(k) / static_cast<double>(nseg);
    est.psd[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Comparison

std::vector<double> multiples(double spacing, double f_max) {
  std::vector<double> out;
  if (!(spacing > 0.0)) return out;
  for (int k = 1; k * spacing < f_max; ++k) out.push_back(k * spacing);
  return out;
}

std::vector<double> default_notches(const PllConfig& cfg, bool include_dsm) {
  std::vector<double> out = multiples(cfg.f_ref, 0.5 * cfg.f_dco());
  if (include_dsm) {
    const auto dsm = multiples(cfg.f_dco() / cfg.M, 0.5 * cfg.f_dco());
    out.insert(out.end(), dsm.begin(), dsm.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

CompareReport compare(std::span<const double> model_freq_hz, std::span<const double> model_db,
                      const PsdEstimate& sim, double f_lo, double f_hi,
                      std::span<const double> notch_hz, CompareTolerance tol, int exclusion_bins) {
  if (model_freq_hz.size() != model_db.size() || model_freq_hz.size() < 2)
    throw std::invalid_argument("model curve needs matching grid and values");
  if (sim.freq_hz.size() < 2) throw ComparisonError("empty PSD estimate");
  const double df = sim.freq_hz[1] - sim.freq_hz[0];
  const double lo = std::max(f_lo, model_freq_hz.front());
  const double hi = std::min(f_hi, model_freq_hz.back());
  const std::vector<double> sim_db = sim.ssb_dbc();

  CompareReport rep;
  double sum_abs = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < sim.freq_hz.size(); ++k) {
    const double f = sim.freq_hz[k];
    if (f < lo || f > hi) continue;
    const bool near_notch = std::any_of(notch_hz.begin(), notch_hz.end(), [&](double fn) {
      return std::abs(f - fn) <= (exclusion_bins + 0.5) * df;
    });
    if (near_notch) continue;

    const auto it = std::lower_bound(model_freq_hz.begin(), model_freq_hz.end(), f);
    double m;
    if (it == model_freq_hz.begin()) {
      m = model_db.front();
    } else if (it == model_freq_hz.end()) {
      m = model_db.back();
    } else {
      const std::size_t i = static_cast<std::size_t>(it - model_freq_hz.begin());
      if (*it == f) {
        m = model_db[i];
      } else {
        const double t = std::log(f / model_freq_hz[i - 1]) /
                         std::log(model_freq_hz[i] / model_freq_hz[i - 1]);
        m = model_db[i - 1] + t * (model_db[i] - model_db[i - 1]);
      }
    }
    if (!std::isfinite(m) || !std::isfinite(sim_db[k])) continue;

    const double d = sim_db[k] - m;
    sum += d;
    sum_abs += std::abs(d);
    if (std::abs(d) > rep.max_abs_db) {
      rep.max_abs_db = std::abs(d);
      rep.worst_freq_hz = f;
    }
    ++rep.bins;
  }
  if (rep.bins == 0) throw ComparisonError("no frequency bins left to compare");
  rep.mean_abs_db = sum_abs / static_cast<double>(rep.bins);
  rep.mean_db = sum / static_cast<double>(rep.bins);
  rep.pass = rep.mean_abs_db <= tol.mean_abs_db && rep.max_abs_db <= tol.max_abs_db;
  return rep;
}

OracleCheck check_against_oracle(const PllConfig& cfg, SourceSet sources, const WelchConfig& welch,
                                 std::uint64_t seed, double f_lo, double f_hi,
                                 std::span<const double> notch_hz, CompareTolerance tol,
                                 int exclusion_bins) {
  OracleCheck out;
  const std::vector<double> series = simulate(make_run(cfg, welch, seed, sources));
  out.estimate = welch_psd(series, cfg.f_dco(), welch);
  const std::vector<double> sim_db = out.estimate.ssb_dbc();
  for (std::size_t k = 0; k < out.estimate.freq_hz.size(); ++k) {
    const double f = out.estimate.freq_hz[k];
    if (f >= f_lo && f <= f_hi && f > 0.0) {
      out.freq_hz.push_back(f);
      out.sim_db.push_back(sim_db[k]);
    }
  }
  if (out.freq_hz.size() < 2) throw ComparisonError("band holds fewer than two estimator bins");

  AnalyzeOptions opts;
  opts.sources = sources;
  const AnalysisResult model = analyze(cfg, out.freq_hz, opts);
  out.model_db = model.pn.total;
  out.report = compare(out.freq_hz, out.model_db, out.estimate, f_lo, f_hi, notch_hz, tol,
                       exclusion_bins);
  return out;
}

// ---------------------------------------------------------------------------
// Series files

void write_series(const std::filesystem::path& path, std::span<const double> series,
                  double sample_rate) {
  static_assert(std::endian::native == std::endian::little, "series files are little-endian");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  const std::uint64_t count = series.size();
  os.write(kSeriesMagic, sizeof kSeriesMagic);
  os.write(reinterpret_cast<const char*>(&sample_rate), sizeof sample_rate);
  os.write(reinterpret_cast<const char*>(&count), sizeof count);
  os.write(reinterpret_cast<const char*>(series.data()),
           static_cast<std::streamsize>(series.size() * sizeof(double)));
  if (!os) throw Error("failed writing " + path.string());
}

std::vector<double> read_series(const std::filesystem::path& path, double* sample_rate) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  char magic[sizeof kSeriesMagic];
  double fs = 0.0;
  std::uint64_t count = 0;
  is.read(magic, sizeof magic);
  is.read(reinterpret_cast<char*>(&fs), sizeof fs);
  is.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!is || std::memcmp(magic, kSeriesMagic, sizeof magic) != 0)
    throw Error(path.string() + " is not a phase series file");
  std::vector<double> out(count);
  is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw Error(path.string() + " is truncated");
  if (sample_rate) *sample_rate = fs;
  return out;
}

}  // namespace lptv
