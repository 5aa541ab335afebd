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

#include "lptv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "lptv/errors.hpp"
#include "lptv/pll_model.hpp"
#include "lptv/sim_oracle.hpp"

namespace lptv {
namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt9(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : os_(path, std::ios::binary) {
    if (!os_) throw Error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

void write_sidecar(const fs::path& path, const ParsedConfig& cfg, ordered_json results) {
  ordered_json doc;
  doc["version"] = kVersion;
  doc["command"] = to_string(cfg.run.command);
  doc["config"] = ordered_json::parse(render_config(cfg));
  doc["results"] = std::move(results);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << doc.dump(2) << '\n';
}

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

ordered_json jitter_json(const PnCurve& pn) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, s] : pn.jitter_s) j[name] = finite_or_null(s);
  return j;
}

const char* const kSourceColumns[3] = {"ref", "dsm", "dco"};

std::vector<std::string> pn_header() {
  return {"freq_hz", "pn_ref_dbchz", "pn_dsm_dbchz", "pn_dco_dbchz", "pn_total_dbchz"};
}

void write_pn_csv(const fs::path& path, const PnCurve& pn) {
  CsvWriter csv(path, pn_header());
  for (std::size_t i = 0; i < pn.freq_hz.size(); ++i) {
    std::vector<std::string> cells{fmt9(pn.freq_hz[i])};
    for (const char* name : kSourceColumns) {
      const auto it = pn.per_source.find(name);
      cells.push_back(it == pn.per_source.end() ? "nan" : fmt9(it->second[i]));
    }
    cells.push_back(fmt9(pn.total[i]));
    csv.row(cells);
  }
}

AnalyzeOptions analyze_options(const RunSpec& r) {
  AnalyzeOptions o;
  o.sources = r.sources;
  o.band = r.band;
  return o;
}

int cmd_analyze(const ParsedConfig& cfg, std::ostream& log) {
  const auto grid = resolve_grid(cfg.run.grid, cfg.pll);
  const AnalysisResult res = cfg.pll.use_fractional_resampling
                                 ? analyze_fractional(cfg.pll, grid, analyze_options(cfg.run))
                                 : analyze(cfg.pll, grid, analyze_options(cfg.run));
  write_pn_csv(cfg.run.out_dir / "pn.csv", res.pn);

  double wall = 0.0;
  for (double t : res.wall_time_s) wall += t;
  ordered_json failures = ordered_json::array();
  for (const auto& f : res.failures)
    failures.push_back({{"index", f.index}, {"freq_hz", f.freq_hz}, {"message", f.message}});
  write_sidecar(cfg.run.out_dir / "pn.json", cfg,
                {{"points", grid.size()},
                 {"jitter_s", jitter_json(res.pn)},
                 {"cpu_time_s", wall},
                 {"failures", failures}});

  log << "analyze: " << grid.size() << " points";
  if (auto it = res.pn.jitter_s.find("total"); it != res.pn.jitter_s.end())
    log << ", total jitter " << fmt9(it->second * 1e12) << " ps";
  log << '\n';
  if (!res.ok()) {
    log << "analyze: " << res.failures.size() << " grid points failed: " << res.failures.front().message
        << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_sweep(const ParsedConfig& cfg, std::ostream& log) {
  const RunSpec& r = cfg.run;
  if (r.sweep.values.empty()) throw ConfigError("run.sweep.values", "sweep needs at least one value");
  const auto grid = resolve_grid(r.grid, cfg.pll);
  const SweepTable table = sweep(cfg.pll, r.sweep.param, r.sweep.values, grid, r.spot_hz,
                                 analyze_options(r));
  const std::string param = r.sweep.param == SweepParam::P ? "P" : "M";
  char spot[64];
  std::snprintf(spot, sizeof spot, "spot_pn_%gMHz_dbchz", r.spot_hz / 1e6);
  CsvWriter csv(r.out_dir / "sweep.csv", {param, spot, "jitter_ps"});
  ordered_json rows = ordered_json::array();
  for (const auto& row : table.rows) {
    csv.row({std::to_string(row.value), fmt9(row.spot_pn_dbc), fmt9(row.jitter_s * 1e12)});
    rows.push_back({{param, row.value},
                    {"spot_pn_dbchz", finite_or_null(row.spot_pn_dbc)},
                    {"jitter_s", finite_or_null(row.jitter_s)}});
  }
  write_sidecar(r.out_dir / "sweep.json", cfg, {{"spot_hz", r.spot_hz}, {"rows", rows}});
  log << "sweep: " << table.rows.size() << " rows\n";
  return kExitOk;
}

int cmd_simulate(const ParsedConfig& cfg, std::ostream& log) {
  const RunSpec& r = cfg.run;
  const double fs = cfg.pll.f_dco();
  const std::vector<double> series = simulate(make_run(cfg.pll, r.welch, r.seed, r.sources));
  const PsdEstimate total = welch_psd(series, fs, r.welch);
  if (r.write_series) write_series(r.out_dir / "phase.bin", series, fs);

  // Per-source columns from single-source runs sharing the seed.
  std::map<std::string, std::vector<double>> columns;
  const SourceSet singles[3] = {SourceSet::only_ref(), SourceSet::only_dsm(), SourceSet::only_dco()};
  const bool enabled[3] = {r.sources.ref, r.sources.dsm, r.sources.dco};
  for (int s = 0; s < 3; ++s) {
    if (!enabled[s]) continue;
    if (r.sources == singles[s]) {
      columns[kSourceColumns[s]] = total.ssb_dbc();
    } else {
      columns[kSourceColumns[s]] =
          welch_psd(simulate(make_run(cfg.pll, r.welch, r.seed, singles[s])), fs, r.welch).ssb_dbc();
    }
  }

  const std::vector<double> total_db = total.ssb_dbc();
  CsvWriter csv(r.out_dir / "psd.csv", pn_header());
  for (std::size_t k = 1; k < total.freq_hz.size(); ++k) {
    std::vector<std::string> cells{fmt9(total.freq_hz[k])};
    for (const char* name : kSourceColumns) {
      const auto it = columns.find(name);
      cells.push_back(it == columns.end() ? "nan" : fmt9(it->second[k]));
    }
    cells.push_back(fmt9(total_db[k]));
    csv.row(cells);
  }
  write_sidecar(r.out_dir / "psd.json", cfg,
                {{"samples", series.size()}, {"averages", total.averages}, {"sample_rate_hz", fs}});
  log << "simulate: " << series.size() << " samples, " << total.averages << " averages\n";
  return kExitOk;
}

int cmd_compare(const ParsedConfig& cfg, std::ostream& log) {
  const RunSpec& r = cfg.run;
  const auto notches = default_notches(cfg.pll, r.compare.notch_dsm);
  const OracleCheck chk = check_against_oracle(cfg.pll, r.sources, r.welch, r.seed, r.compare.f_lo,
                                               r.compare.f_hi, notches, r.compare.tol,
                                               r.compare.exclusion_bins);
  CsvWriter csv(r.out_dir / "compare.csv", {"freq_hz", "model_dbchz", "sim_dbchz", "delta_db"});
  for (std::size_t i = 0; i < chk.freq_hz.size(); ++i)
    csv.row({fmt9(chk.freq_hz[i]), fmt9(chk.model_db[i]), fmt9(chk.sim_db[i]),
             fmt9(chk.sim_db[i] - chk.model_db[i])});
  const CompareReport& rep = chk.report;
  write_sidecar(r.out_dir / "compare.json", cfg,
                {{"max_abs_db", rep.max_abs_db},
                 {"mean_abs_db", rep.mean_abs_db},
                 {"mean_db", rep.mean_db},
                 {"worst_freq_hz", rep.worst_freq_hz},
                 {"bins", rep.bins},
                 {"pass", rep.pass}});
  log << "compare: mean |d| " << fmt9(rep.mean_abs_db) << " dB, max |d| " << fmt9(rep.max_abs_db)
      << " dB at " << fmt9(rep.worst_freq_hz) << " Hz over " << rep.bins << " bins: "
      << (rep.pass ? "PASS" : "FAIL") << '\n';
  return rep.pass ? kExitOk : kExitComparison;
}

int cmd_bench(const ParsedConfig& cfg, std::ostream& log) {
  const BenchResult b = bench(cfg.pll, cfg.run.bench);
  CsvWriter csv(cfg.run.out_dir / "bench.csv", {"N", "seconds_per_point"});
  ordered_json rows = ordered_json::array();
  for (const auto& row : b.rows) {
    csv.row({std::to_string(row.N), fmt9(row.seconds_per_point)});
    rows.push_back({{"N", row.N}, {"seconds_per_point", row.seconds_per_point}});
    log << "bench: N=" << row.N << " " << fmt9(row.seconds_per_point * 1e3) << " ms/point\n";
  }
  write_sidecar(cfg.run.out_dir / "bench.json", cfg, {{"rows", rows}, {"exponent", b.exponent}});
  log << "bench: fitted exponent " << fmt9(b.exponent) << '\n';
  return kExitOk;
}

void print_error(const char* kind, const std::string& message, int code,
                 const std::string& key_path = {}) {
  ordered_json j{{"error", kind}, {"message", message}, {"exit_code", code}};
  if (!key_path.empty()) j["key_path"] = key_path;
  std::cerr << j.dump() << std::endl;
}

}  // namespace

double fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

BenchResult bench(const PllConfig& base, const BenchSpec& spec) {
  BenchResult out{};
  std::vector<double> ns, ts;
  for (int n : spec.N) {
    PllConfig c = base;
    c.N = n;
    c.M = std::max(1, n - 1);
    c.P = std::min(2, n);
    c.validate();
    // Stay clear of the f_REF multiples, where the model is singular.
    const auto grid = make_grid(0.13 * c.f_ref, 0.47 * c.f_ref, spec.points, Spacing::linear);
    AnalyzeOptions opts;
    opts.threads = 1;
    analyze(c, {grid.front()}, opts);  // warm caches and allocator
    AnalysisResult r = analyze(c, grid, opts);
    std::vector<double> t = r.wall_time_s;
    std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
    out.rows.push_back({n, t[t.size() / 2]});
    ns.push_back(n);
    ts.push_back(t[t.size() / 2]);
  }
  out.exponent = ns.size() >= 2 ? fit_power_law(ns, ts) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

int run(const ParsedConfig& cfg, std::ostream& log) {
  cfg.pll.validate();
  std::error_code ec;
  fs::create_directories(cfg.run.out_dir, ec);
  if (ec || !fs::is_directory(cfg.run.out_dir))
    throw ConfigError("run.out_dir", "cannot create " + cfg.run.out_dir.string());
  switch (cfg.run.command) {
    case Command::analyze: return cmd_analyze(cfg, log);
    case Command::sweep: return cmd_sweep(cfg, log);
    case Command::simulate: return cmd_simulate(cfg, log);
    case Command::compare: return cmd_compare(cfg, log);
    case Command::bench: return cmd_bench(cfg, log);
  }
  return kExitInternal;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Phase-noise analysis of LPTV digital PLLs", "lptv_pn"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);

  std::string config_path, out_dir, grid, sweep_text, sources;
  std::optional<std::uint64_t> seed;
  bool no_decorrelation = false, fractional = false, series = false;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--grid", grid, "fmin,fmax,points,log|lin");
  app.add_option("--sweep", sweep_text, "P=1..18 or M=2,3,5");
  app.add_option("--seed", seed, "simulation seed");
  app.add_flag("--no-decorrelation", no_decorrelation, "disable the decorrelation window");
  app.add_flag("--fractional-resampling", fractional, "use the resampled integral path");
  app.add_option("--sources", sources, "comma-separated subset of ref,dsm,dco");
  app.add_flag("--write-series", series, "simulate: also write phase.bin");

  const char* names[] = {"analyze", "sweep", "simulate", "compare", "bench"};
  const char* help[] = {"model phase noise on a frequency grid", "spot PN and jitter against P or M",
                        "time-domain simulation with Welch PSD",
                        "model against simulation, exit 4 on mismatch",
                        "per-frequency cost against N"};
  for (int i = 0; i < 5; ++i) app.add_subcommand(names[i], help[i])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what(), kExitConfig);
    return kExitConfig;
  }

  try {
    ParsedConfig cfg = config_path.empty() ? parse_config("") : load_config(config_path);
    for (auto* sub : app.get_subcommands()) cfg.run.command = parse_command(sub->get_name());
    if (!out_dir.empty()) cfg.run.out_dir = out_dir;
    if (!grid.empty()) cfg.run.grid = parse_grid(grid);
    if (!sweep_text.empty()) cfg.run.sweep = parse_sweep(sweep_text);
    if (seed) cfg.run.seed = *seed;
    if (!sources.empty()) cfg.run.sources = parse_sources(sources);
    if (no_decorrelation) cfg.pll.use_decorrelation = false;
    if (fractional) cfg.pll.use_fractional_resampling = true;
    if (series) cfg.run.write_series = true;
    if (cfg.run.command == Command::sweep && cfg.run.sweep.param == SweepParam::P)
      for (int p : cfg.run.sweep.values)
        if (p < 1 || p > cfg.pll.N) throw ConfigError("--sweep", "P must satisfy 1 <= P <= N");
    return run(cfg, std::cout);
  } catch (const ConfigError& e) {
    print_error("config", e.what(), kExitConfig, e.key_path());
    return kExitConfig;
  } catch (const ComparisonError& e) {
    print_error("comparison", e.what(), kExitComparison);
    return kExitComparison;
  } catch (const Error& e) {
    print_error("numerical", e.what(), kExitNumerical);
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    print_error("config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const std::exception& e) {
    print_error("internal", e.what(), kExitInternal);
    return kExitInternal;
  }
}

}  // namespace lptv
