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

#include "lptv/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lptv/errors.hpp"

namespace lptv {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// One JSON object; tracks which keys were consumed so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* find(const std::string& key) {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  bool get(const std::string& key, double& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_number()) throw ConfigError(path(key), "expected a number");
    out = v->get<double>();
    return true;
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  bool get(const std::string& key, Int& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v->is_number_unsigned()) {
        out = static_cast<Int>(v->get<std::uint64_t>());
        return true;
      }
      throw ConfigError(path(key), "expected a non-negative integer");
    } else {
      out = static_cast<Int>(v->get<std::int64_t>());
    }
    return true;
  }

  bool get(const std::string& key, bool& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
    out = v->get<bool>();
    return true;
  }

  bool get(const std::string& key, std::string& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_string()) throw ConfigError(path(key), "expected a string");
    out = v->get<std::string>();
    return true;
  }

  bool get(const std::string& key, std::vector<int>& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_array()) throw ConfigError(path(key), "expected an array of integers");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number_integer())
        throw ConfigError(path(key) + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back((*v)[i].get<int>());
    }
    return true;
  }

  std::optional<Section> child(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return Section(*v, path(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!known_.contains(key)) throw ConfigError(join(path_, key), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

Spacing parse_spacing(const std::string& s, const std::string& path) {
  if (s == "log") return Spacing::log;
  if (s == "lin" || s == "linear") return Spacing::linear;
  throw ConfigError(path, "spacing must be log or lin");
}

SweepParam parse_param(const std::string& s, const std::string& path) {
  if (s == "P") return SweepParam::P;
  if (s == "M") return SweepParam::M;
  throw ConfigError(path, "sweep parameter must be P or M");
}

SourceSet sources_from_names(const std::vector<std::string>& names, const std::string& path) {
  SourceSet s{false, false, false};
  for (const auto& n : names) {
    if (n == "ref") s.ref = true;
    else if (n == "dsm") s.dsm = true;
    else if (n == "dco") s.dco = true;
    else throw ConfigError(path, "unknown source '" + n + "' (expected ref, dsm, dco)");
  }
  if (!s.ref && !s.dsm && !s.dco) throw ConfigError(path, "at least one source is required");
  return s;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, const std::string& path) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty())
    throw ConfigError(path, "cannot parse '" + std::string(s) + "' as a number");
  return value;
}

void parse_pll(Section& s, PllConfig& c) {
  s.get("N", c.N);
  s.get("M", c.M);
  s.get("P", c.P);
  s.get("f_ref", c.f_ref);
  double dt_res = 0.0;
  const bool has_kpd = s.get("K_PD", c.K_PD);
  if (s.get("tdc_resolution_s", dt_res)) {
    if (has_kpd) throw ConfigError(s.path("tdc_resolution_s"), "give either K_PD or tdc_resolution_s");
    if (!(dt_res > 0.0)) throw ConfigError(s.path("tdc_resolution_s"), "must be positive");
    c.K_PD = kpd_from_resolution(c.f_ref, dt_res);
  }
  s.get("K_P0", c.K_P0);
  if (!s.get("K_I", c.K_I)) c.K_I = c.K_P0 / 32.0;
  s.get("K_DCO", c.K_DCO);
  s.get("dco_noise_variance", c.dco_noise_variance);
  s.get("use_decorrelation", c.use_decorrelation);
  s.get("use_fractional_resampling", c.use_fractional_resampling);
  s.finish();
}

void parse_run(Section& s, RunSpec& r) {
  std::string text;
  if (s.get("command", text)) {
    try {
      r.command = parse_command(text);
    } catch (const ConfigError& e) {
      throw ConfigError(s.path("command"), e.what());
    }
  }
  if (s.get("out_dir", text)) r.out_dir = text;
  s.get("seed", r.seed);
  s.get("spot_hz", r.spot_hz);
  s.get("write_series", r.write_series);
  if (const json* v = s.find("sources")) {
    if (!v->is_array()) throw ConfigError(s.path("sources"), "expected an array of names");
    std::vector<std::string> names;
    for (const auto& n : *v) {
      if (!n.is_string()) throw ConfigError(s.path("sources"), "expected source names");
      names.push_back(n.get<std::string>());
    }
    r.sources = sources_from_names(names, s.path("sources"));
  }
  if (auto g = s.child("grid")) {
    g->get("f_min", r.grid.f_min);
    g->get("f_max", r.grid.f_max);
    g->get("points", r.grid.points);
    if (g->get("spacing", text)) r.grid.spacing = parse_spacing(text, g->path("spacing"));
    g->finish();
    if (r.grid.points < 2) throw ConfigError(g->path("points"), "must be >= 2");
    if (!(r.grid.f_min > 0.0)) throw ConfigError(g->path("f_min"), "must be positive");
    if (r.grid.f_max != 0.0 && !(r.grid.f_max > r.grid.f_min))
      throw ConfigError(g->path("f_max"), "must exceed f_min (or be 0 for f_DCO/2)");
  }
  if (auto w = s.child("sweep")) {
    if (w->get("param", text)) r.sweep.param = parse_param(text, w->path("param"));
    w->get("values", r.sweep.values);
    w->finish();
  }
  if (auto b = s.child("jitter_band")) {
    b->get("f_lo", r.band.f_lo);
    b->get("f_hi", r.band.f_hi);
    b->finish();
    if (!(r.band.f_lo > 0.0)) throw ConfigError(b->path("f_lo"), "must be positive");
    if (r.band.f_hi != 0.0 && !(r.band.f_hi > r.band.f_lo))
      throw ConfigError(b->path("f_hi"), "must exceed f_lo (or be 0 for f_DCO/2)");
  }
  if (auto b = s.child("bench")) {
    b->get("N", r.bench.N);
    b->get("points", r.bench.points);
    b->finish();
    if (r.bench.N.empty()) throw ConfigError(b->path("N"), "must not be empty");
    if (r.bench.points < 1) throw ConfigError(b->path("points"), "must be >= 1");
  }
  s.finish();
}

void parse_sim(Section& s, WelchConfig& w) {
  s.get("segment_length", w.segment_length);
  s.get("overlap", w.overlap);
  s.get("averages", w.averages);
  std::string text;
  if (s.get("window", text)) {
    if (text == "hann") w.window = WindowShape::hann;
    else if (text == "rectangular") w.window = WindowShape::rectangular;
    else throw ConfigError(s.path("window"), "must be hann or rectangular");
  }
  s.finish();
  try {
    w.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sim", e.what());
  }
}

void parse_compare(Section& s, CompareSettings& c) {
  s.get("f_lo", c.f_lo);
  s.get("f_hi", c.f_hi);
  s.get("mean_abs_db", c.tol.mean_abs_db);
  s.get("max_abs_db", c.tol.max_abs_db);
  s.get("exclusion_bins", c.exclusion_bins);
  s.get("notch_dsm", c.notch_dsm);
  s.finish();
  if (!(c.f_lo > 0.0 && c.f_hi > c.f_lo)) throw ConfigError("compare.f_hi", "band must satisfy 0 < f_lo < f_hi");
  if (c.exclusion_bins < 0) throw ConfigError("compare.exclusion_bins", "must be >= 0");
}

}  // namespace

const char* to_string(Command c) {
  switch (c) {
    case Command::analyze: return "analyze";
    case Command::sweep: return "sweep";
    case Command::simulate: return "simulate";
    case Command::compare: return "compare";
    case Command::bench: return "bench";
  }
  return "?";
}

Command parse_command(std::string_view name) {
  for (Command c : {Command::analyze, Command::sweep, Command::simulate, Command::compare,
                    Command::bench})
    if (name == to_string(c)) return c;
  throw ConfigError("run.command", "unknown command '" + std::string(name) + "'");
}

bool RunSpec::operator==(const RunSpec& o) const {
  return command == o.command && out_dir == o.out_dir && grid == o.grid && sweep == o.sweep &&
         seed == o.seed && sources == o.sources && band.f_lo == o.band.f_lo &&
         band.f_hi == o.band.f_hi && spot_hz == o.spot_hz &&
         welch.segment_length == o.welch.segment_length && welch.overlap == o.welch.overlap &&
         welch.window == o.welch.window && welch.averages == o.welch.averages &&
         compare == o.compare && bench == o.bench && write_series == o.write_series;
}

ParsedConfig parse_config(std::string_view text) {
  json doc;
  const bool blank = text.find_first_not_of(" \t\r\n") == std::string_view::npos;
  if (!blank) {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
  } else {
    doc = json::object();
  }

  ParsedConfig out;
  Section root(doc, "");
  if (auto s = root.child("pll")) {
    parse_pll(*s, out.pll);
  } else {
    out.pll.K_I = out.pll.K_P0 / 32.0;
  }
  if (auto s = root.child("run")) parse_run(*s, out.run);
  if (auto s = root.child("sim")) parse_sim(*s, out.run.welch);
  if (auto s = root.child("compare")) parse_compare(*s, out.run.compare);
  root.finish();

  out.pll.validate();
  if (out.run.sweep.param == SweepParam::P)
    for (std::size_t i = 0; i < out.run.sweep.values.size(); ++i)
      if (int p = out.run.sweep.values[i]; p < 1 || p > out.pll.N)
        throw ConfigError("run.sweep.values[" + std::to_string(i) + "]", "P must satisfy 1 <= P <= N");
  return out;
}

ParsedConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("--config", "cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  ParsedConfig cfg = parse_config(ss.str());
  cfg.run.config_path = path;
  return cfg;
}

std::string render_config(const ParsedConfig& cfg) {
  const PllConfig& p = cfg.pll;
  const RunSpec& r = cfg.run;
  ordered_json doc;
  doc["pll"] = {{"N", p.N},
                {"M", p.M},
                {"P", p.P},
                {"f_ref", p.f_ref},
                {"K_PD", p.K_PD},
                {"K_P0", p.K_P0},
                {"K_I", p.K_I},
                {"K_DCO", p.K_DCO},
                {"dco_noise_variance", p.dco_noise_variance},
                {"use_decorrelation", p.use_decorrelation},
                {"use_fractional_resampling", p.use_fractional_resampling}};
  doc["run"] = {
      {"command", to_string(r.command)},
      {"out_dir", r.out_dir.string()},
      {"seed", r.seed},
      {"sources", r.sources.names()},
      {"spot_hz", r.spot_hz},
      {"write_series", r.write_series},
      {"grid",
       {{"f_min", r.grid.f_min},
        {"f_max", r.grid.f_max},
        {"points", r.grid.points},
        {"spacing", r.grid.spacing == Spacing::log ? "log" : "lin"}}},
      {"sweep", {{"param", r.sweep.param == SweepParam::P ? "P" : "M"}, {"values", r.sweep.values}}},
      {"jitter_band", {{"f_lo", r.band.f_lo}, {"f_hi", r.band.f_hi}}},
      {"bench", {{"N", r.bench.N}, {"points", r.bench.points}}}};
  doc["sim"] = {{"segment_length", r.welch.segment_length},
                {"overlap", r.welch.overlap},
                {"window", r.welch.window == WindowShape::hann ? "hann" : "rectangular"},
                {"averages", r.welch.averages}};
  doc["compare"] = {{"f_lo", r.compare.f_lo},
                    {"f_hi", r.compare.f_hi},
                    {"mean_abs_db", r.compare.tol.mean_abs_db},
                    {"max_abs_db", r.compare.tol.max_abs_db},
                    {"exclusion_bins", r.compare.exclusion_bins},
                    {"notch_dsm", r.compare.notch_dsm}};
  return doc.dump(2) + "\n";
}

GridSpec parse_grid(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 4) throw ConfigError("--grid", "expected fmin,fmax,points,log|lin");
  GridSpec g;
  g.f_min = parse_number<double>(parts[0], "--grid");
  g.f_max = parse_number<double>(parts[1], "--grid");
  g.points = parse_number<std::size_t>(parts[2], "--grid");
  g.spacing = parse_spacing(parts[3], "--grid");
  if (!(g.f_min > 0.0 && g.f_max > g.f_min)) throw ConfigError("--grid", "need 0 < fmin < fmax");
  if (g.points < 2) throw ConfigError("--grid", "need at least 2 points");
  return g;
}

SweepSpec parse_sweep(std::string_view text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("--sweep", "expected param=values");
  SweepSpec s;
  s.param = parse_param(std::string(text.substr(0, eq)), "--sweep");
  const std::string_view values = text.substr(eq + 1);
  if (const std::size_t dots = values.find(".."); dots != std::string_view::npos) {
    const int lo = parse_number<int>(values.substr(0, dots), "--sweep");
    const int hi = parse_number<int>(values.substr(dots + 2), "--sweep");
    if (hi < lo) throw ConfigError("--sweep", "range must be ascending");
    for (int v = lo; v <= hi; ++v) s.values.push_back(v);
  } else {
    for (const auto& v : split(values, ',')) s.values.push_back(parse_number<int>(v, "--sweep"));
  }
  return s;
}

SourceSet parse_sources(std::string_view text) {
  return sources_from_names(split(text, ','), "--sources");
}

std::vector<double> resolve_grid(const GridSpec& grid, const PllConfig& cfg) {
  const double nyquist = 0.5 * cfg.f_dco();
  const double f_max = grid.f_max == 0.0 ? nyquist * (1.0 - 1e-7) : grid.f_max;
  if (f_max > nyquist) throw ConfigError("run.grid.f_max", "must not exceed f_DCO/2");
  if (!(grid.f_min < f_max)) throw ConfigError("run.grid.f_min", "must be below f_max");
  return make_grid(grid.f_min, f_max, grid.points, grid.spacing);
}

}  // namespace lptv
