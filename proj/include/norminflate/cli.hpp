#pragma once

// Experiment runner behind tools/norminflate: JSON config, dispatch, CSV and SVG output.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "norminflate/spectral_sim.hpp"
#include "norminflate/verify.hpp"

namespace norminflate::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Bad config, bad key or unusable path: exit code 1.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBoundFailed = 2;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"construct", "picard", "simulate", "besov", "sweep", "witness"};
  return c;
}

struct RunConfig {
  std::string command = "construct";
  LacunaryParams params;
  SimConfig sim;
  TGridSpec tgrid;
  std::string output_dir;  // empty: NORMINFLATE_OUTPUT_DIR, then "norminflate_out"
  bool deterministic = false;
  std::uint64_t seed = 20240601;
  unsigned jobs = 1;
  bool plot = false;
  double picard_t = 0.1;
  std::string besov_field = "rho0";  // u0 | rho0 | rho10
  double besov_s = 1.0;
  std::string sweep_kind = "bounds";  // bounds | inflation
  std::vector<int> sweep_r{4, 8, 16, 32, 64};
  int sweep_trials = 100;
  double witness_epsilon = 0.9;
  double witness_s = 0.5;
  double witness_nu = 0.5;
  int witness_r_max = 1 << 14;
};

inline json to_json(const RunConfig& c) {
  const auto& p = c.params;
  return json{
      {"command", c.command},
      {"params", {{"r", p.r}, {"K", p.K}, {"beta", p.beta}, {"nu", p.nu}, {"delta", p.delta}, {"s", p.s}}},
      {"sim", {{"N", c.sim.N}, {"dt", c.sim.dt}, {"T", c.sim.T}, {"snapshot_times", c.sim.snapshot_times}}},
      {"tgrid",
       {{"t_min", c.tgrid.t_min}, {"t_max", c.tgrid.t_max}, {"points", c.tgrid.points},
        {"refine_rounds", c.tgrid.refine_rounds}}},
      {"picard", {{"t", c.picard_t}}},
      {"besov", {{"field", c.besov_field}, {"s", c.besov_s}}},
      {"sweep", {{"kind", c.sweep_kind}, {"r_values", c.sweep_r}, {"trials", c.sweep_trials}}},
      {"witness",
       {{"epsilon", c.witness_epsilon}, {"s", c.witness_s}, {"nu", c.witness_nu}, {"r_max", c.witness_r_max}}},
      {"output_dir", c.output_dir},
      {"deterministic", c.deterministic},
      {"seed", c.seed},
      {"jobs", c.jobs},
      {"plot", c.plot},
  };
}

namespace detail {

inline std::string kind_of(const json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

/// Checks `in` against the shape of `ref` (the defaults): no unknown keys, matching types.
/// Integers are accepted where numbers are expected.
inline void check_shape(const json& in, const json& ref, const std::string& path) {
  const auto where = path.empty() ? std::string("<root>") : path;
  if (ref.is_object()) {
    if (!in.is_object()) throw config_error("config key '" + where + "': expected an object");
    for (const auto& [key, value] : in.items()) {
      const std::string sub = path.empty() ? key : path + "." + key;
      if (!ref.contains(key)) throw config_error("unknown config key '" + sub + "'");
      check_shape(value, ref.at(key), sub);
    }
    return;
  }
  const auto want = kind_of(ref), got = kind_of(in);
  const bool ok = want == got || (want == "number" && got == "integer") ||
                  (want == "array" && in.is_array());
  if (!ok) throw config_error("config key '" + where + "': expected " + want + ", got " + got);
  if (in.is_array()) {
    for (const auto& e : in) {
      if (!e.is_number()) throw config_error("config key '" + where + "': array entries must be numbers");
    }
  }
}

/// Overlays `in` onto `base` key by key.
inline void merge(json& base, const json& in) {
  for (const auto& [key, value] : in.items()) {
    if (value.is_object()) {
      merge(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

template <class T>
T get(const json& j, const char* section, const char* key) {
  const json& v = section ? j.at(section).at(key) : j.at(key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw config_error(std::string("config key '") + (section ? std::string(section) + "." : "") + key +
                       "': value out of range");
  }
}

}  // namespace detail

/// Parses a config over the defaults. Unknown keys and type mismatches are rejected.
inline RunConfig from_json(const json& in) {
  json merged = to_json(RunConfig{});
  detail::check_shape(in, merged, "");
  detail::merge(merged, in);
  RunConfig c;
  using detail::get;
  c.command = get<std::string>(merged, nullptr, "command");
  if (std::find(commands().begin(), commands().end(), c.command) == commands().end()) {
    throw config_error("config key 'command': unknown command '" + c.command + "'");
  }
  c.params.r = get<int>(merged, "params", "r");
  c.params.K = get<std::int64_t>(merged, "params", "K");
  c.params.beta = get<double>(merged, "params", "beta");
  c.params.nu = get<double>(merged, "params", "nu");
  c.params.delta = get<double>(merged, "params", "delta");
  c.params.s = get<double>(merged, "params", "s");
  c.sim.N = get<int>(merged, "sim", "N");
  c.sim.dt = get<double>(merged, "sim", "dt");
  c.sim.T = get<double>(merged, "sim", "T");
  c.sim.snapshot_times = get<std::vector<double>>(merged, "sim", "snapshot_times");
  c.tgrid.t_min = get<double>(merged, "tgrid", "t_min");
  c.tgrid.t_max = get<double>(merged, "tgrid", "t_max");
  c.tgrid.points = get<int>(merged, "tgrid", "points");
  c.tgrid.refine_rounds = get<int>(merged, "tgrid", "refine_rounds");
  c.picard_t = get<double>(merged, "picard", "t");
  c.besov_field = get<std::string>(merged, "besov", "field");
  c.besov_s = get<double>(merged, "besov", "s");
  c.sweep_kind = get<std::string>(merged, "sweep", "kind");
  c.sweep_r = get<std::vector<int>>(merged, "sweep", "r_values");
  c.sweep_trials = get<int>(merged, "sweep", "trials");
  c.witness_epsilon = get<double>(merged, "witness", "epsilon");
  c.witness_s = get<double>(merged, "witness", "s");
  c.witness_nu = get<double>(merged, "witness", "nu");
  c.witness_r_max = get<int>(merged, "witness", "r_max");
  c.output_dir = get<std::string>(merged, nullptr, "output_dir");
  c.deterministic = get<bool>(merged, nullptr, "deterministic");
  c.seed = get<std::uint64_t>(merged, nullptr, "seed");
  c.jobs = get<unsigned>(merged, nullptr, "jobs");
  c.plot = get<bool>(merged, nullptr, "plot");
  c.sim.deterministic = c.deterministic;

  if (c.besov_field != "u0" && c.besov_field != "rho0" && c.besov_field != "rho10") {
    throw config_error("config key 'besov.field': expected u0, rho0 or rho10, got '" + c.besov_field + "'");
  }
  if (c.sweep_kind != "bounds" && c.sweep_kind != "inflation") {
    throw config_error("config key 'sweep.kind': expected bounds or inflation, got '" + c.sweep_kind + "'");
  }
  if (c.jobs < 1) throw config_error("config key 'jobs': must be >= 1");
  if (c.sweep_trials < 0) throw config_error("config key 'sweep.trials': must be >= 0");
  return c;
}

/// Applies one KEY=VALUE override, KEY a dotted path such as params.beta.
/// VALUE is read as JSON when it parses, else as a bare string.
inline void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw config_error("--set expects KEY=VALUE, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  const json defaults = to_json(RunConfig{});
  const json* ref = &defaults;
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!ref->is_object() || !ref->contains(part)) throw config_error("unknown config key '" + key + "'");
    ref = &ref->at(part);
    if (dot == std::string::npos) {
      if (ref->is_object()) throw config_error("config key '" + key + "' is a section, not a value");
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

inline json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error("config file '" + path.string() + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

/// Comment line with the kind and seed, header row, then rows; LF endings.
inline void emit_csv(std::ostream& os, const SweepResult& result, std::uint64_t seed) {
  os << "# kind=" << result.kind << " seed=" << seed << '\n';
  for (std::size_t i = 0; i < result.columns.size(); ++i) os << (i ? "," : "") << result.columns[i];
  os << '\n';
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
}

inline void emit_csv(const fs::path& path, const SweepResult& result, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write '" + path.string() + "' (output_dir)");
  emit_csv(out, result, seed);
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title;
  std::string xlabel, ylabel;
  bool logx = false, logy = false;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

/// Standalone SVG line chart. Points that cannot be shown on a log axis are skipped.
inline void emit_plot(std::ostream& os, const std::vector<Series>& series, const PlotSpec& spec) {
  constexpr double W = 640, H = 420, L = 70, R = 160, Tm = 40, B = 50;
  auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.logx || x > 0) && (!spec.logy || y > 0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pw = W - L - R, ph = H - Tm - B;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return Tm + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << detail::xml_escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4, fy = y0 + (y1 - y0) * i / 4;
    const double gx = L + pw * i / 4, gy = Tm + ph - ph * i / 4;
    os << "<line x1=\"" << detail::fmt(gx) << "\" y1=\"" << Tm + ph << "\" x2=\"" << detail::fmt(gx)
       << "\" y2=\"" << Tm + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << detail::fmt(gx) << "\" y=\"" << Tm + ph + 18 << "\" text-anchor=\"middle\">"
       << detail::tick_label(spec.logx ? std::pow(10.0, fx) : fx) << "</text>\n";
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << detail::fmt(gy) << "\" x2=\"" << L << "\" y2=\""
       << detail::fmt(gy) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << detail::fmt(gy + 4) << "\" text-anchor=\"end\">"
       << detail::tick_label(spec.logy ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  os << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
     << detail::xml_escape(spec.xlabel + (spec.logx ? " (log)" : "")) << "</text>\n";
  os << "<text transform=\"translate(16 " << Tm + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << detail::xml_escape(spec.ylabel + (spec.logy ? " (log)" : "")) << "</text>\n";
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % 10];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      pts += detail::fmt(px(s.x[i])) + "," + detail::fmt(py(s.y[i])) + " ";
    }
    if (!pts.empty()) {
      pts.pop_back();
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
         << "\"/>\n";
    }
    const double ly = Tm + 12 + 14.0 * static_cast<double>(k);
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 28 << "\" y2=\""
       << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 32 << "\" y=\"" << ly << "\">" << detail::xml_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
}

inline void emit_plot(const fs::path& path, const std::vector<Series>& series, const PlotSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write '" + path.string() + "' (output_dir)");
  emit_plot(out, series, spec);
}

// ---------------------------------------------------------------------------
// Commands

struct RunContext {
  RunConfig config;
  fs::path out;
  std::ostream& log;
  std::ostream& err;
  std::vector<fs::path> written;
};

namespace detail {

inline std::string summary_line(const BoundReport& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS " : "FAIL ") << r.name << " r=" << r.params.r;
  if (std::isfinite(r.t)) os << " t=" << format_double(r.t);
  os << " lhs=" << format_double(r.lhs) << " C=" << format_double(r.implied_constant);
  return os.str();
}

inline void write(RunContext& ctx, const std::string& file, const SweepResult& res) {
  emit_csv(ctx.out / file, res, ctx.config.seed);
  ctx.written.push_back(ctx.out / file);
}

inline bool report_all(RunContext& ctx, const std::vector<BoundReport>& reps) {
  bool ok = true;
  for (const auto& r : reps) {
    ctx.log << summary_line(r) << '\n';
    ok = ok && r.pass;
  }
  return ok;
}

inline int run_construct(RunContext& ctx) {
  const auto& p = ctx.config.params;
  SweepResult freq;
  freq.kind = "frequencies";
  freq.columns = {"i", "kprime_x", "kprime_y", "kprime_z", "k_x", "k_y", "k_z", "v_x", "v_y", "v_z", "amplitude"};
  for (const auto& w : make_frequencies(p)) {
    std::vector<Cell> row{std::int64_t{w.index}};
    for (int c = 0; c < 3; ++c) row.emplace_back(to_string(w.kprime[c]));
    for (int c = 0; c < 3; ++c) row.emplace_back(to_string(w.kfull[c]));
    for (int c = 0; c < 3; ++c) row.emplace_back(w.v[static_cast<std::size_t>(c)]);
    row.emplace_back(p.amplitude());
    freq.rows.push_back(std::move(row));
  }
  write(ctx, "frequencies.csv", freq);
  const auto checks = verify_construction(p);
  write(ctx, "construction_checks.csv", report_table("construction", checks));
  return report_all(ctx, checks) ? kExitOk : kExitBoundFailed;
}

inline int run_picard(RunContext& ctx) {
  const auto& c = ctx.config;
  c.params.validate();
  const auto st = first_iterates(c.params, c.picard_t);
  SweepResult modes;
  modes.kind = "picard_modes";
  modes.columns = {"part", "kx", "ky", "kz", "cos", "sin"};
  auto add = [&](const std::string& part, const ScalarField& f) {
    for (const auto& [k, m] : f.modes()) {
      modes.rows.push_back({part, to_string(k[0]), to_string(k[1]), to_string(k[2]), m.cos_coeff, m.sin_coeff});
    }
  };
  add("theta", st.theta);
  add("rho10", st.rho1_parts.rho10);
  add("rho11", st.rho1_parts.rho11);
  add("rho12", st.rho1_parts.rho12);
  write(ctx, "picard_modes.csv", modes);
  const auto bounds = check_rho1_bounds(c.params, {c.picard_t});
  write(ctx, "picard_bounds.csv", bounds);
  ctx.log << "reconciliation_error=" << format_double(st.reconciliation_error) << '\n';
  return report_all(ctx, bounds.reports) ? kExitOk : kExitBoundFailed;
}

inline int run_simulate(RunContext& ctx) {
  const auto& c = ctx.config;
  c.sim.validate();
  const auto verdict = validate_resolution(c.params, c.sim.N);
  if (!verdict.ok) {
    throw config_error("config key 'sim.N': N=" + std::to_string(c.sim.N) + " cannot resolve the first interactions (need N >= " +
                       std::to_string(verdict.minimal_N) + ")");
  }
  const auto data = make_initial_data(c.params);
  const auto res = simulate(data.u0, data.rho0, c.sim);
  SweepResult table;
  table.kind = "residuals";
  table.columns = {"t", "y_linf", "z_linf", "rho1_linf", "u1_linf", "rho10_amplitude", "bound_M"};
  for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
    const auto& snap = res.snapshots[i];
    for (const auto& [name, g] : {std::pair<std::string, const GridField*>{"u", &snap.u}, {"rho", &snap.rho}}) {
      const auto file = "snapshot_" + name + "_" + std::to_string(i) + ".csv";
      std::ofstream out(ctx.out / file, std::ios::binary);
      if (!out) throw config_error("cannot write '" + (ctx.out / file).string() + "' (output_dir)");
      write_snapshot_csv(out, *g, snap.t, name);
      ctx.written.push_back(ctx.out / file);
    }
    if (snap.t <= 1.0) {
      const auto rep = residual_decompose(snap, first_iterates(c.params, snap.t), c.params);
      table.rows.push_back({snap.t, rep.y_linf, rep.z_linf, rep.picard_linf, rep.u1_linf, rep.rho10_amplitude, rep.bound_M});
      ctx.log << "t=" << format_double(snap.t) << " |y|=" << format_double(rep.y_linf)
              << " |z|=" << format_double(rep.z_linf) << " rho10=" << format_double(rep.rho10_amplitude) << '\n';
    }
  }
  write(ctx, "residuals.csv", table);
  const auto& d = res.diagnostics;
  ctx.log << "steps=" << d.steps << " max_divergence=" << format_double(d.max_divergence)
          << " rho_mean_drift=" << format_double(d.rho_mean_drift) << '\n';
  return kExitOk;
}

inline int run_besov(RunContext& ctx) {
  const auto& c = ctx.config;
  c.tgrid.validate();
  const auto data = make_initial_data(c.params);
  BesovEstimate est;
  if (c.besov_field == "u0") {
    est = besov_norm(data.u0, c.besov_s, c.tgrid);
  } else if (c.besov_field == "rho0") {
    est = besov_norm(data.rho0, c.besov_s, c.tgrid);
  } else {
    est = besov_norm(rho1_parts_closed_form(c.params, c.picard_t).rho10, c.besov_s, c.tgrid);
  }
  SweepResult table;
  table.kind = "besov";
  table.columns = {"field", "r", "K", "beta", "s", "value", "upper", "argmax_t", "at_endpoint", "resolved"};
  table.rows.push_back({c.besov_field, std::int64_t{c.params.r}, std::int64_t{c.params.K}, c.params.beta, est.s,
                        est.value, est.upper, est.argmax_t, std::int64_t{est.at_endpoint},
                        std::int64_t{est.resolved}});
  write(ctx, "besov.csv", table);
  ctx.log << c.besov_field << " B^-" << format_double(c.besov_s) << " norm=" << format_double(est.value)
          << " argmax_t=" << format_double(est.argmax_t) << (est.at_endpoint ? " (at endpoint)" : "") << '\n';
  return kExitOk;
}

inline int run_sweep(RunContext& ctx) {
  const auto& c = ctx.config;
  if (c.sweep_r.empty()) throw config_error("config key 'sweep.r_values': empty");
  if (c.sweep_kind == "inflation") {
    InflationOptions o;
    o.nu = c.params.nu;
    o.delta = c.params.delta;
    o.s = c.params.s;
    const auto res = inflation_experiment(c.sweep_r, o, c.jobs);
    write(ctx, "inflation.csv", res);
    for (const auto& row : res.rows) {
      ctx.log << "r=" << std::get<std::int64_t>(row[0]) << " rho10_besov=" << format_cell(row[9])
              << " net_lower_bound=" << format_cell(row[11]) << '\n';
    }
    ctx.log << "slope=" << format_double(res.slope) << " (1-2beta = nu = " << format_double(c.params.nu) << ")\n";
    if (c.plot) {
      Series s{"rho10 B^-s", {}, {}};
      for (const auto& row : res.rows) {
        s.x.push_back(static_cast<double>(std::get<std::int64_t>(row[0])));
        s.y.push_back(std::get<double>(row[9]));
      }
      emit_plot(ctx.out / "inflation.svg", {s}, {"inflation of rho_{1,0}(T)", "r", "B^-s norm", true, true});
      ctx.written.push_back(ctx.out / "inflation.svg");
    }
    return kExitOk;
  }
  // bounds: the remainder estimates behind these lemmas need the constraint
  c.params.require_proposition_constraint();
  for (int r : c.sweep_r) {
    LacunaryParams p = c.params;
    p.r = r;
    p.validate();
  }
  auto res = bound_sweep(c.sweep_r, c.params, c.jobs);
  const auto probes = operator_norm_probes(c.sweep_trials, c.seed, c.jobs);
  auto all = res.reports;
  all.insert(all.end(), probes.begin(), probes.end());
  write(ctx, "bounds.csv", res);
  write(ctx, "operator_probes.csv", report_table("operator_probes", probes));
  const auto spread = constant_spread(res.reports);
  SweepResult st;
  st.kind = "constant_spread";
  st.columns = {"name", "min", "max", "ratio", "pass"};
  for (const auto& s : spread) st.rows.push_back({s.name, s.min, s.max, s.ratio, std::int64_t{s.pass}});
  write(ctx, "constant_spread.csv", st);
  bool ok = report_all(ctx, all);
  for (const auto& s : spread) {
    ctx.log << (s.pass ? "PASS " : "FAIL ") << "spread " << s.name << " ratio=" << format_double(s.ratio) << '\n';
    ok = ok && s.pass;
  }
  if (c.plot) {
    std::map<std::string, Series> per_name;
    std::map<std::pair<std::string, int>, double> worst;
    for (const auto& rep : res.reports) {
      auto [it, fresh] = worst.try_emplace({rep.name, rep.params.r}, rep.implied_constant);
      if (!fresh) {
        it->second = rep.lower_bound ? std::min(it->second, rep.implied_constant)
                                     : std::max(it->second, rep.implied_constant);
      }
    }
    for (const auto& [key, v] : worst) {
      auto& s = per_name[key.first];
      s.label = key.first;
      s.x.push_back(key.second);
      s.y.push_back(v);
    }
    std::vector<Series> series;
    for (auto& [name, s] : per_name) series.push_back(std::move(s));
    emit_plot(ctx.out / "constants.svg", series, {"implied constants across r", "r", "constant", true, true});
    ctx.written.push_back(ctx.out / "constants.svg");
  }
  return ok ? kExitOk : kExitBoundFailed;
}

inline int run_witness(RunContext& ctx) {
  const auto& c = ctx.config;
  WitnessOptions o;
  o.nu = c.witness_nu;
  o.delta = c.params.delta;
  o.r_max = c.witness_r_max;
  const auto w = theorem_witness(c.witness_epsilon, c.witness_s, o);
  SweepResult table;
  table.kind = "witness";
  table.columns = {"found", "epsilon", "s", "r", "K", "beta", "nu", "T", "norm_u0_B1", "norm_rho0_B1",
                   "rho10_besov", "net_lower_bound", "margin_data", "margin_lower", "margin_time", "message"};
  const auto& row = w.row;
  table.rows.push_back({std::int64_t{w.found}, w.epsilon, w.s, std::int64_t{row.params.r}, std::int64_t{row.params.K},
                        row.params.beta, row.params.nu, row.T, row.norm_u0, row.norm_rho0, row.rho10_besov,
                        row.net_lower_bound, w.margin_data, w.margin_lower, w.margin_time, w.message});
  write(ctx, "witness.csv", table);
  ctx.log << (w.found ? "FOUND " : "NOT FOUND ") << w.message << " T=" << format_double(row.T)
          << " lower=" << format_double(row.net_lower_bound) << " 1/eps=" << format_double(1.0 / w.epsilon) << '\n';
  return w.found ? kExitOk : kExitBoundFailed;
}

}  // namespace detail

inline fs::path resolve_output_dir(const RunConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("NORMINFLATE_OUTPUT_DIR"); env && *env) return env;
  return "norminflate_out";
}

/// Runs a resolved config; returns the exit code. Errors go to `err` with the offending key or parameter.
inline int run(RunConfig config, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  try {
    const fs::path out = resolve_output_dir(config);
    config.output_dir = out.string();
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw config_error("output_dir '" + out.string() + "' is not writable");
    RunContext ctx{config, out, log, err, {}};
    {
      std::ofstream rc(out / "resolved_config.json", std::ios::binary);
      if (!rc) throw config_error("cannot write '" + (out / "resolved_config.json").string() + "' (output_dir)");
      rc << to_json(config).dump(2) << '\n';
    }
    const auto& cmd = config.command;
    if (cmd == "construct") return detail::run_construct(ctx);
    if (cmd == "picard") return detail::run_picard(ctx);
    if (cmd == "simulate") return detail::run_simulate(ctx);
    if (cmd == "besov") return detail::run_besov(ctx);
    if (cmd == "sweep") return detail::run_sweep(ctx);
    return detail::run_witness(ctx);
  } catch (const config_error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const parameter_error& e) {
    err << "error: params: " << e.what() << '\n';
  } catch (const resolution_error& e) {
    err << "error: sim.N: " << e.what() << '\n';
  } catch (const simulation_error& e) {
    err << "error: sim.dt: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace norminflate::cli
