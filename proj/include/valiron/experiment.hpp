#pragma once

// Runs the pipeline a config selects and writes `<dir>/<command>.csv` plus
// `<dir>/summary.txt`.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "valiron/config.hpp"
#include "valiron/dynamics.hpp"
#include "valiron/errors.hpp"
#include "valiron/limits.hpp"
#include "valiron/maps.hpp"
#include "valiron/renormalization.hpp"

namespace valiron {

inline constexpr const char* output_dir_env = "VALIRON_OUT_DIR";

/// Exit statuses of run_command and the CLI.
enum ExitStatus : int { exit_ok = 0, exit_error = 1, exit_warning = 2 };

struct RunOverrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

struct RunOutcome {
  int status = exit_ok;
  std::filesystem::path dir;
  std::vector<std::filesystem::path> files;
  std::string summary;
};

/// Reads a config file; relative `points` paths are resolved against its directory.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str());
  if (cfg.run.points && std::filesystem::path(*cfg.run.points).is_relative()) {
    cfg.run.points = (path.parent_path() / *cfg.run.points).lexically_normal().string();
  }
  return cfg;
}

/// --out, then [output] dir, then the environment, then ./valiron_out.
inline std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const RunOverrides& o = {}) {
  if (o.out_dir) return *o.out_dir;
  if (cfg.output.dir) return *cfg.output.dir;
  if (const char* env = std::getenv(output_dir_env); env != nullptr && *env != '\0') return env;
  return "valiron_out";
}

/// Whitespace- or comma-separated `re_z im_z re_w1 im_w1 ...` rows; `#` starts a comment.
inline std::vector<SiegelPoint> read_points_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read points file " + path.string());
  std::vector<SiegelPoint> pts;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::replace(raw.begin(), raw.end(), ',', ' ');
    std::istringstream row(raw);
    std::vector<double> v;
    std::string tok;
    while (row >> tok) {
      auto d = detail::to_double(tok);
      if (!d) throw Error(ErrorKind::config, path.string() + " line " + std::to_string(line) + ": bad number '" + tok + "'");
      v.push_back(*d);
    }
    if (v.empty()) continue;
    if (v.size() % 2 != 0) {
      throw Error(ErrorKind::config, path.string() + " line " + std::to_string(line) + ": odd number of columns");
    }
    CVector w;
    for (std::size_t j = 2; j < v.size(); j += 2) w.emplace_back(v[j], v[j + 1]);
    try {
      pts.emplace_back(Complex(v[0], v[1]), std::move(w));
    } catch (const Error& e) {
      throw Error(ErrorKind::config, path.string() + " line " + std::to_string(line) + ": " + e.what());
    }
    if (pts.back().dimension() != pts.front().dimension()) {
      throw Error(ErrorKind::config, path.string() + " line " + std::to_string(line) + ": mixed dimensions");
    }
  }
  return pts;
}

namespace detail {

class CsvTable {
 public:
  void meta(const std::string& key, const std::string& value) { text_ += "# " + key + " = " + value + "\n"; }
  void header(const std::vector<std::string>& cols) { row(cols); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) text_ += (k ? "," : "") + cells[k];
    text_ += "\n";
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class Summary {
 public:
  void put(const std::string& key, const std::string& value) { text_ += key + " = " + value + "\n"; }
  void put(const std::string& key, double v) { put(key, format_double(v)); }
  void flag(const std::string& key, bool v) { put(key, v ? "true" : "false"); }
  void section(const std::string& name) { text_ += (text_.empty() ? "" : "\n") + std::string("[") + name + "]\n"; }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for " + p.string());
}

struct Context {
  const ExperimentConfig& cfg;
  SiegelMap map;
  std::uint64_t seed;
  bool verbose;
  std::filesystem::path dir;
  Summary summary;
  std::vector<std::filesystem::path> files;
  int status = exit_ok;

  CsvTable table(const std::string& command) const {
    CsvTable t;
    t.meta("map", describe_map(cfg.map));
    t.meta("command", command);
    t.meta("seed", std::to_string(seed));
    return t;
  }
  void save(const std::string& command, const CsvTable& t) {
    const auto p = dir / (command + ".csv");
    write_file(p, t.text());
    files.push_back(p);
  }
};

inline void orbit_rows(CsvTable& t, const std::vector<SiegelPoint>& pts) {
  t.header({"n", "x_n", "y_n", "w_norm_sq", "height"});
  for (std::size_t n = 0; n < pts.size(); ++n) {
    const SiegelPoint& p = pts[n];
    t.row({std::to_string(n), format_double(p.x()), format_double(p.y()), format_double(p.w_norm_sq()),
           format_double(p.height())});
  }
}

inline void put_classification(Summary& s, const SequenceClassification& c) {
  s.flag("special", c.special);
  s.put("c_witness", c.c_witness);
  s.put("c_special", c.c_special ? format_double(*c.c_special) : std::string("absent"));
  s.flag("restricted", c.restricted);
  s.put("t_witness", c.t_witness);
  s.put("koranyi", c.koranyi ? format_double(*c.koranyi) : std::string("absent"));
  s.put("koranyi_required", c.koranyi_required);
  s.put("bound_a", c.bound_a);
  s.put("bound_t", c.bound_t);
  s.flag("bounds_hold", c.bounds_hold);
  s.flag("ambiguous", c.ambiguous);
  s.flag("routes_agree", c.routes_agree());
  for (const auto& n : c.notes) s.put("note", n);
}

inline void run_orbit(Context& ctx) {
  const DynamicsSummary d = summarize_dynamics(ctx.map, ctx.cfg.start(), ctx.cfg.n_max());
  CsvTable t = ctx.table("orbit");
  orbit_rows(t, d.orbit.points);
  ctx.save("orbit", t);
  Summary& s = ctx.summary;
  s.section("orbit");
  s.put("points", std::to_string(d.orbit.size()));
  s.put("cutoff", to_string(d.orbit.cutoff));
  s.put("lambda", d.lambda.value);
  s.put("lambda_uncertainty", d.lambda.uncertainty);
  if (d.L) {
    s.put("L", d.L->L.value);
    s.flag("q_monotone", d.L->monotone);
  } else {
    s.put("L", "unavailable");
  }
  for (const auto& w : d.warnings) s.put("warning", w);
}

inline void run_classify(Context& ctx) {
  std::vector<SiegelPoint> pts;
  std::string source;
  if (ctx.cfg.run.points) {
    pts = read_points_file(*ctx.cfg.run.points);
    source = std::filesystem::path(*ctx.cfg.run.points).filename().string();
  } else {
    pts = compute_orbit(ctx.map, ctx.cfg.start(), ctx.cfg.n_max()).points;
    source = "orbit";
  }
  const SequenceClassification c = classify_sequence(pts);
  CsvTable t = ctx.table("classify");
  t.meta("source", source);
  orbit_rows(t, pts);
  ctx.save("classify", t);
  Summary& s = ctx.summary;
  s.section("classify");
  s.put("source", source);
  s.put("points", std::to_string(pts.size()));
  put_classification(s, c);
}

inline void run_renormalization(Context& ctx) {
  const std::size_t n = ctx.cfg.map.dimension();
  const EvaluationGrid grid = ctx.cfg.run.grid && !ctx.cfg.run.grid->standard ? EvaluationGrid(ctx.cfg.run.grid->points)
                                                                             : EvaluationGrid::standard(n);
  ValironOptions opt;
  opt.tol = ctx.cfg.tol();
  opt.n_max = ctx.cfg.n_max();
  const ValironResult r = run_valiron(ctx.map, grid, ctx.cfg.start(), opt);

  CsvTable t = ctx.table("valiron");
  std::vector<std::string> cols{"re_z", "im_z"};
  for (std::size_t j = 1; j < n; ++j) {
    cols.push_back("re_w" + std::to_string(j));
    cols.push_back("im_w" + std::to_string(j));
  }
  for (const char* c : {"re_sigma", "im_sigma", "residual"}) cols.push_back(c);
  t.header(cols);
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const SiegelPoint& p = r.grid[i];
    std::vector<std::string> cells{format_double(p.z().real()), format_double(p.z().imag())};
    for (const Complex& w : p.w()) {
      cells.push_back(format_double(w.real()));
      cells.push_back(format_double(w.imag()));
    }
    cells.push_back(format_double(r.sigma[i].real()));
    cells.push_back(format_double(r.sigma[i].imag()));
    cells.push_back(format_double(r.residual[i]));
    t.row(cells);
  }
  ctx.save("valiron", t);

  Summary& s = ctx.summary;
  s.section("valiron");
  s.put("lambda", r.lambda.value);
  s.put("lambda_uncertainty", r.lambda.uncertainty);
  s.put("L", r.L ? format_double(r.L->value) : std::string("unavailable"));
  s.flag("converged", r.converged);
  s.put("n_stop", std::to_string(r.n_stop));
  s.put("residual", *std::max_element(r.residual.begin(), r.residual.end()));
  s.put("sigma_base", format_complex(r.sigma_base));
  s.flag("non_constant", r.non_constant);
  s.flag("outside_hypotheses", r.outside_hypotheses);
  s.put("max_state_magnitude", r.max_state_magnitude);
  for (const auto& w : r.warnings) s.put("warning", w);
  for (const auto& note : r.notes) s.put("note", note);
  if (r.outside_hypotheses) ctx.status = std::max<int>(ctx.status, exit_warning);
}

inline void trace_rows(CsvTable& t, const std::string& prefix, const LimitVerdict& v, bool verbose) {
  for (const auto& tr : v.traces) {
    const std::size_t first = verbose ? 0 : tr.values.size() - 1;
    for (std::size_t k = first; k < tr.values.size(); ++k) {
      t.row({prefix + tr.family, std::to_string(tr.seq_id), std::to_string(k), format_double(tr.values[k].real()),
             format_double(tr.values[k].imag())});
    }
  }
}

inline void put_verdict(Summary& s, const std::string& key, const LimitVerdict& v) {
  s.put(key, v.describe());
  s.put(key + "_spread", v.spread);
  if (v.witness) {
    s.put(key + "_witness", v.witness->family_a + "#" + std::to_string(v.witness->seq_a) + " vs " +
                                v.witness->family_b + "#" + std::to_string(v.witness->seq_b));
    s.put(key + "_separation", v.witness->separation());
  }
  if (!v.reason.empty()) s.put(key + "_reason", v.reason);
}

inline void run_limits(Context& ctx) {
  const SiegelMap& m = ctx.map;
  const ScalarFunction h = [&m](const SiegelPoint& q) { return m(q).z() / q.z(); };
  const std::size_t n = ctx.cfg.map.dimension();
  const double tol = ctx.cfg.limit_tol();
  const LimitVerdict k = k_limit(h, n, tol, 64, ctx.seed);
  const LimitVerdict e = e_limit(h, n, tol, 64, ctx.seed);
  const LimitVerdict e0 = e0_limit(h, n, tol, 64, ctx.seed);
  CsvTable t = ctx.table("limits");
  t.meta("function", "phi_1(z, w) / z");
  t.header({"family", "seq_id", "k", "re_h", "im_h"});
  trace_rows(t, "K:", k, ctx.verbose);
  trace_rows(t, "E:", e, ctx.verbose);
  trace_rows(t, "E0:", e0, ctx.verbose);
  ctx.save("limits", t);
  Summary& s = ctx.summary;
  s.section("limits");
  s.put("function", "phi_1(z, w) / z");
  s.put("tol", tol);
  put_verdict(s, "K-limit", k);
  put_verdict(s, "E-limit", e);
  put_verdict(s, "E0-limit", e0);
}

inline void run_jwc(Context& ctx) {
  const LinearProjection rho(ctx.cfg.projection());
  const JwcReport r = jwc_check(ctx.map, rho, ctx.cfg.limit_tol(), 64, ctx.seed);
  CsvTable t = ctx.table("jwc");
  t.meta("projection", format_vector(rho.a()));
  t.header({"family", "seq_id", "k", "re_h", "im_h"});
  trace_rows(t, "ratio:", r.ratio, ctx.verbose);
  trace_rows(t, "defect:", r.defect, ctx.verbose);
  ctx.save("jwc", t);
  Summary& s = ctx.summary;
  s.section("jwc");
  s.put("projection", format_vector(rho.a()));
  s.put("lambda", r.lambda);
  put_verdict(s, "ratio", r.ratio);
  put_verdict(s, "defect", r.defect);
  s.flag("part1", r.part1);
  s.flag("part2", r.part2);
}

}  // namespace detail

inline RunOutcome run_command(const ExperimentConfig& cfg, const RunOverrides& overrides = {}) {
  detail::Context ctx{cfg, build_map(cfg.map), overrides.seed.value_or(cfg.seed()),
                      overrides.verbose || cfg.verbose(), resolve_output_dir(cfg, overrides), {}, {}, exit_ok};
  std::error_code ec;
  std::filesystem::create_directories(ctx.dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + ctx.dir.string() + ": " + ec.message());

  ctx.summary.put("command", cfg.run.command);
  ctx.summary.put("map", describe_map(cfg.map));
  ctx.summary.put("seed", std::to_string(ctx.seed));
  const std::string& c = cfg.run.command;
  const bool all = c == "report-all";
  if (all || c == "orbit") detail::run_orbit(ctx);
  if (all || c == "classify") detail::run_classify(ctx);
  if (all || c == "valiron") detail::run_renormalization(ctx);
  if (all || c == "limits") detail::run_limits(ctx);
  if (all || c == "jwc") detail::run_jwc(ctx);
  if (ctx.files.empty()) throw Error(ErrorKind::config, "unknown command '" + c + "'");

  const auto summary_path = ctx.dir / "summary.txt";
  detail::write_file(summary_path, ctx.summary.text());
  ctx.files.push_back(summary_path);
  return RunOutcome{ctx.status, ctx.dir, ctx.files, ctx.summary.text()};
}

}  // namespace valiron
