#pragma once

// Experiment configuration: flat INI-style sections with `key = value` lines
// and `#` comments. Parsing is strict: unknown keys, duplicates, malformed
// values and out-of-range parameters are errors that carry a line number.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "valiron/errors.hpp"
#include "valiron/geometry.hpp"
#include "valiron/linalg.hpp"
#include "valiron/maps.hpp"

namespace valiron {

// ---------------------------------------------------------------------------
// Literals

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\t') out.push_back(c);
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> to_uint(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Accepts `a`, `bi`, `a+bi`, `a-bi`, `i` and `-i`, with optional spaces.
inline std::optional<Complex> parse_complex(std::string_view text) {
  const std::string s = detail::strip_spaces(text);
  if (s.empty()) return std::nullopt;
  if (s.back() != 'i') {
    auto re = detail::to_double(s);
    if (!re) return std::nullopt;
    return Complex(*re, 0.0);
  }
  const std::string body = s.substr(0, s.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_of = [](const std::string& t) -> std::optional<double> {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return detail::to_double(t);
  };
  if (split == std::string::npos) {
    auto im = imag_of(body);
    if (!im) return std::nullopt;
    return Complex(0.0, *im);
  }
  auto re = detail::to_double(body.substr(0, split));
  auto im = imag_of(body.substr(split));
  if (!re || !im) return std::nullopt;
  return Complex(*re, *im);
}

inline std::string format_vector(const CVector& v) {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (j) out += ", ";
    out += detail::format_complex(v[j]);
  }
  return out;
}

inline std::optional<CVector> parse_vector(std::string_view text) {
  CVector v;
  if (detail::trim(text).empty()) return v;
  for (auto part : detail::split(text, ',')) {
    auto c = parse_complex(part);
    if (!c) return std::nullopt;
    v.push_back(*c);
  }
  return v;
}

/// `z` or `z | w1, w2, ...`.
inline std::optional<SiegelPoint> parse_point(std::string_view text) {
  const auto bar = text.find('|');
  auto z = parse_complex(text.substr(0, bar));
  if (!z) return std::nullopt;
  CVector w;
  if (bar != std::string_view::npos) {
    auto v = parse_vector(text.substr(bar + 1));
    if (!v || v->empty()) return std::nullopt;
    w = std::move(*v);
  }
  return SiegelPoint(*z, std::move(w));
}

inline std::string format_point(const SiegelPoint& p) {
  std::string out = detail::format_complex(p.z());
  if (!p.w().empty()) out += " | " + format_vector(p.w());
  return out;
}

inline std::optional<PsiChoice> parse_psi(std::string_view text) {
  const std::string s = detail::strip_spaces(text);
  if (s == "oscillating") return PsiChoice::oscillating();
  auto arg = [&](std::string_view head) -> std::optional<Complex> {
    if (s.size() < head.size() + 2 || s.compare(0, head.size(), head) != 0 || s[head.size()] != '(' || s.back() != ')') {
      return std::nullopt;
    }
    return parse_complex(std::string_view(s).substr(head.size() + 1, s.size() - head.size() - 2));
  };
  if (auto c = arg("constant")) return PsiChoice::constant(*c);
  if (auto p = arg("cayley")) return PsiChoice::cayley_to_disk(*p);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Config types

/// One factor of a conjugating chain: `scale(x, y)` or `heisenberg(a1, ...)`.
struct AutomorphismSpec {
  enum class Kind { scale, heisenberg } kind = Kind::scale;
  double x = 1.0;
  double y = 0.0;
  CVector a;

  SiegelAutomorphism build() const {
    return kind == Kind::scale ? SiegelAutomorphism::scale_translate(x, y) : SiegelAutomorphism::heisenberg(a);
  }
  std::string emit() const {
    if (kind == Kind::scale) return "scale(" + detail::format_double(x) + ", " + detail::format_double(y) + ")";
    return "heisenberg(" + format_vector(a) + ")";
  }
};

struct GridSpec {
  bool standard = true;
  std::vector<SiegelPoint> points;
};

struct MapSpec {
  std::string name;
  std::optional<double> lambda;
  std::optional<double> b;
  std::optional<std::size_t> n;
  std::optional<double> A;
  std::optional<PsiChoice> psi;
  std::optional<std::vector<AutomorphismSpec>> conjugate;

  std::size_t dimension() const { return name == "valiron_example" ? 2 : n.value_or(2); }
};

struct RunSpec {
  std::string command;
  std::optional<std::size_t> n_max;
  std::optional<double> tol;
  std::optional<double> limit_tol;
  std::optional<std::uint64_t> seed;
  std::optional<GridSpec> grid;
  std::optional<SiegelPoint> start;
  std::optional<std::string> points;
  std::optional<CVector> projection;
};

struct OutputSpec {
  std::optional<std::string> dir;
  std::optional<std::string> format;
  std::optional<bool> verbose;
};

struct ExperimentConfig {
  MapSpec map;
  RunSpec run;
  OutputSpec output;
  bool has_output_section = false;

  std::size_t n_max() const { return run.n_max.value_or(200); }
  double tol() const { return run.tol.value_or(1e-8); }
  double limit_tol() const { return run.limit_tol.value_or(1e-3); }
  std::uint64_t seed() const { return run.seed.value_or(0); }
  bool verbose() const { return output.verbose.value_or(false); }
  SiegelPoint start() const { return run.start.value_or(SiegelPoint::base(map.dimension())); }
  CVector projection() const { return run.projection.value_or(CVector(map.dimension() - 1, Complex{})); }
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> v{"orbit", "classify", "valiron", "limits", "jwc", "report-all"};
  return v;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  int line = 0;
  std::map<std::string, Entry> entries;
};

[[noreturn]] inline void config_error(int line, const std::string& msg) {
  throw Error(ErrorKind::config, "line " + std::to_string(line) + ": " + msg);
}

inline const std::vector<std::string>& section_keys(const std::string& section) {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"map", {"name", "lambda", "b", "N", "A", "psi", "conjugate"}},
      {"run", {"command", "n_max", "tol", "limit_tol", "seed", "grid", "start", "points", "projection"}},
      {"output", {"dir", "format", "verbose"}},
  };
  return keys.at(section);
}

class Reader {
 public:
  explicit Reader(const Section& s) : s_(s) {}

  const Entry* find(const std::string& key) const {
    auto it = s_.entries.find(key);
    return it == s_.entries.end() ? nullptr : &it->second;
  }

  std::optional<double> real(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    auto v = to_double(e->value);
    if (!v) config_error(e->line, key + " expects a finite real number, got '" + e->value + "'");
    return v;
  }

  std::optional<std::uint64_t> count(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    auto v = to_uint(e->value);
    if (!v) config_error(e->line, key + " expects a non-negative integer, got '" + e->value + "'");
    return v;
  }

  int line(const std::string& key) const {
    const Entry* e = find(key);
    return e ? e->line : s_.line;
  }

 private:
  const Section& s_;
};

inline std::vector<AutomorphismSpec> parse_chain(const Entry& e) {
  std::vector<AutomorphismSpec> out;
  for (auto part : split(e.value, ';')) {
    const std::string s = strip_spaces(part);
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') {
      config_error(e.line, "conjugate factor '" + std::string(part) + "' is not scale(x, y) or heisenberg(a)");
    }
    const std::string head = s.substr(0, open);
    const std::string args = s.substr(open + 1, s.size() - open - 2);
    AutomorphismSpec f;
    if (head == "scale") {
      const auto xy = split(args, ',');
      auto x = xy.size() == 2 ? to_double(xy[0]) : std::nullopt;
      auto y = xy.size() == 2 ? to_double(xy[1]) : std::nullopt;
      if (!x || !y) config_error(e.line, "scale expects two real arguments");
      if (!(*x > 0.0)) config_error(e.line, "scale needs x > 0");
      f.x = *x;
      f.y = *y;
    } else if (head == "heisenberg") {
      auto a = parse_vector(args);
      if (!a || a->empty()) config_error(e.line, "heisenberg expects a list of complex numbers");
      f.kind = AutomorphismSpec::Kind::heisenberg;
      f.a = std::move(*a);
    } else {
      config_error(e.line, "unknown conjugate factor '" + head + "'");
    }
    out.push_back(std::move(f));
  }
  return out;
}

inline SiegelPoint point_or_error(std::string_view text, int line, const std::string& key) {
  try {
    auto p = parse_point(text);
    if (!p) config_error(line, key + ": cannot read point '" + std::string(trim(text)) + "'");
    return *p;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    config_error(line, key + ": " + e.what());
  }
}

inline void check_dimension(const SiegelPoint& p, std::size_t n, int line, const std::string& key) {
  if (p.dimension() != n) {
    config_error(line, key + " has dimension " + std::to_string(p.dimension()) + " but the map has N = " +
                           std::to_string(n));
  }
}

inline void parse_map(const Section& s, MapSpec& m) {
  const Reader r(s);
  const Entry* name = r.find("name");
  if (!name) config_error(s.line, "[map] needs a name");
  m.name = name->value;
  static const std::map<std::string, std::vector<std::string>> allowed{
      {"siegel_linear", {"name", "lambda", "N", "conjugate"}},
      {"halfplane_affine", {"name", "lambda", "b", "N", "conjugate"}},
      {"valiron_example", {"name", "A", "psi", "N", "conjugate"}},
  };
  auto it = allowed.find(m.name);
  if (it == allowed.end()) config_error(name->line, "unknown map '" + m.name + "' (see the catalog command)");
  for (const auto& [key, entry] : s.entries) {
    if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
      config_error(entry.line, "key " + key + " does not apply to map " + m.name);
    }
  }

  m.lambda = r.real("lambda");
  m.b = r.real("b");
  m.A = r.real("A");
  if (auto n = r.count("N")) {
    if (*n < 1) config_error(r.line("N"), "N must be at least 1");
    if (m.name == "valiron_example" && *n != 2) config_error(r.line("N"), "valiron_example lives in dimension N = 2");
    m.n = static_cast<std::size_t>(*n);
  }
  if (m.name == "valiron_example") {
    if (!m.A) config_error(s.line, "valiron_example needs A");
    if (!(*m.A > 1.0)) {
      config_error(r.line("A"), "A = " + detail::format_double(*m.A) + " is out of range: the map must be hyperbolic (A > 1)");
    }
    const Entry* psi = r.find("psi");
    if (!psi) config_error(s.line, "valiron_example needs psi");
    try {
      m.psi = parse_psi(psi->value);
    } catch (const Error& e) {
      config_error(psi->line, std::string("psi: ") + e.what());
    }
    if (!m.psi) config_error(psi->line, "psi must be constant(c), cayley(p) or oscillating");
  } else {
    if (!m.lambda) config_error(s.line, m.name + " needs lambda");
    if (!(*m.lambda > 1.0)) {
      config_error(r.line("lambda"), "lambda = " + detail::format_double(*m.lambda) +
                                         " is out of range: the map must be hyperbolic (lambda > 1)");
    }
  }
  if (const Entry* c = r.find("conjugate")) {
    m.conjugate = parse_chain(*c);
    for (const auto& f : *m.conjugate) {
      if (f.kind == AutomorphismSpec::Kind::heisenberg && f.a.size() != m.dimension() - 1) {
        config_error(c->line, "heisenberg translation length must be N - 1");
      }
    }
  }
}

inline void parse_run(const Section& s, RunSpec& run, std::size_t n) {
  const Reader r(s);
  const Entry* cmd = r.find("command");
  if (!cmd) config_error(s.line, "[run] needs a command");
  const auto& cmds = known_commands();
  if (std::find(cmds.begin(), cmds.end(), cmd->value) == cmds.end()) {
    config_error(cmd->line, "unknown command '" + cmd->value + "'");
  }
  run.command = cmd->value;
  if (auto v = r.count("n_max")) {
    if (*v < 1 || *v > 10'000'000) config_error(r.line("n_max"), "n_max must lie in [1, 10000000]");
    run.n_max = static_cast<std::size_t>(*v);
  }
  for (const char* key : {"tol", "limit_tol"}) {
    if (auto v = r.real(key)) {
      if (!(*v > 0.0)) config_error(r.line(key), std::string(key) + " must be positive");
      (std::string(key) == "tol" ? run.tol : run.limit_tol) = *v;
    }
  }
  run.seed = r.count("seed");
  if (const Entry* g = r.find("grid")) {
    GridSpec grid;
    if (trim(g->value) != "standard") {
      grid.standard = false;
      for (auto part : split(g->value, ';')) {
        grid.points.push_back(point_or_error(part, g->line, "grid"));
        check_dimension(grid.points.back(), n, g->line, "grid");
        if (!(grid.points.back().height() >= 0.1)) config_error(g->line, "grid points need Re z - |w|^2 >= 0.1");
      }
    }
    run.grid = std::move(grid);
  }
  if (const Entry* p = r.find("start")) {
    run.start = point_or_error(p->value, p->line, "start");
    check_dimension(*run.start, n, p->line, "start");
  }
  if (const Entry* p = r.find("points")) {
    if (p->value.empty()) config_error(p->line, "points needs a file path");
    run.points = p->value;
  }
  if (const Entry* p = r.find("projection")) {
    auto a = parse_vector(p->value);
    if (!a) config_error(p->line, "projection expects a list of complex numbers");
    if (a->size() != n - 1) config_error(p->line, "projection length must be N - 1");
    run.projection = std::move(*a);
  }
}

inline void parse_output(const Section& s, OutputSpec& out) {
  const Reader r(s);
  if (const Entry* d = r.find("dir")) {
    if (d->value.empty()) config_error(d->line, "dir needs a path");
    out.dir = d->value;
  }
  if (const Entry* f = r.find("format")) {
    if (f->value != "csv") config_error(f->line, "format must be csv");
    out.format = f->value;
  }
  if (const Entry* v = r.find("verbose")) {
    if (v->value == "true") {
      out.verbose = true;
    } else if (v->value == "false") {
      out.verbose = false;
    } else {
      config_error(v->line, "verbose expects true or false");
    }
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, detail::Section> sections;
  detail::Section* current = nullptr;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') detail::config_error(line, "malformed section header");
      const std::string name(detail::trim(s.substr(1, s.size() - 2)));
      if (name != "map" && name != "run" && name != "output") detail::config_error(line, "unknown section [" + name + "]");
      if (sections.count(name)) {
        detail::config_error(line, "section [" + name + "] repeated (first on line " +
                                       std::to_string(sections[name].line) + ")");
      }
      current = &sections[name];
      current->line = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) detail::config_error(line, "expected key = value");
    if (!current) detail::config_error(line, "key outside of any section");
    const std::string key(detail::trim(s.substr(0, eq)));
    const std::string value(detail::trim(s.substr(eq + 1)));
    std::string section_name;
    for (const auto& [n, sec] : sections) {
      if (&sec == current) section_name = n;
    }
    const auto& keys = detail::section_keys(section_name);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      detail::config_error(line, "unknown key '" + key + "' in [" + section_name + "]");
    }
    if (auto it = current->entries.find(key); it != current->entries.end()) {
      detail::config_error(line, "duplicate key '" + key + "' (lines " + std::to_string(it->second.line) + " and " +
                                     std::to_string(line) + ")");
    }
    current->entries[key] = {value, line};
  }
  if (!sections.count("map")) throw Error(ErrorKind::config, "line " + std::to_string(line) + ": missing [map] section");
  if (!sections.count("run")) throw Error(ErrorKind::config, "line " + std::to_string(line) + ": missing [run] section");

  ExperimentConfig cfg;
  detail::parse_map(sections["map"], cfg.map);
  detail::parse_run(sections["run"], cfg.run, cfg.map.dimension());
  if (sections.count("output")) {
    cfg.has_output_section = true;
    detail::parse_output(sections["output"], cfg.output);
  }
  return cfg;
}

/// Canonical text: fixed section and key order, numbers at 17 significant digits.
inline std::string emit_config(const ExperimentConfig& cfg) {
  std::string out;
  auto put = [&](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };
  const MapSpec& m = cfg.map;
  out += "[map]\n";
  put("name", m.name);
  if (m.lambda) put("lambda", detail::format_double(*m.lambda));
  if (m.b) put("b", detail::format_double(*m.b));
  if (m.n) put("N", std::to_string(*m.n));
  if (m.A) put("A", detail::format_double(*m.A));
  if (m.psi) put("psi", m.psi->describe());
  if (m.conjugate) {
    std::string chain;
    for (std::size_t k = 0; k < m.conjugate->size(); ++k) chain += (k ? "; " : "") + (*m.conjugate)[k].emit();
    put("conjugate", chain);
  }

  const RunSpec& r = cfg.run;
  out += "\n[run]\n";
  put("command", r.command);
  if (r.n_max) put("n_max", std::to_string(*r.n_max));
  if (r.tol) put("tol", detail::format_double(*r.tol));
  if (r.limit_tol) put("limit_tol", detail::format_double(*r.limit_tol));
  if (r.seed) put("seed", std::to_string(*r.seed));
  if (r.grid) {
    if (r.grid->standard) {
      put("grid", "standard");
    } else {
      std::string g;
      for (std::size_t k = 0; k < r.grid->points.size(); ++k) g += (k ? "; " : "") + format_point(r.grid->points[k]);
      put("grid", g);
    }
  }
  if (r.start) put("start", format_point(*r.start));
  if (r.points) put("points", *r.points);
  if (r.projection) put("projection", format_vector(*r.projection));

  if (cfg.has_output_section) {
    out += "\n[output]\n";
    if (cfg.output.dir) put("dir", *cfg.output.dir);
    if (cfg.output.format) put("format", *cfg.output.format);
    if (cfg.output.verbose) put("verbose", *cfg.output.verbose ? "true" : "false");
  }
  return out;
}

/// The map a config describes, conjugated by its chain when one is given.
inline SiegelMap build_map(const MapSpec& spec) {
  SiegelMap m;
  if (spec.name == "siegel_linear") {
    m = make_siegel_linear(*spec.lambda, spec.dimension());
  } else if (spec.name == "halfplane_affine") {
    m = make_halfplane_affine(*spec.lambda, spec.b.value_or(0.0), spec.dimension());
    m.name = "halfplane_affine";
  } else if (spec.name == "valiron_example") {
    m = make_valiron_example(*spec.A, *spec.psi);
  } else {
    throw Error(ErrorKind::config, "unknown map '" + spec.name + "'");
  }
  if (spec.conjugate && !spec.conjugate->empty()) {
    std::vector<SiegelAutomorphism> factors;
    for (const auto& f : *spec.conjugate) factors.push_back(f.build());
    m = conjugate(m, SiegelAutomorphism::composite(std::move(factors)));
  }
  return m;
}

inline std::string describe_map(const MapSpec& spec) {
  std::string s = spec.name + "(";
  if (spec.name == "valiron_example") {
    s += "A=" + detail::format_double(*spec.A) + ", psi=" + spec.psi->describe();
  } else {
    s += "lambda=" + detail::format_double(*spec.lambda);
    if (spec.name == "halfplane_affine") s += ", b=" + detail::format_double(spec.b.value_or(0.0));
    s += ", N=" + std::to_string(spec.dimension());
  }
  if (spec.conjugate) {
    s += ", conjugate=";
    for (std::size_t k = 0; k < spec.conjugate->size(); ++k) s += (k ? "; " : "") + (*spec.conjugate)[k].emit();
  }
  return s + ")";
}

}  // namespace valiron
