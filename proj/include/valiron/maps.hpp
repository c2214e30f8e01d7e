#pragma once

// Holomorphic self-maps of the ball and the Siegel domain, with optional
// Denjoy-Wolff metadata, plus a small catalog of maps whose intertwiners are
// known in closed form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "valiron/errors.hpp"
#include "valiron/geometry.hpp"
#include "valiron/linalg.hpp"
#include "valiron/random.hpp"
#include "valiron/tolerances.hpp"

namespace valiron {

/// Holomorphic psi: H -> D used by the two-dimensional example map.
class PsiChoice {
 public:
  enum class Kind { constant, cayley_to_disk, oscillating };

  static PsiChoice constant(Complex c) {
    if (!(std::abs(c) < 1.0)) throw Error(ErrorKind::invalid_parameter, "constant psi needs |c| < 1");
    return PsiChoice(Kind::constant, c);
  }

  /// psi(z) = (z - p) / (z + conj p), a biholomorphism H -> D for Re p > 0.
  static PsiChoice cayley_to_disk(Complex p) {
    if (!(p.real() > 0.0)) throw Error(ErrorKind::invalid_parameter, "cayley-to-disk psi needs Re p > 0");
    return PsiChoice(Kind::cayley_to_disk, p);
  }

  /// psi(z) = e^{-pi/2} z^i on the principal branch; |psi| = e^{-arg z - pi/2}.
  static PsiChoice oscillating() { return PsiChoice(Kind::oscillating, Complex{}); }

  Kind kind() const noexcept { return kind_; }
  Complex parameter() const noexcept { return param_; }

  Complex operator()(Complex z) const {
    switch (kind_) {
      case Kind::constant: return param_;
      case Kind::cayley_to_disk: return (z - param_) / (z + std::conj(param_));
      case Kind::oscillating: {
        const Complex i_log_z = Complex(0.0, 1.0) * std::log(z);
        return std::exp(i_log_z - std::numbers::pi / 2.0);
      }
    }
    return {};
  }

  std::string describe() const;

 private:
  PsiChoice(Kind k, Complex p) : kind_(k), param_(p) {}

  Kind kind_;
  Complex param_;
};

namespace detail {
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_complex(Complex c) {
  if (c.imag() == 0.0) return format_double(c.real());
  std::string out = format_double(c.real());
  out += c.imag() < 0.0 ? "-" : "+";
  out += format_double(std::abs(c.imag()));
  out += "i";
  return out;
}
}  // namespace detail

inline std::string PsiChoice::describe() const {
  switch (kind_) {
    case Kind::constant: return "constant(" + detail::format_complex(param_) + ")";
    case Kind::cayley_to_disk: return "cayley(" + detail::format_complex(param_) + ")";
    case Kind::oscillating: return "oscillating";
  }
  return "?";
}

/// Claimed Denjoy-Wolff point: a boundary direction of the ball or infinity.
using DenjoyWolffPoint = std::variant<AtInfinity, BoundaryDirection>;

template <class Point>
struct HoloMap {
  std::string name;
  std::size_t dimension = 1;
  std::function<Point(const Point&)> evaluator;
  std::optional<DenjoyWolffPoint> denjoy_wolff;
  std::optional<double> lambda;  // Siegel-side multiplier, >= 1
  std::optional<double> c;       // ball-side dilation coefficient, in (0, 1]
  std::function<Complex(const Point&)> intertwiner;  // empty when unknown

  Point operator()(const Point& p) const { return evaluator(p); }
  bool has_intertwiner() const { return static_cast<bool>(intertwiner); }

  /// Either multiplier expressed on the Siegel side.
  std::optional<double> siegel_multiplier() const {
    if (lambda) return lambda;
    if (c) return 1.0 / *c;
    return std::nullopt;
  }

  void check_metadata() const {
    if (!evaluator) throw Error(ErrorKind::invalid_parameter, name + ": map has no evaluator");
    if (lambda && !(*lambda >= 1.0)) throw Error(ErrorKind::invalid_parameter, name + ": lambda must be >= 1");
    if (c && !(*c > 0.0 && *c <= 1.0)) throw Error(ErrorKind::invalid_parameter, name + ": c must lie in (0, 1]");
    if (lambda && c && std::abs(*lambda * *c - 1.0) > tolerance::multiplier_consistency) {
      throw Error(ErrorKind::invalid_parameter, name + ": lambda * c differs from 1");
    }
  }
};

using SiegelMap = HoloMap<SiegelPoint>;
using BallMap = HoloMap<BallPoint>;

// ---------------------------------------------------------------------------
// Catalog

inline SiegelMap make_halfplane_affine(double lambda, double b, std::size_t n) {
  if (!(lambda > 1.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::invalid_parameter, "multiplier must satisfy lambda > 1 (hyperbolic map)");
  }
  if (!std::isfinite(b)) throw Error(ErrorKind::invalid_parameter, "translation b must be finite");
  if (n < 1) throw Error(ErrorKind::invalid_parameter, "dimension N must be >= 1");
  SiegelMap m;
  m.name = b == 0.0 ? "siegel_linear" : "halfplane_affine";
  m.dimension = n;
  const double root = std::sqrt(lambda);
  m.evaluator = [lambda, b, root](const SiegelPoint& q) {
    return SiegelPoint(lambda * q.z() + Complex(0.0, b), scaled(q.w(), root));
  };
  m.denjoy_wolff = AtInfinity{};
  m.lambda = lambda;
  m.c = 1.0 / lambda;
  const double L = b / (lambda - 1.0);
  m.intertwiner = [L](const SiegelPoint& q) { return q.z() + Complex(0.0, L); };
  return m;
}

/// (z, w) -> (lambda z, sqrt(lambda) w); intertwiner sigma = z.
inline SiegelMap make_siegel_linear(double lambda, std::size_t n) { return make_halfplane_affine(lambda, 0.0, n); }

/// (z, w) -> (A z + A w^2 psi(z), 0) on H^2; intertwiner sigma = z + w^2 psi(z).
inline SiegelMap make_valiron_example(double A, const PsiChoice& psi) {
  if (!(A > 1.0) || !std::isfinite(A)) {
    throw Error(ErrorKind::invalid_parameter, "A must satisfy A > 1 (hyperbolic map)");
  }
  SiegelMap m;
  m.name = "valiron_example";
  m.dimension = 2;
  m.evaluator = [A, psi](const SiegelPoint& q) {
    if (q.dimension() != 2) throw Error(ErrorKind::invalid_parameter, "valiron example lives in dimension 2");
    const Complex w = q.w()[0];
    return SiegelPoint(A * q.z() + A * w * w * psi(q.z()), CVector{Complex{}});
  };
  m.denjoy_wolff = AtInfinity{};
  m.lambda = A;
  m.c = 1.0 / A;
  m.intertwiner = [psi](const SiegelPoint& q) {
    const Complex w = q.w()[0];
    return q.z() + w * w * psi(q.z());
  };
  return m;
}

/// Cayley conjugate C^{-1} o m o C, with infinity <-> e_1 and c = 1 / lambda.
inline BallMap make_ball_map_from_siegel(const SiegelMap& m) {
  BallMap b;
  b.name = m.name + "@ball";
  b.dimension = m.dimension;
  auto f = m.evaluator;
  b.evaluator = [f](const BallPoint& p) { return cayley_to_ball(f(cayley_to_siegel(p))); };
  if (m.denjoy_wolff) {
    if (!std::holds_alternative<AtInfinity>(*m.denjoy_wolff)) {
      throw Error(ErrorKind::invalid_parameter, "Siegel map with a finite Denjoy-Wolff point cannot be transported");
    }
    b.denjoy_wolff = BoundaryDirection::e1(m.dimension);
  }
  if (auto lam = m.siegel_multiplier()) {
    b.c = 1.0 / *lam;
    b.lambda = *lam;
  }
  if (m.intertwiner) {
    auto s = m.intertwiner;
    b.intertwiner = [s](const BallPoint& p) { return s(cayley_to_siegel(p)); };
  }
  b.check_metadata();
  return b;
}

inline SiegelMap make_siegel_map_from_ball(const BallMap& m) {
  SiegelMap s;
  s.name = m.name + "@siegel";
  s.dimension = m.dimension;
  auto f = m.evaluator;
  s.evaluator = [f](const SiegelPoint& q) { return cayley_to_siegel(f(cayley_to_ball(q))); };
  if (m.denjoy_wolff) {
    const auto* tau = std::get_if<BoundaryDirection>(&*m.denjoy_wolff);
    const auto e1 = BoundaryDirection::e1(m.dimension);
    if (tau == nullptr || norm(subtracted(tau->coords(), e1.coords())) > tolerance::unit_norm) {
      throw Error(ErrorKind::invalid_parameter, "only maps with Denjoy-Wolff point e_1 go to infinity");
    }
    s.denjoy_wolff = AtInfinity{};
  }
  if (m.c) {
    s.lambda = 1.0 / *m.c;
    s.c = *m.c;
  } else if (m.lambda) {
    s.lambda = *m.lambda;
    s.c = 1.0 / *m.lambda;
  }
  if (m.intertwiner) {
    auto theta = m.intertwiner;
    s.intertwiner = [theta](const SiegelPoint& q) { return theta(cayley_to_ball(q)); };
  }
  s.check_metadata();
  return s;
}

/// T o m o T^{-1}. The intertwiner is transported and rescaled so that its real
/// part at the base point is 1, matching the renormalized limit.
inline SiegelMap conjugate(const SiegelMap& m, const SiegelAutomorphism& t) {
  SiegelMap out = m;
  out.name = m.name + "^T";
  const SiegelAutomorphism inv = t.inverse();
  auto f = m.evaluator;
  out.evaluator = [f, t, inv](const SiegelPoint& q) { return t.apply(f(inv.apply(q))); };
  if (m.intertwiner) {
    auto s = m.intertwiner;
    const double factor = 1.0 / s(inv.apply(SiegelPoint::base(m.dimension))).real();
    out.intertwiner = [s, inv, factor](const SiegelPoint& q) { return factor * s(inv.apply(q)); };
  }
  return out;
}

// ---------------------------------------------------------------------------
// Iteration

/// n-fold composition. Refuses to continue past Re z > 1e300.
inline SiegelPoint iterate(const SiegelMap& m, const SiegelPoint& q, std::size_t n) {
  SiegelPoint cur = q;
  for (std::size_t k = 0; k < n; ++k) {
    cur = m(cur);
    if (cur.x() > tolerance::overflow_threshold) {
      throw Error(ErrorKind::scale_overflow,
                  "Re z exceeded 1e300 after " + std::to_string(k + 1) +
                      " steps; use the renormalized pipeline (run_valiron) instead of raw iteration");
    }
  }
  return cur;
}

inline BallPoint iterate(const BallMap& m, const BallPoint& p, std::size_t n) {
  BallPoint cur = p;
  for (std::size_t k = 0; k < n; ++k) cur = m(cur);
  return cur;
}

// ---------------------------------------------------------------------------
// Sampled validation

/// Deterministic domain sample i: stratum height T cycles through
/// {0.1, 1, 10, 100}; w uniform in the unit polydisk, Re z uniform in
/// (|w|^2 + T, |w|^2 + 10T], Im z uniform in [-10T, 10T].
inline SiegelPoint sample_siegel_point(std::uint64_t seed, std::uint64_t index, std::size_t n) {
  static constexpr double strata[] = {0.1, 1.0, 10.0, 100.0};
  const double t = strata[index % 4];
  CounterRng rng(seed, index);
  CVector w(n - 1);
  for (auto& c : w) c = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  const double wn = norm_sq(w);
  // uniform() is in [0, 1); flip it so the lower end stays open.
  const double x = wn + t + 9.0 * t * (1.0 - rng.uniform());
  const double y = rng.uniform(-10.0 * t, 10.0 * t);
  return SiegelPoint(Complex(x, y), std::move(w));
}

struct ValidationReport {
  std::string map_name;
  std::size_t samples = 0;
  std::size_t violations = 0;
  std::vector<std::string> failures;  // first few, for diagnostics
  std::optional<double> worst_julia_margin;  // relative; >= 0 for an honest claim
  std::size_t julia_violations = 0;

  bool ok() const { return violations == 0 && julia_violations == 0; }
};

namespace detail {
inline double relative_julia_margin(const SiegelMap& m, double lambda, const SiegelPoint& q, const SiegelPoint& image) {
  (void)m;
  const double base = lambda * q.height();
  return (image.height() - base) / base;
}

inline double relative_julia_margin(const BallMap& m, double lambda, const BallPoint& p, const BallPoint& image) {
  // phi(E(t)) inside E(t / c): horoball value drops by at least the factor c.
  const auto tau = BoundaryDirection::e1(m.dimension);
  const double before = horoball_value(p, tau) / lambda;
  return (before - horoball_value(image, tau)) / before;
}

inline SiegelPoint sample_point(const SiegelMap&, std::uint64_t seed, std::uint64_t i, std::size_t n) {
  return sample_siegel_point(seed, i, n);
}

inline BallPoint sample_point(const BallMap&, std::uint64_t seed, std::uint64_t i, std::size_t n) {
  return cayley_to_ball(sample_siegel_point(seed, i, n));
}
}  // namespace detail

template <class Point>
ValidationReport validate_self_map(const HoloMap<Point>& m, std::size_t samples, std::uint64_t seed) {
  ValidationReport report;
  report.map_name = m.name;
  report.samples = samples;
  const auto lambda = m.siegel_multiplier();
  const bool julia = lambda.has_value() && m.denjoy_wolff.has_value();
  for (std::size_t i = 0; i < samples; ++i) {
    const Point p = detail::sample_point(m, seed, i, m.dimension);
    try {
      const Point image = m(p);
      if (julia) {
        const double margin = detail::relative_julia_margin(m, *lambda, p, image);
        if (!report.worst_julia_margin || margin < *report.worst_julia_margin) report.worst_julia_margin = margin;
        // Rounding can push an exact-equality margin a few ulps negative.
        if (margin < -tolerance::boundary_slack) ++report.julia_violations;
      }
    } catch (const Error& e) {
      ++report.violations;
      if (report.failures.size() < 5) report.failures.push_back("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  return report;
}

struct CatalogEntry {
  std::string name;
  std::string parameters;
  std::string description;
};

inline std::vector<CatalogEntry> catalog() {
  return {
      {"siegel_linear", "lambda > 1, N >= 1", "(z, w) -> (lambda z, sqrt(lambda) w); sigma = z"},
      {"halfplane_affine", "lambda > 1, b real, N >= 1",
       "(z, w) -> (lambda z + i b, sqrt(lambda) w); sigma = z + i b / (lambda - 1)"},
      {"valiron_example", "A > 1, psi in {constant(c), cayley(p), oscillating}",
       "(z, w) -> (A z + A w^2 psi(z), 0) on H^2; sigma = z + w^2 psi(z)"},
  };
}

}  // namespace valiron
