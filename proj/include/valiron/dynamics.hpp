#pragma once

// Forward orbits at infinity, multiplier / argument estimation and the
// three equivalent characterizations of Koranyi approach for sequences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "valiron/errors.hpp"
#include "valiron/geometry.hpp"
#include "valiron/maps.hpp"
#include "valiron/random.hpp"
#include "valiron/tolerances.hpp"

namespace valiron {

enum class CutoffReason { reached_n_max, scale_overflow };

inline const char* to_string(CutoffReason r) {
  return r == CutoffReason::reached_n_max ? "reached-n-max" : "scale-overflow";
}

struct Orbit {
  std::string map_name;
  SiegelPoint start = SiegelPoint(1.0);
  std::vector<SiegelPoint> points;
  std::vector<double> x;
  std::vector<double> y;
  CutoffReason cutoff = CutoffReason::reached_n_max;

  std::size_t size() const noexcept { return points.size(); }
  const CVector& w(std::size_t n) const { return points.at(n).w(); }
};

inline Orbit compute_orbit(const SiegelMap& m, const SiegelPoint& z0, std::size_t n_max) {
  if (z0.dimension() != m.dimension) throw Error(ErrorKind::invalid_parameter, "start point has the wrong dimension");
  Orbit orbit;
  orbit.map_name = m.name;
  orbit.start = z0;
  orbit.points.reserve(n_max + 1);
  orbit.points.push_back(z0);
  for (std::size_t n = 0; n < n_max; ++n) {
    if (orbit.points.back().x() * m.siegel_multiplier().value_or(1.0) > tolerance::overflow_threshold) {
      orbit.cutoff = CutoffReason::scale_overflow;
      break;
    }
    SiegelPoint next = m(orbit.points.back());
    if (next.x() > tolerance::overflow_threshold) {
      orbit.cutoff = CutoffReason::scale_overflow;
      break;
    }
    orbit.points.push_back(std::move(next));
  }
  for (const auto& p : orbit.points) {
    orbit.x.push_back(p.x());
    orbit.y.push_back(p.y());
  }
  return orbit;
}

/// Re-evaluates three seeded indices; returns the worst relative mismatch.
inline double verify_orbit(const SiegelMap& m, const Orbit& orbit, std::uint64_t seed = 0) {
  if (orbit.size() < 2) return 0.0;
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 3; ++k) {
    CounterRng rng(seed, k);
    const auto n = static_cast<std::size_t>(rng.uniform() * static_cast<double>(orbit.size() - 1));
    const SiegelPoint again = m(orbit.points[n]);
    const SiegelPoint& cached = orbit.points[n + 1];
    double diff = std::abs(again.z() - cached.z());
    for (std::size_t j = 0; j < cached.w().size(); ++j) diff = std::max(diff, std::abs(again.w()[j] - cached.w()[j]));
    worst = std::max(worst, diff / std::max(1.0, std::abs(cached.z())));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Sequence classification

struct ClassificationOptions {
  double special_residual = tolerance::special_residual;
  std::size_t min_tail = tolerance::min_tail;
  double band = tolerance::koranyi_band;
};

struct SequenceClassification {
  std::size_t tail_start = 0;
  std::vector<double> residuals;  // |w_n|^2 / x_n for every n

  bool special = false;

  // Route (ii): sup of k(Z_n, p_1(Z_n)) over the tail, and sup |y_n| / x_n.
  double c_witness = 0.0;
  std::optional<double> c_special;
  double t_witness = 0.0;
  bool restricted = false;

  // Route (i): least grid amplitude whose region holds the tail.
  double koranyi_required = 0.0;  // sup |z_n + 1| / (x_n - |w_n|^2)
  std::optional<double> koranyi;

  // Route (iii): sup |w_n|^2 / x_n and sup |y_n| / x_n against the caps.
  double bound_a = 0.0;
  double bound_t = 0.0;
  bool bounds_hold = false;

  bool ambiguous = false;
  std::vector<std::string> notes;

  bool route_koranyi() const { return koranyi.has_value(); }
  bool route_special_restricted() const { return c_special.has_value() && restricted; }
  bool route_bounds() const { return bounds_hold; }
  bool routes_agree() const {
    return route_koranyi() == route_special_restricted() && route_special_restricted() == route_bounds();
  }
};

/// Koranyi amplitude M gives |w|^2 <= (1 - 1/M) x and |y| <= M x.
struct BoundPair {
  double a;
  double t;
};

inline BoundPair bounds_from_amplitude(double M) {
  if (!(M > 1.0)) throw Error(ErrorKind::invalid_parameter, "Koranyi amplitude needs M > 1");
  return {1.0 - 1.0 / M, M};
}

/// An amplitude that contains every point with |w|^2 <= a x, |y| <= T x and
/// x >= x_min. Tends to sqrt(1 + T^2) / (1 - a) as x_min grows.
inline double amplitude_from_bounds(double a, double t, double x_min = std::numeric_limits<double>::infinity()) {
  if (!(a >= 0.0 && a < 1.0) || !(t >= 0.0)) {
    throw Error(ErrorKind::invalid_parameter, "bounds need 0 <= a < 1 and T >= 0");
  }
  const double extra = std::isinf(x_min) ? 0.0 : 1.0 / x_min;
  return (std::sqrt(1.0 + t * t) + extra) / (1.0 - a);
}

namespace detail {
inline std::size_t tail_length(std::size_t n, std::size_t min_tail) {
  return std::min(n, std::max(n / 2, min_tail));
}

inline bool near(double v, double cap, double band) { return std::abs(v - cap) <= band * std::max(1.0, cap); }
}  // namespace detail

inline SequenceClassification classify_sequence(const std::vector<SiegelPoint>& points,
                                                const ClassificationOptions& opts = {}) {
  if (points.size() < 2) throw Error(ErrorKind::orbit_too_short, "need at least two points to classify");
  SequenceClassification out;
  const std::size_t n = points.size();
  out.tail_start = n - detail::tail_length(n, opts.min_tail);

  const double first = std::abs(points[out.tail_start].z());
  const double last = std::abs(points.back().z());
  if (!(last >= 10.0 && last >= 2.0 * first)) {
    throw Error(ErrorKind::not_tending_to_infinity,
                "tail does not escape: |z| goes from " + std::to_string(first) + " to " + std::to_string(last));
  }

  out.residuals.reserve(n);
  for (const auto& p : points) out.residuals.push_back(p.w_norm_sq() / p.x());

  double c = 0.0, t = 0.0, a = 0.0, req = 0.0;
  double x_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = out.tail_start; k < n; ++k) {
    const SiegelPoint& p = points[k];
    x_min = std::min(x_min, p.x());
    const SiegelPoint foot(p.z(), CVector(p.w().size(), Complex{}));
    c = std::max(c, kobayashi_distance(foot, p));
    t = std::max(t, std::abs(p.y()) / p.x());
    a = std::max(a, out.residuals[k]);
    req = std::max(req, std::abs(p.z() + 1.0) / p.height());
  }

  const double tail_first = out.residuals[out.tail_start];
  const double tail_last = out.residuals.back();
  out.special = tail_last < opts.special_residual && tail_last <= tail_first;

  const double cap = tolerance::koranyi_cap;
  const double a_cap = 1.0 - 1.0 / cap;

  out.c_witness = c;
  const double tc = std::tanh(c);
  if (tc * tc <= a_cap) out.c_special = c;
  out.t_witness = t;
  out.restricted = t <= cap;

  out.bound_a = a;
  out.bound_t = t;
  out.bounds_hold = a <= a_cap && t <= cap;

  out.koranyi_required = req;
  bool banded_any = false;
  for (double m : tolerance::koranyi_grid) {
    const KoranyiRegion region = KoranyiRegion::siegel(m);
    bool all_in = true;
    bool banded = false;
    for (std::size_t k = out.tail_start; k < n; ++k) {
      const Membership mem = koranyi_membership(region, points[k]);
      if (mem == Membership::outside) {
        all_in = false;
        break;
      }
      if (mem == Membership::boundary_band) banded = true;
    }
    if (all_in && !banded) {
      out.koranyi = m;
      break;
    }
    banded_any = banded_any || (all_in && banded);
  }
  if (!out.koranyi && banded_any) {
    out.ambiguous = true;
    out.notes.push_back("tail touches the boundary band of a Koranyi region");
  }

  if (detail::near(tc * tc, a_cap, opts.band) || detail::near(a, a_cap, opts.band) || detail::near(t, cap, opts.band)) {
    out.ambiguous = true;
    out.notes.push_back("a witness sits on the finite cap");
  }
  if (!out.koranyi && out.bounds_hold) {
    // Bounds below the cap can still need an amplitude above it.
    if (amplitude_from_bounds(a, t, x_min) >= cap) {
      out.ambiguous = true;
      out.notes.push_back("bounds hold but their amplitude exceeds the largest grid member");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multiplier and argument limit

struct Estimate {
  double value = 0.0;
  double uncertainty = 0.0;
};

namespace detail {
inline Estimate median_estimate(std::vector<double> v) {
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = sorted.size();
  const double med = k % 2 == 1 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
  double dev = 0.0;
  for (double x : v) dev = std::max(dev, std::abs(x - med));
  return {med, dev};
}

inline void require_length(const Orbit& orbit) {
  if (orbit.size() < 16) {
    throw Error(ErrorKind::orbit_too_short, "need at least 16 orbit points, have " + std::to_string(orbit.size()));
  }
}
}  // namespace detail

/// Median of x_{n+1} / x_n over the last half of the orbit.
inline Estimate estimate_multiplier(const Orbit& orbit) {
  detail::require_length(orbit);
  const std::size_t n = orbit.size();
  std::vector<double> ratios;
  for (std::size_t k = n / 2; k + 1 < n; ++k) ratios.push_back(orbit.x[k + 1] / orbit.x[k]);
  return detail::median_estimate(std::move(ratios));
}

struct LEstimate {
  Estimate L;
  std::vector<Complex> q;          // q_n = x_{n+1}/x_n + i (y_{n+1} - y_n)/x_n
  std::vector<double> q_distance;  // k_H(1, q_n)
  double worst_increase = 0.0;     // largest k_H(1, q_{n+1}) - k_H(1, q_n)
  bool monotone = true;
};

inline LEstimate estimate_L(const Orbit& orbit, double monotone_tol = 1e-9) {
  detail::require_length(orbit);
  const auto cls = classify_sequence(orbit.points);
  if (!cls.restricted) {
    throw Error(ErrorKind::non_restricted, "orbit is not restricted: sup |y_n|/x_n = " + std::to_string(cls.t_witness));
  }
  LEstimate out;
  const std::size_t n = orbit.size();
  std::vector<double> ratios;
  for (std::size_t k = n / 2; k < n; ++k) ratios.push_back(orbit.y[k] / orbit.x[k]);
  out.L = detail::median_estimate(std::move(ratios));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Complex q(orbit.x[k + 1] / orbit.x[k], (orbit.y[k + 1] - orbit.y[k]) / orbit.x[k]);
    out.q.push_back(q);
    out.q_distance.push_back(halfplane_distance(1.0, q));
  }
  // Early steps off the distinguished slice need not contract; judge the tail.
  for (std::size_t k = std::max<std::size_t>(1, n / 2); k < out.q_distance.size(); ++k) {
    out.worst_increase = std::max(out.worst_increase, out.q_distance[k] - out.q_distance[k - 1]);
  }
  out.monotone = out.worst_increase <= monotone_tol;
  return out;
}

/// height(phi(q)) - lambda height(q); nonnegative for an honest multiplier.
inline double julia_margin(const SiegelMap& m, const SiegelPoint& q) {
  const auto lambda = m.siegel_multiplier();
  if (!lambda) throw Error(ErrorKind::missing_metadata, m.name + " carries no multiplier");
  return m(q).height() - *lambda * q.height();
}

struct DynamicsSummary {
  Orbit orbit;
  SequenceClassification classification;
  Estimate lambda;
  std::optional<LEstimate> L;
  std::optional<CVector> dw_direction;  // ball-side direction of the last iterate
  std::vector<std::string> warnings;
};

inline DynamicsSummary summarize_dynamics(const SiegelMap& m, const SiegelPoint& z0, std::size_t n_max) {
  DynamicsSummary s;
  s.orbit = compute_orbit(m, z0, n_max);
  s.classification = classify_sequence(s.orbit.points);
  s.lambda = estimate_multiplier(s.orbit);
  if (auto claimed = m.siegel_multiplier()) {
    if (std::abs(*claimed - s.lambda.value) > std::max(s.lambda.uncertainty, 1e-9 * *claimed)) {
      s.warnings.push_back("multiplier estimate disagrees with the claimed value " + detail::format_double(*claimed));
    }
  }
  if (s.classification.restricted) {
    s.L = estimate_L(s.orbit);
  } else {
    s.warnings.push_back("orbit is not restricted; no L estimate");
  }
  // Far iterates sit closer to the sphere than a BallPoint can represent.
  const CVector b = detail::cayley_coords(s.orbit.points.back());
  const double r = norm(b);
  if (r > 0.0) s.dw_direction = scaled(b, 1.0 / r);
  return s;
}

}  // namespace valiron
