#pragma once

// Empirical boundary-limit estimators at infinity: Koranyi (K-), E- and
// E0-limits over generated approach families, the Julia-Wolff-Caratheodory
// checks and the projection-invariance check for linear projections.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "valiron/dynamics.hpp"
#include "valiron/errors.hpp"
#include "valiron/geometry.hpp"
#include "valiron/linalg.hpp"
#include "valiron/maps.hpp"
#include "valiron/random.hpp"

namespace valiron {

using ScalarFunction = std::function<Complex(const SiegelPoint&)>;

enum class ApproachKind { koranyi, c_special_restricted, zero_special_restricted, radial };

inline const char* to_string(ApproachKind k) {
  switch (k) {
    case ApproachKind::koranyi: return "koranyi";
    case ApproachKind::c_special_restricted: return "c_special_restricted";
    case ApproachKind::zero_special_restricted: return "zero_special_restricted";
    case ApproachKind::radial: return "radial";
  }
  return "unknown";
}

/// r_k = 10^k for k = first..last.
inline std::vector<double> decade_ladder(int first = 1, int last = 7) {
  std::vector<double> r;
  for (int k = first; k <= last; ++k) r.push_back(std::pow(10.0, k));
  return r;
}

struct ApproachFamily {
  ApproachKind kind = ApproachKind::radial;
  std::size_t dimension = 2;
  double amplitude = 2.0;       // M, koranyi only
  double specialness = 1.0;     // C: w-profile amplitude s <= tanh C
  double nontangential = 0.0;   // T: |arg z| <= arctan T
  std::vector<double> scales = decade_ladder();

  static ApproachFamily koranyi(double M, std::size_t n) {
    ApproachFamily f;
    f.kind = ApproachKind::koranyi;
    f.dimension = n;
    f.amplitude = M;
    return f;
  }
  static ApproachFamily c_special(double C, double T, std::size_t n) {
    ApproachFamily f;
    f.kind = ApproachKind::c_special_restricted;
    f.dimension = n;
    f.specialness = C;
    f.nontangential = T;
    return f;
  }
  static ApproachFamily zero_special(double T, std::size_t n, double C = 1.0) {
    ApproachFamily f = c_special(C, T, n);
    f.kind = ApproachKind::zero_special_restricted;
    return f;
  }
  static ApproachFamily radial(std::size_t n) {
    ApproachFamily f;
    f.dimension = n;
    return f;
  }

  void validate() const {
    if (dimension < 1) throw Error(ErrorKind::invalid_parameter, "approach family needs dimension N >= 1");
    if (scales.size() < 2) throw Error(ErrorKind::invalid_parameter, "scale ladder needs at least two rungs");
    for (std::size_t k = 0; k < scales.size(); ++k) {
      if (!(scales[k] > 0.0) || !std::isfinite(scales[k]) || (k > 0 && !(scales[k] > scales[k - 1]))) {
        throw Error(ErrorKind::invalid_parameter, "scale ladder must be positive and strictly increasing");
      }
    }
    if (kind == ApproachKind::koranyi && !(amplitude > 1.0)) {
      throw Error(ErrorKind::invalid_parameter, "a Koranyi family needs amplitude M > 1");
    }
    if (!(specialness >= 0.0) || !std::isfinite(specialness)) {
      throw Error(ErrorKind::invalid_parameter, "specialness C must be finite and >= 0");
    }
    if (!(nontangential >= 0.0) || !std::isfinite(nontangential)) {
      throw Error(ErrorKind::invalid_parameter, "non-tangentiality T must be finite and >= 0");
    }
  }

  std::string describe() const {
    std::string s = to_string(kind);
    switch (kind) {
      case ApproachKind::koranyi: s += "(M=" + detail::format_double(amplitude) + ")"; break;
      case ApproachKind::c_special_restricted:
      case ApproachKind::zero_special_restricted:
        s += "(C=" + detail::format_double(specialness) + ";T=" + detail::format_double(nontangential) + ")";
        break;
      case ApproachKind::radial: break;
    }
    return s;
  }
};

struct ApproachSequence {
  std::size_t id = 0;
  std::vector<SiegelPoint> points;
};

namespace detail {

// Direction and w-profile of sequence `id`. The first few ids are pinned to the
// extremes of the parameter box so a sweep always contains them.
struct SeedChoice {
  double u;  // position in [-1, 1] along the angular/imaginary parameter
  double v;  // position in [0, 1] along the w-profile parameter
};

inline SeedChoice seed_choice(CounterRng& rng, std::size_t id) {
  switch (id) {
    case 0: return {0.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {1.0, 1.0};
    case 3: return {-1.0, 1.0};
    default: return {rng.uniform(-1.0, 1.0), rng.uniform()};
  }
}

inline std::vector<SiegelPoint> koranyi_points(const ApproachFamily& f, double t, double a, const CVector& dir) {
  std::vector<SiegelPoint> pts;
  pts.reserve(f.scales.size());
  for (double r : f.scales) pts.emplace_back(Complex(r, t * r), scaled(dir, std::sqrt(a * r)));
  return pts;
}

}  // namespace detail

/// Deterministic sequences of `family`, one per id in [0, count).
inline std::vector<ApproachSequence> generate_sequences(const ApproachFamily& family, std::size_t count,
                                                        std::uint64_t seed) {
  family.validate();
  if (count == 0) throw Error(ErrorKind::invalid_parameter, "sequence count must be positive");
  const std::size_t nw = family.dimension - 1;
  std::vector<ApproachSequence> out;
  out.reserve(count);
  for (std::size_t id = 0; id < count; ++id) {
    CounterRng rng(seed, id);
    const detail::SeedChoice sc = detail::seed_choice(rng, id);
    const CVector dir = nw > 0 ? rng.unit_vector(nw) : CVector{};
    ApproachSequence seq;
    seq.id = id;
    switch (family.kind) {
      case ApproachKind::radial:
        for (double r : family.scales) seq.points.emplace_back(Complex(r, 0.0), CVector(nw, Complex{}));
        break;
      case ApproachKind::koranyi: {
        // |z + 1| / (x - |w|^2) stays below g = (1 + M) / 2 once
        // sqrt(1 + t^2) <= sqrt(g) and 1 / (1 - a) <= sqrt(g).
        const double g = 0.5 * (1.0 + family.amplitude);
        double t = sc.u * std::sqrt(g - 1.0);
        double a = nw > 0 ? sc.v * (1.0 - 1.0 / std::sqrt(g)) : 0.0;
        const KoranyiRegion region = KoranyiRegion::siegel(family.amplitude);
        for (int attempt = 0;; ++attempt) {
          seq.points = detail::koranyi_points(family, t, a, dir);
          const bool inside = std::all_of(seq.points.begin(), seq.points.end(),
                                          [&](const SiegelPoint& p) { return koranyi_contains(region, p); });
          if (inside) break;
          if (attempt == 64) throw Error(ErrorKind::invalid_parameter, "cannot place a sequence inside the Koranyi region");
          t *= 0.5;
          a *= 0.5;
        }
        break;
      }
      case ApproachKind::c_special_restricted:
      case ApproachKind::zero_special_restricted: {
        const double theta = sc.u * std::atan(family.nontangential);
        const double s = sc.v * std::tanh(family.specialness);
        const double c = std::cos(theta);
        const Complex e = std::polar(1.0, theta);
        for (double r : family.scales) {
          // |w| = s_k sqrt(r cos(theta)) with s_k = s, or s / sqrt(r) for the 0-special kind.
          const double sk = family.kind == ApproachKind::c_special_restricted ? s : s / std::sqrt(r);
          seq.points.emplace_back(r * e, scaled(dir, sk * std::sqrt(r * c)));
        }
        break;
      }
    }
    out.push_back(std::move(seq));
  }
  return out;
}

/// Whether a classification matches the kind a sequence was generated as.
inline bool matches_kind(const SequenceClassification& cls, ApproachKind kind) {
  switch (kind) {
    case ApproachKind::koranyi: return cls.route_koranyi();
    case ApproachKind::c_special_restricted: return cls.route_special_restricted();
    case ApproachKind::zero_special_restricted: return cls.special && cls.restricted;
    case ApproachKind::radial: return cls.special && cls.restricted && cls.route_koranyi();
  }
  return false;
}

// ---------------------------------------------------------------------------
// Verdicts

enum class LimitKind { limit_exists, no_limit, inconclusive };

inline const char* to_string(LimitKind k) {
  switch (k) {
    case LimitKind::limit_exists: return "limit-exists";
    case LimitKind::no_limit: return "no-limit";
    case LimitKind::inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct SequenceTrace {
  std::string family;
  std::size_t seq_id = 0;
  std::vector<double> scales;
  std::vector<Complex> values;
  Complex tail() const { return values.back(); }
};

struct WitnessPair {
  std::string family_a;
  std::size_t seq_a = 0;
  Complex value_a;
  std::string family_b;
  std::size_t seq_b = 0;
  Complex value_b;
  double separation() const { return std::abs(value_a - value_b); }
};

/// The tail value of a sequence is h at its largest scale.
struct LimitVerdict {
  LimitKind verdict = LimitKind::inconclusive;
  std::optional<Complex> value;
  double spread = 0.0;
  double tol = 1e-3;
  std::optional<WitnessPair> witness;
  std::vector<SequenceTrace> traces;
  std::string reason;

  bool exists() const { return verdict == LimitKind::limit_exists; }
  std::string describe() const {
    std::string s = to_string(verdict);
    if (value) s += "(" + detail::format_complex(*value) + ")";
    return s;
  }
};

namespace detail {

inline LimitVerdict decide(std::vector<SequenceTrace> traces, double tol) {
  LimitVerdict v;
  v.tol = tol;
  if (traces.empty()) throw Error(ErrorKind::invalid_parameter, "no sequences to decide a limit from");
  // Farthest pair of tail values; traces are in a fixed order so ties resolve deterministically.
  std::size_t bi = 0, bj = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (std::size_t j = i + 1; j < traces.size(); ++j) {
      const double d = std::abs(traces[i].tail() - traces[j].tail());
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  v.spread = best;
  if (best < tol) {
    Complex mean{};
    for (const auto& t : traces) mean += t.tail();
    v.value = mean / static_cast<double>(traces.size());
    v.verdict = LimitKind::limit_exists;
  } else if (best > 10.0 * tol) {
    v.verdict = LimitKind::no_limit;
    v.witness = WitnessPair{traces[bi].family, traces[bi].seq_id, traces[bi].tail(),
                            traces[bj].family, traces[bj].seq_id, traces[bj].tail()};
  } else {
    v.verdict = LimitKind::inconclusive;
    v.reason = "spread " + format_double(best) + " lies between tol and 10 tol";
  }
  v.traces = std::move(traces);
  return v;
}

inline std::vector<SequenceTrace> trace_family(const ScalarFunction& h, const ApproachFamily& family,
                                               std::size_t count, std::uint64_t seed) {
  std::vector<SequenceTrace> traces;
  const std::string label = family.describe();
  for (const auto& seq : generate_sequences(family, count, seed)) {
    SequenceTrace tr;
    tr.family = label;
    tr.seq_id = seq.id;
    tr.scales = family.scales;
    for (std::size_t k = 0; k < seq.points.size(); ++k) {
      Complex value;
      try {
        value = h(seq.points[k]);
      } catch (const std::exception& e) {
        throw Error(ErrorKind::evaluation, label + " sequence " + std::to_string(seq.id) + " rung " +
                                               std::to_string(k) + ": " + e.what());
      }
      if (!is_finite(value)) {
        throw Error(ErrorKind::evaluation, label + " sequence " + std::to_string(seq.id) + ": non-finite value");
      }
      tr.values.push_back(value);
    }
    traces.push_back(std::move(tr));
  }
  return traces;
}

}  // namespace detail

inline LimitVerdict estimate_limit(const ScalarFunction& h, const ApproachFamily& family, double tol = 1e-3,
                                   std::size_t count = 64, std::uint64_t seed = 0) {
  if (!(tol > 0.0)) throw Error(ErrorKind::invalid_parameter, "limit tolerance must be positive");
  return detail::decide(detail::trace_family(h, family, count, seed), tol);
}

/// Pools every family of a sweep into one verdict, so a witness pair may span families.
inline LimitVerdict estimate_limit(const ScalarFunction& h, const std::vector<ApproachFamily>& families,
                                   double tol = 1e-3, std::size_t count = 64, std::uint64_t seed = 0) {
  if (!(tol > 0.0)) throw Error(ErrorKind::invalid_parameter, "limit tolerance must be positive");
  std::vector<SequenceTrace> all;
  for (const auto& f : families) {
    auto t = detail::trace_family(h, f, count, seed);
    all.insert(all.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  return detail::decide(std::move(all), tol);
}

// Sweeps standing in for the "every sequence" quantifiers.
inline const std::vector<double>& koranyi_amplitudes() {
  static const std::vector<double> v{1.5, 2.0, 4.0, 8.0, 16.0};
  return v;
}
inline const std::vector<double>& specialness_sweep() {
  static const std::vector<double> v{0.0, 0.25, 0.5, 1.0};
  return v;
}
inline const std::vector<double>& nontangential_sweep() {
  static const std::vector<double> v{0.0, 0.5, 1.0, 2.0};
  return v;
}

inline std::vector<ApproachFamily> k_limit_families(std::size_t n, const std::vector<double>& scales = decade_ladder()) {
  std::vector<ApproachFamily> out;
  for (double M : koranyi_amplitudes()) {
    out.push_back(ApproachFamily::koranyi(M, n));
    out.back().scales = scales;
  }
  return out;
}

inline std::vector<ApproachFamily> e_limit_families(std::size_t n, const std::vector<double>& scales = decade_ladder()) {
  std::vector<ApproachFamily> out;
  for (double C : specialness_sweep()) {
    for (double T : nontangential_sweep()) {
      out.push_back(ApproachFamily::c_special(C, T, n));
      out.back().scales = scales;
    }
  }
  return out;
}

inline std::vector<ApproachFamily> e0_limit_families(std::size_t n, const std::vector<double>& scales = decade_ladder()) {
  std::vector<ApproachFamily> out;
  for (double T : nontangential_sweep()) {
    out.push_back(ApproachFamily::zero_special(T, n));
    out.back().scales = scales;
  }
  return out;
}

inline LimitVerdict k_limit(const ScalarFunction& h, std::size_t n, double tol = 1e-3, std::size_t count = 64,
                            std::uint64_t seed = 0, const std::vector<double>& scales = decade_ladder()) {
  return estimate_limit(h, k_limit_families(n, scales), tol, count, seed);
}
inline LimitVerdict e_limit(const ScalarFunction& h, std::size_t n, double tol = 1e-3, std::size_t count = 64,
                            std::uint64_t seed = 0, const std::vector<double>& scales = decade_ladder()) {
  return estimate_limit(h, e_limit_families(n, scales), tol, count, seed);
}
inline LimitVerdict e0_limit(const ScalarFunction& h, std::size_t n, double tol = 1e-3, std::size_t count = 64,
                             std::uint64_t seed = 0, const std::vector<double>& scales = decade_ladder()) {
  return estimate_limit(h, e0_limit_families(n, scales), tol, count, seed);
}

// ---------------------------------------------------------------------------
// Julia-Wolff-Caratheodory at infinity

namespace detail {

inline double point_distance(const SiegelPoint& a, const SiegelPoint& b) {
  return std::sqrt(std::norm(a.z() - b.z()) + norm_sq(subtracted(a.w(), b.w())));
}

inline double multiplier_of(const SiegelMap& m) {
  if (auto lam = m.siegel_multiplier()) return *lam;
  const Orbit orbit = compute_orbit(m, SiegelPoint::base(m.dimension), 64);
  return estimate_multiplier(orbit).value;
}

inline void require_dw_infinity(const SiegelMap& m) {
  if (m.denjoy_wolff && !std::holds_alternative<AtInfinity>(*m.denjoy_wolff)) {
    throw Error(ErrorKind::invalid_parameter, m.name + ": Denjoy-Wolff point is not at infinity");
  }
}

}  // namespace detail

struct JwcReport {
  double lambda = 1.0;
  LimitVerdict ratio;   // rho~(phi) / rho~
  LimitVerdict defect;  // ‖phi - rho(phi)‖ / |rho~|
  bool part1 = false;
  bool part2 = false;
  bool ok() const { return part1 && part2; }
};

inline JwcReport jwc_check(const SiegelMap& m, const LinearProjection& rho, double tol = 1e-3, std::size_t count = 64,
                           std::uint64_t seed = 0) {
  detail::require_dw_infinity(m);
  JwcReport r;
  r.lambda = detail::multiplier_of(m);
  if (!(r.lambda >= 1.0)) throw Error(ErrorKind::invalid_parameter, m.name + ": multiplier below 1");
  const ScalarFunction ratio = [&](const SiegelPoint& q) { return rho.left_inverse(m(q)) / rho.left_inverse(q); };
  const ScalarFunction defect = [&](const SiegelPoint& q) {
    const SiegelPoint image = m(q);
    return Complex(detail::point_distance(image, rho.project(image)) / std::abs(rho.left_inverse(q)), 0.0);
  };
  r.ratio = e0_limit(ratio, m.dimension, tol, count, seed);
  r.defect = e0_limit(defect, m.dimension, tol, count, seed);
  r.part1 = r.ratio.exists() && std::abs(*r.ratio.value - r.lambda) < tol;
  r.part2 = r.defect.exists() && std::abs(*r.defect.value) < tol;
  return r;
}

struct LeftInverseReport {
  double lambda = 1.0;
  LimitVerdict precondition;  // E-limit of phi_1 / z
  LimitVerdict ratio;         // E-limit of rho~_f(phi) / rho~_f
  LimitVerdict tangential;    // E-limit of ‖phi'‖ / |z|
  bool ok = false;
  std::string reason;
};

inline LeftInverseReport left_inverse_ratio_check(const SiegelMap& m, const CVector& a, double tol = 1e-3,
                                                  std::size_t count = 64, std::uint64_t seed = 0) {
  detail::require_dw_infinity(m);
  const LinearProjection rho(a);
  LeftInverseReport r;
  r.lambda = detail::multiplier_of(m);
  const std::size_t n = m.dimension;
  r.precondition = e_limit([&](const SiegelPoint& q) { return m(q).z() / q.z(); }, n, tol, count, seed);
  if (!r.precondition.exists()) {
    r.ratio.verdict = LimitKind::inconclusive;
    r.ratio.reason = "E-limit of phi_1 / z is " + r.precondition.describe() + " (spread " +
                     detail::format_double(r.precondition.spread) + ")";
    r.tangential.verdict = LimitKind::inconclusive;
    r.tangential.reason = r.ratio.reason;
    r.reason = r.ratio.reason;
    return r;
  }
  r.ratio = e_limit([&](const SiegelPoint& q) { return rho.left_inverse(m(q)) / rho.left_inverse(q); }, n, tol,
                    count, seed);
  r.tangential = e_limit([&](const SiegelPoint& q) { return Complex(norm(m(q).w()) / std::abs(q.z()), 0.0); }, n,
                         tol, count, seed);
  const bool ratio_ok = r.ratio.exists() && std::abs(*r.ratio.value - r.lambda) < tol;
  const bool tangential_ok = r.tangential.exists() && std::abs(*r.tangential.value) < tol;
  r.ok = ratio_ok && tangential_ok;
  if (!ratio_ok) r.reason = "left-inverse ratio is " + r.ratio.describe();
  if (!tangential_ok) r.reason += (r.reason.empty() ? "" : "; ") + std::string("‖phi'‖/|z| is ") + r.tangential.describe();
  return r;
}

// ---------------------------------------------------------------------------
// Projection invariance

/// k(p_1(Z), rho_a(Z)) from the closed form
/// atanh sqrt((|2‖a‖^2 + 2<w,a>|^2 + 4 x ‖a‖^2) / (x^2 |2 + 2‖a‖^2/x + 2<w,a>/x|^2)).
inline double projection_distance_closed_form(const SiegelPoint& q, const CVector& a) {
  const double x = q.x();
  const double na = norm_sq(a);
  const Complex wa = inner(q.w(), a);
  const double num = std::norm(2.0 * na + 2.0 * wa) + 4.0 * x * na;
  const double den = x * x * std::norm(2.0 + 2.0 * na / x + 2.0 * wa / x);
  return std::atanh(std::sqrt(num / den));
}

struct ProjectionReport {
  std::vector<double> distance;  // closed form, every term
  std::vector<double> generic;   // kobayashi_distance(p_1(Z), rho_a(Z))
  std::size_t tail_start = 0;
  double tail_max = 0.0;
  double oracle_gap = 0.0;       // max |closed form - generic|
  bool below_tol = false;
  bool tail_monotone = false;
  double c_p1 = 0.0;             // tail sup of k(Z, p_1(Z))
  double c_rho = 0.0;            // tail sup of k(Z, rho_a(Z))
  bool same_c = false;           // |c_p1 - c_rho| <= tail_max + tol
  bool restricted_p1 = false;
  bool restricted_rho = false;
  bool ok() const { return below_tol && same_c && restricted_p1 == restricted_rho; }
};

inline ProjectionReport projection_invariance_check(const std::vector<SiegelPoint>& points, const CVector& a,
                                                    double tol = 1e-2) {
  if (points.size() < 2) throw Error(ErrorKind::orbit_too_short, "need at least two points");
  const std::size_t n = points.size();
  ProjectionReport r;
  r.tail_start = n / 2;
  // Polynomial growth such as Z_k = (k, 0) never doubles across its tail, so
  // only ask the tail to stay well away from the start and end far out.
  double tail_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = r.tail_start; k < n; ++k) tail_min = std::min(tail_min, std::abs(points[k].z()));
  if (!(std::abs(points.back().z()) >= 10.0 && tail_min >= 2.0 * std::abs(points.front().z()))) {
    throw Error(ErrorKind::not_tending_to_infinity, "sequence does not tend to infinity");
  }
  const LinearProjection p1 = LinearProjection::standard(points.front().dimension());
  const LinearProjection rho(a);
  double t_p1 = 0.0, t_rho = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  r.tail_monotone = true;
  for (std::size_t k = 0; k < n; ++k) {
    const SiegelPoint& q = points[k];
    const SiegelPoint a1 = p1.project(q);
    const SiegelPoint ar = rho.project(q);
    const double d = projection_distance_closed_form(q, a);
    r.distance.push_back(d);
    r.generic.push_back(kobayashi_distance(a1, ar));
    r.oracle_gap = std::max(r.oracle_gap, std::abs(d - r.generic.back()));
    if (k >= r.tail_start) {
      r.tail_max = std::max(r.tail_max, d);
      if (d > prev + 1e-15) r.tail_monotone = false;
      prev = d;
      r.c_p1 = std::max(r.c_p1, kobayashi_distance(q, a1));
      r.c_rho = std::max(r.c_rho, kobayashi_distance(q, ar));
      t_p1 = std::max(t_p1, std::abs(a1.y()) / a1.x());
      t_rho = std::max(t_rho, std::abs(ar.y()) / ar.x());
    }
  }
  r.below_tol = r.tail_max < tol;
  r.same_c = std::abs(r.c_p1 - r.c_rho) <= r.tail_max + tol;
  r.restricted_p1 = t_p1 <= tolerance::koranyi_cap;
  r.restricted_rho = t_rho <= tolerance::koranyi_cap;
  return r;
}

// ---------------------------------------------------------------------------
// Restricted K-limit on the ball side

/// (1 - <phi(p), e_1>) / (1 - <p, e_1>) along zero-special restricted families
/// carried to the ball by the Cayley transform; the limit should be c.
inline LimitVerdict ball_restricted_ratio_check(const BallMap& m, double tol = 1e-3, std::size_t count = 64,
                                                std::uint64_t seed = 0) {
  const std::size_t n = m.dimension;
  const ScalarFunction h = [&](const SiegelPoint& q) {
    const BallPoint p = cayley_to_ball(q);
    const BallPoint image = m(p);
    return (1.0 - image[0]) / (1.0 - p[0]);
  };
  return e0_limit(h, n, tol, count, seed);
}

}  // namespace valiron
