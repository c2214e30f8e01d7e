#pragma once

// Ball / Siegel-domain geometry: points, the Cayley correspondence, horoballs,
// Koranyi regions, the Kobayashi distance and the automorphisms fixing infinity.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "valiron/errors.hpp"
#include "valiron/linalg.hpp"
#include "valiron/tolerances.hpp"

namespace valiron {

enum class Domain { ball, siegel };

/// Symbolic vertex at infinity of the Siegel domain.
struct AtInfinity {
  friend bool operator==(AtInfinity, AtInfinity) { return true; }
};

/// A point of the unit ball of C^N.
///
/// Stores 1 - ‖p‖^2 alongside the coordinates. When the point comes from the
/// Siegel side the gap is taken from the exact height formula instead of the
/// cancelling subtraction, which keeps distances accurate near the sphere.
class BallPoint {
 public:
  explicit BallPoint(CVector coords) : coords_(std::move(coords)) {
    gap_ = 1.0 - valiron::norm_sq(coords_);
    validate();
  }

  static BallPoint with_gap(CVector coords, double gap) {
    BallPoint p(std::move(coords), gap, Unchecked{});
    p.validate();
    return p;
  }

  static BallPoint origin(std::size_t n) { return BallPoint(CVector(n, Complex{})); }

  const CVector& coords() const noexcept { return coords_; }
  std::size_t dimension() const noexcept { return coords_.size(); }
  const Complex& operator[](std::size_t j) const { return coords_.at(j); }
  double norm_sq() const { return valiron::norm_sq(coords_); }
  /// 1 - ‖p‖^2.
  double gap() const noexcept { return gap_; }

 private:
  struct Unchecked {};
  BallPoint(CVector coords, double gap, Unchecked) : coords_(std::move(coords)), gap_(gap) {}

  void validate() const {
    if (coords_.empty()) throw Error(ErrorKind::invalid_parameter, "ball point needs N >= 1");
    if (!all_finite(coords_) || !std::isfinite(gap_)) {
      throw Error(ErrorKind::domain, "ball point has non-finite coordinates");
    }
    if (!(gap_ > tolerance::boundary_slack)) {
      throw Error(ErrorKind::domain, "point is not inside the unit ball (1 - |p|^2 = " +
                                         std::to_string(gap_) + ")");
    }
  }

  CVector coords_;
  double gap_ = 1.0;
};

/// A point of the unit sphere, used as a Denjoy-Wolff point or Koranyi vertex.
class BoundaryDirection {
 public:
  explicit BoundaryDirection(CVector coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw Error(ErrorKind::invalid_parameter, "direction needs N >= 1");
    if (std::abs(valiron::norm_sq(coords_) - 1.0) > tolerance::unit_norm) {
      throw Error(ErrorKind::invalid_parameter, "boundary direction must have unit norm");
    }
  }

  static BoundaryDirection e1(std::size_t n) {
    CVector c(n, Complex{});
    c.at(0) = 1.0;
    return BoundaryDirection(std::move(c));
  }

  const CVector& coords() const noexcept { return coords_; }
  std::size_t dimension() const noexcept { return coords_.size(); }

 private:
  CVector coords_;
};

/// A point (z, w) of the Siegel domain Re z > ‖w‖^2, w in C^{N-1}.
class SiegelPoint {
 public:
  explicit SiegelPoint(Complex z, CVector w = {}) : z_(z), w_(std::move(w)) {
    if (!is_finite(z_) || !all_finite(w_)) {
      throw Error(ErrorKind::domain, "Siegel point has non-finite coordinates");
    }
    const double wn = valiron::norm_sq(w_);
    const double h = z_.real() - wn;
    const double scale = std::max(std::abs(z_.real()), wn);
    if (!(h > tolerance::boundary_slack * scale) || !(z_.real() > 0.0)) {
      throw Error(ErrorKind::domain, "point is not inside the Siegel domain (Re z - |w|^2 = " +
                                         std::to_string(h) + ")");
    }
  }

  static SiegelPoint base(std::size_t n) { return SiegelPoint(1.0, CVector(n - 1, Complex{})); }

  Complex z() const noexcept { return z_; }
  const CVector& w() const noexcept { return w_; }
  std::size_t dimension() const noexcept { return w_.size() + 1; }
  double x() const noexcept { return z_.real(); }
  double y() const noexcept { return z_.imag(); }
  double w_norm_sq() const { return valiron::norm_sq(w_); }
  double height() const { return z_.real() - w_norm_sq(); }

 private:
  Complex z_;
  CVector w_;
};

/// Re z - ‖w‖^2; the point lies in the horoball E(T) iff the value exceeds T.
inline double siegel_height(const SiegelPoint& q) { return q.height(); }

// ---------------------------------------------------------------------------
// Cayley correspondence

inline SiegelPoint cayley_to_siegel(const BallPoint& p) {
  const Complex z1 = p[0];
  const Complex denom = 1.0 - z1;
  if (denom == Complex{}) {
    throw Error(ErrorKind::boundary_input, "Cayley transform undefined at zeta_1 = 1");
  }
  CVector w(p.coords().begin() + 1, p.coords().end());
  for (auto& c : w) c /= denom;
  return SiegelPoint((1.0 + z1) / denom, std::move(w));
}

namespace detail {
inline CVector cayley_coords(const SiegelPoint& q) {
  const Complex zp1 = q.z() + 1.0;
  CVector coords;
  coords.reserve(q.dimension());
  coords.push_back((q.z() - 1.0) / zp1);
  for (const auto& c : q.w()) coords.push_back(2.0 * c / zp1);
  return coords;
}

// 1 - |C^{-1}(q)|^2 = 4 (Re z - |w|^2) / |z + 1|^2, arranged to avoid overflow.
inline double cayley_gap(const SiegelPoint& q, double height) {
  const double m = std::abs(q.z() + 1.0);
  return 4.0 * (height / m) / m;
}
}  // namespace detail

inline BallPoint cayley_to_ball(const SiegelPoint& q) {
  return BallPoint::with_gap(detail::cayley_coords(q), detail::cayley_gap(q, q.height()));
}

// ---------------------------------------------------------------------------
// Horoballs

/// |1 - <p, tau>|^2 / (1 - ‖p‖^2); p lies in E(t) iff the value is < 1/t.
inline double horoball_value(const BallPoint& p, const BoundaryDirection& tau) {
  if (p.dimension() != tau.dimension()) {
    throw Error(ErrorKind::invalid_parameter, "horoball: dimension mismatch");
  }
  return std::norm(1.0 - inner(p.coords(), tau.coords())) / p.gap();
}

// ---------------------------------------------------------------------------
// Koranyi regions

class KoranyiRegion {
 public:
  using Vertex = std::variant<AtInfinity, BoundaryDirection>;

  static KoranyiRegion ball(BoundaryDirection vertex, double R) {
    if (!(R > 0.5)) throw Error(ErrorKind::invalid_parameter, "ball Koranyi amplitude needs R > 1/2");
    return KoranyiRegion(Domain::ball, Vertex(std::move(vertex)), R);
  }

  static KoranyiRegion siegel(double M) {
    if (!(M > 1.0)) throw Error(ErrorKind::invalid_parameter, "Siegel Koranyi amplitude needs M > 1");
    return KoranyiRegion(Domain::siegel, Vertex(AtInfinity{}), M);
  }

  Domain domain() const noexcept { return domain_; }
  const Vertex& vertex() const noexcept { return vertex_; }
  double amplitude() const noexcept { return amplitude_; }

  /// K(e_1, R) <-> K(infinity, 2R).
  KoranyiRegion corresponding(std::size_t n) const {
    if (domain_ == Domain::siegel) return ball(BoundaryDirection::e1(n), amplitude_ / 2.0);
    return siegel(2.0 * amplitude_);
  }

 private:
  KoranyiRegion(Domain d, Vertex v, double a) : domain_(d), vertex_(std::move(v)), amplitude_(a) {}

  Domain domain_;
  Vertex vertex_;
  double amplitude_;
};

enum class Membership { inside, outside, boundary_band };

namespace detail {
inline Membership classify_margin(double margin, double scale) {
  if (std::abs(margin) <= tolerance::koranyi_band * scale) return Membership::boundary_band;
  return margin > 0.0 ? Membership::inside : Membership::outside;
}
}  // namespace detail

inline Membership koranyi_membership(const KoranyiRegion& region, const SiegelPoint& q) {
  if (region.domain() != Domain::siegel) {
    throw Error(ErrorKind::invalid_parameter, "Koranyi region and point live in different domains");
  }
  // ‖w‖^2 < Re z - |z + 1| / M
  const double rhs = q.x() - std::abs(q.z() + 1.0) / region.amplitude();
  const double lhs = q.w_norm_sq();
  const double scale = std::max({q.x(), std::abs(q.z() + 1.0) / region.amplitude(), lhs});
  return detail::classify_margin(rhs - lhs, scale);
}

inline Membership koranyi_membership(const KoranyiRegion& region, const BallPoint& p) {
  if (region.domain() != Domain::ball) {
    throw Error(ErrorKind::invalid_parameter, "Koranyi region and point live in different domains");
  }
  const auto& tau = std::get<BoundaryDirection>(region.vertex());
  // |1 - <z, tau>| < R (1 - ‖z‖^2)
  const double lhs = std::abs(1.0 - inner(p.coords(), tau.coords()));
  const double rhs = region.amplitude() * p.gap();
  return detail::classify_margin(rhs - lhs, std::max(lhs, rhs));
}

template <class Point>
bool koranyi_contains(const KoranyiRegion& region, const Point& point) {
  return koranyi_membership(region, point) == Membership::inside;
}

// ---------------------------------------------------------------------------
// Automorphisms of the Siegel domain fixing infinity

class SiegelAutomorphism {
 public:
  enum class Kind { scale_translate, heisenberg_translate, composite };

  /// T(u, v) = ((u - i y) / x, v / sqrt(x)).
  static SiegelAutomorphism scale_translate(double x, double y) {
    if (!(x > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      throw Error(ErrorKind::invalid_parameter, "scale-translate needs x > 0");
    }
    SiegelAutomorphism t(Kind::scale_translate);
    t.x_ = x;
    t.y_ = y;
    return t;
  }

  /// T(z, w) = (z + ‖a‖^2 + 2<w, a>, w + a).
  static SiegelAutomorphism heisenberg(CVector a) {
    if (!all_finite(a)) throw Error(ErrorKind::invalid_parameter, "heisenberg translation is not finite");
    SiegelAutomorphism t(Kind::heisenberg_translate);
    t.a_ = std::move(a);
    return t;
  }

  /// Factors are applied in order: factors[0] first.
  static SiegelAutomorphism composite(std::vector<SiegelAutomorphism> factors) {
    SiegelAutomorphism t(Kind::composite);
    t.factors_ = std::move(factors);
    return t;
  }

  static SiegelAutomorphism identity() { return scale_translate(1.0, 0.0); }

  Kind kind() const noexcept { return kind_; }
  double scale_x() const noexcept { return x_; }
  double scale_y() const noexcept { return y_; }
  const CVector& translation() const noexcept { return a_; }
  const std::vector<SiegelAutomorphism>& factors() const noexcept { return factors_; }

  SiegelPoint apply(const SiegelPoint& q) const {
    switch (kind_) {
      case Kind::scale_translate: {
        const double s = 1.0 / std::sqrt(x_);
        return SiegelPoint((q.z() - Complex(0.0, y_)) / x_, scaled(q.w(), s));
      }
      case Kind::heisenberg_translate: {
        if (a_.size() != q.w().size()) {
          throw Error(ErrorKind::invalid_parameter, "heisenberg translation has the wrong dimension");
        }
        const Complex z = q.z() + norm_sq(a_) + 2.0 * inner(q.w(), a_);
        return SiegelPoint(z, added(q.w(), a_));
      }
      case Kind::composite: {
        SiegelPoint out = q;
        for (const auto& f : factors_) out = f.apply(out);
        return out;
      }
    }
    return q;
  }

  SiegelAutomorphism inverse() const {
    switch (kind_) {
      case Kind::scale_translate: return scale_translate(1.0 / x_, -y_ / x_);
      case Kind::heisenberg_translate: return heisenberg(scaled(a_, -1.0));
      case Kind::composite: {
        std::vector<SiegelAutomorphism> inv;
        inv.reserve(factors_.size());
        for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) inv.push_back(it->inverse());
        return composite(std::move(inv));
      }
    }
    return *this;
  }

  SiegelPoint apply_inverse(const SiegelPoint& q) const { return inverse().apply(q); }

 private:
  explicit SiegelAutomorphism(Kind k) : kind_(k) {}

  Kind kind_;
  double x_ = 1.0;
  double y_ = 0.0;
  CVector a_;
  std::vector<SiegelAutomorphism> factors_;
};

inline SiegelPoint apply_automorphism(const SiegelAutomorphism& t, const SiegelPoint& q) {
  return t.apply(q);
}

/// The automorphism T_n(z, w) = ((z - i y_n) / x_n, w / sqrt(x_n)).
inline SiegelAutomorphism orbit_normalizer(double x_n, double y_n) {
  return SiegelAutomorphism::scale_translate(x_n, y_n);
}

/// Automorphism fixing infinity that sends p to the base point (1, 0).
inline SiegelAutomorphism normalizing_automorphism(const SiegelPoint& p) {
  // Heisenberg by -w_p sends p to (z_p - ‖w_p‖^2, 0), then scale by the height.
  return SiegelAutomorphism::composite(
      {SiegelAutomorphism::heisenberg(scaled(p.w(), -1.0)),
       SiegelAutomorphism::scale_translate(p.height(), p.y())});
}

// ---------------------------------------------------------------------------
// Kobayashi distance

/// The involution of the ball exchanging a and 0:
/// phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>), s_a = sqrt(1 - ‖a‖^2).
inline CVector mobius_involution(const BallPoint& a, std::span<const Complex> z) {
  if (z.size() != a.dimension()) throw Error(ErrorKind::invalid_parameter, "involution: dimension mismatch");
  const double an = a.norm_sq();
  const Complex za = inner(z, a.coords());
  const Complex denom = 1.0 - za;
  const double s = std::sqrt(a.gap());
  CVector out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const Complex pz = an > 0.0 ? za / an * a[j] : Complex{};
    const Complex qz = z[j] - pz;
    out[j] = (a[j] - pz - s * qz) / denom;
  }
  return out;
}

namespace detail {
// atanh(r) given r and an independently accurate 1 - r^2.
inline double atanh_with_gap(double r, double one_minus_r2) {
  if (r <= 0.0) return 0.0;
  if (r < 0.5) return std::atanh(r);
  return std::log1p(r) - 0.5 * std::log(one_minus_r2);
}
}  // namespace detail

inline double kobayashi_distance(const BallPoint& p, const BallPoint& q) {
  if (p.dimension() != q.dimension()) throw Error(ErrorKind::invalid_parameter, "distance: dimension mismatch");
  if (p.coords() == q.coords()) return 0.0;
  const CVector image = mobius_involution(p, q.coords());
  const double r = norm(image);
  // 1 - ‖phi_p(q)‖^2 = (1 - ‖p‖^2)(1 - ‖q‖^2) / |1 - <q, p>|^2
  const double gap = p.gap() * q.gap() / std::norm(1.0 - inner(q.coords(), p.coords()));
  return detail::atanh_with_gap(r, gap);
}

/// Siegel-side distance: move p to (1, 0) by an automorphism fixing infinity,
/// go to the ball through the Cayley map (p lands on the origin) and use
/// k(0, z) = atanh ‖z‖.
inline double kobayashi_distance(const SiegelPoint& p, const SiegelPoint& q) {
  if (p.dimension() != q.dimension()) throw Error(ErrorKind::invalid_parameter, "distance: dimension mismatch");
  if (p.z() == q.z() && p.w() == q.w()) return 0.0;
  const SiegelPoint moved = normalizing_automorphism(p).apply(q);
  // Heights scale exactly under the normalizer; reuse that for the gap.
  const double gap = detail::cayley_gap(moved, q.height() / p.height());
  return detail::atanh_with_gap(norm(detail::cayley_coords(moved)), gap);
}

/// k((z, 0), (z, w)) = atanh(‖w‖ / sqrt(Re z)).
inline double distance_to_line(const SiegelPoint& q) {
  return std::atanh(std::sqrt(q.w_norm_sq() / q.x()));
}

/// Hyperbolic distance between two points of the right half-plane.
inline double halfplane_distance(Complex a, Complex b) {
  return kobayashi_distance(SiegelPoint(a), SiegelPoint(b));
}

// ---------------------------------------------------------------------------
// Linear projections at infinity

/// rho(z, w) = (z + 2‖a‖^2 + 2<w, a>, -a), the retraction onto the complex
/// geodesic T_a^{-1}(H x {0}). a = 0 gives p_1(z, w) = (z, 0).
class LinearProjection {
 public:
  explicit LinearProjection(CVector a) : a_(std::move(a)) {
    if (!all_finite(a_)) throw Error(ErrorKind::invalid_parameter, "projection parameter is not finite");
  }

  static LinearProjection standard(std::size_t n) { return LinearProjection(CVector(n - 1, Complex{})); }

  const CVector& a() const noexcept { return a_; }

  SiegelPoint project(const SiegelPoint& q) const {
    check(q);
    const Complex z = q.z() + 2.0 * norm_sq(a_) + 2.0 * inner(q.w(), a_);
    CVector w = scaled(a_, -1.0);
    try {
      return SiegelPoint(z, std::move(w));
    } catch (const Error&) {
      throw Error(ErrorKind::domain, "projected point falls outside the Siegel domain");
    }
  }

  /// Scalar factor rho~(z, w) = z + ‖a‖^2 + 2<w, a> (left inverse of the geodesic).
  Complex left_inverse(const SiegelPoint& q) const {
    check(q);
    return q.z() + norm_sq(a_) + 2.0 * inner(q.w(), a_);
  }

  SiegelAutomorphism conjugator() const { return SiegelAutomorphism::heisenberg(a_); }

 private:
  void check(const SiegelPoint& q) const {
    if (q.w().size() != a_.size()) throw Error(ErrorKind::invalid_parameter, "projection: dimension mismatch");
  }

  CVector a_;
};

inline SiegelPoint project(const LinearProjection& rho, const SiegelPoint& q) { return rho.project(q); }

}  // namespace valiron
