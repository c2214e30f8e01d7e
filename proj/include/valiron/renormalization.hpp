#pragma once

// Renormalized iteration converging to a solution of sigma o phi = lambda sigma.
//
// With x_n = Re pi_1 phi^n(base) and L_n(z, w) = (z / x_n, w / sqrt(x_n)) the
// tracked quantity is S_n = L_n o phi^n, advanced as
//   S_{n+1} = L_{n+1} o phi o L_n^{-1} (S_n),
// so every stored value stays O(1) while sigma_n = pi_1 o S_n.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "valiron/dynamics.hpp"
#include "valiron/errors.hpp"
#include "valiron/geometry.hpp"
#include "valiron/maps.hpp"
#include "valiron/tolerances.hpp"

namespace valiron {

class EvaluationGrid {
 public:
  explicit EvaluationGrid(std::vector<SiegelPoint> points) : points_(std::move(points)) {
    if (points_.empty()) throw Error(ErrorKind::degenerate_grid, "evaluation grid is empty");
    const std::size_t n = points_.front().dimension();
    for (const auto& p : points_) {
      if (p.dimension() != n) throw Error(ErrorKind::degenerate_grid, "grid points have mixed dimensions");
      if (!(p.height() >= 0.1)) {
        throw Error(ErrorKind::degenerate_grid, "grid point with Re z - |w|^2 < 0.1");
      }
    }
  }

  /// z in {1, 2, 4} + {0, i/2, -i/2}; w = 0 or a quarter-height vector along
  /// the diagonal, rotated by i^k.
  static EvaluationGrid standard(std::size_t n) {
    std::vector<SiegelPoint> pts;
    for (double x : {1.0, 2.0, 4.0}) {
      for (double y : {0.0, 0.5, -0.5}) {
        pts.emplace_back(Complex(x, y), CVector(n - 1, Complex{}));
        if (n < 2) continue;
        const double r = 0.5 * std::sqrt(x) / std::sqrt(static_cast<double>(n - 1));
        const Complex rot[] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
        for (const Complex& u : rot) pts.emplace_back(Complex(x, y), CVector(n - 1, r * u));
      }
    }
    return EvaluationGrid(std::move(pts));
  }

  const std::vector<SiegelPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dimension() const { return points_.front().dimension(); }

 private:
  std::vector<SiegelPoint> points_;
};

/// S_n for a list of tracked points plus the base-orbit scalars at step n.
struct RenormalizedState {
  std::size_t n = 0;
  double x = 1.0;      // x_n, kept finite by the magnitude guard
  double log_x = 0.0;  // log x_n
  std::vector<SiegelPoint> tracked;  // S_n(Z) for every tracked Z
  std::size_t base_index = 0;        // position of the base point in `tracked`

  Complex sigma(std::size_t i) const { return tracked.at(i).z(); }
  const SiegelPoint& base() const { return tracked.at(base_index); }
};

namespace detail {
inline SiegelPoint normalize(const SiegelPoint& p, double x) {
  return SiegelPoint(p.z() / x, scaled(p.w(), 1.0 / std::sqrt(x)));
}

inline SiegelPoint lift(const SiegelPoint& s, double x) {
  return SiegelPoint(s.z() * x, scaled(s.w(), std::sqrt(x)));
}

inline double state_magnitude(const SiegelPoint& s) { return std::max(std::abs(s.z()), norm(s.w())); }
}  // namespace detail

inline RenormalizedState initial_state(const std::vector<SiegelPoint>& points, const SiegelPoint& base) {
  RenormalizedState st;
  st.x = base.x();
  st.log_x = std::log(st.x);
  st.tracked.reserve(points.size() + 1);
  st.tracked.push_back(detail::normalize(base, st.x));
  st.base_index = 0;
  for (const auto& p : points) st.tracked.push_back(detail::normalize(p, st.x));
  return st;
}

/// One step of the stable recursion. Throws scale-overflow if phi would have to
/// be evaluated beyond the overflow threshold.
inline RenormalizedState advance(const RenormalizedState& st, const SiegelMap& m) {
  if (st.log_x > std::log(tolerance::overflow_threshold)) {
    throw Error(ErrorKind::scale_overflow, "x_n exceeds 1e300; the black-box map cannot be evaluated there");
  }
  std::vector<SiegelPoint> images;
  images.reserve(st.tracked.size());
  for (const auto& s : st.tracked) images.push_back(m(detail::lift(s, st.x)));
  const double x_next = images[st.base_index].x();
  RenormalizedState next;
  next.n = st.n + 1;
  next.x = x_next;
  next.log_x = st.log_x + std::log(x_next / st.x);
  next.base_index = st.base_index;
  next.tracked.reserve(images.size());
  for (const auto& p : images) next.tracked.push_back(detail::normalize(p, x_next));
  return next;
}

/// sigma_N evaluated at arbitrary points by replaying the recorded base-orbit
/// scalars x_0..x_N, optionally precomposed with an automorphism and scaled.
class SampledSigma {
 public:
  SampledSigma() = default;
  SampledSigma(SiegelMap m, std::vector<double> x_history)
      : map_(m), target_(std::move(m)), x_(std::move(x_history)) {}

  std::size_t steps() const { return x_.empty() ? 0 : x_.size() - 1; }
  /// The map replayed by the recursion.
  const SiegelMap& map() const { return map_; }
  /// The map this sigma intertwines (differs from map() after transport).
  const SiegelMap& target() const { return target_; }
  const std::vector<double>& x_history() const { return x_; }

  Complex operator()(const SiegelPoint& z) const {
    SiegelPoint p = pre_ ? pre_->apply(z) : z;
    SiegelPoint s = detail::normalize(p, x_.at(0));
    for (std::size_t k = 0; k + 1 < x_.size(); ++k) s = detail::normalize(map_(detail::lift(s, x_[k])), x_[k + 1]);
    return factor_ * s.z();
  }

  SampledSigma precomposed(const SiegelAutomorphism& t, double factor, SiegelMap target) const {
    SampledSigma out = *this;
    out.target_ = std::move(target);
    out.pre_ = pre_ ? SiegelAutomorphism::composite({t, *pre_}) : t;
    out.factor_ *= factor;
    return out;
  }

 private:
  SiegelMap map_;
  SiegelMap target_;
  std::vector<double> x_;
  std::optional<SiegelAutomorphism> pre_;
  double factor_ = 1.0;
};

struct ValironOptions {
  double tol = 1e-8;
  std::size_t n_max = 200;
  std::size_t pre_orbit = 64;
  std::size_t consecutive = 3;
  double monotone_tol = 1e-9;
};

struct ValironResult {
  std::string map_name;
  Estimate lambda;
  std::optional<Estimate> L;
  SequenceClassification base_classification;

  std::vector<SiegelPoint> grid;
  std::vector<Complex> sigma;        // sigma on the grid
  std::vector<Complex> sigma_image;  // sigma at phi(grid point)
  std::vector<double> residual;      // |sigma(phi Z) - lambda sigma(Z)| / (1 + |sigma(Z)|)
  std::vector<double> residual_abs;
  Complex sigma_base;                // sigma(base), tends to 1 + i L
  Complex sigma_base_image;          // sigma(phi(base))

  bool converged = false;
  std::size_t n_stop = 0;
  std::vector<double> cauchy_history;
  std::vector<double> x_history;  // x_0..x_{n_stop}
  std::vector<double> log_x_history;

  double monotone_worst_increase = 0.0;
  bool monotone = true;
  double initial_magnitude = 0.0;
  double max_state_magnitude = 0.0;
  bool non_constant = false;

  bool outside_hypotheses = false;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;

  SampledSigma sigma_fn;
  RenormalizedState final_state;
};

/// |sigma(phi(Z)) - lambda sigma(Z)| / (1 + |sigma(Z)|) at each probe point.
inline std::vector<double> schroder_residual(const SiegelMap& m, double lambda,
                                             const std::function<Complex(const SiegelPoint&)>& sigma,
                                             const std::vector<SiegelPoint>& probe) {
  std::vector<double> out;
  out.reserve(probe.size());
  for (const auto& z : probe) {
    Complex s, s_image;
    try {
      s = sigma(z);
      s_image = sigma(m(z));
    } catch (const Error& e) {
      throw Error(ErrorKind::evaluation, std::string("probe point not evaluable: ") + e.what());
    }
    out.push_back(std::abs(s_image - lambda * s) / (1.0 + std::abs(s)));
  }
  return out;
}

/// max over the grid of the relative gap in sigma_n(phi Z) = (x_{n+1}/x_n) sigma_{n+1}(Z).
/// `tracked` entries [1, 1 + k) are grid points and [1 + k, 1 + 2k) their images.
inline double intertwining_identity_check(const RenormalizedState& st, const SiegelMap& m) {
  const RenormalizedState next = advance(st, m);
  const std::size_t k = (st.tracked.size() - 1) / 2;
  const double ratio = next.x / st.x;
  double worst = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const Complex lhs = st.sigma(1 + k + i);
    const Complex rhs = ratio * next.sigma(1 + i);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));
  }
  return worst;
}

inline RenormalizedState initial_state_with_images(const EvaluationGrid& grid, const SiegelMap& m,
                                                   const SiegelPoint& base) {
  std::vector<SiegelPoint> pts = grid.points();
  for (const auto& p : grid.points()) pts.push_back(m(p));
  return initial_state(pts, base);
}

inline ValironResult run_valiron(const SiegelMap& m, const EvaluationGrid& grid, const SiegelPoint& base,
                                 const ValironOptions& opt = {}) {
  if (grid.dimension() != m.dimension || base.dimension() != m.dimension) {
    throw Error(ErrorKind::degenerate_grid, "grid dimension differs from the map dimension");
  }
  if (m.denjoy_wolff && !std::holds_alternative<AtInfinity>(*m.denjoy_wolff)) {
    throw Error(ErrorKind::invalid_parameter, "renormalization needs the Denjoy-Wolff point at infinity");
  }
  ValironResult r;
  r.map_name = m.name;
  r.grid = grid.points();

  const Orbit pre = compute_orbit(m, base, opt.pre_orbit);
  r.base_classification = classify_sequence(pre.points);
  r.lambda = estimate_multiplier(pre);
  if (!(r.lambda.value > 1.0 + tolerance::hyperbolic_margin)) {
    throw Error(ErrorKind::non_hyperbolic, "multiplier estimate " + detail::format_double(r.lambda.value) +
                                               " is not above 1 + 1e-6");
  }
  const auto& cls = r.base_classification;
  if (cls.restricted) {
    r.L = estimate_L(pre).L;
  }
  if (!cls.special || !cls.restricted) {
    r.outside_hypotheses = true;
    if (!cls.special) {
      r.warnings.push_back(cls.c_special ? "base orbit is only C-special (C = " + detail::format_double(*cls.c_special) +
                                               "); outside the theorem's hypotheses"
                                         : "base orbit is not C-special; outside the theorem's hypotheses");
    }
    if (!cls.restricted) r.warnings.push_back("base orbit is not restricted; outside the theorem's hypotheses");
  }
  r.notes.push_back("sigma is normalized by x_n, so sigma(base) tends to 1 + iL");
  r.notes.push_back("the second hypothesis (a limit along special restricted sequences) is not checked");

  const std::size_t k = grid.size();
  RenormalizedState st = initial_state_with_images(grid, m, base);
  // The base image is tracked too, for the non-constancy certificate.
  st.tracked.push_back(detail::normalize(m(base), st.x));
  const std::size_t base_image = st.tracked.size() - 1;

  auto magnitude = [](const RenormalizedState& s) {
    double mx = 0.0;
    for (const auto& p : s.tracked) mx = std::max(mx, detail::state_magnitude(p));
    return mx;
  };
  auto distances = [&](const RenormalizedState& s) {
    std::vector<double> d(k);
    for (std::size_t i = 0; i < k; ++i) d[i] = kobayashi_distance(s.base(), s.tracked[1 + i]);
    return d;
  };

  r.initial_magnitude = magnitude(st);
  r.max_state_magnitude = r.initial_magnitude;
  r.x_history.push_back(st.x);
  r.log_x_history.push_back(st.log_x);
  std::vector<double> dist = distances(st);

  std::size_t below = 0;
  while (st.n < opt.n_max) {
    RenormalizedState next = advance(st, m);
    double step = 0.0;
    for (std::size_t i = 0; i < k; ++i) step = std::max(step, std::abs(next.sigma(1 + i) - st.sigma(1 + i)));
    r.cauchy_history.push_back(step);
    r.max_state_magnitude = std::max(r.max_state_magnitude, magnitude(next));
    const std::vector<double> d = distances(next);
    for (std::size_t i = 0; i < k; ++i) {
      r.monotone_worst_increase = std::max(r.monotone_worst_increase, d[i] - dist[i]);
    }
    dist = d;
    st = std::move(next);
    r.x_history.push_back(st.x);
    r.log_x_history.push_back(st.log_x);
    below = step < opt.tol ? below + 1 : 0;
    if (below >= opt.consecutive) {
      r.converged = true;
      break;
    }
  }
  r.n_stop = st.n;
  r.monotone = r.monotone_worst_increase <= opt.monotone_tol;

  const double lam = r.lambda.value;
  for (std::size_t i = 0; i < k; ++i) {
    const Complex s = st.sigma(1 + i);
    const Complex si = st.sigma(1 + k + i);
    r.sigma.push_back(s);
    r.sigma_image.push_back(si);
    r.residual_abs.push_back(std::abs(si - lam * s));
    r.residual.push_back(r.residual_abs.back() / (1.0 + std::abs(s)));
  }
  r.sigma_base = st.sigma(st.base_index);
  r.sigma_base_image = st.sigma(base_image);
  r.non_constant = std::abs(r.sigma_base_image - lam * r.sigma_base) < opt.tol &&
                   std::abs(r.sigma_base_image - r.sigma_base) >= (lam - 1.0) * (1.0 - 10.0 * opt.tol);
  if (!r.converged) r.warnings.push_back("no convergence within n_max = " + std::to_string(opt.n_max) + " steps");
  if (!r.monotone) r.warnings.push_back("distance diagnostic increased by " + detail::format_double(r.monotone_worst_increase));
  for (const auto& s : r.sigma) {
    if (s.real() < -tolerance::boundary_slack) {
      r.warnings.push_back("sigma has negative real part on the grid");
      break;
    }
  }

  r.sigma_fn = SampledSigma(m, r.x_history);
  // Drop the base-image entry so the state layout is [base, grid, images].
  st.tracked.pop_back();
  r.final_state = std::move(st);
  return r;
}

inline ValironResult run_valiron(const SiegelMap& m, const ValironOptions& opt = {}) {
  return run_valiron(m, EvaluationGrid::standard(m.dimension), SiegelPoint::base(m.dimension), opt);
}

/// Result for T o phi o T^{-1}: sigma~ = sigma o T^{-1} / Re sigma(T^{-1}(1, 0)),
/// the scaling that keeps Re sigma~(1, 0) = 1 as the renormalized limit requires.
inline ValironResult conjugation_transport(const ValironResult& r, const SiegelAutomorphism& t) {
  ValironResult out = r;
  const SiegelAutomorphism inv = t.inverse();
  const std::size_t n = r.grid.empty() ? 1 : r.grid.front().dimension();
  const Complex at_base = r.sigma_fn(inv.apply(SiegelPoint::base(n)));
  const double factor = 1.0 / at_base.real();
  const SiegelMap conj = conjugate(r.sigma_fn.target(), t);
  out.sigma_fn = r.sigma_fn.precomposed(inv, factor, conj);
  out.map_name = conj.name;
  out.sigma.clear();
  out.sigma_image.clear();
  out.residual.clear();
  out.residual_abs.clear();
  for (const auto& z : out.grid) {
    const Complex s = out.sigma_fn(z);
    const Complex si = out.sigma_fn(conj(z));
    out.sigma.push_back(s);
    out.sigma_image.push_back(si);
    out.residual_abs.push_back(std::abs(si - r.lambda.value * s));
    out.residual.push_back(out.residual_abs.back() / (1.0 + std::abs(s)));
  }
  out.sigma_base = out.sigma_fn(SiegelPoint::base(n));
  out.sigma_base_image = out.sigma_fn(conj(SiegelPoint::base(n)));
  out.notes.push_back("transported by an automorphism fixing infinity");
  return out;
}

/// Theta = sigma o C on the ball, with its Schroder residual on the Cayley
/// preimage of the grid.
struct BallTheta {
  SampledSigma sigma;
  double lambda = 1.0;
  std::vector<BallPoint> grid;
  std::vector<Complex> values;
  std::vector<double> residual;

  Complex operator()(const BallPoint& p) const { return sigma(cayley_to_siegel(p)); }
};

inline BallTheta ball_side_theta(const ValironResult& r) {
  if (!r.converged) throw Error(ErrorKind::evaluation, "ball-side Theta needs a converged result");
  BallTheta th;
  th.sigma = r.sigma_fn;
  th.lambda = r.lambda.value;
  const BallMap bm = make_ball_map_from_siegel(r.sigma_fn.target());
  for (const auto& z : r.grid) {
    const BallPoint p = cayley_to_ball(z);
    const Complex v = th(p);
    th.grid.push_back(p);
    th.values.push_back(v);
    th.residual.push_back(std::abs(th(bm(p)) - th.lambda * v) / (1.0 + std::abs(v)));
  }
  return th;
}

}  // namespace valiron
