#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sampling.hpp"
#include "valiron/geometry.hpp"

using namespace valiron;

namespace {

std::vector<SiegelAutomorphism> automorphism_catalog(std::size_t n) {
  std::vector<SiegelAutomorphism> out;
  out.push_back(SiegelAutomorphism::identity());
  out.push_back(SiegelAutomorphism::scale_translate(4.0, 2.0));
  out.push_back(SiegelAutomorphism::scale_translate(0.3, -1.5));
  CVector a(n - 1, Complex(0.7, -0.2));
  out.push_back(SiegelAutomorphism::heisenberg(a));
  out.push_back(SiegelAutomorphism::composite(
      {SiegelAutomorphism::scale_translate(2.0, 0.5), SiegelAutomorphism::heisenberg(a)}));
  return out;
}

}  // namespace

TEST(Points, RejectOutsideDomain) {
  EXPECT_THROW(BallPoint(CVector{Complex(1.0, 0.0)}), Error);
  EXPECT_THROW(BallPoint(CVector{Complex(0.6, 0.0), Complex(0.0, 0.8)}), Error);
  EXPECT_THROW(SiegelPoint(1.0, CVector{Complex(1.0, 0.0)}), Error);
  EXPECT_THROW(SiegelPoint(-1.0), Error);
  EXPECT_THROW(BoundaryDirection(CVector{Complex(0.5, 0.0)}), Error);
  try {
    SiegelPoint(0.5, CVector{Complex(1.0, 0.0)});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
}

TEST(Cayley, BasePoints) {
  const SiegelPoint a = cayley_to_siegel(BallPoint(CVector{0.0, 0.0}));
  EXPECT_DOUBLE_EQ(a.x(), 1.0);
  EXPECT_DOUBLE_EQ(a.w_norm_sq(), 0.0);
  const SiegelPoint b = cayley_to_siegel(BallPoint(CVector{0.5, 0.0}));
  EXPECT_NEAR(std::abs(b.z() - 3.0), 0.0, 1e-15);
  const BallPoint c = cayley_to_ball(SiegelPoint(3.0, CVector{0.0}));
  EXPECT_NEAR(std::abs(c[0] - 0.5), 0.0, 1e-15);
  const BallPoint d = cayley_to_ball(SiegelPoint::base(3));
  EXPECT_EQ(norm(d.coords()), 0.0);
}

TEST(Cayley, RoundTripBothOrders) {
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const BallPoint p = testgen::ball_point(11, i, n);
      const BallPoint back = cayley_to_ball(cayley_to_siegel(p));
      EXPECT_LT(testgen::max_abs_diff(back.coords(), p.coords()), 1e-12);

      const SiegelPoint q = testgen::siegel_point(12, i, n);
      const SiegelPoint qq = cayley_to_siegel(cayley_to_ball(q));
      const double scale = 1.0 + std::abs(q.z());
      EXPECT_LT(testgen::siegel_diff(q, qq) / scale, 1e-12);
    }
  }
}

TEST(Cayley, ImageOfHeightTwoSliceIsInsideBall) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    CounterRng rng(13, i);
    const CVector w = scaled(rng.unit_vector(2), std::sqrt(2.0 * rng.uniform()) * 0.999);
    const BallPoint p = cayley_to_ball(SiegelPoint(2.0, w));
    // Independent check: recompute the norm from raw coordinates.
    EXPECT_LT(norm_sq(p.coords()), 1.0);
    EXPECT_NEAR(p.gap(), 1.0 - norm_sq(p.coords()), 1e-12);
  }
}

TEST(Cayley, RejectsBoundaryInput) {
  EXPECT_THROW(cayley_to_siegel(BallPoint::with_gap(CVector{1.0}, 0.5)), Error);
}

TEST(Horoball, ClosedForms) {
  const auto tau = BoundaryDirection::e1(2);
  EXPECT_DOUBLE_EQ(horoball_value(BallPoint::origin(2), tau), 1.0);
  for (double r : {0.1, 0.5, 0.9, 0.99}) {
    EXPECT_NEAR(horoball_value(BallPoint(CVector{r, 0.0}), tau), (1.0 - r) / (1.0 + r), 1e-14);
  }
}

TEST(Horoball, CorrespondsToInverseHeight) {
  const auto tau = BoundaryDirection::e1(3);
  for (std::uint64_t i = 0; i < 500; ++i) {
    const SiegelPoint q = testgen::siegel_point(14, i, 3);
    const double ball_side = horoball_value(cayley_to_ball(q), tau);
    EXPECT_NEAR(ball_side * q.height(), 1.0, 1e-9);
  }
}

TEST(Height, ClosedForms) {
  EXPECT_DOUBLE_EQ(siegel_height(SiegelPoint::base(2)), 1.0);
  EXPECT_DOUBLE_EQ(siegel_height(SiegelPoint(Complex(3.0, 4.0), CVector{Complex(0.6, 0.8)})), 2.0);
}

TEST(Koranyi, DirectSubstitution) {
  const auto k2 = KoranyiRegion::siegel(2.0);
  EXPECT_TRUE(koranyi_contains(k2, SiegelPoint(10.0, CVector{0.0})));
  EXPECT_FALSE(koranyi_contains(k2, SiegelPoint(1.0, CVector{std::sqrt(0.99)})));
  EXPECT_THROW(KoranyiRegion::siegel(1.0), Error);
  EXPECT_THROW(KoranyiRegion::ball(BoundaryDirection::e1(2), 0.5), Error);
  EXPECT_THROW(koranyi_contains(k2, BallPoint::origin(2)), Error);
}

TEST(Koranyi, RadialPointsEventuallyInEveryRegion) {
  for (double m : {1.1, 1.5, 4.0, 1024.0}) {
    const auto k = KoranyiRegion::siegel(m);
    EXPECT_TRUE(koranyi_contains(k, SiegelPoint(1e7, CVector{0.0})));
  }
}

TEST(Koranyi, BallSiegelCorrespondence) {
  int compared = 0;
  for (double r : {0.75, 1.0, 2.0, 8.0}) {
    const auto kb = KoranyiRegion::ball(BoundaryDirection::e1(2), r);
    const auto ks = kb.corresponding(2);
    EXPECT_DOUBLE_EQ(ks.amplitude(), 2.0 * r);
    for (std::uint64_t i = 0; i < 500; ++i) {
      const SiegelPoint q = testgen::siegel_point(15, i, 2);
      const auto ms = koranyi_membership(ks, q);
      const auto mb = koranyi_membership(kb, cayley_to_ball(q));
      if (ms == Membership::boundary_band || mb == Membership::boundary_band) continue;
      EXPECT_EQ(ms, mb) << "i=" << i << " R=" << r;
      ++compared;
    }
  }
  EXPECT_GT(compared, 1900);
}

TEST(Kobayashi, OriginFormula) {
  EXPECT_NEAR(kobayashi_distance(BallPoint::origin(2), BallPoint(CVector{0.5, 0.0})), 0.549306144334, 1e-11);
  EXPECT_NEAR(kobayashi_distance(BallPoint::origin(2), BallPoint(CVector{0.5, 0.0})), std::atanh(0.5), 1e-15);
}

TEST(Kobayashi, SpecialPairClosedForm) {
  const SiegelPoint p(4.0, CVector{0.0, 0.0});
  const SiegelPoint q(4.0, CVector{1.0, 0.0});
  EXPECT_NEAR(kobayashi_distance(p, q), std::atanh(0.5), 1e-14);
  EXPECT_NEAR(distance_to_line(q), std::atanh(0.5), 1e-15);
  for (std::uint64_t i = 0; i < 200; ++i) {
    const SiegelPoint z = testgen::siegel_point(16, i, 3);
    const SiegelPoint pz(z.z(), CVector(2, Complex{}));
    EXPECT_NEAR(kobayashi_distance(pz, z), std::atanh(std::sqrt(z.w_norm_sq() / z.x())), 1e-10);
  }
}

TEST(Kobayashi, AgreesWithTextbookFormula) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    const BallPoint p = testgen::ball_point(17, i, 3, 0.9);
    const BallPoint q = testgen::ball_point(18, i, 3, 0.9);
    EXPECT_NEAR(kobayashi_distance(p, q), testgen::ball_distance_oracle(p.coords(), q.coords()), 1e-10);
  }
}

TEST(Kobayashi, MetricAxioms) {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const SiegelPoint p = testgen::siegel_point(19, i, 2);
    const SiegelPoint q = testgen::siegel_point(20, i, 2);
    const SiegelPoint r = testgen::siegel_point(21, i, 2);
    const double pq = kobayashi_distance(p, q);
    EXPECT_GE(pq, 0.0);
    EXPECT_NEAR(pq, kobayashi_distance(q, p), 1e-10 * (1.0 + pq));
    EXPECT_EQ(kobayashi_distance(p, p), 0.0);
    EXPECT_LE(pq, kobayashi_distance(p, r) + kobayashi_distance(r, q) + 1e-9);

    const BallPoint a = testgen::ball_point(22, i, 2);
    const BallPoint b = testgen::ball_point(23, i, 2);
    const BallPoint c = testgen::ball_point(24, i, 2);
    EXPECT_LE(kobayashi_distance(a, b), kobayashi_distance(a, c) + kobayashi_distance(c, b) + 1e-9);
  }
}

TEST(Kobayashi, InvariantUnderAutomorphisms) {
  for (std::size_t n : {1u, 2u, 3u}) {
    for (const auto& t : automorphism_catalog(n)) {
      for (std::uint64_t i = 0; i < 500; ++i) {
        const SiegelPoint p = testgen::siegel_point(25, i, n);
        const SiegelPoint q = testgen::siegel_point(26, i, n);
        EXPECT_NEAR(kobayashi_distance(t.apply(p), t.apply(q)), kobayashi_distance(p, q), 1e-10);
      }
    }
  }
}

TEST(Kobayashi, SiegelMatchesBallThroughCayley) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    const SiegelPoint p = testgen::siegel_point(27, i, 2);
    const SiegelPoint q = testgen::siegel_point(28, i, 2);
    const double oracle =
        testgen::ball_distance_oracle(cayley_to_ball(p).coords(), cayley_to_ball(q).coords());
    // The oracle loses digits near the sphere; compare loosely.
    EXPECT_NEAR(kobayashi_distance(p, q), oracle, 1e-6 * (1.0 + oracle));
  }
}

TEST(Kobayashi, HalfPlaneClosedForm) {
  // k(1, x) = |log x| / 2 on the real axis of the right half-plane.
  for (double x : {0.01, 0.5, 2.0, 1e3, 1e8}) {
    EXPECT_NEAR(halfplane_distance(1.0, x), 0.5 * std::abs(std::log(x)), 1e-10);
  }
}

TEST(Automorphism, ScaleTranslate) {
  EXPECT_THROW(SiegelAutomorphism::scale_translate(0.0, 1.0), Error);
  EXPECT_THROW(SiegelAutomorphism::scale_translate(-2.0, 1.0), Error);
  const SiegelPoint q(Complex(4.0, 2.0), CVector{Complex(0.4, 0.6)});
  const SiegelPoint image = orbit_normalizer(4.0, 2.0).apply(q);
  EXPECT_NEAR(std::abs(image.z() - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(image.w()[0] - Complex(0.2, 0.3)), 0.0, 1e-15);
  const SiegelPoint same = SiegelAutomorphism::identity().apply(q);
  EXPECT_EQ(testgen::siegel_diff(same, q), 0.0);
}

TEST(Automorphism, HeisenbergPreservesHeight) {
  const CVector a{Complex(0.3, 0.4), Complex(-1.0, 0.5)};
  const auto t = SiegelAutomorphism::heisenberg(a);
  const SiegelPoint image = apply_automorphism(t, SiegelPoint::base(3));
  EXPECT_NEAR(std::abs(image.z() - (1.0 + norm_sq(a))), 0.0, 1e-15);
  EXPECT_LT(testgen::max_abs_diff(image.w(), a), 1e-15);
  for (std::uint64_t i = 0; i < 500; ++i) {
    const SiegelPoint q = testgen::siegel_point(29, i, 3);
    EXPECT_NEAR(t.apply(q).height(), q.height(), 1e-11 * (1.0 + q.x()));
  }
}

TEST(Automorphism, InverseRoundTrip) {
  for (const auto& t : automorphism_catalog(3)) {
    for (std::uint64_t i = 0; i < 300; ++i) {
      const SiegelPoint q = testgen::siegel_point(30, i, 3);
      const SiegelPoint back = t.apply_inverse(t.apply(q));
      EXPECT_LT(testgen::siegel_diff(back, q) / (1.0 + std::abs(q.z())), 1e-12);
    }
  }
}

TEST(Automorphism, NormalizerSendsPointToBase) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    const SiegelPoint q = testgen::siegel_point(31, i, 2);
    const SiegelPoint b = normalizing_automorphism(q).apply(q);
    EXPECT_NEAR(std::abs(b.z() - 1.0), 0.0, 1e-10);
    EXPECT_LT(norm(b.w()), 1e-10);
  }
}

TEST(Projection, ClosedForms) {
  const SiegelPoint q(Complex(3.0, 1.0), CVector{Complex(0.5, 0.5)});
  const SiegelPoint p1 = project(LinearProjection::standard(2), q);
  EXPECT_EQ(p1.z(), q.z());
  EXPECT_EQ(p1.w()[0], Complex{});
  const SiegelPoint r = project(LinearProjection(CVector{1.0}), SiegelPoint(10.0, CVector{0.0}));
  EXPECT_NEAR(std::abs(r.z() - 12.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r.w()[0] + 1.0), 0.0, 1e-15);
}

TEST(Projection, Idempotent) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    const CVector a = testgen::random_vector(32, i, 2, 2.0);
    const LinearProjection rho(a);
    const SiegelPoint q = testgen::siegel_point(33, i, 3);
    const SiegelPoint once = rho.project(q);
    const SiegelPoint twice = rho.project(once);
    EXPECT_LT(testgen::siegel_diff(once, twice) / (1.0 + std::abs(once.z())), 1e-12);
  }
}

TEST(Projection, RetractsOntoConjugatedGeodesic) {
  // rho = T^{-1} p1 T with T the Heisenberg translation by a.
  for (std::uint64_t i = 0; i < 300; ++i) {
    const CVector a = testgen::random_vector(34, i, 2, 1.0);
    const LinearProjection rho(a);
    const SiegelPoint q = testgen::siegel_point(35, i, 3);
    const auto t = rho.conjugator();
    const SiegelPoint tq = t.apply(q);
    const SiegelPoint expect = t.apply_inverse(SiegelPoint(tq.z(), CVector(2, Complex{})));
    EXPECT_LT(testgen::siegel_diff(rho.project(q), expect) / (1.0 + std::abs(q.z())), 1e-12);
    EXPECT_NEAR(std::abs(rho.left_inverse(q) - tq.z()), 0.0, 1e-12 * (1.0 + std::abs(q.z())));
  }
}

TEST(Involution, SwapsPointAndOrigin) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    const BallPoint a = testgen::ball_point(36, i, 3);
    EXPECT_LT(norm(mobius_involution(a, a.coords())), 1e-12);
    const CVector zero(3, Complex{});
    EXPECT_LT(testgen::max_abs_diff(mobius_involution(a, zero), a.coords()), 1e-15);
    const BallPoint z = testgen::ball_point(37, i, 3);
    const CVector twice = mobius_involution(a, mobius_involution(a, z.coords()));
    EXPECT_LT(testgen::max_abs_diff(twice, z.coords()), 1e-11);
  }
}
