#include <gtest/gtest.h>

#include <cmath>

#include "sampling.hpp"
#include "valiron/limits.hpp"

using namespace valiron;

namespace {

const PsiChoice kOscillating = PsiChoice::oscillating();

ScalarFunction first_ratio(const SiegelMap& m) {
  return [m](const SiegelPoint& q) { return m(q).z() / q.z(); };
}

// Independent value of phi_1 / z for the valiron example.
Complex valiron_ratio_oracle(double A, const PsiChoice& psi, const SiegelPoint& q) {
  const Complex w = q.w()[0];
  return A + A * w * w * psi(q.z()) / q.z();
}

}  // namespace

TEST(Families, RadialIsSpecialRestrictedAndInEveryRegion) {
  for (const auto& seq : generate_sequences(ApproachFamily::radial(3), 4, 1)) {
    ASSERT_EQ(seq.points.size(), 7u);
    for (std::size_t k = 0; k < seq.points.size(); ++k) {
      EXPECT_EQ(seq.points[k].z(), Complex(std::pow(10.0, k + 1), 0.0));
      EXPECT_EQ(seq.points[k].w_norm_sq(), 0.0);
      // (r, 0) lies in K(infinity, M) once r > 1 / (M - 1).
      for (double M : {1.003, 1.5, 16.0}) {
        const bool inside = koranyi_contains(KoranyiRegion::siegel(M), seq.points[k]);
        EXPECT_EQ(inside, seq.points[k].x() > 1.0 / (M - 1.0)) << M;
      }
    }
    const auto cls = classify_sequence(seq.points);
    EXPECT_TRUE(cls.special);
    EXPECT_TRUE(cls.restricted);
  }
}

TEST(Families, CSpecialWitnessMatchesHyperplaneDistance) {
  const double C = std::atanh(0.5);
  const auto seqs = generate_sequences(ApproachFamily::c_special(C, 0.0, 2), 8, 3);
  // id 1 sits on the edge of the profile box: |w_k| = sqrt(r_k) / 2.
  const auto& seq = seqs[1];
  for (std::size_t k = 0; k < seq.points.size(); ++k) {
    const double r = std::pow(10.0, k + 1);
    EXPECT_NEAR(seq.points[k].w_norm_sq(), r / 4.0, 1e-12 * r);
    EXPECT_EQ(seq.points[k].y(), 0.0);
  }
  const auto cls = classify_sequence(seq.points);
  EXPECT_NEAR(cls.c_witness, C, 1e-9);
  ASSERT_TRUE(cls.c_special.has_value());
  EXPECT_TRUE(cls.restricted);
  EXPECT_FALSE(cls.special);
}

TEST(Families, KoranyiSequencesStayInsideTheirRegion) {
  for (double M : {1.05, 1.5, 2.0, 4.0, 16.0, 500.0}) {
    const KoranyiRegion region = KoranyiRegion::siegel(M);
    ApproachFamily f = ApproachFamily::koranyi(M, 3);
    if (M < 1.1) f.scales = decade_ladder(2, 7);
    for (const auto& seq : generate_sequences(f, 200, 7)) {
      for (const auto& p : seq.points) EXPECT_TRUE(koranyi_contains(region, p)) << "M=" << M << " id=" << seq.id;
    }
  }
}

TEST(Families, EverySweepFamilyReclassifiesAsItsKind) {
  std::vector<ApproachFamily> families = k_limit_families(3);
  for (const auto& f : e_limit_families(3)) families.push_back(f);
  for (const auto& f : e0_limit_families(3)) families.push_back(f);
  families.push_back(ApproachFamily::radial(3));
  for (const auto& f : families) {
    for (const auto& seq : generate_sequences(f, 100, 11)) {
      const auto cls = classify_sequence(seq.points);
      EXPECT_TRUE(matches_kind(cls, f.kind)) << f.describe() << " id=" << seq.id;
      if (!cls.ambiguous) {
        EXPECT_TRUE(cls.routes_agree()) << f.describe() << " id=" << seq.id;
      }
    }
  }
}

TEST(Families, ZeroSpecialResidualShrinksLikeOneOverR) {
  const ApproachFamily f = ApproachFamily::zero_special(1.0, 2, 1.0);
  for (const auto& seq : generate_sequences(f, 16, 5)) {
    const double s2 = seq.points[0].w_norm_sq() / seq.points[0].x() * 10.0;
    for (std::size_t k = 0; k < seq.points.size(); ++k) {
      const double r = std::pow(10.0, k + 1);
      EXPECT_NEAR(seq.points[k].w_norm_sq() / seq.points[k].x(), s2 / r, 1e-12);
    }
  }
}

TEST(Families, KoranyiTooNarrowForTheFirstRung) {
  // (10, 0) already misses K(infinity, 1.05), so no sequence can start there.
  try {
    generate_sequences(ApproachFamily::koranyi(1.05, 2), 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_parameter);
  }
}

TEST(Families, DeterministicFromSeed) {
  const ApproachFamily f = ApproachFamily::c_special(0.5, 1.0, 3);
  const auto a = generate_sequences(f, 20, 42);
  const auto b = generate_sequences(f, 20, 42);
  const auto c = generate_sequences(f, 20, 43);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < a[i].points.size(); ++k) {
      EXPECT_EQ(a[i].points[k].z(), b[i].points[k].z());
      EXPECT_EQ(a[i].points[k].w(), b[i].points[k].w());
      differs = differs || a[i].points[k].w() != c[i].points[k].w();
    }
  }
  EXPECT_TRUE(differs);
}

TEST(Families, InvalidParametersRejected) {
  auto kind_of = [](const ApproachFamily& f) {
    try {
      generate_sequences(f, 1, 0);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::io;
  };
  EXPECT_EQ(kind_of(ApproachFamily::koranyi(1.0, 2)), ErrorKind::invalid_parameter);
  EXPECT_EQ(kind_of(ApproachFamily::koranyi(0.5, 2)), ErrorKind::invalid_parameter);
  EXPECT_EQ(kind_of(ApproachFamily::c_special(-1.0, 0.0, 2)), ErrorKind::invalid_parameter);
  EXPECT_EQ(kind_of(ApproachFamily::c_special(1.0, -0.5, 2)), ErrorKind::invalid_parameter);
  ApproachFamily bad = ApproachFamily::radial(2);
  bad.scales = {10.0, 5.0};
  EXPECT_EQ(kind_of(bad), ErrorKind::invalid_parameter);
}

TEST(Limits, ConstantFunctionHasExactLimit) {
  const ScalarFunction h = [](const SiegelPoint&) { return Complex(2.5, -1.0); };
  for (const auto& f : {ApproachFamily::koranyi(4.0, 2), ApproachFamily::c_special(1.0, 2.0, 2),
                        ApproachFamily::zero_special(1.0, 2), ApproachFamily::radial(2)}) {
    const auto v = estimate_limit(h, f);
    EXPECT_EQ(v.verdict, LimitKind::limit_exists);
    EXPECT_EQ(v.spread, 0.0);
    EXPECT_EQ(*v.value, Complex(2.5, -1.0));
  }
}

TEST(Limits, OscillatingExampleHasNoKLimit) {
  const double A = 2.0;
  const SiegelMap m = make_valiron_example(A, kOscillating);
  const auto v = k_limit(first_ratio(m), 2);
  ASSERT_EQ(v.verdict, LimitKind::no_limit);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_GT(v.witness->separation(), 0.1);
  // The recorded values agree with the closed form on the witness sequences.
  for (const auto& tr : v.traces) {
    if (tr.family == v.witness->family_a && tr.seq_id == v.witness->seq_a) {
      EXPECT_EQ(tr.tail(), v.witness->value_a);
    }
  }
  const auto seqs = generate_sequences(ApproachFamily::koranyi(16.0, 2), 4, 0);
  for (const auto& seq : seqs) {
    for (const auto& p : seq.points) {
      EXPECT_LT(std::abs(first_ratio(m)(p) - valiron_ratio_oracle(A, kOscillating, p)), 1e-12);
    }
  }
}

TEST(Limits, OscillatingExampleHasE0LimitA) {
  const SiegelMap m = make_valiron_example(2.0, kOscillating);
  const auto v = e0_limit(first_ratio(m), 2, 1e-3, 64, 0, decade_ladder(1, 6));
  ASSERT_EQ(v.verdict, LimitKind::limit_exists) << v.reason;
  EXPECT_NEAR(v.value->real(), 2.0, 1e-2);
  EXPECT_NEAR(v.value->imag(), 0.0, 1e-2);
}

TEST(Limits, SlowSpreadIsInconclusiveNotNoLimit) {
  // Values separated by between tol and 10 tol never produce a negative verdict.
  const ScalarFunction h = [](const SiegelPoint& q) { return Complex(q.w_norm_sq() > 0.0 ? 0.005 : 0.0, 0.0); };
  const auto v = estimate_limit(h, ApproachFamily::c_special(1.0, 0.0, 2), 1e-3);
  EXPECT_EQ(v.verdict, LimitKind::inconclusive);
  EXPECT_FALSE(v.witness.has_value());
}

TEST(Limits, EvaluationFailureIsReported) {
  const ScalarFunction h = [](const SiegelPoint& q) -> Complex {
    if (q.x() > 1e5) throw std::runtime_error("blow-up");
    return 1.0;
  };
  try {
    estimate_limit(h, ApproachFamily::radial(2));
    FAIL() << "expected an evaluation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::evaluation);
  }
}

TEST(Limits, KLimitImpliesSameELimitOnCatalogMaps) {
  const std::vector<SiegelMap> maps{make_siegel_linear(2.0, 2), make_halfplane_affine(3.0, 1.0, 3),
                                    make_valiron_example(2.0, PsiChoice::constant(0.5)),
                                    make_valiron_example(2.0, kOscillating)};
  int exists = 0;
  for (const auto& m : maps) {
    const auto k = k_limit(first_ratio(m), m.dimension);
    if (!k.exists()) continue;
    ++exists;
    const auto e = e_limit(first_ratio(m), m.dimension);
    ASSERT_TRUE(e.exists()) << m.name;
    EXPECT_LT(std::abs(*e.value - *k.value), 1e-3) << m.name;
  }
  EXPECT_GE(exists, 2);
}

TEST(Jwc, LinearMapIsExact) {
  const auto r = jwc_check(make_siegel_linear(2.0, 2), LinearProjection::standard(2));
  EXPECT_TRUE(r.ok());
  EXPECT_LT(std::abs(*r.ratio.value - 2.0), 1e-15);
  EXPECT_LT(r.ratio.spread, 1e-15);
  EXPECT_LT(std::abs(*r.defect.value), 1e-6);
}

TEST(Jwc, ValironExampleTendsToA) {
  for (double A : {2.0, 3.5}) {
    for (const auto& psi : {PsiChoice::constant(0.5), kOscillating, PsiChoice::cayley_to_disk(Complex(1.0, 0.5))}) {
      const auto r = jwc_check(make_valiron_example(A, psi), LinearProjection::standard(2));
      EXPECT_TRUE(r.part1) << r.ratio.describe();
      EXPECT_NEAR(r.ratio.value->real(), A, 1e-3);
      // Second component vanishes identically.
      EXPECT_EQ(r.defect.spread, 0.0);
      EXPECT_EQ(*r.defect.value, Complex(0.0, 0.0));
    }
  }
}

TEST(Jwc, NonzeroProjectionOnCatalogMaps) {
  const CVector a{Complex(1.0, 0.0)};
  for (const auto& m : {make_siegel_linear(2.0, 2), make_halfplane_affine(2.0, 1.0, 2),
                        make_valiron_example(2.0, PsiChoice::constant(0.5))}) {
    const auto r = jwc_check(m, LinearProjection(a));
    EXPECT_TRUE(r.ok()) << m.name << " " << r.ratio.describe() << " " << r.defect.describe();
  }
}

TEST(LeftInverse, LinearMapAnyA) {
  for (const CVector& a : {CVector{Complex(0.0, 0.0)}, CVector{Complex(1.0, 0.0)}, CVector{Complex(0.0, 0.5)}}) {
    const auto r = left_inverse_ratio_check(make_siegel_linear(2.0, 2), a);
    EXPECT_TRUE(r.ok) << r.reason;
    EXPECT_NEAR(r.ratio.value->real(), 2.0, 1e-3);
  }
}

TEST(LeftInverse, ClosedFormOfTheRatioForTheLinearMap) {
  // rho~(phi(z, w)) / rho~(z, w) = (2z + |a|^2 + 2 sqrt2 <w,a>) / (z + |a|^2 + 2 <w,a>).
  const CVector a{Complex(0.3, -0.7)};
  const LinearProjection rho(a);
  const SiegelMap m = make_siegel_linear(2.0, 2);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const SiegelPoint q = testgen::siegel_point(8, i, 2);
    const Complex wa = q.w()[0] * std::conj(a[0]);
    const double na = std::norm(a[0]);
    const Complex expected = (2.0 * q.z() + na + 2.0 * std::sqrt(2.0) * wa) / (q.z() + na + 2.0 * wa);
    EXPECT_LT(std::abs(rho.left_inverse(m(q)) / rho.left_inverse(q) - expected), 1e-12 * std::abs(expected));
  }
}

TEST(LeftInverse, ValironExampleWithoutEFirstRatioLimit) {
  // With psi = 0.5, phi_1 / z = A + A w^2 psi / z keeps a nonzero spread along
  // C-special sequences, so the precondition fails and the check stays inconclusive.
  const auto r = left_inverse_ratio_check(make_valiron_example(2.0, PsiChoice::constant(0.5)), CVector{1.0});
  EXPECT_FALSE(r.precondition.exists());
  EXPECT_EQ(r.ratio.verdict, LimitKind::inconclusive);
  EXPECT_FALSE(r.reason.empty());
}

TEST(LeftInverse, ValironExampleWithVanishingPsi) {
  // The ratio is 2 (z + |a|^2/2) / (z + |a|^2 + 2<w,a>), off by about 4|a| s / sqrt(r)
  // on C-special sequences; a = 1/4 keeps that below tol at r = 10^7.
  const auto r = left_inverse_ratio_check(make_valiron_example(2.0, PsiChoice::constant(0.0)), CVector{0.25});
  EXPECT_TRUE(r.ok) << r.reason;
  EXPECT_NEAR(r.ratio.value->real(), 2.0, 1e-3);
  // phi' vanishes, so |phi'| / |z| is identically zero.
  EXPECT_EQ(r.tangential.spread, 0.0);
  EXPECT_EQ(*r.tangential.value, Complex(0.0, 0.0));
}

TEST(Projection, ClosedFormMatchesGenericDistance) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    const SiegelPoint q = testgen::siegel_point(21, i, 3);
    const CVector a = testgen::random_vector(22, i, 2, 2.0);
    const LinearProjection rho(a);
    const double generic = kobayashi_distance(LinearProjection::standard(3).project(q), rho.project(q));
    EXPECT_NEAR(projection_distance_closed_form(q, a), generic, 1e-9) << i;
  }
}

TEST(Projection, AxisSequenceWithUnitA) {
  // For Z_k = (k, 0) and a = (1) the distance is atanh(1 / sqrt(k + 1)).
  std::vector<SiegelPoint> pts;
  for (int k = 1; k <= 1000; ++k) pts.emplace_back(Complex(k, 0.0), CVector{Complex{}});
  const auto r = projection_invariance_check(pts, CVector{1.0}, 0.1);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    EXPECT_NEAR(r.distance[k], std::atanh(1.0 / std::sqrt(k + 2.0)), 1e-12);
  }
  EXPECT_TRUE(r.tail_monotone);
  EXPECT_LT(r.oracle_gap, 1e-9);
  EXPECT_NEAR(r.tail_max, std::atanh(1.0 / std::sqrt(502.0)), 1e-12);
  EXPECT_TRUE(r.ok());
}

TEST(Projection, ZeroTranslationGivesZero) {
  const auto seqs = generate_sequences(ApproachFamily::c_special(0.5, 1.0, 3), 10, 2);
  for (const auto& seq : seqs) {
    const auto r = projection_invariance_check(seq.points, CVector(2, Complex{}));
    for (double d : r.distance) EXPECT_EQ(d, 0.0);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.c_p1, r.c_rho);
  }
}

TEST(Projection, RestrictedAndSpecialnessPreserved) {
  std::vector<ApproachFamily> families = e_limit_families(2);
  int checked = 0;
  for (std::size_t f = 0; f < families.size(); ++f) {
    families[f].scales = decade_ladder(1, 12);
    for (const auto& seq : generate_sequences(families[f], 7, 30 + f)) {
      const CVector a = testgen::random_vector(31, checked, 1, 1.5);
      const auto r = projection_invariance_check(seq.points, a, 1e-2);
      EXPECT_TRUE(r.restricted_p1);
      EXPECT_EQ(r.restricted_p1, r.restricted_rho);
      EXPECT_TRUE(r.same_c) << r.c_p1 << " vs " << r.c_rho;
      EXPECT_LT(r.oracle_gap, 1e-9);
      ++checked;
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(Projection, RejectsBoundedSequence) {
  std::vector<SiegelPoint> pts(20, SiegelPoint(Complex(3.0, 1.0), CVector{Complex{}}));
  try {
    projection_invariance_check(pts, CVector{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_tending_to_infinity);
  }
}

TEST(BallSide, RestrictedRatioTendsToC) {
  for (const auto& m : {make_siegel_linear(2.0, 2), make_halfplane_affine(3.0, 1.0, 2),
                        make_valiron_example(2.0, PsiChoice::constant(0.5)), make_valiron_example(2.0, kOscillating)}) {
    const BallMap b = make_ball_map_from_siegel(m);
    const auto v = ball_restricted_ratio_check(b);
    ASSERT_TRUE(v.exists()) << m.name << " spread " << v.spread;
    EXPECT_LT(std::abs(*v.value - *b.c), 1e-3) << m.name;
  }
}
