#include "greencone/symplectic_cones.hpp"
#include "greencone/sampling.hpp"

#include <gtest/gtest.h>

namespace greencone {
namespace {

using sampling::random_between;
using sampling::random_pair;
using sampling::random_symmetric;
using sampling::random_vector;

SymMatrix scalar1(double s) { return SymMatrix::scalar(1, s); }
TangentVector tv1(double h, double k) { return {Vector::Constant(1, h), Vector::Constant(1, k)}; }

TEST(Omega, CanonicalPairAndArithmetic) {
  EXPECT_DOUBLE_EQ(omega(tv1(1, 0), tv1(0, 1)), 1.0);
  EXPECT_DOUBLE_EQ(omega(tv1(1, 2), tv1(3, 4)), -2.0);
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 4; ++n) {
    TangentVector v{random_vector(n, rng), random_vector(n, rng)};
    TangentVector w{random_vector(n, rng), random_vector(n, rng)};
    EXPECT_DOUBLE_EQ(omega(v, v), 0.0);
    EXPECT_NEAR(omega(v, w), -omega(w, v), 1e-14);
  }
}

TEST(Omega, DimensionMismatchThrows) {
  TangentVector v = TangentVector::zero(2);
  EXPECT_THROW(omega(v, tv1(1, 1)), DimensionMismatch);
  EXPECT_THROW(TangentVector(Vector::Zero(2), Vector::Zero(3)), DimensionMismatch);
}

TEST(SgValue, TransversalScalarExamples) {
  const ConePair pair(scalar1(0), scalar1(1));
  ASSERT_TRUE(pair.transversal());
  auto sg = sg_value(pair, tv1(1, 0.5));
  ASSERT_TRUE(sg.is_finite());
  EXPECT_NEAR(sg.value(), 0.25, 1e-15);
  EXPECT_NEAR(sg_value(pair, tv1(1, 2)).value(), -2.0, 1e-15);
  // On the graph of S1: splitting v1 = v, v2 = 0.
  EXPECT_NEAR(sg_value(pair, tv1(3, 0)).value(), 0.0, 1e-15);
}

TEST(SgValue, OffTheSumIsMinusInfinity) {
  const ConePair pair(scalar1(0), scalar1(0));
  EXPECT_FALSE(pair.transversal());
  auto sg = sg_value(pair, tv1(0, 1));
  EXPECT_FALSE(sg.is_finite());
  EXPECT_EQ(sg.as_double(), -std::numeric_limits<double>::infinity());
  EXPECT_FALSE(cone_contains(pair, tv1(0, 1), 1.0));
  EXPECT_TRUE(cone_contains(pair, tv1(2, 0)));
}

TEST(ConeContains, ScalarExamples) {
  const ConePair pair(scalar1(0), scalar1(1));
  EXPECT_TRUE(cone_contains(pair, tv1(1, 0.5)));
  EXPECT_FALSE(cone_contains(pair, tv1(1, 2)));
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 4; ++n) {
    for (bool deficient : {false, true}) {
      EXPECT_TRUE(cone_contains(random_pair(n, deficient, rng), TangentVector::zero(n)));
    }
  }
}

TEST(ConePair, RejectsReversedOrder) {
  EXPECT_THROW(ConePair(scalar1(1), scalar1(0)), OrderViolation);
}

TEST(ConeContains, SlopeOracleInDimensionOne) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    const double a = u(rng);
    const double b = a + std::abs(u(rng));
    const ConePair pair(scalar1(a), scalar1(b));
    const double h = u(rng);
    const double k = u(rng);
    const bool expected = h != 0.0 && k / h >= a && k / h <= b;
    EXPECT_EQ(cone_contains(pair, tv1(h, k)), expected) << a << " " << b << " " << h << " " << k;
  }
}

TEST(DecomposeNonneg, DocumentedCases) {
  Vector e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  auto d = decompose_nonneg(e1, e2);
  EXPECT_GE(d.w1.min_eigenvalue(), -1e-12);
  EXPECT_GE(d.w2.min_eigenvalue(), -1e-12);
  EXPECT_LE(((d.w1 + d.w2).matrix() - Matrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LE((d.w1 * (e1 + e2) - e1).norm(), 1e-14);
  EXPECT_LE((d.w2 * (e1 + e2) - e2).norm(), 1e-14);

  std::mt19937_64 rng(5);
  const Vector y = random_vector(4, rng);
  auto zero2 = decompose_nonneg(y, Vector::Zero(4));
  EXPECT_LE((zero2.w2 * y).norm(), 1e-13);
  EXPECT_LE((zero2.w1 * y - y).norm(), 1e-13);

  auto same = decompose_nonneg(y, y);
  EXPECT_LE((same.w1.matrix() - 0.5 * Matrix::Identity(4, 4)).norm(), 1e-14);
  EXPECT_LE((same.w2.matrix() - 0.5 * Matrix::Identity(4, 4)).norm(), 1e-14);
}

TEST(DecomposeNonneg, ZeroInputsAndErrors) {
  auto d = decompose_nonneg(Vector::Zero(3), Vector::Zero(3));
  EXPECT_LE((d.w1.matrix() - 0.5 * Matrix::Identity(3, 3)).norm(), 0.0);
  Vector a(2), b(2);
  a << 1, 0;
  b << -1, 0.1;
  EXPECT_THROW(decompose_nonneg(a, b), NegativeInnerProduct);
}

TEST(DecomposeNonneg, RandomPostConditions) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + trial % 8;
    Vector y1 = random_vector(n, rng);
    Vector y2 = random_vector(n, rng);
    if (y1.dot(y2) < 0) y2 = -y2;
    auto d = decompose_nonneg(y1, y2);
    const double s = std::max(1.0, (y1 + y2).norm());
    ASSERT_GE(d.w1.min_eigenvalue(), -1e-10);
    ASSERT_GE(d.w2.min_eigenvalue(), -1e-10);
    ASSERT_LE(((d.w1 + d.w2).matrix() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_LE((d.w1 * (y1 + y2) - y1).norm(), 1e-9 * s);
    ASSERT_LE((d.w2 * (y1 + y2) - y2).norm(), 1e-9 * s);
  }
}

TEST(ConeWitness, DocumentedExamples) {
  const ConePair pair(scalar1(0), scalar1(1));
  auto s = cone_witness(pair, tv1(1, 0.5));
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR((*s)(0, 0), 0.5, 1e-14);
  EXPECT_FALSE(cone_witness(pair, tv1(1, 2)).has_value());

  const ConePair p2(SymMatrix::zero(2), SymMatrix::identity(2));
  Vector h(2), k(2);
  h << 1, 0;
  k << 0.3, 0.1;
  const TangentVector v{h, k};
  EXPECT_NEAR(sg_value(p2, v).value(), (h - k).dot(k), 1e-14);
  EXPECT_NEAR(sg_value(p2, v).value(), 0.2, 1e-14);
  auto w = cone_witness(p2, v);
  ASSERT_TRUE(w.has_value());
  EXPECT_TRUE(witness_valid(p2, *w, v));

  std::mt19937_64 rng(23);
  const ConePair p3 = random_pair(3, false, rng);
  const TangentVector boundary = TangentVector::on_graph(p3.s1(), random_vector(3, rng));
  auto wb = cone_witness(p3, boundary, 1e-12);
  ASSERT_TRUE(wb.has_value());
  EXPECT_TRUE(witness_valid(p3, *wb, boundary));
}

TEST(ConeWitness, EquivalenceOnRandomPairs) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 600; ++trial) {
    const int n = 1 + trial % 5;
    const bool deficient = trial % 3 == 0;
    const ConePair pair = random_pair(n, deficient, rng);
    const SymMatrix s = random_between(pair, rng);
    const TangentVector inside = TangentVector::on_graph(s, random_vector(n, rng));
    ASSERT_TRUE(cone_contains(pair, inside, 1e-9));
    auto w = cone_witness(pair, inside, 1e-9);
    ASSERT_TRUE(w.has_value()) << "trial " << trial;
    ASSERT_TRUE(witness_valid(pair, *w, inside)) << "trial " << trial;

    const TangentVector random{random_vector(n, rng), random_vector(n, rng)};
    const SgValue sg = sg_value(pair, random);
    if (sg.as_double() < -1e-6) {
      EXPECT_FALSE(cone_witness(pair, random).has_value());
    }
  }
}

TEST(SgValue, WellDefinedAcrossSplittings) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 4;
    const ConePair pair = random_pair(n, true, rng);
    const Vector x1 = random_vector(n, rng);
    const Vector x2 = random_vector(n, rng);
    const TangentVector v1 = TangentVector::on_graph(pair.s1(), x1);
    const TangentVector v2 = TangentVector::on_graph(pair.s2(), x2);
    // An element of L1 and L2 at once: (h0, S1 h0) with U h0 = 0.
    Eigen::SelfAdjointEigenSolver<Matrix> es(pair.u().matrix());
    const Vector h0 = es.eigenvectors().col(0) * 3.7;
    ASSERT_LE((pair.u() * h0).norm(), 1e-9);
    const TangentVector shift = TangentVector::on_graph(pair.s1(), h0);
    const double a = omega(v1, v2);
    const double b = omega(v1 + shift, v2 - shift);
    EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(a)));
    EXPECT_NEAR(sg_value(pair, v1 + v2).value(), a, 1e-8 * std::max(1.0, std::abs(a)));
  }
}

TEST(SymplecticInvariance, ShearAndLinearChangesCommuteWithMembership) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> cdist(-3, 3);
  int agree = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 1 + trial % 4;
    const ConePair pair = random_pair(n, trial % 4 == 0, rng);
    const TangentVector v{random_vector(n, rng), random_vector(n, rng)};
    const bool before = cone_contains(pair, v, 1e-9);

    const double c = cdist(rng);
    const ConePair sheared(pair.s1() + SymMatrix::scalar(n, c), pair.s2() + SymMatrix::scalar(n, c));
    const bool after_shear = cone_contains(sheared, phi_shear(c, v), 1e-9);

    Matrix a = Matrix::Identity(n, n) + 0.3 * sampling::random_symmetric(n, rng).matrix() +
               0.2 * Matrix::NullaryExpr(n, n, [&] { return cdist(rng) / 3.0; });
    const GlTransform phi(a);
    const ConePair moved(phi.apply(pair.s1()), phi.apply(pair.s2()));
    const bool after_gl = cone_contains(moved, phi.apply(v), 1e-9);
    const double sv = std::abs(sg_value(pair, v).as_double());
    if (sv < 1e-7) {
      ++agree;  // too close to the boundary to compare signs
      continue;
    }
    agree += (before == after_shear && before == after_gl) ? 1 : 0;
  }
  EXPECT_EQ(agree, trials);
}

TEST(SymplecticMaps, IdentitiesAndFormulas) {
  std::mt19937_64 rng(41);
  const TangentVector v{random_vector(3, rng), random_vector(3, rng)};
  const TangentVector w{random_vector(3, rng), random_vector(3, rng)};
  const TangentVector s0 = phi_shear(0.0, v);
  EXPECT_EQ((s0.h - v.h).norm(), 0.0);
  EXPECT_EQ((s0.k - v.k).norm(), 0.0);
  const TangentVector g0 = phi_gl(Matrix::Identity(3, 3), v);
  EXPECT_LE((g0.stacked() - v.stacked()).norm(), 1e-15);
  const TangentVector sh = phi_shear(2.0, tv1(1, 1));
  EXPECT_DOUBLE_EQ(sh.h(0), 1.0);
  EXPECT_DOUBLE_EQ(sh.k(0), 3.0);

  const Matrix a = Matrix::Identity(3, 3) + 0.4 * random_symmetric(3, rng).matrix();
  const GlTransform phi(a);
  EXPECT_NEAR(omega(phi.apply(v), phi.apply(w)), omega(v, w), 1e-10);
  EXPECT_NEAR(omega(phi_shear(1.7, v), phi_shear(1.7, w)), omega(v, w), 1e-10);
  const SymMatrix s = random_symmetric(3, rng);
  const Vector h = random_vector(3, rng);
  const TangentVector img = phi.apply(TangentVector::on_graph(s, h));
  EXPECT_LE((phi.apply(s) * img.h - img.k).norm(), 1e-10);
  EXPECT_THROW(GlTransform(Matrix::Zero(2, 2)), SingularMatrix);
}

TEST(ReduceDegenerate, DocumentedExamples) {
  std::mt19937_64 rng(43);
  const ConePair transversal = random_pair(3, false, rng);
  const ReducedPair t = reduce_degenerate(transversal);
  EXPECT_EQ(t.m, 3);
  EXPECT_EQ(t.shear, 0.0);
  EXPECT_LE((t.a - Matrix::Identity(3, 3)).norm(), 0.0);

  const SymMatrix s = random_symmetric(2, rng);
  const ConePair collapsed(s, s);
  const ReducedPair c = reduce_degenerate(collapsed);
  EXPECT_EQ(c.m, 0);
  Vector h = random_vector(2, rng);
  EXPECT_TRUE(cone_contains(collapsed, TangentVector::on_graph(s, h), 1e-10));
  EXPECT_FALSE(cone_contains(collapsed, TangentVector(h, s * h + Vector::Constant(2, 0.1)), 1e-10));
  auto w = cone_witness(collapsed, TangentVector::on_graph(s, h));
  ASSERT_TRUE(w.has_value());
  EXPECT_LE((w->matrix() - s.matrix()).norm(), 1e-8);

  Matrix d1 = Matrix::Zero(2, 2), d2 = Matrix::Identity(2, 2);
  d1(1, 1) = 1.0;
  const ConePair diag{SymMatrix(d1), SymMatrix(d2)};
  const ReducedPair r = reduce_degenerate(diag);
  EXPECT_EQ(r.m, 1);
  // The reduced blocks are the original ones after the internal shear C.
  EXPECT_NEAR(r.sbar1(0, 0) - r.shear, 0.0, 1e-12);
  EXPECT_NEAR(r.sbar2(0, 0) - r.shear, 1.0, 1e-12);
  EXPECT_NEAR(r.n_block(0, 0) - r.shear, 1.0, 1e-12);
  EXPECT_NEAR(r.shear, diag.s1().norm2() + diag.s2().norm2() + 1.0, 1e-14);
}

TEST(ReduceDegenerate, AmbiguousRankIsReported) {
  Matrix u = Matrix::Identity(2, 2);
  u(1, 1) = 5e-11;  // below the 1e-10 threshold but inside its ambiguity band
  const ConePair pair(SymMatrix::zero(2), SymMatrix(u));
  EXPECT_THROW(reduce_degenerate(pair), RankDetectionAmbiguous);
}

TEST(SubspaceDistance, Basics) {
  std::mt19937_64 rng(47);
  const SymMatrix s = random_symmetric(3, rng);
  EXPECT_EQ(subspace_distance(s, s), 0.0);
  EXPECT_DOUBLE_EQ(subspace_distance(scalar1(0), scalar1(1)), 1.0);
  const SymMatrix t = random_symmetric(3, rng);
  EXPECT_DOUBLE_EQ(subspace_distance(s, t), subspace_distance(t, s));
}

TEST(ConeDistance, ReflexiveAndMonotone) {
  const ConePair pair(scalar1(0), scalar1(1));
  EXPECT_LE(cone_distance(pair, pair, 1000), 5e-3);
  const ConePair other(scalar1(2), scalar1(3));
  double prev = 0.0;
  for (std::size_t n : {10u, 100u, 1000u}) {
    const double d = cone_distance(pair, other, n, 3, 1024);
    EXPECT_GE(d, prev);
    prev = d;
  }
  EXPECT_GT(prev, 0.1);
}

}  // namespace
}  // namespace greencone
