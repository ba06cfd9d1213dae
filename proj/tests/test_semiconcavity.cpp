#include "greencone/semiconcavity.hpp"
#include "greencone/sampling.hpp"
#include "greencone/synthetic.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace greencone {
namespace {

using sampling::random_psd;
using sampling::random_symmetric;
using sampling::random_vector;

SymMatrix scalar1(double s) { return SymMatrix::scalar(1, s); }
Vector v1(double x) { return Vector::Constant(1, x); }

TEST(Norms, Examples) {
  std::mt19937_64 rng(1);
  const Vector x = random_vector(3, rng);
  EXPECT_NEAR(unorm(SymMatrix::identity(3), x), x.norm(), 1e-14);
  EXPECT_EQ(unorm(SymMatrix::identity(3), Vector::Zero(3)), 0.0);
  EXPECT_NEAR(unorm(scalar1(4), v1(3)), 6.0, 1e-14);
  EXPECT_NEAR(uinv_norm(scalar1(4), v1(3)), 1.5, 1e-14);
  EXPECT_THROW(unorm(scalar1(-1), v1(1)), NotPositiveDefinite);
  EXPECT_THROW(uinv_norm(SymMatrix::zero(2), Vector::Zero(2)), NotPositiveDefinite);
}

SampledFunction quadratic_samples(const SymMatrix& a, int n, int count, std::mt19937_64& rng) {
  SampledFunction s;
  for (int i = 0; i < count; ++i) {
    const Vector x = random_vector(n, rng);
    s.points.push_back({x, 0.5 * x.dot(a * x), a * x});
  }
  return s;
}

TEST(CheckSemiconcave, QuadraticIsEqualityCase) {
  std::mt19937_64 rng(2);
  const SymMatrix a = random_symmetric(2, rng);
  const auto s = quadratic_samples(a, 2, 30, rng);
  const auto rep = check_semiconcave(s, a, 1e-12);
  EXPECT_TRUE(rep.passed());
  EXPECT_NEAR(rep.worst_margin, 0.0, 1e-12);
  EXPECT_TRUE(check_semiconvex(s, -1.0 * a, 1e-12).passed());
}

TEST(CheckSemiconcave, ConvexParabolaFailsForZeroMatrix) {
  SampledFunction s;
  s.points.push_back({v1(0), 0.0, v1(0)});
  s.points.push_back({v1(1), 0.5, v1(1)});
  const auto rep = check_semiconcave(s, scalar1(0), 1e-12);
  ASSERT_FALSE(rep.passed());
  // Pair (0, 1): f(1) - f(0) - 0 = 1/2 above the zero bound.
  EXPECT_EQ(rep.violations.front().i, 0u);
  EXPECT_EQ(rep.violations.front().j, 1u);
  EXPECT_NEAR(rep.violations.front().margin, -0.5, 1e-15);
}

TEST(CheckSemiconcave, ConcaveWithSupergradientsPasses) {
  SampledFunction s;
  for (double x = -2.0; x <= 2.0; x += 0.25) {
    // f = -|x| with supergradient -sign(x) (0 at the kink).
    s.points.push_back({v1(x), -std::abs(x), v1(x > 0 ? -1.0 : (x < 0 ? 1.0 : 0.0))});
  }
  EXPECT_TRUE(check_semiconcave(s, scalar1(0), 1e-12).passed());
}

TEST(CheckSemiconvex, Examples) {
  SampledFunction concave;
  for (double x = -1.0; x <= 1.0; x += 0.5) concave.points.push_back({v1(x), -0.5 * x * x, v1(-x)});
  EXPECT_FALSE(check_semiconvex(concave, scalar1(0), 1e-12).passed());

  std::mt19937_64 rng(3);
  SampledFunction linear;
  const Vector slope = random_vector(2, rng);
  for (int i = 0; i < 20; ++i) {
    const Vector x = random_vector(2, rng);
    linear.points.push_back({x, slope.dot(x) + 1.0, slope});
  }
  EXPECT_TRUE(check_semiconvex(linear, SymMatrix::zero(2), 1e-12).passed());
  EXPECT_TRUE(check_semiconcave(linear, SymMatrix::zero(2), 1e-12).passed());
}

// A-semi-concave on the sample iff f - 1/2 A x^2 passes a pairwise
// midpoint concavity test, for f = 1/2 C x^2 + concave part.
TEST(CheckSemiconcave, MatchesMidpointConcavityOfShiftedFunction) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> coin(0, 1);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 3;
    const SymMatrix c = random_symmetric(n, rng);
    // Either A >= C (semi-concave) or A = C - 0.5 I (not).
    const bool expect = coin(rng) < 0.5;
    const SymMatrix a = expect ? c + random_psd(Vector::Constant(n, 0.3), rng)
                               : c - SymMatrix::scalar(n, 0.5);
    // Concave part -log(1 + e^{w.x}) has curvature <= 1/4 |w|^2; keep it small.
    const Vector w = 0.2 * random_vector(n, rng);
    auto f = [&](const Vector& x) {
      return 0.5 * x.dot(c * x) - std::log1p(std::exp(w.dot(x)));
    };
    auto grad = [&](const Vector& x) -> Vector {
      const double s = 1.0 / (1.0 + std::exp(-w.dot(x)));
      return c * x - s * w;
    };
    SampledFunction samples;
    for (int i = 0; i < 25; ++i) {
      const Vector x = 2.0 * random_vector(n, rng);
      samples.points.push_back({x, f(x), grad(x)});
    }
    const bool certificate = check_semiconcave(samples, a, 1e-12).passed();
    bool midpoint = true;
    for (const auto& p : samples.points) {
      for (const auto& q : samples.points) {
        const Vector m = 0.5 * (p.x + q.x);
        auto fa = [&](const Vector& x) { return f(x) - 0.5 * x.dot(a * x); };
        if (fa(m) < 0.5 * (fa(p.x) + fa(q.x)) - 1e-12) midpoint = false;
      }
    }
    EXPECT_EQ(certificate, midpoint) << "trial " << trial;
    EXPECT_EQ(certificate, expect) << "trial " << trial;
  }
}

TEST(AnisoGradientBound, SingletonIsVacuous) {
  ArgminSet k;
  k.samples.push_back({v1(0.3), v1(1.0)});
  const auto rep = aniso_gradient_bound(k, AnisoBound(scalar1(0), scalar1(1)));
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.pairs_checked, 0u);
}

TEST(AnisoGradientBound, ScalarQuadraticMargin) {
  const double a = -1.0, b = 2.0, c = 0.7;
  ArgminSet k;
  for (double x : {-0.4, 0.1, 0.35, 0.9}) k.samples.push_back({v1(x), v1(c * x)});
  const AnisoBound bound(scalar1(a), scalar1(b));
  const auto rep = aniso_gradient_bound(k, bound);
  // margin = 1/2 |dx| (sqrt(U) - |2C - A - B| / sqrt(U)) at the closest pair.
  const double u = b - a;
  const double dx = 0.25;
  const double expected = 0.5 * dx * (std::sqrt(u) - std::abs(2 * c - a - b) / std::sqrt(u));
  EXPECT_NEAR(rep.min_margin, expected, 1e-14);
  EXPECT_TRUE(rep.passed());
}

TEST(AnisoGradientBound, RejectsNonPositiveU) {
  EXPECT_THROW(AnisoBound(scalar1(1), scalar1(1)), NotPositiveDefinite);
}

TEST(AnisoGradientBound, SyntheticParaboloidPairs) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 1 + trial % 3;
    const auto pp = sampling::random_paraboloid_pair(n, rng);
    const ArgminSet k = sampling::locate_argmin(pp, n);
    ASSERT_FALSE(k.empty());
    const auto rep = aniso_gradient_bound(k, AnisoBound(pp.a, pp.b), 1e-6);
    EXPECT_GE(rep.min_margin, -1e-6) << "trial " << trial;
    // Constants added to f or g do not enter: the check reads K only.
  }
}

TEST(AnisoGradientBound, IsotropicLipschitzBound) {
  // A = -C I, B = C I gives |dp| <= C |dx| on K.
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 3;
    auto pp = sampling::random_paraboloid_pair(n, rng);
    const double c = std::max(pp.a.norm2(), pp.b.norm2());
    const AnisoBound iso(SymMatrix::scalar(n, -c), SymMatrix::scalar(n, c));
    const ArgminSet k = sampling::locate_argmin(pp, n);
    const auto rep = aniso_gradient_bound(k, iso, 1e-6);
    EXPECT_TRUE(rep.passed());
    EXPECT_NEAR(iso.lipschitz_constant(), c, 1e-12);
    EXPECT_LE(rep.lipschitz_ratio, iso.lipschitz_constant() * (1 + 1e-6));
  }
}

TEST(BallCone, Examples) {
  std::mt19937_64 rng(7);
  const SymMatrix a = random_symmetric(3, rng);
  const SymMatrix b = a + random_psd(Vector::Constant(3, 1.0) + random_vector(3, rng).cwiseAbs(), rng);
  const AnisoBound bound(a, b);
  const Vector h = random_vector(3, rng);
  EXPECT_TRUE(ball_cone_membership(bound, TangentVector(h, bound.mid() * h)));
  EXPECT_NEAR(ball_margin(bound, TangentVector(h, a * h)), 0.0, 1e-12);
  EXPECT_NEAR(ball_margin(bound, TangentVector(h, b * h)), 0.0, 1e-12);
  EXPECT_FALSE(ball_cone_membership(AnisoBound(scalar1(0), scalar1(1)),
                                    TangentVector(v1(1), v1(2))));
}

TEST(BallCone, AgreesWithSg) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 4;
    const SymMatrix a = random_symmetric(n, rng);
    const SymMatrix b = a + random_psd(Vector::NullaryExpr(n, [&] { return 0.2 + std::abs(random_vector(1, rng)(0)); }), rng);
    const AnisoBound bound(a, b);
    const ConePair pair(a, b);
    const TangentVector v{random_vector(n, rng), random_vector(n, rng)};
    const double sg = sg_value(pair, v).value();
    EXPECT_NEAR(ball_margin(bound, v), sg, 1e-9 * std::max(1.0, std::abs(sg)));
    if (std::abs(sg) > 1e-9) EXPECT_EQ(ball_cone_membership(bound, v), cone_contains(pair, v));
  }
}

TEST(EmpiricalParatingent, TwoSamplesGiveAntipodalPair) {
  std::vector<PhaseSample> s{{v1(0.1), v1(0.2)}, {v1(0.103), v1(0.21)}};
  const auto dirs = empirical_paratingent(s, 1e-3, 1e-1);
  ASSERT_EQ(dirs.size(), 2u);
  EXPECT_LE((dirs[0].v.stacked() + dirs[1].v.stacked()).norm(), 1e-14);
  EXPECT_NEAR(dirs[0].v.norm(), 1.0, 1e-14);
  EXPECT_EQ(dirs[0].i, 0u);
  EXPECT_EQ(dirs[0].j, 1u);
}

TEST(EmpiricalParatingent, CollinearSamplesAndErrors) {
  std::vector<PhaseSample> line;
  for (int i = 0; i < 6; ++i) line.push_back({v1(0.5 + 0.002 * i), v1(1.0 - 0.006 * i)});
  const Vector u = Vector{{1.0, -3.0}}.normalized();
  for (const auto& d : empirical_paratingent(line, 1e-3, 1e-2)) {
    EXPECT_NEAR(std::abs(d.v.stacked().dot(u)), 1.0, 1e-12);
  }
  EXPECT_THROW(empirical_paratingent({line[0]}, 1e-3, 1e-2), EmptyWindow);
  EXPECT_THROW(empirical_paratingent(line, 1.0, 2.0), EmptyWindow);
}

TEST(EmpiricalParatingent, TorusWrapUsesMinimalLift) {
  std::vector<PhaseSample> s{{v1(0.999), v1(0.0)}, {v1(0.001), v1(0.0)}};
  const auto dirs = empirical_paratingent(s, 1e-3, 1e-2);
  ASSERT_EQ(dirs.size(), 2u);
  EXPECT_NEAR(dirs[0].scale, 0.002, 1e-12);
}

TEST(EmpiricalParatingent, CircleTangent) {
  // Samples on p(x) = sqrt(3 - 2 cos 2 pi x) near x0.
  const double pi = std::numbers::pi;
  auto p = [&](double x) { return std::sqrt(3.0 - 2.0 * std::cos(2 * pi * x)); };
  const double x0 = 0.3;
  std::vector<PhaseSample> s;
  for (int i = -4; i <= 4; ++i) {
    const double x = x0 + 4e-4 * i;
    s.push_back({v1(x), v1(p(x))});
  }
  const Vector t = Vector{{1.0, 2 * pi * std::sin(2 * pi * x0) / p(x0)}}.normalized();
  for (const auto& d : empirical_paratingent(s, 1e-3, 1e-2)) {
    EXPECT_GE(std::abs(d.v.stacked().dot(t)), 1.0 - 1e-2);
    EXPECT_LE((d.v.stacked() - std::copysign(1.0, d.v.stacked().dot(t)) * t).norm(), 1e-2);
  }
}

}  // namespace
}  // namespace greencone
