#pragma once

// Randomized property suites over the cone algebra and the semi-concavity
// layer. Each returns one record whose margin is >= 0 exactly when it passes.

#include "greencone/sampling.hpp"
#include "greencone/semiconcavity.hpp"
#include "greencone/symplectic_cones.hpp"
#include "greencone/synthetic.hpp"

#include <sstream>
#include <string>

namespace greencone {

struct CheckRecord {
  std::string name;
  std::string inputs;  // canonical description of the inputs, digested by reports
  double margin = 0.0;
  bool pass = false;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::size_t skipped = 0;  // trials too close to a boundary to classify
  std::string note;
};

namespace detail {

inline std::string suite_inputs(const std::string& name, std::uint64_t seed, std::size_t trials) {
  std::ostringstream os;
  os << name << ";seed=" << seed << ";trials=" << trials;
  return os.str();
}

inline CheckRecord count_record(std::string name, std::uint64_t seed, std::size_t trials, std::size_t failures,
                                std::size_t skipped = 0) {
  CheckRecord r;
  r.inputs = suite_inputs(name, seed, trials);
  r.name = std::move(name);
  r.trials = trials;
  r.failures = failures;
  r.skipped = skipped;
  r.margin = failures == 0 ? 0.0 : -static_cast<double>(failures);
  r.pass = failures == 0;
  return r;
}

inline CheckRecord tolerance_record(std::string name, std::uint64_t seed, std::size_t trials, double worst,
                                    double tol, std::size_t failures = 0) {
  CheckRecord r = count_record(std::move(name), seed, trials, failures);
  if (failures == 0) r.margin = tol - worst;
  r.pass = failures == 0 && worst <= tol;
  std::ostringstream os;
  os.precision(3);
  os << "worst " << worst << " against " << tol;
  r.note = os.str();
  return r;
}

// Sg values within this band of zero have no reliable sign.
inline double sign_band(const ConePair& pair, const TangentVector& v) {
  return 1e-10 * std::max({1.0, pair.s1().norm2(), pair.s2().norm2()}) * std::max(1.0, v.norm() * v.norm());
}

}  // namespace detail

/// Sg >= 0 exactly when cone_witness produces a valid witness; every fourth
/// pair has a rank-deficient gap. A third of the vectors lie on the graph of
/// a random S1 <= S <= S2, the rest are Gaussian.
inline CheckRecord cone_equivalence_suite(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  std::size_t failures = 0, skipped = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + t % 5);
    const ConePair pair = sampling::random_pair(n, t % 4 == 0, rng);
    const TangentVector v =
        t % 3 == 0 ? TangentVector::on_graph(sampling::random_between(pair, rng), sampling::random_vector(n, rng))
                   : TangentVector{sampling::random_vector(n, rng), sampling::random_vector(n, rng)};
    const SgValue sg = sg_value(pair, v);
    // Exact zeros (collapsed pairs) are classified; tiny nonzero values are not.
    if (sg.is_finite() && sg.value() != 0.0 && std::abs(sg.value()) <= detail::sign_band(pair, v)) {
      ++skipped;
      continue;
    }
    const auto w = cone_witness(pair, v);
    const bool valid = w.has_value() && witness_valid(pair, *w, v);
    if (sg.at_least(0.0) != valid) ++failures;
  }
  auto r = detail::count_record("cone_equivalence", seed, trials, failures, skipped);
  r.note = std::to_string(skipped) + " trials inside the sign band";
  return r;
}

/// n = 1: (h, k) lies in C(a, b) exactly when h != 0 and a <= k/h <= b.
inline CheckRecord slope_oracle_suite(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3, 3);
  std::size_t failures = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double a = u(rng);
    const double b = a + std::abs(u(rng));
    const ConePair pair(SymMatrix(Matrix::Constant(1, 1, a)), SymMatrix(Matrix::Constant(1, 1, b)));
    const double h = u(rng), k = u(rng);
    const bool expected = h != 0.0 && k / h >= a && k / h <= b;
    if (cone_contains(pair, TangentVector(Vector::Constant(1, h), Vector::Constant(1, k))) != expected) ++failures;
  }
  return detail::count_record("slope_oracle_n1", seed, trials, failures);
}

/// Sg does not depend on the splitting when L1 and L2 intersect.
inline CheckRecord splitting_invariance_suite(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto n = static_cast<Eigen::Index>(2 + t % 4);
    const ConePair pair = sampling::random_pair(n, true, rng);
    const TangentVector v1 = TangentVector::on_graph(pair.s1(), sampling::random_vector(n, rng));
    const TangentVector v2 = TangentVector::on_graph(pair.s2(), sampling::random_vector(n, rng));
    Eigen::SelfAdjointEigenSolver<Matrix> es(pair.u().matrix());
    const TangentVector shift = TangentVector::on_graph(pair.s1(), Vector(3.7 * es.eigenvectors().col(0)));
    const double a = omega(v1, v2);
    const double scale = std::max(1.0, std::abs(a));
    worst = std::max(worst, std::abs(omega(v1 + shift, v2 - shift) - a) / scale);
    worst = std::max(worst, std::abs(sg_value(pair, v1 + v2).as_double() - a) / scale);
  }
  return detail::tolerance_record("sg_splitting_invariance", seed, trials, worst, 1e-8);
}

/// W1, W2 >= 0, W1 + W2 = I, W_i (y1 + y2) = y_i for y1.y2 >= 0, n <= 8.
inline CheckRecord nonneg_decomposition_suite(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + t % 8);
    const Vector y1 = sampling::random_vector(n, rng);
    Vector y2 = sampling::random_vector(n, rng);
    if (y1.dot(y2) < 0) y2 = -y2;
    const auto d = decompose_nonneg(y1, y2);
    const double s = std::max(1.0, (y1 + y2).norm());
    worst = std::max({worst, -d.w1.min_eigenvalue(), -d.w2.min_eigenvalue(),
                      ((d.w1 + d.w2).matrix() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(),
                      (d.w1 * Vector(y1 + y2) - y1).norm() / s, (d.w2 * Vector(y1 + y2) - y2).norm() / s});
  }
  return detail::tolerance_record("nonneg_decomposition", seed, trials, worst, 1e-9);
}

/// Membership is preserved by the shear (h, k + c h) and by (A^{-1} h, A^T k).
inline CheckRecord symplectic_invariance_suite(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cdist(-3, 3);
  std::size_t failures = 0, skipped = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + (t / 4) % 4);
    const ConePair pair = sampling::random_pair(n, t % 4 == 0, rng);
    const TangentVector v =
        t % 3 == 0 ? TangentVector::on_graph(sampling::random_between(pair, rng), sampling::random_vector(n, rng))
                   : TangentVector{sampling::random_vector(n, rng), sampling::random_vector(n, rng)};
    const double c = cdist(rng);
    const Matrix a = Matrix::Identity(n, n) + 0.3 * sampling::random_symmetric(n, rng).matrix() +
                     0.2 * Matrix::NullaryExpr(n, n, [&] { return cdist(rng) / 3.0; });
    const SgValue sg = sg_value(pair, v);
    if (sg.is_finite() && std::abs(sg.value()) <= 1e3 * detail::sign_band(pair, v)) {
      ++skipped;
      continue;
    }
    const bool before = cone_contains(pair, v);
    const ConePair sheared(pair.s1() + SymMatrix::scalar(n, c), pair.s2() + SymMatrix::scalar(n, c));
    const GlTransform phi(a);
    const ConePair moved(phi.apply(pair.s1()), phi.apply(pair.s2()));
    if (cone_contains(sheared, phi_shear(c, v)) != before || cone_contains(moved, phi.apply(v)) != before) {
      ++failures;
    }
  }
  auto r = detail::count_record("symplectic_invariance", seed, trials, failures, skipped);
  r.note = std::to_string(skipped) + " trials inside the sign band";
  return r;
}

/// Rank-deficient pairs: the reduction recovers rank(S2 - S1), and the
/// witness assembled through it is valid for vectors of the cone.
inline CheckRecord degenerate_reduction_suite(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ev(0.1, 3.0);
  std::size_t failures = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto n = static_cast<Eigen::Index>(2 + t % 4);
    const auto rank = static_cast<Eigen::Index>(t % static_cast<std::size_t>(n));
    Vector lam = Vector::Zero(n);
    for (Eigen::Index i = 0; i < rank; ++i) lam(i) = ev(rng);
    const SymMatrix s1 = sampling::random_symmetric(n, rng);
    const ConePair pair(s1, s1 + sampling::random_psd(lam, rng));
    const ReducedPair red = reduce_degenerate(pair);
    const TangentVector v =
        TangentVector::on_graph(sampling::random_between(pair, rng), sampling::random_vector(n, rng));
    const auto w = cone_witness(pair, v, 1e-9);
    if (red.m != rank || !w || !witness_valid(pair, *w, v)) ++failures;
  }
  return detail::count_record("degenerate_reduction", seed, trials, failures);
}

/// Ball form of the cone: margins agree with Sg and membership matches.
inline CheckRecord ball_cone_suite(std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::size_t mismatches = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + t % 4);
    const SymMatrix a = sampling::random_symmetric(n, rng);
    const SymMatrix b = a + sampling::random_psd(
                                Vector::NullaryExpr(n, [&] { return 0.2 + std::abs(sampling::random_vector(1, rng)(0)); }),
                                rng);
    const AnisoBound bound(a, b);
    const ConePair pair(a, b);
    const TangentVector v{sampling::random_vector(n, rng), sampling::random_vector(n, rng)};
    const double sg = sg_value(pair, v).value();
    const double ball = ball_margin(bound, v);
    worst = std::max(worst, std::abs(ball - sg));
    if (std::abs(sg) > 1e-9 && ball_cone_membership(bound, v) != cone_contains(pair, v)) ++mismatches;
  }
  return detail::tolerance_record("ball_cone_identity", seed, trials, worst, 1e-9, mismatches);
}

/// Gradient bound on numerically extracted argmin sets of synthetic
/// min/max-of-paraboloid pairs, n <= 3.
inline CheckRecord gradient_bound_suite(std::uint64_t seed, std::size_t pairs, double tol = 1e-6) {
  std::mt19937_64 rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  std::size_t failures = 0, empty = 0;
  for (std::size_t t = 0; t < pairs; ++t) {
    const int n = 1 + static_cast<int>(t % 3);
    const auto pp = sampling::random_paraboloid_pair(n, rng);
    const ArgminSet k = sampling::locate_argmin(pp, n);
    if (k.empty()) {
      ++empty;
      continue;
    }
    const auto rep = aniso_gradient_bound(k, AnisoBound(pp.a, pp.b), 0.0);
    worst = std::min(worst, rep.min_margin);
    if (rep.min_margin < -tol) ++failures;
  }
  CheckRecord r = detail::count_record("gradient_bound_synthetic", seed, pairs, failures + empty);
  r.margin = std::isfinite(worst) ? worst + tol : -1.0;
  r.pass = failures == 0 && empty == 0;
  std::ostringstream os;
  os.precision(3);
  os << "worst margin " << worst << " against " << -tol;
  if (empty > 0) os << ", " << empty << " empty argmin sets";
  r.note = os.str();
  return r;
}

inline std::vector<CheckRecord> cone_check_suites(std::uint64_t seed, std::size_t trials) {
  return {cone_equivalence_suite(seed, trials),
          slope_oracle_suite(seed + 1, trials),
          splitting_invariance_suite(seed + 2, trials),
          nonneg_decomposition_suite(seed + 3, trials),
          symplectic_invariance_suite(seed + 4, trials),
          degenerate_reduction_suite(seed + 5, trials)};
}

inline std::vector<CheckRecord> semiconcavity_suites(std::uint64_t seed, std::size_t trials, std::size_t pairs) {
  return {ball_cone_suite(seed, trials), gradient_bound_suite(seed + 1, pairs)};
}

}  // namespace greencone
