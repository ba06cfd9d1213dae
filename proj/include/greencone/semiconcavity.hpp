#pragma once

// Anisotropic semi-concavity: sampled certificates, the gradient bound on
// argmin sets, its ball form, and finite-scale paratingent directions.

#include "greencone/core.hpp"
#include "greencone/symplectic_cones.hpp"

#include <utility>

namespace greencone {

/// ||x||_U = sqrt(x^T U x) for U positive definite.
inline double unorm(const SymMatrix& u, const Vector& x) {
  Eigen::LLT<Matrix> llt(u.matrix());
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("unorm");
  return (llt.matrixU() * x).norm();
}

/// ||x||_{U^{-1}}, through the Cholesky factor of U.
inline double uinv_norm(const SymMatrix& u, const Vector& x) {
  Eigen::LLT<Matrix> llt(u.matrix());
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("uinv_norm");
  return llt.matrixL().solve(x).norm();
}

/// A sampled function: points x, values f(x) and super/sub-gradient
/// candidates l. Differences of x use the minimal torus lift when periodic.
struct SampledFunction {
  struct Point {
    Vector x;
    double f = 0.0;
    Vector l;
  };
  std::vector<Point> points;
  bool periodic = false;

  [[nodiscard]] Vector delta(std::size_t from, std::size_t to) const {
    Vector d = points[to].x - points[from].x;
    return periodic ? torus_delta(d) : d;
  }
};

struct PairViolation {
  std::size_t i = 0;
  std::size_t j = 0;
  double margin = 0.0;  // negative: by how much the inequality fails
};

struct SemiconcavityReport {
  std::vector<PairViolation> violations;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t pairs_checked = 0;
  [[nodiscard]] bool passed() const { return violations.empty(); }
};

namespace detail {

// margin(i,j) = 1/2 A d^2 - sign * (f_j - f_i - l_i.d)
inline SemiconcavityReport check_quadratic_bound(const SampledFunction& s, const SymMatrix& a,
                                                 double tol, double sign) {
  SemiconcavityReport rep;
  const std::size_t n = s.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vector d = s.delta(i, j);
      const double lhs = s.points[j].f - s.points[i].f - s.points[i].l.dot(d);
      const double margin = 0.5 * d.dot(a * d) - sign * lhs;
      ++rep.pairs_checked;
      rep.worst_margin = std::min(rep.worst_margin, margin);
      if (margin < -tol) rep.violations.push_back({i, j, margin});
    }
  }
  return rep;
}

}  // namespace detail

/// All pairs with f(x_j) - f(x_i) - l_i.(x_j - x_i) > 1/2 A (x_j - x_i)^2 + tol.
inline SemiconcavityReport check_semiconcave(const SampledFunction& s, const SymMatrix& a,
                                             double tol) {
  return detail::check_quadratic_bound(s, a, tol, 1.0);
}

/// Dual of check_semiconcave: f is A-semi-convex when -f is A-semi-concave.
inline SemiconcavityReport check_semiconvex(const SampledFunction& s, const SymMatrix& a,
                                            double tol) {
  return detail::check_quadratic_bound(s, a, tol, -1.0);
}

/// Points of argmin(f - g) together with their common gradient p = df = dg.
struct ArgminSet {
  struct Sample {
    Vector x;
    Vector p;
  };
  std::vector<Sample> samples;
  bool periodic = false;

  [[nodiscard]] bool empty() const { return samples.empty(); }
  [[nodiscard]] std::size_t size() const { return samples.size(); }
};

/// The pair A < B with U = B - A positive definite.
class AnisoBound {
 public:
  AnisoBound(SymMatrix a, SymMatrix b) : a_(std::move(a)), b_(std::move(b)), u_(b_ - a_) {
    if (u_.min_eigenvalue() <= kTolOrder) {
      throw NotPositiveDefinite("B - A must be positive definite");
    }
    llt_.compute(u_.matrix());
    mid_ = 0.5 * (a_ + b_);
  }

  [[nodiscard]] const SymMatrix& a() const { return a_; }
  [[nodiscard]] const SymMatrix& b() const { return b_; }
  [[nodiscard]] const SymMatrix& u() const { return u_; }
  [[nodiscard]] const SymMatrix& mid() const { return mid_; }
  [[nodiscard]] double unorm(const Vector& x) const { return (llt_.matrixU() * x).norm(); }
  [[nodiscard]] double uinv_norm(const Vector& x) const {
    return llt_.matrixL().solve(x).norm();
  }
  /// Lipschitz constant implied by the gradient bound: ||(A+B)/2|| + ||U||/2.
  [[nodiscard]] double lipschitz_constant() const { return mid_.norm2() + 0.5 * u_.norm2(); }

 private:
  SymMatrix a_, b_, u_, mid_;
  Eigen::LLT<Matrix> llt_;
};

struct GradientBoundReport {
  double min_margin = std::numeric_limits<double>::infinity();
  std::vector<PairViolation> offending;
  std::size_t pairs_checked = 0;
  /// max ||dp|| / ||dx|| over the checked pairs.
  double lipschitz_ratio = 0.0;
  [[nodiscard]] bool passed() const { return offending.empty(); }
};

/// margin_ij = 1/2 ||dx||_U - ||dp - (A+B)/2 dx||_{U^{-1}} over all pairs of K.
inline GradientBoundReport aniso_gradient_bound(const ArgminSet& k, const AnisoBound& bound,
                                                double tol = 0.0) {
  GradientBoundReport rep;
  const std::size_t n = k.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Vector dx = k.samples[j].x - k.samples[i].x;
      if (k.periodic) dx = torus_delta(dx);
      const Vector dp = k.samples[j].p - k.samples[i].p;
      const double margin =
          0.5 * bound.unorm(dx) - bound.uinv_norm(dp - bound.mid() * dx);
      ++rep.pairs_checked;
      rep.min_margin = std::min(rep.min_margin, margin);
      if (dx.norm() > 0.0) rep.lipschitz_ratio = std::max(rep.lipschitz_ratio, dp.norm() / dx.norm());
      if (margin < -tol) rep.offending.push_back({i, j, margin});
    }
  }
  return rep;
}

/// 1/4 ||h||_U^2 - ||k - (A+B)/2 h||_{U^{-1}}^2; equals Sg_{S_A,S_B}(h, k).
inline double ball_margin(const AnisoBound& bound, const TangentVector& v) {
  const double r = 0.5 * bound.unorm(v.h);
  const double q = bound.uinv_norm(v.k - bound.mid() * v.h);
  return r * r - q * q;
}

/// ||k - (A+B)/2 h||_{U^{-1}} <= 1/2 ||h||_U, with tol applied to the
/// squared form.
inline bool ball_cone_membership(const AnisoBound& bound, const TangentVector& v,
                                 double tol = 0.0) {
  return ball_margin(bound, v) >= -tol;
}

// ---------------------------------------------------------------------------
// Finite-scale paratingent directions
// ---------------------------------------------------------------------------

/// A phase point (x, p); x is a torus coordinate when periodic.
struct PhaseSample {
  Vector x;
  Vector p;
};

struct ParatingentDirection {
  std::size_t i = 0;
  std::size_t j = 0;
  double scale = 0.0;  // |z_i - z_j| before normalization
  TangentVector v;     // unit vector
};

/// Phase-space difference z_i - z_j, minimal lift in x when periodic.
inline TangentVector phase_delta(const PhaseSample& a, const PhaseSample& b, bool periodic) {
  Vector dx = a.x - b.x;
  if (periodic) dx = torus_delta(dx);
  return {dx, a.p - b.p};
}

/// All normalized differences (z_i - z_j)/|z_i - z_j| with i != j and
/// |z_i - z_j| in [delta_min, delta_max], in lexicographic (i, j) order.
inline std::vector<ParatingentDirection> empirical_paratingent(
    const std::vector<PhaseSample>& samples, double delta_min, double delta_max,
    bool periodic = true) {
  if (samples.size() < 2) throw EmptyWindow("fewer than two samples");
  std::vector<ParatingentDirection> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (i == j) continue;
      const TangentVector d = phase_delta(samples[i], samples[j], periodic);
      const double len = d.norm();
      if (len >= delta_min && len <= delta_max) out.push_back({i, j, len, d.normalized()});
    }
  }
  if (out.empty()) throw EmptyWindow("no sample pair in the scale window");
  return out;
}

}  // namespace greencone
