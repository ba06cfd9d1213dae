#pragma once

// Lagrangian graphs {(h, S h)}, the cone C(S1, S2) between two of them and
// its characterization through the sign function Sg.

#include "greencone/core.hpp"

#include <optional>
#include <random>
#include <variant>

namespace greencone {

/// Standard symplectic form, omega((h1,k1),(h2,k2)) = h1.k2 - k1.h2.
inline double omega(const TangentVector& v, const TangentVector& w) {
  if (v.dim() != w.dim()) throw DimensionMismatch("omega: vectors of different size");
  return v.h.dot(w.k) - v.k.dot(w.h);
}

/// Sg evaluated off L1 + L2.
struct MinusInfinity {
  friend bool operator==(MinusInfinity, MinusInfinity) { return true; }
};

/// Either a finite value of Sg or the MinusInfinity signal.
class SgValue {
 public:
  SgValue(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  SgValue(MinusInfinity m) : value_(m) {}  // NOLINT(google-explicit-constructor)

  [[nodiscard]] bool is_finite() const { return std::holds_alternative<double>(value_); }
  [[nodiscard]] double value() const { return std::get<double>(value_); }
  /// Finite value, or -infinity.
  [[nodiscard]] double as_double() const {
    return is_finite() ? value() : -std::numeric_limits<double>::infinity();
  }
  [[nodiscard]] bool at_least(double threshold) const {
    return is_finite() && value() >= threshold;
  }

 private:
  std::variant<double, MinusInfinity> value_;
};

/// Rank threshold for ker(U): relative to ||U||_2 with a floor of 1.
inline double rank_threshold(const SymMatrix& u) {
  return kTolOrder * std::max(1.0, u.norm2());
}

/// Ordered pair S1 <= S2 describing C(S1, S2).
class ConePair {
 public:
  ConePair(SymMatrix s1, SymMatrix s2) : s1_(std::move(s1)), s2_(std::move(s2)) {
    if (s1_.dim() != s2_.dim()) throw DimensionMismatch("cone pair of different sizes");
    u_ = s2_ - s1_;
    const double lo = u_.min_eigenvalue();
    if (lo < -kTolOrder * std::max(1.0, u_.norm2())) {
      throw OrderViolation("S1 <= S2 fails, min eigenvalue of S2 - S1 is " +
                           num(lo));
    }
    transversal_ = lo > rank_threshold(u_);
  }

  [[nodiscard]] const SymMatrix& s1() const { return s1_; }
  [[nodiscard]] const SymMatrix& s2() const { return s2_; }
  [[nodiscard]] const SymMatrix& u() const { return u_; }
  [[nodiscard]] bool transversal() const { return transversal_; }
  [[nodiscard]] Eigen::Index dim() const { return s1_.dim(); }

 private:
  SymMatrix s1_, s2_, u_;
  bool transversal_ = false;
};

/// Splitting v = (x1, S1 x1) + (x2, S2 x2).
struct Splitting {
  Vector x1;
  Vector x2;
};

/// Any splitting of v over L1 + L2, or nothing if v lies outside the sum.
inline std::optional<Splitting> split(const ConePair& pair, const TangentVector& v) {
  if (v.dim() != pair.dim()) throw DimensionMismatch("split: vector and pair differ");
  const auto n = pair.dim();
  if (pair.transversal()) {
    Eigen::LLT<Matrix> llt(pair.u().matrix());
    Vector x1 = llt.solve(pair.s2() * v.h - v.k);
    Vector x2 = llt.solve(v.k - pair.s1() * v.h);
    return Splitting{std::move(x1), std::move(x2)};
  }
  Matrix block(2 * n, 2 * n);
  block << Matrix::Identity(n, n), Matrix::Identity(n, n), pair.s1().matrix(),
      pair.s2().matrix();
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(block);
  cod.setThreshold(kTolOrder);
  const Vector rhs = v.stacked();
  const Vector x = cod.solve(rhs);
  const double residual = (block * x - rhs).norm();
  if (residual > 1e-8 * std::max(rhs.norm(), 1e-300) && rhs.norm() > 0.0) {
    return std::nullopt;
  }
  return Splitting{x.head(n), x.tail(n)};
}

/// Sg_{S1,S2}(v) = omega(v1, v2) for v = v1 + v2, vi in the graph of Si.
inline SgValue sg_value(const ConePair& pair, const TangentVector& v) {
  auto parts = split(pair, v);
  if (!parts) return MinusInfinity{};
  return parts->x1.dot(pair.u() * parts->x2);
}

/// Membership in C(S1, S2) through Sg >= -tol.
inline bool cone_contains(const ConePair& pair, const TangentVector& v, double tol = 0.0) {
  return sg_value(pair, v).at_least(-tol);
}

// ---------------------------------------------------------------------------
// Matrix decomposition for vectors with nonnegative inner product
// ---------------------------------------------------------------------------

struct NonnegDecomposition {
  SymMatrix w1;
  SymMatrix w2;
};

/// Unit vector orthogonal to the unit vector u, built from the coordinate
/// axis least aligned with u. Deterministic.
inline Vector orthogonal_completion(const Vector& u) {
  Eigen::Index axis = 0;
  u.cwiseAbs().minCoeff(&axis);
  Vector e = Vector::Zero(u.size());
  e(axis) = 1.0;
  e -= e.dot(u) * u;
  return e.normalized();
}

/// PSD W1, W2 with W1 + W2 = I, W1 (y1 + y2) = y1 and W2 (y1 + y2) = y2.
inline NonnegDecomposition decompose_nonneg(const Vector& y1, const Vector& y2) {
  if (y1.size() != y2.size()) throw DimensionMismatch("decompose_nonneg: sizes differ");
  const auto n = y1.size();
  const double inner = y1.dot(y2);
  if (inner < -1e-12 * y1.norm() * y2.norm()) {
    throw NegativeInnerProduct("y1.y2 = " + num(inner));
  }
  const Vector y = y1 + y2;
  const double ny = y.norm();
  const Matrix id = Matrix::Identity(n, n);
  if (ny == 0.0) {
    return {SymMatrix(0.5 * id), SymMatrix(0.5 * id)};
  }
  const Vector yhat = y / ny;
  const Vector zhat = (y1 - y2) / ny;

  // Rotated picture: y -> e1, z -> (z1, z2, 0, ...); W' = [[z1, z2], [z2, -z1]].
  const double z1 = zhat.dot(yhat);
  Matrix w = z1 * yhat * yhat.transpose();
  if (n > 1) {
    Vector perp = zhat - z1 * yhat;
    const double np = perp.norm();
    Vector b2 = np > 1e-14 * std::max(1.0, zhat.norm()) ? Vector(perp / np)
                                                      : orthogonal_completion(yhat);
    const double z2 = zhat.dot(b2);
    w += -z1 * b2 * b2.transpose() + z2 * (yhat * b2.transpose() + b2 * yhat.transpose());
  }
  return {SymMatrix(0.5 * (id + w)), SymMatrix(0.5 * (id - w))};
}

// ---------------------------------------------------------------------------
// Symplectic coordinate changes
// ---------------------------------------------------------------------------

/// Phi_C(x, y) = (x, y + C x).
inline TangentVector phi_shear(double c, const TangentVector& v) { return {v.h, v.k + c * v.h}; }

/// Phi_A(x, y) = (A^{-1} x, A^T y), mapping the graph of S to that of A^T S A.
class GlTransform {
 public:
  explicit GlTransform(Matrix a) : a_(std::move(a)), lu_(a_) {
    if (a_.rows() != a_.cols()) throw DimensionMismatch("phi_gl needs a square matrix");
    Eigen::JacobiSVD<Matrix> svd(a_);
    const auto& sv = svd.singularValues();
    cond_ = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                    : std::numeric_limits<double>::infinity();
    if (!(cond_ < 1e14)) {
      throw SingularMatrix("phi_gl: condition number " + num(cond_));
    }
  }

  [[nodiscard]] double condition_number() const { return cond_; }
  [[nodiscard]] const Matrix& matrix() const { return a_; }
  [[nodiscard]] TangentVector apply(const TangentVector& v) const {
    return {lu_.solve(v.h), a_.transpose() * v.k};
  }
  [[nodiscard]] SymMatrix apply(const SymMatrix& s) const {
    return SymMatrix(a_.transpose() * s.matrix() * a_);
  }
  [[nodiscard]] TangentVector apply_inverse(const TangentVector& v) const {
    return {a_ * v.h, lu_.transpose().solve(v.k)};
  }
  [[nodiscard]] SymMatrix apply_inverse(const SymMatrix& s) const {
    const Matrix ainv = lu_.inverse();
    return SymMatrix(ainv.transpose() * s.matrix() * ainv);
  }

 private:
  Matrix a_;
  Eigen::PartialPivLU<Matrix> lu_;
  double cond_ = 1.0;
};

inline TangentVector phi_gl(const Matrix& a, const TangentVector& v) {
  return GlTransform(a).apply(v);
}

// ---------------------------------------------------------------------------
// Reduction of a degenerate pair
// ---------------------------------------------------------------------------

/// After the shear by C and Phi_A, the pair becomes diag(Sbar_i, N).
struct ReducedPair {
  double shear = 0.0;
  Matrix a;                // P^T Q
  Eigen::Index m = 0;      // rank of U
  SymMatrix sbar1, sbar2;  // m x m, Sbar1 < Sbar2
  SymMatrix n_block;       // (n-m) x (n-m), invertible
};

inline ReducedPair reduce_degenerate(const ConePair& pair) {
  const auto n = pair.dim();
  if (pair.transversal()) {
    return {0.0, Matrix::Identity(n, n), n, pair.s1(), pair.s2(), SymMatrix::zero(0)};
  }
  const SymMatrix& u = pair.u();
  const double thr = rank_threshold(u);
  Eigen::SelfAdjointEigenSolver<Matrix> es(u.matrix());
  const Vector& ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(ev(i));
    if (a > 1e-2 * thr && a < 1e2 * thr) {
      throw RankDetectionAmbiguous("eigenvalue " + num(ev(i)) +
                                   " of S2 - S1 is within two decades of the threshold " +
                                   num(thr));
    }
  }
  // Eigenvalues are ascending: kernel directions first.
  Eigen::Index kernel = 0;
  while (kernel < n && ev(kernel) <= thr) ++kernel;
  const Eigen::Index m = n - kernel;

  const double c = pair.s1().norm2() + pair.s2().norm2() + 1.0;
  const SymMatrix s1 = pair.s1() + SymMatrix::scalar(n, c);
  const SymMatrix s2 = pair.s2() + SymMatrix::scalar(n, c);

  // Rows of P: range directions, then kernel directions.
  Matrix p(n, n);
  p.topRows(m) = es.eigenvectors().rightCols(m).transpose();
  p.bottomRows(kernel) = es.eigenvectors().leftCols(kernel).transpose();

  const Matrix r1 = p * s1.matrix() * p.transpose();
  const Matrix mblock = r1.topRightCorner(m, kernel);
  const Matrix nblock = r1.bottomRightCorner(kernel, kernel);
  Eigen::LDLT<Matrix> nfact(nblock);
  if (nfact.info() != Eigen::Success || !nfact.isPositive()) {
    throw SingularMatrix("kernel block N of the sheared pair is not invertible");
  }
  Matrix q = Matrix::Identity(n, n);
  q.bottomLeftCorner(kernel, m) = -nfact.solve(mblock.transpose());
  const Matrix a = p.transpose() * q;

  const Matrix d1 = a.transpose() * s1.matrix() * a;
  const Matrix d2 = a.transpose() * s2.matrix() * a;
  const double scale = std::max(1.0, std::max(d1.cwiseAbs().maxCoeff(), d2.cwiseAbs().maxCoeff()));
  const double off = m == 0 ? 0.0
                            : std::max(d1.topRightCorner(m, kernel).cwiseAbs().maxCoeff(),
                                       d2.topRightCorner(m, kernel).cwiseAbs().maxCoeff());
  const double ndiff = (d1.bottomRightCorner(kernel, kernel) - d2.bottomRightCorner(kernel, kernel))
                           .cwiseAbs()
                           .maxCoeff();
  if ((m > 0 && off > 1e-9 * scale) || ndiff > 1e-9 * scale) {
    throw RankDetectionAmbiguous("block diagonalization residual " +
                                 num(std::max(off, ndiff)));
  }
  ReducedPair out{c, a, m, SymMatrix(d1.topLeftCorner(m, m)), SymMatrix(d2.topLeftCorner(m, m)),
                  SymMatrix(0.5 * (d1.bottomRightCorner(kernel, kernel) +
                                   d2.bottomRightCorner(kernel, kernel)))};
  if (m > 0 && (out.sbar2 - out.sbar1).min_eigenvalue() <= 0.0) {
    throw RankDetectionAmbiguous("reduced pair is not strictly ordered");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Witnesses
// ---------------------------------------------------------------------------

/// Tolerance used to validate a witness S: S1 <= S <= S2 and S h = k.
inline constexpr double kWitnessTol = 1e-8;

/// True when S1 <= S <= S2 and S h = k, all within tol (scaled by the data).
inline bool witness_valid(const ConePair& pair, const SymMatrix& s, const TangentVector& v,
                          double tol = kWitnessTol) {
  const double scale = std::max({1.0, pair.s1().norm2(), pair.s2().norm2()});
  const double vscale = std::max(1.0, v.norm());
  return (s - pair.s1()).min_eigenvalue() >= -tol * scale &&
         (pair.s2() - s).min_eigenvalue() >= -tol * scale &&
         (s * v.h - v.k).norm() <= tol * scale * vscale;
}

namespace detail {

// Transversal pair: S = S1 + U^{1/2} W2 U^{1/2} from the nonnegative
// decomposition of y_i = U^{1/2} x_i.
inline std::optional<SymMatrix> transversal_witness(const ConePair& pair, const TangentVector& v,
                                                    double tol) {
  auto parts = split(pair, v);
  const double sg = parts->x1.dot(pair.u() * parts->x2);
  if (sg < -tol) return std::nullopt;
  const Matrix root = psd_sqrt(pair.u());
  Vector y1 = root * parts->x1;
  Vector y2 = root * parts->x2;
  if (y1.dot(y2) < 0.0) {
    // Boundary case inside tolerance: remove the negative part.
    const double n1 = y1.squaredNorm();
    if (n1 > 0.0) y2 -= (y1.dot(y2) / n1) * y1;
  }
  const auto w = decompose_nonneg(y1, y2);
  return pair.s1() + SymMatrix(root * w.w2.matrix() * root);
}

}  // namespace detail

/// Constructive witness S with S1 <= S <= S2 and S h = k, or nothing when
/// Sg(v) < -tol.
inline std::optional<SymMatrix> cone_witness(const ConePair& pair, const TangentVector& v,
                                             double tol = 0.0) {
  if (v.dim() != pair.dim()) throw DimensionMismatch("cone_witness: sizes differ");
  if (pair.transversal()) return detail::transversal_witness(pair, v, tol);

  const ReducedPair red = reduce_degenerate(pair);
  const auto n = pair.dim();
  const Eigen::Index kernel = n - red.m;
  const GlTransform phi(red.a);
  const TangentVector moved = phi.apply(phi_shear(red.shear, v));

  // Common N block: the kernel coordinates must lie on the graph of N.
  const Vector ybar = moved.h.tail(kernel);
  const Vector kbar = moved.k.tail(kernel);
  const double scale = std::max({1.0, red.n_block.norm2(), moved.norm()});
  if ((red.n_block * ybar - kbar).norm() > 1e-8 * scale) return std::nullopt;

  Matrix full = Matrix::Zero(n, n);
  full.bottomRightCorner(kernel, kernel) = red.n_block.matrix();
  if (red.m > 0) {
    const ConePair reduced(red.sbar1, red.sbar2);
    const TangentVector head{moved.h.head(red.m), moved.k.head(red.m)};
    auto sbar = detail::transversal_witness(reduced, head, tol);
    if (!sbar) return std::nullopt;
    full.topLeftCorner(red.m, red.m) = sbar->matrix();
  }
  return phi.apply_inverse(SymMatrix(full)) - SymMatrix::scalar(n, red.shear);
}

// ---------------------------------------------------------------------------
// Surrogate metrics
// ---------------------------------------------------------------------------

/// Operator-norm distance between the graphs of G1 and G2.
inline double subspace_distance(const SymMatrix& g1, const SymMatrix& g2) {
  if (g1.dim() != g2.dim()) throw DimensionMismatch("subspace_distance: sizes differ");
  return (g1 - g2).norm2();
}

/// Random unit vectors of C(S1, S2), drawn as (h, S h)/|.| with
/// S = S1 + U^{1/2} W U^{1/2}, 0 <= W <= I.
inline std::vector<Vector> sample_cone_section(const ConePair& pair, std::size_t count,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = pair.dim();
  const Matrix root = psd_sqrt(pair.u());
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Matrix q = Matrix::NullaryExpr(n, n, [&] { return gauss(rng); });
    Eigen::HouseholderQR<Matrix> qr(q);
    const Matrix orth = qr.householderQ();
    Vector lam = Vector::NullaryExpr(n, [&] { return unit(rng); });
    const Matrix w = orth * lam.asDiagonal() * orth.transpose();
    const SymMatrix s = pair.s1() + SymMatrix(root * w * root);
    Vector h = Vector::NullaryExpr(n, [&] { return gauss(rng); });
    out.push_back(TangentVector::on_graph(s, h).normalized().stacked());
  }
  return out;
}

/// Sampled two-sided Hausdorff distance between the unit-sphere sections of
/// two cones. Each side draws n_samples points and measures their distance
/// to a fixed reference sample of the other cone, so the estimate is
/// nondecreasing in n_samples.
inline double cone_distance(const ConePair& a, const ConePair& b, std::size_t n_samples,
                            std::uint64_t seed = 7, std::size_t n_reference = 4096) {
  if (a.dim() != b.dim()) throw DimensionMismatch("cone_distance: sizes differ");
  const auto ref_a = sample_cone_section(a, n_reference, seed ^ 0x5bd1e995ULL);
  const auto ref_b = sample_cone_section(b, n_reference, seed ^ 0x9e3779b9ULL);
  const auto pts_a = sample_cone_section(a, n_samples, seed);
  const auto pts_b = sample_cone_section(b, n_samples, seed + 1);
  auto one_sided = [](const std::vector<Vector>& pts, const std::vector<Vector>& ref) {
    double worst = 0.0;
    for (const auto& p : pts) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& r : ref) best = std::min(best, (p - r).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(pts_a, ref_b), one_sided(pts_b, ref_a));
}

}  // namespace greencone
