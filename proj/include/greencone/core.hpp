#pragma once

// Shared vocabulary: dense types, the error hierarchy, tolerances and a
// deterministic parallel map.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace greencone {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Ordering tolerance for S1 <= S2 decisions.
inline constexpr double kTolOrder = 1e-10;
/// Maximum allowed symmetry defect after construction.
inline constexpr double kSymmetryDefect = 1e-12;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Short %g rendering for messages; std::to_string prints 1e-8 as 0.000000.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GREENCONE_DEFINE_ERROR(Name)            \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(std::string(#Name ": ") + what) {} \
  };

GREENCONE_DEFINE_ERROR(DimensionMismatch)
GREENCONE_DEFINE_ERROR(NegativeInnerProduct)
GREENCONE_DEFINE_ERROR(SingularMatrix)
GREENCONE_DEFINE_ERROR(NotPositiveDefinite)
GREENCONE_DEFINE_ERROR(RankDetectionAmbiguous)
GREENCONE_DEFINE_ERROR(OrderViolation)
GREENCONE_DEFINE_ERROR(IntegratorFailure)
GREENCONE_DEFINE_ERROR(BlowUp)
GREENCONE_DEFINE_ERROR(NonConvergence)
GREENCONE_DEFINE_ERROR(EmptyWindow)
GREENCONE_DEFINE_ERROR(ConfigError)

#undef GREENCONE_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Symmetric matrices
// ---------------------------------------------------------------------------

/// Dense real symmetric matrix. Construction symmetrizes its input, so the
/// stored entries satisfy S == S^T exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m) : m_(0.5 * (m + m.transpose())) {
    if (m.rows() != m.cols()) {
      throw DimensionMismatch("SymMatrix needs a square matrix");
    }
  }

  static SymMatrix zero(Eigen::Index n) { return SymMatrix(Matrix::Zero(n, n)); }
  static SymMatrix identity(Eigen::Index n) { return SymMatrix(Matrix::Identity(n, n)); }
  static SymMatrix scalar(Eigen::Index n, double c) {
    return SymMatrix(c * Matrix::Identity(n, n));
  }

  [[nodiscard]] Eigen::Index dim() const { return m_.rows(); }
  [[nodiscard]] const Matrix& matrix() const { return m_; }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  [[nodiscard]] Eigen::VectorXd eigenvalues() const {
    if (dim() == 0) return {};
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }
  [[nodiscard]] double min_eigenvalue() const {
    return dim() == 0 ? std::numeric_limits<double>::infinity() : eigenvalues()(0);
  }
  [[nodiscard]] double max_eigenvalue() const {
    return dim() == 0 ? -std::numeric_limits<double>::infinity()
                      : eigenvalues()(dim() - 1);
  }
  /// Spectral norm.
  [[nodiscard]] double norm2() const {
    if (dim() == 0) return 0.0;
    auto ev = eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(dim() - 1)));
  }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(a.m_ + b.m_);
  }
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(a.m_ - b.m_);
  }
  friend SymMatrix operator*(double s, const SymMatrix& a) { return SymMatrix(s * a.m_); }
  friend Vector operator*(const SymMatrix& a, const Vector& v) { return a.m_ * v; }

 private:
  Matrix m_;
};

/// a <= b in the positive semi-definite order, up to tol.
inline bool psd_leq(const SymMatrix& a, const SymMatrix& b, double tol = kTolOrder) {
  return (b - a).min_eigenvalue() >= -tol;
}

/// Symmetric positive semi-definite square root; eigenvalues below -1e-12
/// are treated as roundoff and clamped to zero.
inline Matrix psd_sqrt(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix());
  Vector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-12 * std::max(1.0, s.norm2())) {
      throw NotPositiveDefinite("square root of a matrix with eigenvalue " +
                                num(ev(i)));
    }
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// ---------------------------------------------------------------------------
// Tangent vectors of R^{2n}
// ---------------------------------------------------------------------------

/// v = (h, k): base component h, fiber component k.
struct TangentVector {
  Vector h;
  Vector k;

  TangentVector() = default;
  TangentVector(Vector base, Vector fiber) : h(std::move(base)), k(std::move(fiber)) {
    if (h.size() != k.size()) {
      throw DimensionMismatch("tangent vector components differ in size");
    }
  }
  static TangentVector zero(Eigen::Index n) { return {Vector::Zero(n), Vector::Zero(n)}; }
  static TangentVector on_graph(const SymMatrix& s, const Vector& h) { return {h, s * h}; }

  [[nodiscard]] Eigen::Index dim() const { return h.size(); }
  [[nodiscard]] double norm() const { return std::sqrt(h.squaredNorm() + k.squaredNorm()); }
  [[nodiscard]] Vector stacked() const {
    Vector out(2 * dim());
    out << h, k;
    return out;
  }
  [[nodiscard]] TangentVector normalized() const {
    const double nv = norm();
    return {h / nv, k / nv};
  }

  friend TangentVector operator+(const TangentVector& a, const TangentVector& b) {
    return {a.h + b.h, a.k + b.k};
  }
  friend TangentVector operator-(const TangentVector& a, const TangentVector& b) {
    return {a.h - b.h, a.k - b.k};
  }
  friend TangentVector operator*(double s, const TangentVector& a) { return {s * a.h, s * a.k}; }
};

// ---------------------------------------------------------------------------
// Torus helpers
// ---------------------------------------------------------------------------

/// Reduce a coordinate into [0, 1).
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Minimal-norm representative of a coordinate difference, in [-1/2, 1/2).
inline double torus_delta(double d) { return d - std::floor(d + 0.5); }

template <typename Derived>
auto torus_delta(const Eigen::MatrixBase<Derived>& d) {
  return d.unaryExpr([](double v) { return torus_delta(v); }).eval();
}

// ---------------------------------------------------------------------------
// Deterministic parallel map
// ---------------------------------------------------------------------------

/// Process-wide worker count used by the parallel maps (>= 1).
inline unsigned& worker_count() {
  static unsigned workers = 1;
  return workers;
}

/// Runs body(i) for i in [0, count). Indices are split into contiguous
/// blocks; each index is handled by exactly one worker and results must be
/// written to per-index slots, so output never depends on the worker count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                         unsigned workers = 0) {
  if (workers == 0) workers = worker_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace greencone
