#pragma once

// Random generators for the property suites.

#include "greencone/symplectic_cones.hpp"

#include <random>

namespace greencone::sampling {

inline Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a = Matrix::NullaryExpr(n, n, [&] { return g(rng); });
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

inline SymMatrix random_symmetric(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix a = Matrix::NullaryExpr(n, n, [&] { return g(rng); });
  return SymMatrix(a);
}

/// PSD matrix with the given eigenvalues in a random basis.
inline SymMatrix random_psd(const Vector& eigenvalues, std::mt19937_64& rng) {
  const Matrix q = random_orthogonal(eigenvalues.size(), rng);
  return SymMatrix(q * eigenvalues.asDiagonal() * q.transpose());
}

/// Random pair S1 <= S2. With rank_deficient, U has between 1 and n exact
/// zero eigenvalues; nonzero eigenvalues lie in [0.1, 3].
inline ConePair random_pair(Eigen::Index n, bool rank_deficient, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ev(0.1, 3.0);
  Vector lam = Vector::NullaryExpr(n, [&] { return ev(rng); });
  if (rank_deficient) {
    std::uniform_int_distribution<Eigen::Index> zeros(1, n);
    const Eigen::Index z = zeros(rng);
    for (Eigen::Index i = 0; i < z; ++i) lam(i) = 0.0;
  }
  const SymMatrix s1 = random_symmetric(n, rng);
  return {s1, s1 + random_psd(lam, rng)};
}

/// Random S with S1 <= S <= S2: S = S1 + U^{1/2} W U^{1/2}, 0 <= W <= I.
inline SymMatrix random_between(const ConePair& pair, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vector lam = Vector::NullaryExpr(pair.dim(), [&] { return unit(rng); });
  const Matrix root = psd_sqrt(pair.u());
  const SymMatrix w = random_psd(lam, rng);
  return pair.s1() + SymMatrix(root * w.matrix() * root);
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Vector::NullaryExpr(n, [&] { return g(rng); });
}

}  // namespace greencone::sampling
