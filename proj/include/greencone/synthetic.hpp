#pragma once

// Synthetic min/max-of-paraboloid pairs with a known contact set.
//
// h(x) = 1/2 x^T M x + eta sum_r cos(w_r.x + phi_r) with M = (A+B)/2 and eta
// small enough that A <= D^2 h <= B. f is the minimum of the B-paraboloids
// tangent to h at random grid nodes a_k, g the maximum of the A-paraboloids
// tangent at the same nodes. f is B-semi-concave, g is (-A)-semi-convex,
// f >= h >= g, and f - g vanishes exactly at the nodes a_k.

#include "greencone/semiconcavity.hpp"
#include "greencone/sampling.hpp"

namespace greencone::sampling {

struct ParaboloidPair {
  SymMatrix a, b;
  std::vector<Vector> waves;
  std::vector<double> phases;
  double eta = 0.0;
  std::vector<Vector> contacts;

  [[nodiscard]] SymMatrix mid() const { return 0.5 * (a + b); }

  [[nodiscard]] double h(const Vector& x) const {
    double v = 0.5 * x.dot(mid() * x);
    for (std::size_t r = 0; r < waves.size(); ++r) v += eta * std::cos(waves[r].dot(x) + phases[r]);
    return v;
  }
  [[nodiscard]] Vector grad_h(const Vector& x) const {
    Vector g = mid() * x;
    for (std::size_t r = 0; r < waves.size(); ++r) {
      g -= eta * std::sin(waves[r].dot(x) + phases[r]) * waves[r];
    }
    return g;
  }
  [[nodiscard]] double tangent_paraboloid(const SymMatrix& m, const Vector& at, const Vector& x) const {
    const Vector d = x - at;
    return h(at) + grad_h(at).dot(d) + 0.5 * d.dot(m * d);
  }
  [[nodiscard]] double f(const Vector& x) const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& c : contacts) v = std::min(v, tangent_paraboloid(b, c, x));
    return v;
  }
  [[nodiscard]] double g(const Vector& x) const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& c : contacts) v = std::max(v, tangent_paraboloid(a, c, x));
    return v;
  }
};

/// Uniform grid on [-1, 1]^n with `per_axis` nodes per axis.
inline std::vector<Vector> cube_grid(int n, int per_axis) {
  std::vector<Vector> out;
  std::vector<int> idx(n, 0);
  while (true) {
    Vector x(n);
    for (int d = 0; d < n; ++d) x(d) = -1.0 + 2.0 * idx[d] / (per_axis - 1);
    out.push_back(x);
    int d = 0;
    while (d < n && ++idx[d] == per_axis) idx[d++] = 0;
    if (d == n) break;
  }
  return out;
}

inline int grid_per_axis(int n) { return n == 1 ? 201 : (n == 2 ? 41 : 17); }

inline ParaboloidPair random_paraboloid_pair(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ev(0.5, 3.0);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  ParaboloidPair pp;
  pp.a = random_symmetric(n, rng);
  pp.b = pp.a + random_psd(Vector::NullaryExpr(n, [&] { return ev(rng); }), rng);
  double wsum = 0.0;
  for (int r = 0; r < 3; ++r) {
    pp.waves.push_back(2.0 * random_vector(n, rng));
    pp.phases.push_back(angle(rng));
    wsum += pp.waves.back().squaredNorm();
  }
  pp.eta = 0.4 * (pp.b - pp.a).min_eigenvalue() / wsum;
  const auto grid = cube_grid(n, grid_per_axis(n));
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  std::uniform_int_distribution<int> count(3, 6);
  const int k = count(rng);
  for (int i = 0; i < k; ++i) pp.contacts.push_back(grid[pick(rng)]);
  return pp;
}

/// Grid argmin of f - g at threshold 1e-6 * range, gradients of f by central
/// differences; nodes whose one-sided and central differences disagree by
/// more than 1e-3 are left out.
inline ArgminSet locate_argmin(const ParaboloidPair& pp, int n) {
  const auto grid = cube_grid(n, grid_per_axis(n));
  std::vector<double> d(grid.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    d[i] = pp.f(grid[i]) - pp.g(grid[i]);
    lo = std::min(lo, d[i]);
    hi = std::max(hi, d[i]);
  }
  const double threshold = lo + 1e-6 * (hi - lo);
  ArgminSet k;
  const double step = 1e-6;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (d[i] > threshold) continue;
    Vector p(n);
    bool smooth = true;
    for (int c = 0; c < n; ++c) {
      Vector e = Vector::Zero(n);
      e(c) = step;
      const double fp = pp.f(grid[i] + e), fm = pp.f(grid[i] - e), f0 = pp.f(grid[i]);
      p(c) = (fp - fm) / (2 * step);
      if (std::abs((fp - f0) / step - p(c)) > 1e-3) smooth = false;
    }
    if (smooth) k.samples.push_back({grid[i], p});
  }
  return k;
}

}  // namespace greencone::sampling
