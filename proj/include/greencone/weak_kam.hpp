#pragma once

// Grids on T^n, action kernels, the Lax-Oleinik semigroups, weak KAM
// solutions by fixed-point iteration, conjugate pairs and the lifted set
// I_{u,w} = {(x, du(x)) : u(x) = w(x)}. The cohomology class lives in the
// system (H(x, c + p)), so du is the momentum of the shifted system.

#include "greencone/action.hpp"
#include "greencone/semiconcavity.hpp"

#include <numeric>

namespace greencone {

/// Uniform periodic grid with `resolution` nodes per axis; node index
/// i = i_0 + resolution * i_1.
template <int Dim>
struct Grid {
  using Vec = typename TonelliSystem<Dim>::Vec;
  int resolution = 0;

  explicit Grid(int res) : resolution(res) {
    if (res < 16) throw ConfigError("grid resolution must be at least 16");
  }

  [[nodiscard]] std::size_t size() const {
    std::size_t n = 1;
    for (int d = 0; d < Dim; ++d) n *= static_cast<std::size_t>(resolution);
    return n;
  }
  [[nodiscard]] double spacing() const { return 1.0 / resolution; }
  [[nodiscard]] std::array<int, Dim> coords(std::size_t i) const {
    std::array<int, Dim> c{};
    for (int d = 0; d < Dim; ++d) {
      c[d] = static_cast<int>(i % static_cast<std::size_t>(resolution));
      i /= static_cast<std::size_t>(resolution);
    }
    return c;
  }
  [[nodiscard]] std::size_t index(std::array<int, Dim> c) const {
    std::size_t i = 0;
    for (int d = Dim - 1; d >= 0; --d) {
      const int r = ((c[d] % resolution) + resolution) % resolution;
      i = i * static_cast<std::size_t>(resolution) + static_cast<std::size_t>(r);
    }
    return i;
  }
  [[nodiscard]] Vec node(std::size_t i) const {
    const auto c = coords(i);
    Vec x;
    for (int d = 0; d < Dim; ++d) x(d) = static_cast<double>(c[d]) / resolution;
    return x;
  }
  /// Neighbor of node i shifted by `step` along axis d (periodic).
  [[nodiscard]] std::size_t shifted(std::size_t i, int d, int step) const {
    auto c = coords(i);
    c[d] += step;
    return index(c);
  }
};

template <int Dim>
struct GridFunction {
  Grid<Dim> grid;
  std::vector<double> values;

  explicit GridFunction(Grid<Dim> g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  GridFunction(Grid<Dim> g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw DimensionMismatch("grid function size");
    for (double x : values) {
      if (!std::isfinite(x)) throw NonConvergence("non-finite grid function value");
    }
  }

  [[nodiscard]] std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  [[nodiscard]] double min() const { return *std::min_element(values.begin(), values.end()); }
  [[nodiscard]] double max() const { return *std::max_element(values.begin(), values.end()); }
  [[nodiscard]] double mean() const {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  }
  GridFunction& operator+=(double a) {
    for (double& v : values) v += a;
    return *this;
  }
};

template <int Dim>
double sup_distance(const GridFunction<Dim>& a, const GridFunction<Dim>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("grid functions on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// ---------------------------------------------------------------------------
// Kernel and semigroups
// ---------------------------------------------------------------------------

template <int Dim>
struct ActionKernel {
  Grid<Dim> grid;
  double t_step = 0.0;
  int segments = 0;
  int max_winding = 0;
  std::vector<double> entries;  // row-major, entries[i * size + j] = A^t(x_i, y_j)

  [[nodiscard]] std::size_t size() const { return grid.size(); }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return entries[i * size() + j]; }
};

inline constexpr std::size_t kMaxKernelNodes1 = 2048;
inline constexpr std::size_t kMaxKernelNodes2 = 64 * 64;

/// K[i][j] = A^{t_step}(x_i, y_j). Rows run in parallel; within a row the
/// minimizing curves warm-start the next column, so entries depend only on
/// the row, never on the worker count.
template <int Dim>
ActionKernel<Dim> build_kernel(const TonelliSystem<Dim>& sys, const Grid<Dim>& grid, double t_step,
                               const ActionOptions& opt = {}) {
  const std::size_t n = grid.size();
  if (n > (Dim == 1 ? kMaxKernelNodes1 : kMaxKernelNodes2)) {
    throw ConfigError("kernel of " + std::to_string(n) + " nodes exceeds the size budget");
  }
  detail::check_action_args(t_step, opt.segments);
  ActionKernel<Dim> k{grid, t_step, opt.segments, opt.max_winding, std::vector<double>(n * n)};
  std::vector<std::string> failures(n);
  parallel_for(n, [&](std::size_t i) {
    CurveCache<Dim> cache;
    const auto x = grid.node(i);
    for (std::size_t j = 0; j < n; ++j) {
      try {
        k.entries[i * n + j] = action<Dim>(sys, x, grid.node(j), t_step, opt, &cache).value;
      } catch (const NonConvergence& e) {
        if (failures[i].empty()) failures[i] = "entry (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what();
        k.entries[i * n + j] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  });
  for (const auto& f : failures) {
    if (!f.empty()) throw NonConvergence("kernel unusable, " + f);
  }
  return k;
}

/// T u(y_j) = min_i u(x_i) + K[i][j].
template <int Dim>
GridFunction<Dim> lax_oleinik(const ActionKernel<Dim>& k, const GridFunction<Dim>& u) {
  if (u.grid.resolution != k.grid.resolution) throw DimensionMismatch("kernel and grid resolutions differ");
  const std::size_t n = k.size();
  GridFunction<Dim> out(u.grid);
  parallel_for(n, [&](std::size_t j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) best = std::min(best, u[i] + k.entries[i * n + j]);
    out[j] = best;
  });
  return out;
}

/// T+ u(x_i) = max_j u(y_j) - K[i][j].
template <int Dim>
GridFunction<Dim> lax_oleinik_forward(const ActionKernel<Dim>& k, const GridFunction<Dim>& u) {
  if (u.grid.resolution != k.grid.resolution) throw DimensionMismatch("kernel and grid resolutions differ");
  const std::size_t n = k.size();
  GridFunction<Dim> out(u.grid);
  parallel_for(n, [&](std::size_t i) {
    double best = -std::numeric_limits<double>::infinity();
    const double* row = k.entries.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) best = std::max(best, u[j] - row[j]);
    out[i] = best;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Weak KAM solutions
// ---------------------------------------------------------------------------

struct SolveOptions {
  int max_iter = 5000;
  double tol = 1e-9;
  /// Iterations without a new residual minimum before Cesaro averaging.
  int stall_window = 50;
};

template <int Dim>
struct WeakKAMSolution {
  GridFunction<Dim> u;
  double c = 0.0;
  double c_spread = 0.0;  // (max - min) of (u - T u) / t at the end
  double residual = 0.0;  // sup |u - (T u + c t)|
  double t_step = 0.0;
  int iterations = 0;
  bool cesaro = false;
};

namespace detail {

struct FixedPoint {
  double drift = 0.0;   // mean(op(u) - u)
  double spread = 0.0;  // max - min of op(u) - u
  double residual = 0.0;  // sup |op(u) - u - drift|
  int iterations = 0;
  bool cesaro = false;
};

template <int Dim, typename Op>
FixedPoint measure(const Op& op, const GridFunction<Dim>& u) {
  const auto ou = op(u);
  double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = ou[i] - u[i];
    sum += d;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  FixedPoint fp;
  fp.drift = sum / static_cast<double>(u.size());
  fp.spread = hi - lo;
  for (std::size_t i = 0; i < u.size(); ++i) {
    fp.residual = std::max(fp.residual, std::abs(ou[i] - u[i] - fp.drift));
  }
  return fp;
}

// Iterates u <- normalize(op(u)) until successive iterates agree to tol.
// When the step residual has not improved for stall_window iterations the
// iterates are averaged (Cesaro) and the average is accepted once its own
// fixed-point residual drops below tol.
template <int Dim, typename Op, typename Normalize>
FixedPoint iterate_to_fixed_point(const Op& op, GridFunction<Dim>& u, const Normalize& normalize,
                                  const SolveOptions& opt, const char* what) {
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  bool cesaro = false;
  GridFunction<Dim> avg(u.grid, 0.0);
  int count = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    auto next = op(u);
    normalize(next);
    const double step = sup_distance(next, u);
    u = std::move(next);
    if (!cesaro) {
      if (step < opt.tol) {
        auto fp = measure<Dim>(op, u);
        fp.iterations = it;
        return fp;
      }
      if (step < best) {
        best = step;
        since_best = 0;
      } else if (++since_best >= opt.stall_window) {
        cesaro = true;
      }
      continue;
    }
    ++count;
    for (std::size_t i = 0; i < u.size(); ++i) avg[i] += (u[i] - avg[i]) / count;
    if (count % 10 == 0) {
      auto a = avg;
      normalize(a);
      auto fp = measure<Dim>(op, a);
      if (fp.residual < opt.tol) {
        u = std::move(a);
        fp.iterations = it;
        fp.cesaro = true;
        return fp;
      }
    }
  }
  throw NonConvergence(std::string(what) + " did not converge in " + std::to_string(opt.max_iter) +
                       " iterations (best step residual " + num(best) + ")");
}

}  // namespace detail

/// Iterates u <- T u renormalized to u(x_0) = 0; c = -mean(T u - u) / t.
template <int Dim>
WeakKAMSolution<Dim> weak_kam_solve(const ActionKernel<Dim>& k, const SolveOptions& opt = {}) {
  GridFunction<Dim> u(k.grid, 0.0);
  const auto op = [&](const GridFunction<Dim>& v) { return lax_oleinik(k, v); };
  const auto fp = detail::iterate_to_fixed_point<Dim>(
      op, u, [](GridFunction<Dim>& v) { v += -v[0]; }, opt, "weak KAM iteration");
  return {u, -fp.drift / k.t_step, fp.spread / k.t_step, fp.residual, k.t_step, fp.iterations, fp.cesaro};
}

// ---------------------------------------------------------------------------
// Conjugate pairs and the lifted set
// ---------------------------------------------------------------------------

struct IsetOptions {
  /// Contact threshold eps_K = max(relative * range(gap),
  /// noise * (residual of u + residual of w), floor).
  double relative = 1e-6;
  double noise = 10.0;
  double floor = 1e-9;
  /// Smoothness test: one-sided and central differences agree within
  /// max(smooth_tol, smooth_slope * dx).
  double smooth_tol = 1e-3;
  double smooth_slope = 8.0;
};

template <int Dim>
struct ConjugatePairData {
  WeakKAMSolution<Dim> u;
  GridFunction<Dim> w;
  GridFunction<Dim> gap;  // u - w, aligned so that min = 0
  ArgminSet i_set;        // (x, du) on contact nodes where u is smooth
  std::vector<std::size_t> i_nodes;      // grid index of each I_set sample
  std::vector<std::size_t> contact_nodes;  // all nodes with gap <= eps_K
  double eps_k = 0.0;
  double max_violation = 0.0;  // max(w - u) before alignment
  double c_forward = 0.0;  // mean(T+ w - w) / t, matches c at a fixed point
  int iterations = 0;
  bool cesaro = false;
};

/// Central difference gradient of u at node i, or nothing when the
/// one-sided differences disagree with it beyond the smoothness tolerance.
template <int Dim>
std::optional<typename TonelliSystem<Dim>::Vec> smooth_gradient(const GridFunction<Dim>& u, std::size_t i,
                                                                const IsetOptions& opt = {}) {
  typename TonelliSystem<Dim>::Vec g;
  const double h = u.grid.spacing();
  const double tol = std::max(opt.smooth_tol, opt.smooth_slope * h);
  for (int d = 0; d < Dim; ++d) {
    const double fwd = (u[u.grid.shifted(i, d, 1)] - u[i]) / h;
    const double bwd = (u[i] - u[u.grid.shifted(i, d, -1)]) / h;
    const double cen = 0.5 * (fwd + bwd);
    if (std::abs(fwd - cen) > tol || std::abs(bwd - cen) > tol) return std::nullopt;
    g(d) = cen;
  }
  return g;
}

/// Forward solution by w <- T+ w - c t from w = u. Each iterate is shifted
/// so that max(w - u) = 0, which absorbs the constant c t; then the contact
/// set and its lift.
template <int Dim>
ConjugatePairData<Dim> conjugate_pair(const ActionKernel<Dim>& k,
                                      const WeakKAMSolution<Dim>& sol, const SolveOptions& opt = {},
                                      const IsetOptions& iopt = {}) {
  GridFunction<Dim> w = sol.u;
  const auto op = [&](const GridFunction<Dim>& v) { return lax_oleinik_forward(k, v); };
  const auto align = [&](GridFunction<Dim>& v) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) top = std::max(top, v[i] - sol.u[i]);
    v += -top;
  };
  const auto fp = detail::iterate_to_fixed_point<Dim>(op, w, align, opt, "forward iteration");
  ConjugatePairData<Dim> out{sol, w, GridFunction<Dim>(k.grid), {}, {}, {}, 0.0, 0.0,
                              fp.drift / k.t_step, fp.iterations, fp.cesaro};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.gap[i] = sol.u[i] - w[i];
    lo = std::min(lo, out.gap[i]);
    hi = std::max(hi, out.gap[i]);
  }
  out.max_violation = std::max(0.0, -lo);
  out.gap += -lo;
  out.eps_k = std::max({iopt.relative * (hi - lo), iopt.noise * (sol.residual + fp.residual), iopt.floor});
  out.i_set.periodic = true;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (out.gap[i] > out.eps_k) continue;
    out.contact_nodes.push_back(i);
    if (auto g = smooth_gradient(sol.u, i, iopt)) {
      const Vector x = k.grid.node(i);
      const Vector p = *g;
      out.i_set.samples.push_back({x, p});
      out.i_nodes.push_back(i);
    }
  }
  if (out.contact_nodes.empty()) throw NonConvergence("empty contact set");
  return out;
}

}  // namespace greencone
