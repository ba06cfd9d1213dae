#pragma once

// Discrete action A^t(x, y): minimum of sum_k L(midpoint, slope) dt over
// broken curves with fixed endpoints, by damped Newton on the interior nodes.

#include "greencone/core.hpp"
#include "greencone/tonelli.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <type_traits>

namespace greencone {

struct ActionOptions {
  int segments = 64;
  /// Winding lifts y + m with |m|_inf <= max_winding around the lift nearest x.
  int max_winding = 2;
  double grad_tol = 1e-11;
  int max_newton = 60;
};

template <int Dim>
struct ActionResult {
  using Vec = typename TonelliSystem<Dim>::Vec;
  double value = std::numeric_limits<double>::infinity();
  std::vector<Vec> curve;  // lifted nodes q_0 = x, ..., q_N = y + m
  bool converged = false;
  int iterations = 0;
  double grad_norm = std::numeric_limits<double>::infinity();
};

namespace detail {

inline void check_action_args(double t, int segments) {
  if (!(t >= 0.1 && t <= 10.0)) {
    throw ConfigError("action time " + num(t) + " outside [0.1, 10]");
  }
  if (segments < 16) throw ConfigError("action needs at least 16 segments");
}

template <int Dim>
struct SegmentTerms {
  using Vec = typename TonelliSystem<Dim>::Vec;
  using Mat = typename TonelliSystem<Dim>::Mat;
  double value = 0.0;
  Vec ga, gb;            // dS/da, dS/db
  Mat haa, hab, hbb;     // second derivatives
};

// Segment a -> b of duration dt: S = dt L((a+b)/2, (b-a)/dt).
template <int Dim>
SegmentTerms<Dim> segment(const TonelliSystem<Dim>& sys, const typename TonelliSystem<Dim>::Vec& a,
                          const typename TonelliSystem<Dim>::Vec& b, double dt, bool second) {
  using Mat = typename TonelliSystem<Dim>::Mat;
  SegmentTerms<Dim> s;
  const auto j = sys.lagrangian_jet(0.5 * (a + b), (b - a) / dt);
  s.value = dt * j.value;
  s.ga = 0.5 * dt * j.lx - j.p;
  s.gb = 0.5 * dt * j.lx + j.p;
  if (second) {
    // lxv(i, k) = d^2 L / dx_i dv_k.
    const Mat xx = 0.25 * dt * j.lxx;
    const Mat xv = 0.5 * j.lxv;
    const Mat vv = j.lvv / dt;
    s.haa = xx - xv - xv.transpose() + vv;
    s.hbb = xx + xv + xv.transpose() + vv;
    s.hab = xx + xv - xv.transpose() - vv;
  }
  return s;
}

template <int Dim>
double curve_action(const TonelliSystem<Dim>& sys, const std::vector<typename TonelliSystem<Dim>::Vec>& q,
                    double dt) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < q.size(); ++k) {
    const auto v = (q[k + 1] - q[k]) / dt;
    s += dt * sys.lagrangian(0.5 * (q[k] + q[k + 1]), v);
  }
  return s;
}

// Block tridiagonal solve (D_k + mu I) d_k + E_{k-1}^T d_{k-1} + E_k d_{k+1} = r_k
// by block Cholesky-Thomas; returns false when a pivot block is not positive
// definite.
template <int Dim>
bool block_thomas(const std::vector<typename TonelliSystem<Dim>::Mat>& diag,
                  const std::vector<typename TonelliSystem<Dim>::Mat>& upper, double mu,
                  std::vector<typename TonelliSystem<Dim>::Vec>& rhs) {
  using Mat = typename TonelliSystem<Dim>::Mat;
  const std::size_t n = diag.size();
  std::vector<Eigen::LLT<Mat>> fac(n);
  for (std::size_t k = 0; k < n; ++k) {
    Mat d = diag[k] + mu * Mat::Identity();
    if (k > 0) {
      const Mat c = fac[k - 1].solve(upper[k - 1]);
      d -= upper[k - 1].transpose() * c;
      rhs[k] -= upper[k - 1].transpose() * fac[k - 1].solve(rhs[k - 1]);
    }
    fac[k].compute(d);
    if (fac[k].info() != Eigen::Success || !(d.diagonal().minCoeff() > 0.0)) return false;
  }
  rhs[n - 1] = fac[n - 1].solve(rhs[n - 1]);
  for (std::size_t k = n - 1; k-- > 0;) {
    rhs[k] = fac[k].solve(rhs[k] - upper[k] * rhs[k + 1]);
  }
  return true;
}

}  // namespace detail

/// Local minimizer of the discrete action between fixed lifted endpoints,
/// starting from `guess` (straight line when empty).
template <int Dim>
ActionResult<Dim> action_lifted(const TonelliSystem<Dim>& sys, const typename TonelliSystem<Dim>::Vec& x,
                                const typename TonelliSystem<Dim>::Vec& y_lift, double t,
                                const ActionOptions& opt = {},
                                const std::vector<typename TonelliSystem<Dim>::Vec>* guess = nullptr) {
  using Vec = typename TonelliSystem<Dim>::Vec;
  using Mat = typename TonelliSystem<Dim>::Mat;
  detail::check_action_args(t, opt.segments);
  const int n = opt.segments;
  const double dt = t / n;
  ActionResult<Dim> res;
  auto& q = res.curve;
  if (guess && static_cast<int>(guess->size()) == n + 1) {
    q = *guess;
  } else {
    q.resize(n + 1);
    for (int k = 0; k <= n; ++k) q[k] = x + (static_cast<double>(k) / n) * (y_lift - x);
  }
  q.front() = x;
  q.back() = y_lift;

  const std::size_t m = static_cast<std::size_t>(n - 1);
  std::vector<Mat> diag(m), upper(m > 0 ? m - 1 : 0);
  std::vector<Vec> grad(m), step(m);
  std::vector<Vec> trial(q.size());

  auto assemble = [&](double& value) {
    value = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      diag[k].setZero();
      grad[k].setZero();
    }
    for (int s = 0; s < n; ++s) {
      const auto seg = detail::segment<Dim>(sys, q[s], q[s + 1], dt, true);
      value += seg.value;
      // Interior index of node s is s - 1.
      if (s >= 1) {
        grad[s - 1] += seg.ga;
        diag[s - 1] += seg.haa;
      }
      if (s + 1 <= n - 1) {
        grad[s] += seg.gb;
        diag[s] += seg.hbb;
      }
      if (s >= 1 && s + 1 <= n - 1) upper[s - 1] = seg.hab;
    }
  };

  double value = 0.0;
  double mu = 0.0;
  for (int it = 0; it < opt.max_newton; ++it) {
    assemble(value);
    double gnorm = 0.0;
    for (const auto& g : grad) gnorm = std::max(gnorm, g.cwiseAbs().maxCoeff());
    res.iterations = it;
    res.grad_norm = gnorm;
    if (gnorm <= opt.grad_tol) {
      res.converged = true;
      break;
    }
    double scale = 0.0;
    for (const auto& d : diag) scale = std::max(scale, d.cwiseAbs().maxCoeff());
    bool accepted = false;
    mu = mu > 0.0 ? mu : 0.0;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      for (std::size_t k = 0; k < m; ++k) step[k] = -grad[k];
      if (!detail::block_thomas<Dim>(diag, upper, mu, step)) {
        mu = std::max(4.0 * mu, 1e-8 * scale);
        continue;
      }
      double slope = 0.0;
      for (std::size_t k = 0; k < m; ++k) slope += grad[k].dot(step[k]);
      // Armijo backtracking; near convergence the predicted decrease drops
      // below roundoff in the value, so a small slack is allowed.
      const double slack = 1e-14 * (1.0 + std::abs(value));
      for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
        trial = q;
        for (std::size_t k = 0; k < m; ++k) trial[k + 1] += alpha * step[k];
        const double tv = detail::curve_action<Dim>(sys, trial, dt);
        if (std::isfinite(tv) && tv <= value + 1e-4 * alpha * slope + slack) {
          q.swap(trial);
          accepted = true;
          break;
        }
      }
      if (!accepted) mu = std::max(4.0 * mu, 1e-4 * scale);
    }
    if (!accepted) break;
    mu *= 0.25;
    if (mu < 1e-12 * scale) mu = 0.0;
  }
  if (!res.converged) {
    assemble(value);
    double gnorm = 0.0;
    for (const auto& g : grad) gnorm = std::max(gnorm, g.cwiseAbs().maxCoeff());
    res.grad_norm = gnorm;
    res.converged = gnorm <= opt.grad_tol;
  }
  res.value = value;
  return res;
}

/// Lower bound of the discrete action over curves with displacement d, for
/// L = 1/2 |v|^2 - c.v - V: Jensen on the kinetic part, -V >= -sum|a|.
template <int Dim>
double action_lower_bound(const TonelliSystem<Dim>& sys, const typename TonelliSystem<Dim>::Vec& d,
                          double t) {
  if (!sys.mechanical()) return -std::numeric_limits<double>::infinity();
  return d.squaredNorm() / (2 * t) - sys.shift().dot(d) - t * sys.potential_bound();
}

/// Integer lift offsets with |m|_inf <= w, in a fixed order.
template <int Dim>
std::vector<Eigen::Matrix<int, Dim, 1>> winding_offsets(int w) {
  std::vector<Eigen::Matrix<int, Dim, 1>> out;
  if constexpr (Dim == 1) {
    for (int a = -w; a <= w; ++a) out.emplace_back(a);
  } else {
    for (int a = -w; a <= w; ++a)
      for (int b = -w; b <= w; ++b) out.emplace_back(a, b);
  }
  return out;
}

/// Warm starts keyed by the integer part of the lifted endpoint relative to x.
template <int Dim>
using CurveCache = std::map<std::array<int, Dim>, std::vector<typename TonelliSystem<Dim>::Vec>>;

/// A^t(x, y): best local minimum over winding lifts. Lifts whose lower bound
/// already exceeds the best value found are skipped (mechanical systems).
template <int Dim>
ActionResult<Dim> action(const TonelliSystem<Dim>& sys, const typename TonelliSystem<Dim>::Vec& x,
                         const typename TonelliSystem<Dim>::Vec& y, double t,
                         const ActionOptions& opt = {},
                         std::type_identity_t<CurveCache<Dim>>* cache = nullptr) {
  using Vec = typename TonelliSystem<Dim>::Vec;
  detail::check_action_args(t, opt.segments);
  const Vec base = x + torus_delta(Vec(y - x));
  struct Candidate {
    double bound;
    Vec lift;
    std::array<int, Dim> key;
  };
  std::vector<Candidate> cands;
  for (const auto& m : winding_offsets<Dim>(opt.max_winding)) {
    const Vec lift = base + m.template cast<double>();
    std::array<int, Dim> key{};
    for (int i = 0; i < Dim; ++i) key[i] = static_cast<int>(std::lround(std::floor(lift(i) - x(i) + 0.5)));
    cands.push_back({action_lower_bound(sys, Vec(lift - x), t), lift, key});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.bound < b.bound; });

  ActionResult<Dim> best;
  ActionResult<Dim> best_failed;
  for (const auto& c : cands) {
    if (best.converged && c.bound >= best.value) break;
    const std::vector<Vec>* guess = nullptr;
    std::vector<Vec> shifted;
    if (cache) {
      auto it = cache->find(c.key);
      if (it != cache->end()) {
        // Previous curve for this winding class, ramped to the new endpoint.
        shifted = it->second;
        const Vec delta = c.lift - shifted.back();
        const double n = static_cast<double>(shifted.size() - 1);
        for (std::size_t k = 0; k < shifted.size(); ++k) shifted[k] += (static_cast<double>(k) / n) * delta;
        shifted.front() = x;
        guess = &shifted;
      }
    }
    auto r = action_lifted(sys, x, c.lift, t, opt, guess);
    if (!r.converged && guess) r = action_lifted(sys, x, c.lift, t, opt, nullptr);
    if (r.converged) {
      if (cache) (*cache)[c.key] = r.curve;
      if (!best.converged || r.value < best.value) best = std::move(r);
    } else if (r.grad_norm < best_failed.grad_norm) {
      best_failed = std::move(r);
    }
  }
  if (!best.converged) {
    throw NonConvergence("action: no lift converged; best candidate value " +
                         num(best_failed.value) + ", gradient " +
                         num(best_failed.grad_norm));
  }
  return best;
}

}  // namespace greencone
