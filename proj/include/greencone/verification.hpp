#pragma once

// Cross-checks between the modules: action Hessians against pre-Green
// matrices, paratingent directions of I_{u,w} against the Green cone, and
// local semi-concavity of u and w against pre-Green bounds.

#include "greencone/green_dynamics.hpp"
#include "greencone/weak_kam.hpp"

#include <random>

namespace greencone {

// ---------------------------------------------------------------------------
// Action Hessians
// ---------------------------------------------------------------------------

struct HessianCheckOptions {
  double fd_step = 1e-4;
  /// Segments for the coarse solve; the fine solve doubles them and the
  /// two are Richardson-combined.
  int segments_per_unit_time = 128;
  int min_segments = 64;
};

struct HessianSlot {
  SymMatrix fd;          // finite-difference Hessian (sign-adjusted)
  SymMatrix green;       // pre-Green matrix it should equal
  Matrix relative_error;  // elementwise
  double max_relative_error = 0.0;
  double richardson_error = 0.0;  // step-halving estimate of the FD error
};

struct HessianCheckReport {
  double t = 0.0;
  HessianSlot slot2;  // d^2_22 A^T(phi_{-T} z, z) vs G_T(z)
  HessianSlot slot1;  // -d^2_11 A^T(z, phi_T z) vs G_{-T}(z)
  [[nodiscard]] double max_relative_error() const {
    return std::max(slot1.max_relative_error, slot2.max_relative_error);
  }
};

namespace detail {

inline Matrix elementwise_relative(const Matrix& got, const Matrix& want) {
  const double scale = want.cwiseAbs().maxCoeff();
  Matrix out(got.rows(), got.cols());
  for (Eigen::Index i = 0; i < got.rows(); ++i) {
    for (Eigen::Index j = 0; j < got.cols(); ++j) {
      out(i, j) = std::abs(got(i, j) - want(i, j)) / std::max({std::abs(want(i, j)), 1e-6 * scale, 1e-300});
    }
  }
  return out;
}

// Hessian of the action in one endpoint slot with the winding class fixed.
template <int Dim>
Matrix slot_hessian(const TonelliSystem<Dim>& sys, const typename TonelliSystem<Dim>::Vec& x,
                    const typename TonelliSystem<Dim>::Vec& y_lift, double t, bool first_slot,
                    double h, int segments, const std::vector<typename TonelliSystem<Dim>::Vec>& base) {
  using Vec = typename TonelliSystem<Dim>::Vec;
  ActionOptions opt;
  opt.segments = segments;
  std::vector<Vec> guess(segments + 1);
  for (int k = 0; k <= segments; ++k) {
    // Base curve resampled on the finer node set.
    const double s = static_cast<double>(k) / segments * (base.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(s));
    const auto hi = std::min(lo + 1, base.size() - 1);
    guess[k] = base[lo] + (s - static_cast<double>(lo)) * (base[hi] - base[lo]);
  }
  auto value = [&](const Vec& dx) {
    Vec a = x, b = y_lift;
    (first_slot ? a : b) += dx;
    std::vector<Vec> g = guess;
    for (int k = 0; k <= segments; ++k) {
      const double w = static_cast<double>(k) / segments;
      g[k] += (first_slot ? 1.0 - w : w) * dx;
    }
    const auto r = action_lifted(sys, a, b, t, opt, &g);
    if (!r.converged) throw NonConvergence("action Hessian: perturbed solve failed");
    return r.value;
  };
  Matrix hess(Dim, Dim);
  const double f0 = value(Vec::Zero());
  for (int i = 0; i < Dim; ++i) {
    Vec ei = Vec::Zero();
    ei(i) = h;
    hess(i, i) = (value(ei) - 2 * f0 + value(Vec(-ei))) / (h * h);
    for (int j = 0; j < i; ++j) {
      Vec ej = Vec::Zero();
      ej(j) = h;
      const double m = (value(Vec(ei + ej)) - value(Vec(ei - ej)) - value(Vec(ej - ei)) + value(Vec(-ei - ej))) /
                       (4 * h * h);
      hess(i, j) = hess(j, i) = m;
    }
  }
  return hess;
}

template <int Dim>
HessianSlot hessian_slot(const TonelliSystem<Dim>& sys, const typename TonelliSystem<Dim>::Vec& x,
                         const typename TonelliSystem<Dim>::Vec& y_lift, double t, bool first_slot,
                         const SymMatrix& green, const HessianCheckOptions& opt) {
  const int n = std::max(opt.min_segments, static_cast<int>(std::ceil(opt.segments_per_unit_time * t)));
  ActionOptions aopt;
  aopt.segments = n;
  const auto base = action_lifted(sys, x, y_lift, t, aopt);
  if (!base.converged) throw NonConvergence("action Hessian: base solve failed");
  auto combined = [&](double h) {
    const Matrix coarse = slot_hessian(sys, x, y_lift, t, first_slot, h, n, base.curve);
    const Matrix fine = slot_hessian(sys, x, y_lift, t, first_slot, h, 2 * n, base.curve);
    return Matrix((4.0 * fine - coarse) / 3.0);
  };
  const Matrix hh = combined(opt.fd_step);
  const Matrix h2 = combined(2 * opt.fd_step);
  const double sign = first_slot ? -1.0 : 1.0;
  HessianSlot s;
  s.fd = SymMatrix(Matrix(sign * hh));
  s.green = green;
  s.relative_error = elementwise_relative(s.fd.matrix(), green.matrix());
  s.max_relative_error = s.relative_error.maxCoeff();
  s.richardson_error = (hh - h2).cwiseAbs().maxCoeff() / 3.0;
  return s;
}

// Lifted displacement of the orbit of z over time t.
template <int Dim>
typename TonelliSystem<Dim>::Vec orbit_displacement(const TonelliSystem<Dim>& sys, const PhasePoint<Dim>& z,
                                                    double t, const FlowOptions& fopt) {
  const auto f = flow(sys, z, t, true, fopt);
  typename TonelliSystem<Dim>::Vec d = TonelliSystem<Dim>::Vec::Zero();
  auto prev = z.x;
  for (const auto& s : f.orbit) {
    d += torus_delta(s.z.x - prev);
    prev = s.z.x;
  }
  d += torus_delta(f.end.x - prev);
  return d;
}

}  // namespace detail

/// Finite-difference Hessians of A^T in each endpoint slot along the orbit
/// through z, compared with G_T(z) and G_{-T}(z).
template <int Dim>
HessianCheckReport action_hessian_check(const TonelliSystem<Dim>& sys, const PhasePoint<Dim>& z, double t,
                                        const HessianCheckOptions& opt = {}, const FlowOptions& fopt = {}) {
  HessianCheckReport r;
  r.t = t;
  // Endpoints are lifted along the orbit itself: the minimal lift between
  // wrapped endpoints can belong to another orbit.
  const auto back = detail::orbit_displacement(sys, z, -t, fopt);
  const auto fwd = detail::orbit_displacement(sys, z, t, fopt);
  r.slot2 = detail::hessian_slot(sys, typename TonelliSystem<Dim>::Vec(z.x + back), z.x, t, false,
                                 pre_green(sys, z, t, fopt), opt);
  r.slot1 = detail::hessian_slot(sys, z.x, typename TonelliSystem<Dim>::Vec(z.x + fwd), t, true,
                                 pre_green_minus(sys, z, t, fopt), opt);
  return r;
}

// ---------------------------------------------------------------------------
// Paratingent directions against the Green cone
// ---------------------------------------------------------------------------

struct VerifyOptions {
  double epsilon = 1e-3;
  double delta_min = 1e-3;
  double delta_max = 1e-2;
  double t_max = 4096.0;
  double tail_tol = 1e-8;
  double cone_tol = 0.0;
  FlowOptions flow{Scheme::kSymplectic};
};

struct DirectionCheck {
  ParatingentDirection dir;
  double margin = 0.0;           // Sg on C(G- - eps, G+ + eps); -inf outside the range
  bool pass = false;
  double modified_margin = 0.0;  // Sg on C(G~-, G~+)
  bool modified_pass = false;
};

struct TheoremReport {
  Vector z_x, z_p;
  SymMatrix g_minus, g_plus;
  SymMatrix fat_minus, fat_plus;            // G- - eps I, G+ + eps I
  SymMatrix modified_minus, modified_plus;  // modified Green pair of the fattened one
  GreenStatus green_status = GreenStatus::kConverged;
  std::string green_message;
  bool finite_bracket = false;  // limits not converged: last ladder rung used
  std::size_t samples_used = 0;
  std::vector<DirectionCheck> directions;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_modified_margin = std::numeric_limits<double>::infinity();
  std::size_t failures = 0;
  bool chain_consistent = true;  // every passing direction passes the modified cone
  bool vacuous = false;
  std::string note;

  [[nodiscard]] bool passed() const { return failures == 0 && chain_consistent; }
  [[nodiscard]] double pass_fraction() const {
    if (directions.empty()) return 1.0;
    return 1.0 - static_cast<double>(failures) / static_cast<double>(directions.size());
  }
};

/// Tests every direction built from `samples` (phase points near z) against
/// C(G- - eps I, G+ + eps I) and the modified Green cone of that pair.
inline TheoremReport verify_directions(const Vector& z_x, const Vector& z_p, const SymMatrix& g_minus,
                                       const SymMatrix& g_plus, const std::vector<PhaseSample>& samples,
                                       const VerifyOptions& opt) {
  TheoremReport r;
  r.z_x = z_x;
  r.z_p = z_p;
  r.g_minus = g_minus;
  r.g_plus = g_plus;
  const auto n = g_minus.dim();
  r.fat_minus = g_minus - SymMatrix::scalar(n, opt.epsilon);
  r.fat_plus = g_plus + SymMatrix::scalar(n, opt.epsilon);
  std::tie(r.modified_minus, r.modified_plus) = modified_green(r.fat_minus, r.fat_plus);
  r.samples_used = samples.size();
  std::vector<ParatingentDirection> dirs;
  try {
    dirs = empirical_paratingent(samples, opt.delta_min, opt.delta_max, true);
  } catch (const EmptyWindow& e) {
    r.vacuous = true;
    r.note = std::string("trivial paratingent data: ") + e.what();
    r.worst_margin = r.worst_modified_margin = 0.0;
    return r;
  }
  const ConePair cone(r.fat_minus, r.fat_plus);
  const ConePair modified(r.modified_minus, r.modified_plus);
  for (auto& d : dirs) {
    DirectionCheck c;
    c.margin = sg_value(cone, d.v).as_double();
    c.pass = c.margin >= -opt.cone_tol;
    c.modified_margin = sg_value(modified, d.v).as_double();
    c.modified_pass = c.modified_margin >= -opt.cone_tol;
    c.dir = std::move(d);
    r.worst_margin = std::min(r.worst_margin, c.margin);
    r.worst_modified_margin = std::min(r.worst_modified_margin, c.modified_margin);
    if (!c.pass) ++r.failures;
    if (c.pass && !c.modified_pass) r.chain_consistent = false;
    r.directions.push_back(std::move(c));
  }
  return r;
}

/// I_set samples within delta_max of z (torus distance, sup norm), z first.
template <int Dim>
std::vector<PhaseSample> samples_near(const ConjugatePairData<Dim>& pair, std::size_t z_index, double radius) {
  const auto& s = pair.i_set.samples;
  std::vector<PhaseSample> out{{s[z_index].x, s[z_index].p}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == z_index) continue;
    const Vector d = torus_delta(Vector(s[i].x - s[z_index].x));
    if (d.cwiseAbs().maxCoeff() <= radius) out.push_back({s[i].x, s[i].p});
  }
  return out;
}

/// Index of the I_set sample closest to x (torus distance).
template <int Dim>
std::size_t nearest_sample(const ConjugatePairData<Dim>& pair, const Vector& x) {
  if (pair.i_set.empty()) throw EmptyWindow("empty I_set");
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pair.i_set.size(); ++i) {
    const double d = torus_delta(Vector(pair.i_set.samples[i].x - x)).norm();
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

/// G_minus, G_plus at z from the doubling ladder. A ladder that has not
/// converged by t_max leaves the last rung in place and sets the flag.
template <int Dim>
GreenResult green_at(const TonelliSystem<Dim>& sys, const PhasePoint<Dim>& z, const VerifyOptions& opt,
                     bool& finite_bracket) {
  auto g = green_ladder(sys, z, opt.t_max, opt.tail_tol, opt.flow);
  if (g.status == GreenStatus::kConjugatePoint) throw ConjugatePoint(g.message);
  finite_bracket = g.status == GreenStatus::kNonConvergence;
  return g;
}

/// Paratingent directions of the lifted I_set at sample z_index against
/// C(G-(z) - eps I, G+(z) + eps I).
template <int Dim>
TheoremReport verify_theorem(const TonelliSystem<Dim>& sys, const ConjugatePairData<Dim>& pair,
                             std::size_t z_index, const VerifyOptions& opt = {}) {
  if (z_index >= pair.i_set.size()) throw ConfigError("base point is not an I_set sample");
  const auto& zs = pair.i_set.samples[z_index];
  const PhasePoint<Dim> z(zs.x, zs.p);
  bool finite = false;
  const auto g = green_at(sys, z, opt, finite);
  auto r = verify_directions(zs.x, zs.p, g.g_minus, g.g_plus, samples_near(pair, z_index, opt.delta_max), opt);
  r.green_status = g.status;
  r.green_message = g.message;
  r.finite_bracket = finite;
  if (finite) {
    r.note += (r.note.empty() ? "" : "; ") + std::string("Green limits not converged, finite-T bracket used: ") + g.message;
  }
  return r;
}

/// Random phase points around z in a box of half-width delta_max: a control
/// set that lies on no invariant graph.
inline std::vector<PhaseSample> adversarial_samples(const Vector& z_x, const Vector& z_p, std::size_t count,
                                                    double delta_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5 * delta_max, 0.5 * delta_max);
  std::vector<PhaseSample> out{{z_x, z_p}};
  for (std::size_t i = 0; i < count; ++i) {
    Vector dx = z_x, dp = z_p;
    for (Eigen::Index d = 0; d < dx.size(); ++d) {
      dx(d) = wrap_unit(dx(d) + u(rng));
      dp(d) += u(rng);
    }
    out.push_back({dx, dp});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local semi-concavity of u and semi-convexity of w
// ---------------------------------------------------------------------------

struct LocalSemiconcavityReport {
  SymMatrix bound_u;  // G_T(z) + eps I
  SymMatrix bound_w;  // -(G_{-T}(z) - eps I)
  SemiconcavityReport u;
  SemiconcavityReport w;
  std::size_t samples_u = 0;
  std::size_t samples_w = 0;
  [[nodiscard]] bool passed() const { return u.passed() && w.passed(); }
};

template <int Dim>
SampledFunction local_samples(const GridFunction<Dim>& f, const Vector& center, double radius,
                              const IsetOptions& iopt) {
  SampledFunction s;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vector d = torus_delta(Vector(Vector(f.grid.node(i)) - center));
    if (d.cwiseAbs().maxCoeff() > radius) continue;
    const auto g = smooth_gradient(f, i, iopt);
    if (!g) continue;
    s.points.push_back({Vector(center + d), f[i], Vector(*g)});
  }
  return s;
}

/// u is (G_T(x0) + eps I)-semi-concave and w is -(G_{-T}(x0) - eps I)-semi-convex
/// on grid samples within `radius` of x0.
template <int Dim>
LocalSemiconcavityReport local_semiconcavity_check(const TonelliSystem<Dim>& sys, const ConjugatePairData<Dim>& pair,
                                                   std::size_t z_index, double t, double epsilon, double radius,
                                                   double tol = 1e-9, const IsetOptions& iopt = {},
                                                   const FlowOptions& fopt = {}) {
  if (z_index >= pair.i_set.size()) throw ConfigError("base point is not an I_set sample");
  const auto& zs = pair.i_set.samples[z_index];
  const PhasePoint<Dim> z(zs.x, zs.p);
  const auto n = static_cast<Eigen::Index>(Dim);
  LocalSemiconcavityReport r;
  r.bound_u = pre_green(sys, z, t, fopt) + SymMatrix::scalar(n, epsilon);
  r.bound_w = -1.0 * (pre_green_minus(sys, z, t, fopt) - SymMatrix::scalar(n, epsilon));
  const auto su = local_samples(pair.u.u, zs.x, radius, iopt);
  const auto sw = local_samples(pair.w, zs.x, radius, iopt);
  r.samples_u = su.points.size();
  r.samples_w = sw.points.size();
  r.u = check_semiconcave(su, r.bound_u, tol);
  r.w = check_semiconvex(sw, r.bound_w, tol);
  return r;
}

}  // namespace greencone
