#pragma once

// Hamiltonian flow, variational transport of Lagrangian frames, pre-Green
// bundles G_t = D phi_t V(phi_{-t} z) and their large-time limits.

#include "greencone/core.hpp"
#include "greencone/symplectic_cones.hpp"
#include "greencone/tonelli.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <optional>

namespace greencone {

/// Transversality to the vertical lost along the transported frame.
class ConjugatePoint : public Error {
 public:
  explicit ConjugatePoint(const std::string& what) : Error("ConjugatePoint: " + what) {}
};

template <int Dim>
struct PhasePoint {
  using Vec = typename TonelliSystem<Dim>::Vec;
  Vec x = Vec::Zero();  // in [0, 1)^n
  Vec p = Vec::Zero();

  PhasePoint() = default;
  PhasePoint(const Vec& x_in, const Vec& p_in) : x(x_in.unaryExpr([](double v) { return wrap_unit(v); })), p(p_in) {}
};

template <int Dim>
struct LagrangianFrame {
  using Mat = typename TonelliSystem<Dim>::Mat;
  Mat x = Mat::Zero();
  Mat y = Mat::Identity();

  static LagrangianFrame vertical() { return {Mat::Zero(), Mat::Identity()}; }
  static LagrangianFrame graph(const Mat& g) { return {Mat::Identity(), g}; }

  /// max |X^T Y - Y^T X|.
  [[nodiscard]] double lagrangian_defect() const {
    return (x.transpose() * y - y.transpose() * x).cwiseAbs().maxCoeff();
  }

  /// Column-orthonormal basis of the same subspace.
  [[nodiscard]] LagrangianFrame orthonormalized() const {
    Eigen::Matrix<double, 2 * Dim, Dim> stacked;
    stacked << x, y;
    Eigen::HouseholderQR<Eigen::Matrix<double, 2 * Dim, Dim>> qr(stacked);
    const Eigen::Matrix<double, 2 * Dim, Dim> q =
        qr.householderQ() * Eigen::Matrix<double, 2 * Dim, Dim>::Identity();
    return {q.topRows(Dim), q.bottomRows(Dim)};
  }

  /// 1 / sigma_min(X) of the orthonormalized frame; infinite on the vertical.
  [[nodiscard]] double graph_condition() const {
    const auto o = orthonormalized();
    Eigen::JacobiSVD<Mat> svd(o.x);
    const double smin = svd.singularValues()(Dim - 1);
    return smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
  }

  /// G = sym(Y X^{-1}) when the frame is a graph over the horizontal.
  [[nodiscard]] SymMatrix graph_matrix(double max_condition = 1e10) const {
    const auto o = orthonormalized();
    const double cond = o.graph_condition();
    if (!(cond <= max_condition)) {
      throw ConjugatePoint("frame condition " + num(cond) + " exceeds " +
                           num(max_condition));
    }
    const Mat g = o.x.transpose().partialPivLu().solve(o.y.transpose()).transpose();
    return SymMatrix(Matrix(g));
  }
};

enum class Scheme {
  kAdaptive,    // Runge-Kutta-Fehlberg 7(8), local tolerance abs_tol/rel_tol
  kSymplectic,  // fixed-step 6th-order leapfrog composition with exact tangent map
};

struct FlowOptions {
  Scheme scheme = Scheme::kAdaptive;
  /// Step of the symplectic scheme; the last step is shortened to hit t.
  double symplectic_step = 1.0 / 128.0;
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double momentum_bound = 1e6;
  double min_step = 1e-13;
  /// Frame re-orthonormalization interval during transport.
  double renormalize_every = 0.5;
};

template <int Dim>
struct OrbitSample {
  double t = 0.0;
  PhasePoint<Dim> z;
  double energy = 0.0;
};

template <int Dim>
struct FlowResult {
  PhasePoint<Dim> end;
  double energy_drift = 0.0;
  std::size_t steps = 0;
  std::vector<OrbitSample<Dim>> orbit;
};

template <int Dim>
struct TransportResult {
  PhasePoint<Dim> end;
  LagrangianFrame<Dim> frame;
  double max_lagrangian_defect = 0.0;
  std::size_t steps = 0;
};

namespace detail {

// Integrates y' = sign * f(y) over |t| with an adaptive Runge-Kutta-Fehlberg
// 7(8) pair; observer(s, y) is called after every accepted step. The first
// `angles` entries of y are reduced mod 1 after each step: on long orbits the
// lifted coordinate would otherwise grow and cost digits.
template <typename State, typename Rhs, typename Observer>
std::size_t integrate_adaptive_signed(const Rhs& rhs, State& y, double t, const FlowOptions& opt,
                                      Observer&& observer, int angles = 0) {
  namespace odeint = boost::numeric::odeint;
  if (!std::isfinite(t)) throw IntegratorFailure("non-finite integration time");
  const double sign = t < 0.0 ? -1.0 : 1.0;
  const double duration = std::abs(t);
  auto system = [&](const State& s, State& ds, double) {
    rhs(s, ds);
    for (auto& v : ds) v *= sign;
  };
  // Error control on |err| <= abs + rel |y| (no derivative term).
  using Base = odeint::runge_kutta_fehlberg78<State>;
  using Controlled = odeint::controlled_runge_kutta<Base>;
  Controlled stepper(typename Controlled::error_checker_type(opt.abs_tol, opt.rel_tol, 1.0, 0.0));
  double s = 0.0;
  double dt = std::min(0.01, duration);
  std::size_t steps = 0;
  while (s < duration) {
    if (s + dt > duration) dt = duration - s;
    const double prev = s;
    const auto res = stepper.try_step(system, y, s, dt);
    if (res == odeint::success) {
      ++steps;
      for (int i = 0; i < angles; ++i) y[i] = wrap_unit(y[i]);
      if (s + 1e-15 * duration >= duration) s = duration;
      observer(sign * s, y);
    } else if (dt < opt.min_step && s - prev == 0.0) {
      throw IntegratorFailure("step size underflow at t = " + num(sign * s));
    }
  }
  return steps;
}

// Yoshida's 6th-order composition (solution A) of the leapfrog map.
inline constexpr std::array<double, 7> kYoshida6 = [] {
  constexpr double w1 = -1.17767998417887, w2 = 0.235573213359357, w3 = 0.784513610477560;
  constexpr double w0 = 1.0 - 2.0 * (w1 + w2 + w3);
  return std::array<double, 7>{w3, w2, w1, w0, w1, w2, w3};
}();

// Fixed-step splitting for H = K(p) + V(x). fx, fp (optional) carry a frame
// through the exact derivative of the discrete map. observer(t, x, p) runs
// after every full step.
template <int Dim, typename Observer>
std::size_t integrate_splitting(const TonelliSystem<Dim>& sys, typename TonelliSystem<Dim>::Vec& x,
                                typename TonelliSystem<Dim>::Vec& p,
                                typename TonelliSystem<Dim>::Mat* fx,
                                typename TonelliSystem<Dim>::Mat* fp, double t,
                                const FlowOptions& opt, Observer&& observer) {
  if (!std::isfinite(t)) throw IntegratorFailure("non-finite integration time");
  if (!(opt.symplectic_step > 0.0)) throw ConfigError("symplectic step must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(t) / opt.symplectic_step - 1e-12));
  if (n == 0) return 0;
  const double h = t / static_cast<double>(n);
  auto drift = [&](double a) {
    if (fx) *fx += a * sys.h_pp(x, p) * *fp;
    x += a * sys.h_p(x, p);
  };
  auto kick = [&](double a) {
    if (fp) *fp -= a * sys.h_xx(x, p) * *fx;
    p -= a * sys.h_x(x, p);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (double w : kYoshida6) {
      drift(0.5 * w * h);
      kick(w * h);
      drift(0.5 * w * h);
    }
    x = x.unaryExpr([](double v) { return wrap_unit(v); });
    observer(h * static_cast<double>(i + 1), x, p);
  }
  return n;
}

}  // namespace detail

/// Hamiltonian flow phi_t(z); the full orbit is recorded on request.
template <int Dim>
FlowResult<Dim> flow(const TonelliSystem<Dim>& sys, const PhasePoint<Dim>& z, double t,
                     bool record_orbit = false, const FlowOptions& opt = {}) {
  using Vec = typename TonelliSystem<Dim>::Vec;
  using State = std::array<double, 2 * Dim>;
  State y{};
  for (int i = 0; i < Dim; ++i) {
    y[i] = z.x(i);
    y[Dim + i] = z.p(i);
  }
  auto rhs = [&](const State& s, State& ds) {
    const Vec x = Eigen::Map<const Vec>(s.data());
    const Vec p = Eigen::Map<const Vec>(s.data() + Dim);
    const Vec dx = sys.h_p(x, p);
    const Vec dp = -sys.h_x(x, p);
    for (int i = 0; i < Dim; ++i) {
      ds[i] = dx(i);
      ds[Dim + i] = dp(i);
    }
  };
  const double e0 = sys.hamiltonian(z.x, z.p);
  FlowResult<Dim> out;
  if (record_orbit) out.orbit.push_back({0.0, z, e0});
  auto unpack = [](const State& s) {
    return std::pair<Vec, Vec>{Eigen::Map<const Vec>(s.data()), Eigen::Map<const Vec>(s.data() + Dim)};
  };
  double drift = 0.0;
  auto observe = [&](double tt, const Vec& x, const Vec& p) {
    if (!(p.norm() <= opt.momentum_bound)) {
      throw BlowUp("|p| = " + num(p.norm()) + " at t = " + num(tt));
    }
    const double e = sys.hamiltonian(x, p);
    drift = std::max(drift, std::abs(e - e0));
    if (record_orbit) out.orbit.push_back({tt, PhasePoint<Dim>(x, p), e});
  };
  if (opt.scheme == Scheme::kSymplectic) {
    Vec x = z.x, p = z.p;
    out.steps = detail::integrate_splitting<Dim>(sys, x, p, nullptr, nullptr, t, opt, observe);
    out.end = PhasePoint<Dim>(x, p);
    out.energy_drift = drift;
    return out;
  }
  out.steps = detail::integrate_adaptive_signed(rhs, y, t, opt, [&](double tt, const State& s) {
    auto [x, p] = unpack(s);
    observe(tt, x, p);
  }, Dim);
  auto [x, p] = unpack(y);
  out.end = PhasePoint<Dim>(x, p);
  out.energy_drift = drift;
  return out;
}

/// Transports the frame F at z by D phi_t; the linearized equations are
/// dx' = H_px dx + H_pp dp, dp' = -H_xx dx - H_xp dp. The frame is
/// re-orthonormalized every opt.renormalize_every time units.
template <int Dim>
TransportResult<Dim> variational_transport(const TonelliSystem<Dim>& sys, const PhasePoint<Dim>& z,
                                           double t, const LagrangianFrame<Dim>& frame,
                                           const FlowOptions& opt = {}) {
  using Vec = typename TonelliSystem<Dim>::Vec;
  using Mat = typename TonelliSystem<Dim>::Mat;
  constexpr int kSize = 2 * Dim + 2 * Dim * Dim;
  using State = std::array<double, kSize>;

  auto rhs = [&](const State& s, State& ds) {
    const Vec x = Eigen::Map<const Vec>(s.data());
    const Vec p = Eigen::Map<const Vec>(s.data() + Dim);
    const Mat fx = Eigen::Map<const Mat>(s.data() + 2 * Dim);
    const Mat fp = Eigen::Map<const Mat>(s.data() + 2 * Dim + Dim * Dim);
    const Mat hxp = sys.h_xp(x, p);
    const Mat hpp = sys.h_pp(x, p);
    const Mat hxx = sys.h_xx(x, p);
    Eigen::Map<Vec>(ds.data()) = sys.h_p(x, p);
    Eigen::Map<Vec>(ds.data() + Dim) = -sys.h_x(x, p);
    Eigen::Map<Mat>(ds.data() + 2 * Dim) = hxp.transpose() * fx + hpp * fp;
    Eigen::Map<Mat>(ds.data() + 2 * Dim + Dim * Dim) = -hxx * fx - hxp * fp;
  };

  State y{};
  Eigen::Map<Vec>(y.data()) = z.x;
  Eigen::Map<Vec>(y.data() + Dim) = z.p;
  LagrangianFrame<Dim> f = frame.orthonormalized();
  TransportResult<Dim> out;
  out.max_lagrangian_defect = f.lagrangian_defect();

  const double sign = t < 0.0 ? -1.0 : 1.0;
  double remaining = std::abs(t);
  while (remaining > 0.0) {
    const double chunk = std::min(opt.renormalize_every, remaining);
    if (opt.scheme == Scheme::kSymplectic) {
      Vec x = Eigen::Map<const Vec>(y.data()), p = Eigen::Map<const Vec>(y.data() + Dim);
      Mat fx = f.x, fp = f.y;
      out.steps += detail::integrate_splitting<Dim>(
          sys, x, p, &fx, &fp, sign * chunk, opt, [&](double tt, const Vec&, const Vec& pp) {
            if (!(pp.norm() <= opt.momentum_bound)) {
              throw BlowUp("|p| = " + num(pp.norm()) + " at t = " + num(tt));
            }
          });
      Eigen::Map<Vec>(y.data()) = x;
      Eigen::Map<Vec>(y.data() + Dim) = p;
      f = LagrangianFrame<Dim>{fx, fp}.orthonormalized();
      out.max_lagrangian_defect = std::max(out.max_lagrangian_defect, f.lagrangian_defect());
      remaining -= chunk;
      continue;
    }
    Eigen::Map<Mat>(y.data() + 2 * Dim) = f.x;
    Eigen::Map<Mat>(y.data() + 2 * Dim + Dim * Dim) = f.y;
    out.steps += detail::integrate_adaptive_signed(rhs, y, sign * chunk, opt, [&](double tt, const State& s) {
      const Vec p = Eigen::Map<const Vec>(s.data() + Dim);
      if (!(p.norm() <= opt.momentum_bound)) {
        throw BlowUp("|p| = " + num(p.norm()) + " at t = " + num(tt));
      }
    }, Dim);
    LagrangianFrame<Dim> raw{Eigen::Map<const Mat>(y.data() + 2 * Dim),
                             Eigen::Map<const Mat>(y.data() + 2 * Dim + Dim * Dim)};
    f = raw.orthonormalized();
    out.max_lagrangian_defect = std::max(out.max_lagrangian_defect, f.lagrangian_defect());
    remaining -= chunk;
  }
  out.end = PhasePoint<Dim>(Eigen::Map<const Vec>(y.data()), Eigen::Map<const Vec>(y.data() + Dim));
  out.frame = f;
  return out;
}

/// Frame condition above which graph extraction reports a conjugate point.
inline constexpr double kConjugateCondition = 1e10;

/// G_t(z) = D phi_t V(phi_{-t} z), t > 0.
template <int Dim>
SymMatrix pre_green(const TonelliSystem<Dim>& sys, const PhasePoint<Dim>& z, double t,
                    const FlowOptions& opt = {}) {
  if (!(t > 0.0)) throw ConfigError("pre_green needs t > 0");
  const auto start = flow(sys, z, -t, false, opt).end;
  const auto tr = variational_transport(sys, start, t, LagrangianFrame<Dim>::vertical(), opt);
  return tr.frame.graph_matrix(kConjugateCondition);
}

/// G_{-t}(z) = (D phi_t)^{-1} V(phi_t z), t > 0.
template <int Dim>
SymMatrix pre_green_minus(const TonelliSystem<Dim>& sys, const PhasePoint<Dim>& z, double t,
                          const FlowOptions& opt = {}) {
  if (!(t > 0.0)) throw ConfigError("pre_green_minus needs t > 0");
  const auto end = flow(sys, z, t, false, opt).end;
  const auto tr = variational_transport(sys, end, -t, LagrangianFrame<Dim>::vertical(), opt);
  return tr.frame.graph_matrix(kConjugateCondition);
}

/// Graph of G at z transported by D phi_t; returns the graph matrix at phi_t z.
template <int Dim>
SymMatrix transport_graph(const TonelliSystem<Dim>& sys, const PhasePoint<Dim>& z, double t,
                          const SymMatrix& g, const FlowOptions& opt = {}) {
  using Mat = typename TonelliSystem<Dim>::Mat;
  const Mat gm = g.matrix();
  const auto tr = variational_transport(sys, z, t, LagrangianFrame<Dim>::graph(gm), opt);
  return tr.frame.graph_matrix(kConjugateCondition);
}

// ---------------------------------------------------------------------------
// Green bundles
// ---------------------------------------------------------------------------

struct GreenLadderRow {
  double t = 0.0;
  SymMatrix g_plus_t;   // G_t
  SymMatrix g_minus_t;  // G_{-t}
  double gap_plus = 0.0;   // ||G_t - G_{t_prev}||_2, 0 for the first rung
  double gap_minus = 0.0;
};

enum class GreenStatus { kConverged, kNonConvergence, kConjugatePoint };

struct GreenResult {
  std::vector<GreenLadderRow> table;
  SymMatrix g_minus;
  SymMatrix g_plus;
  double residual_plus = 0.0;   // last gap of the G_t family
  double residual_minus = 0.0;  // last gap of the G_{-t} family
  double t_max = 0.0;
  GreenStatus status = GreenStatus::kConverged;
  std::string message;
  /// +1 increasing, -1 decreasing, 0 mixed; per family in the PSD order.
  int monotone_plus = 0;
  int monotone_minus = 0;
  /// +1 when G_t > G_{-s} for every rung pair, -1 when G_t < G_{-s}, 0 otherwise.
  int separation_orientation = 0;
  double separation_margin = 0.0;
  /// Set when the limit labels had to be swapped to keep G_minus <= G_plus.
  bool labels_swapped = false;
};

/// Geometric ladder 1, 2, 4, ... up to t_max (t_max itself when below 1).
inline std::vector<double> time_ladder(double t_max) {
  if (!(t_max > 0.0)) throw ConfigError("T_max must be positive");
  std::vector<double> out;
  if (t_max < 1.0) return {t_max};
  for (double t = 1.0; t <= t_max * (1.0 + 1e-12); t *= 2.0) out.push_back(t);
  return out;
}

namespace detail {

inline int family_monotonicity(const std::vector<SymMatrix>& family, double tol) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < family.size(); ++i) {
    const SymMatrix d = family[i] - family[i - 1];
    if (d.min_eigenvalue() < -tol) up = false;
    if (d.max_eigenvalue() > tol) down = false;
  }
  if (up && !down) return 1;
  if (down && !up) return -1;
  return 0;
}

}  // namespace detail

/// Evaluates the ladder and the limits without throwing on mathematical
/// failure; status and message describe what happened.
template <int Dim>
GreenResult green_ladder(const TonelliSystem<Dim>& sys, const PhasePoint<Dim>& z, double t_max,
                         double tail_tol = 1e-8, const FlowOptions& opt = {}) {
  GreenResult res;
  res.t_max = t_max;
  const auto ladder = time_ladder(t_max);
  try {
    for (double t : ladder) {
      GreenLadderRow row{t, pre_green(sys, z, t, opt), pre_green_minus(sys, z, t, opt)};
      if (!res.table.empty()) {
        row.gap_plus = subspace_distance(row.g_plus_t, res.table.back().g_plus_t);
        row.gap_minus = subspace_distance(row.g_minus_t, res.table.back().g_minus_t);
      }
      res.table.push_back(std::move(row));
    }
  } catch (const ConjugatePoint& e) {
    res.status = GreenStatus::kConjugatePoint;
    res.message = e.what();
    if (res.table.empty()) return res;
  }

  std::vector<SymMatrix> plus, minus;
  for (const auto& r : res.table) {
    plus.push_back(r.g_plus_t);
    minus.push_back(r.g_minus_t);
  }
  res.monotone_plus = detail::family_monotonicity(plus, 1e-8);
  res.monotone_minus = detail::family_monotonicity(minus, 1e-8);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& gp : plus) {
    for (const auto& gm : minus) {
      const SymMatrix d = gp - gm;
      lo = std::min(lo, d.min_eigenvalue());
      hi = std::max(hi, d.max_eigenvalue());
    }
  }
  res.separation_orientation = lo > 0.0 ? 1 : (hi < 0.0 ? -1 : 0);
  res.separation_margin = res.separation_orientation >= 0 ? lo : -hi;

  res.g_plus = plus.back();
  res.g_minus = minus.back();
  res.residual_plus = res.table.back().gap_plus;
  res.residual_minus = res.table.back().gap_minus;
  if (!psd_leq(res.g_minus, res.g_plus)) {
    std::swap(res.g_minus, res.g_plus);
    res.labels_swapped = true;
  }
  if (res.status == GreenStatus::kConverged) {
    const bool enough_rungs = res.table.size() >= 2;
    if (!enough_rungs || res.residual_plus >= tail_tol || res.residual_minus >= tail_tol) {
      res.status = GreenStatus::kNonConvergence;
      res.message = "tail gaps " + num(res.residual_plus) + ", " +
                    num(res.residual_minus) + " at T_max = " + num(t_max) +
                    " (tail_tol " + num(tail_tol) + ")";
    }
  }
  return res;
}

/// G_plus = lim G_t, G_minus = lim G_{-t} on the doubling ladder; throws
/// ConjugatePoint or NonConvergence.
template <int Dim>
GreenResult green_limits(const TonelliSystem<Dim>& sys, const PhasePoint<Dim>& z, double t_max,
                         double tail_tol = 1e-8, const FlowOptions& opt = {}) {
  GreenResult res = green_ladder(sys, z, t_max, tail_tol, opt);
  if (res.status == GreenStatus::kConjugatePoint) throw ConjugatePoint(res.message);
  if (res.status == GreenStatus::kNonConvergence) throw NonConvergence(res.message);
  return res;
}

/// (2 G_- - G_+, 2 G_+ - G_-).
inline std::pair<SymMatrix, SymMatrix> modified_green(const SymMatrix& g_minus,
                                                      const SymMatrix& g_plus) {
  if (!psd_leq(g_minus, g_plus)) throw OrderViolation("modified_green needs G_- <= G_+");
  return {2.0 * g_minus - g_plus, 2.0 * g_plus - g_minus};
}

}  // namespace greencone
