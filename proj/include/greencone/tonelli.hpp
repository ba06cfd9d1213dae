#pragma once

// Tonelli Hamiltonians H(x, p + c) = K(p + c) + V(x) on T^n x R^n, n = 1, 2,
// with K(q) = |q|^2/2 + beta |q|^4/4 and a trigonometric potential
// V(x) = sum_j a_j cos(2 pi k_j . x).

#include "greencone/core.hpp"

#include <numbers>
#include <string>

namespace greencone {

template <int Dim>
class TonelliSystem {
  static_assert(Dim == 1 || Dim == 2, "systems live on T^1 or T^2");

 public:
  using Vec = Eigen::Matrix<double, Dim, 1>;
  using Mat = Eigen::Matrix<double, Dim, Dim>;
  using Wave = Eigen::Matrix<int, Dim, 1>;

  static constexpr int dim = Dim;

  struct CosineTerm {
    double amplitude = 0.0;
    Wave wave;
  };

  /// Lagrangian value and first/second derivatives at (x, v).
  struct LagrangianJet {
    double value = 0.0;
    Vec p;  // L_v
    Vec lx;
    Mat lxx, lxv, lvv;
  };

  TonelliSystem(std::string name, std::vector<CosineTerm> potential, Vec shift = Vec::Zero(),
                double quartic = 0.0)
      : name_(std::move(name)), potential_(std::move(potential)), shift_(shift), quartic_(quartic) {
    if (!(quartic_ >= 0.0)) throw ConfigError("quartic coefficient must be nonnegative");
    for (const auto& t : potential_) potential_bound_ += std::abs(t.amplitude);
  }

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] const Vec& shift() const { return shift_; }
  [[nodiscard]] double quartic() const { return quartic_; }
  [[nodiscard]] bool mechanical() const { return quartic_ == 0.0; }
  [[nodiscard]] const std::vector<CosineTerm>& potential_terms() const { return potential_; }
  /// sup |V|.
  [[nodiscard]] double potential_bound() const { return potential_bound_; }

  [[nodiscard]] TonelliSystem with_shift(const Vec& c) const {
    return TonelliSystem(name_, potential_, c, quartic_);
  }

  // -- potential ------------------------------------------------------------

  [[nodiscard]] double potential(const Vec& x) const {
    double v = 0.0;
    for (const auto& t : potential_) v += t.amplitude * std::cos(phase(t, x));
    return v;
  }
  [[nodiscard]] Vec potential_gradient(const Vec& x) const {
    Vec g = Vec::Zero();
    for (const auto& t : potential_) {
      g -= t.amplitude * std::sin(phase(t, x)) * kTwoPi * t.wave.template cast<double>();
    }
    return g;
  }
  [[nodiscard]] Mat potential_hessian(const Vec& x) const {
    Mat h = Mat::Zero();
    for (const auto& t : potential_) {
      const Vec k = kTwoPi * t.wave.template cast<double>();
      h -= t.amplitude * std::cos(phase(t, x)) * k * k.transpose();
    }
    return h;
  }

  // -- Hamiltonian ----------------------------------------------------------

  [[nodiscard]] double hamiltonian(const Vec& x, const Vec& p) const {
    const Vec q = p + shift_;
    const double q2 = q.squaredNorm();
    return 0.5 * q2 + 0.25 * quartic_ * q2 * q2 + potential(x);
  }
  [[nodiscard]] Vec h_x(const Vec& x, const Vec& /*p*/) const { return potential_gradient(x); }
  [[nodiscard]] Vec h_p(const Vec& /*x*/, const Vec& p) const {
    const Vec q = p + shift_;
    return (1.0 + quartic_ * q.squaredNorm()) * q;
  }
  [[nodiscard]] Mat h_xx(const Vec& x, const Vec& /*p*/) const { return potential_hessian(x); }
  [[nodiscard]] Mat h_xp(const Vec& /*x*/, const Vec& /*p*/) const { return Mat::Zero(); }
  /// Fiber Hessian; positive definite for every p (Tonelli convexity).
  [[nodiscard]] Mat h_pp(const Vec& /*x*/, const Vec& p) const {
    const Vec q = p + shift_;
    Mat m = (1.0 + quartic_ * q.squaredNorm()) * Mat::Identity() +
            2.0 * quartic_ * q * q.transpose();
    if (!(m.diagonal().minCoeff() > 0.0)) throw NotPositiveDefinite("H_pp lost convexity");
    return m;
  }

  // -- Lagrangian -----------------------------------------------------------

  /// p = L_v(x, v), the solution of H_p(x, p) = v.
  [[nodiscard]] Vec momentum(const Vec& x, const Vec& v) const {
    if (mechanical()) return v - shift_;
    Vec p = v;
    for (int it = 0; it < 100; ++it) {
      const Vec r = h_p(x, p) - v;
      if (r.template lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, v.norm())) return p;
      p -= h_pp(x, p).ldlt().solve(r);
    }
    const Vec r = h_p(x, p) - v;
    if (r.template lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(1.0, v.norm())) return p;
    throw NonConvergence("Legendre inversion at v = " + num(v.norm()));
  }

  /// L(x, v) = sup_p { p.v - H(x, p) } and p = L_v.
  [[nodiscard]] std::pair<double, Vec> legendre(const Vec& x, const Vec& v) const {
    if (mechanical()) {
      return {0.5 * v.squaredNorm() - shift_.dot(v) - potential(x), v - shift_};
    }
    const Vec p = momentum(x, v);
    return {p.dot(v) - hamiltonian(x, p), p};
  }

  [[nodiscard]] double lagrangian(const Vec& x, const Vec& v) const { return legendre(x, v).first; }

  [[nodiscard]] LagrangianJet lagrangian_jet(const Vec& x, const Vec& v) const {
    LagrangianJet j;
    if (mechanical()) {
      j.value = 0.5 * v.squaredNorm() - shift_.dot(v) - potential(x);
      j.p = v - shift_;
      j.lx = -potential_gradient(x);
      j.lxx = -potential_hessian(x);
      j.lxv = Mat::Zero();
      j.lvv = Mat::Identity();
      return j;
    }
    j.p = momentum(x, v);
    j.value = j.p.dot(v) - hamiltonian(x, j.p);
    const Mat hpp_inv = h_pp(x, j.p).inverse();
    const Mat hxp = h_xp(x, j.p);
    j.lx = -h_x(x, j.p);
    j.lvv = hpp_inv;
    j.lxv = -hxp * hpp_inv;
    j.lxx = -h_xx(x, j.p) + hxp * hpp_inv * hxp.transpose();
    return j;
  }

 private:
  static constexpr double kTwoPi = 2.0 * std::numbers::pi;

  static double phase(const CosineTerm& t, const Vec& x) {
    return kTwoPi * t.wave.template cast<double>().dot(x);
  }

  std::string name_;
  std::vector<CosineTerm> potential_;
  Vec shift_;
  double quartic_ = 0.0;
  double potential_bound_ = 0.0;
};

// ---------------------------------------------------------------------------
// Built-in systems
// ---------------------------------------------------------------------------

namespace systems {

/// H = p^2/2.
inline TonelliSystem<1> free1(double shift = 0.0) {
  return {"free", {}, TonelliSystem<1>::Vec::Constant(shift)};
}

/// H = p^2/2 + cos(2 pi x).
inline TonelliSystem<1> pendulum(double shift = 0.0, double amplitude = 1.0) {
  return {"pendulum",
          {{amplitude, TonelliSystem<1>::Wave::Constant(1)}},
          TonelliSystem<1>::Vec::Constant(shift)};
}

/// H = p^2/2 + cos(2 pi x) + 0.3 cos(4 pi x).
inline TonelliSystem<1> two_site(double shift = 0.0, double second = 0.3) {
  return {"two_site",
          {{1.0, TonelliSystem<1>::Wave::Constant(1)}, {second, TonelliSystem<1>::Wave::Constant(2)}},
          TonelliSystem<1>::Vec::Constant(shift)};
}

/// H = p^2/2 + beta p^4/4 + cos(2 pi x): Legendre transform by Newton.
inline TonelliSystem<1> quartic_pendulum(double beta, double shift = 0.0) {
  return {"quartic_pendulum",
          {{1.0, TonelliSystem<1>::Wave::Constant(1)}},
          TonelliSystem<1>::Vec::Constant(shift),
          beta};
}

/// H = |p|^2/2 + cos(2 pi x1) + a2 cos(2 pi x2) on T^2.
inline TonelliSystem<2> product2(double a2 = 0.5, TonelliSystem<2>::Vec shift = TonelliSystem<2>::Vec::Zero()) {
  using W = TonelliSystem<2>::Wave;
  return {"product2", {{1.0, W(1, 0)}, {a2, W(0, 1)}}, shift};
}

/// H = |p|^2/2 on T^2.
inline TonelliSystem<2> free2() { return {"free2", {}}; }

}  // namespace systems

}  // namespace greencone
