// A short walk through the library on the pendulum H = p^2/2 + cos(2 pi x):
// a cone membership, the Green bundles at the saddle, the weak KAM
// solution on a coarse grid, and the cone check at one point of I_set.

#include "greencone/greencone.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

using namespace greencone;

int main() {
  // Sg cone between the slopes -1 and 2 in the plane.
  const ConePair cone(SymMatrix::scalar(1, -1.0), SymMatrix::scalar(1, 2.0));
  for (double slope : {-2.0, 0.5, 3.0}) {
    const TangentVector v(Vector::Constant(1, 1.0), Vector::Constant(1, slope));
    std::printf("slope %+.1f  Sg = %+.4f  in cone: %s\n", slope, sg_value(cone, v).as_double(),
                cone_contains(cone, v) ? "yes" : "no");
  }

  const auto sys = systems::pendulum();
  const double lam = 2 * std::numbers::pi;
  const PhasePoint<1> saddle(TonelliSystem<1>::Vec(0.0), TonelliSystem<1>::Vec(0.0));
  std::printf("\nt      G_t            2pi coth(2pi t)\n");
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    std::printf("%-5g  %.12f  %.12f\n", t, pre_green(sys, saddle, t)(0, 0), lam / std::tanh(lam * t));
  }
  const auto g = green_limits(sys, saddle, 4.0);
  std::printf("limits G- = %.9f  G+ = %.9f\n", g.g_minus(0, 0), g.g_plus(0, 0));

  const auto kernel = build_kernel(sys, Grid<1>(256), 0.5);
  const auto sol = weak_kam_solve(kernel);
  double sup = 0.0;
  for (std::size_t i = 0; i < sol.u.size(); ++i) {
    const double x = sol.u.grid.node(i)(0);
    sup = std::max(sup, std::abs(sol.u[i] - (2 / std::numbers::pi) * (1 - std::abs(std::cos(std::numbers::pi * x)))));
  }
  std::printf("\nweak KAM on 256 nodes: c = %.6f, sup distance to closed form %.2e\n", sol.c, sup);

  // Shift 2 puts the Aubry set on a rotational circle.
  const auto shifted = systems::pendulum(2.0);
  const auto k2 = build_kernel(shifted, Grid<1>(1024), 0.5);
  const auto s2 = weak_kam_solve(k2, {5000, 1e-6, 50});
  const auto pair = conjugate_pair(k2, s2, {5000, 1e-6, 50});
  const auto r = verify_theorem(shifted, pair, nearest_sample(pair, Vector::Constant(1, 0.25)));
  std::printf("shift 2: c = %.6f, |I_set| = %zu, directions %zu, pass fraction %.3f, worst margin %.3e\n", s2.c,
              pair.i_set.size(), r.directions.size(), r.pass_fraction(), r.worst_margin);
  std::printf("G- = %.6f  G+ = %.6f  %s\n", r.g_minus(0, 0), r.g_plus(0, 0), r.note.c_str());
  return 0;
}
