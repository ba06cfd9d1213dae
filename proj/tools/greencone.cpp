// greencone command-line harness.
//
//   greencone <command> [--config PATH] [--seed N] [--out DIR] [--resolution N]
//             [--t-step X] [--epsilon X] [--threads N] [command options]
//
// Exit codes: 0 every check passed, 2 configuration or usage error,
// 3 mathematical failure (failed check, conjugate point, non-convergence).

#include "config.hpp"
#include "report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;

namespace greencone::cli {
namespace {

constexpr int kExitPass = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMath = 3;

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

template <int Dim>
typename TonelliSystem<Dim>::Vec to_vec(const std::vector<double>& v) {
  typename TonelliSystem<Dim>::Vec out;
  for (int i = 0; i < Dim; ++i) out(i) = v[static_cast<std::size_t>(i)];
  return out;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

std::string describe(const std::string& name, const ExperimentConfig& c, const std::string& extra = "") {
  std::ostringstream os;
  os.precision(17);
  os << name << ";system=" << c.system << ";shift=" << c.shift << "," << c.shift2 << ";amp=" << c.amplitude
     << ";res=" << c.resolution << ";t_step=" << c.t_step << ";segments=" << c.segments << extra;
  return os.str();
}

// ---------------------------------------------------------------------------
// cone-check, semiconcavity
// ---------------------------------------------------------------------------

void cmd_cone_check(const ExperimentConfig& c, Report& rep) {
  for (const auto& r : cone_check_suites(c.seed, static_cast<std::size_t>(c.trials))) rep.add(r);
}

// ---------------------------------------------------------------------------
// weak-kam
// ---------------------------------------------------------------------------

template <int Dim>
struct WeakKamRun {
  ActionKernel<Dim> kernel;
  WeakKAMSolution<Dim> sol;
  ConjugatePairData<Dim> pair;
};

template <int Dim>
WeakKamRun<Dim> run_weak_kam(const ExperimentConfig& c, const std::string& kernel_in) {
  const auto sys = make_system<Dim>(c);
  ActionKernel<Dim> kernel = [&] {
    if (!kernel_in.empty()) {
      auto k = read_kernel<Dim>(kernel_in);
      if (k.grid.resolution != c.resolution || k.t_step != c.t_step) {
        throw ConfigError("kernel file does not match resolution/t_step of the configuration");
      }
      return k;
    }
    ActionOptions aopt;
    aopt.segments = c.segments;
    aopt.max_winding = c.max_winding;
    return build_kernel(sys, Grid<Dim>(c.resolution), c.t_step, aopt);
  }();
  const SolveOptions sopt{5000, c.solve_tol, 50};
  auto sol = weak_kam_solve(kernel, sopt);
  auto pair = conjugate_pair(kernel, sol, sopt);
  return {std::move(kernel), std::move(sol), std::move(pair)};
}

template <int Dim>
Json weak_kam_details(const WeakKamRun<Dim>& r) {
  return Json{{"c", r.sol.c},
              {"c_spread", r.sol.c_spread},
              {"residual", r.sol.residual},
              {"iterations", r.sol.iterations},
              {"cesaro", r.sol.cesaro},
              {"c_forward", r.pair.c_forward},
              {"forward_iterations", r.pair.iterations},
              {"forward_cesaro", r.pair.cesaro},
              {"eps_k", r.pair.eps_k},
              {"gap_max", r.pair.gap.max()},
              {"contact_nodes", r.pair.contact_nodes.size()},
              {"i_set_size", r.pair.i_set.size()}};
}

template <int Dim>
void write_weak_kam_outputs(const WeakKamRun<Dim>& r, const fs::path& out, bool with_kernel) {
  if (with_kernel) write_kernel((out / "kernel.bin").string(), r.kernel);
  auto u = open_csv(out / "u.csv");
  write_grid_function_csv(u, r.sol.u, "u");
  auto w = open_csv(out / "w.csv");
  write_grid_function_csv(w, r.pair.w, "w");
  auto s = open_csv(out / "solution.csv");
  write_solution_csv(s, r.pair);
}

template <int Dim>
void cmd_weak_kam(const ExperimentConfig& c, Report& rep, const fs::path& out, const std::string& kernel_in) {
  const auto r = run_weak_kam<Dim>(c, kernel_in);
  write_weak_kam_outputs(r, out, kernel_in.empty());
  rep.details() = weak_kam_details(r);
  const std::string in = describe("weak_kam", c);
  rep.add("fixed_point_residual", in, c.solve_tol - r.sol.residual);
  const double c_tol = std::max(1e-5, 100 * c.solve_tol);
  rep.add("forward_critical_value", in, c_tol - std::abs(r.pair.c_forward - r.sol.c),
          "backward and forward iterations agree on c");
  rep.add("contact_set_nonempty", in, r.pair.contact_nodes.empty() ? -1.0 : 0.0);
  if constexpr (Dim == 1) {
    if (c.system == "pendulum" && c.shift == 0.0 && c.amplitude == 1.0) {
      rep.add("critical_value_closed_form", in, 1e-3 - std::abs(r.sol.c - 1.0), "c = 1");
      double sup = 0.0;
      for (std::size_t i = 0; i < r.sol.u.size(); ++i) {
        const double x = r.sol.u.grid.node(i)(0);
        sup = std::max(sup, std::abs(r.sol.u[i] - (2 / std::numbers::pi) * (1 - std::abs(std::cos(std::numbers::pi * x)))));
      }
      rep.add("solution_closed_form", in, 5e-3 - sup, "sup |u - (2/pi)(1 - |cos pi x|)| with u(0) = 0");
      rep.details()["closed_form_sup_distance"] = sup;
    }
  }
  if (c.system == "free" || c.system == "free2") {
    rep.add("constant_solution", in, 1e-9 - (r.sol.u.max() - r.sol.u.min()));
  }
}

// ---------------------------------------------------------------------------
// green
// ---------------------------------------------------------------------------

template <int Dim>
void cmd_green(const ExperimentConfig& c, Report& rep, const fs::path& out) {
  const auto sys = make_system<Dim>(c);
  const PhasePoint<Dim> z(to_vec<Dim>(c.green_x), to_vec<Dim>(c.green_p));
  FlowOptions fopt;
  fopt.scheme = parse_scheme(c.scheme);
  const auto g = green_ladder(sys, z, c.green_t_max, c.tail_tol, fopt);
  {
    auto f = open_csv(out / "ladder.csv");
    write_ladder_csv(f, g);
  }
  if (c.orbit_time > 0.0) {
    auto f = open_csv(out / "orbit.csv");
    write_orbit_csv<Dim>(f, flow(sys, z, c.orbit_time, true, fopt).orbit);
  }
  std::ostringstream extra;
  extra.precision(17);
  extra << ";x=" << z.x.transpose() << ";p=" << z.p.transpose() << ";t_max=" << c.green_t_max << ";scheme=" << c.scheme;
  const std::string in = describe("green", c, extra.str());
  Json& d = rep.details();
  d["z"] = {{"x", vector_json(Vector(z.x))}, {"p", vector_json(Vector(z.p))}};
  d["status"] = g.status == GreenStatus::kConverged ? "converged"
                : g.status == GreenStatus::kNonConvergence ? "non_convergence"
                                                           : "conjugate_point";
  d["message"] = g.message;
  d["rungs"] = g.table.size();
  if (g.status == GreenStatus::kConjugatePoint) {
    rep.set_error("ConjugatePoint", g.message);
    if (g.table.empty()) return;
  }
  d["g_minus"] = matrix_json(g.g_minus);
  d["g_plus"] = matrix_json(g.g_plus);
  d["residual_minus"] = number(g.residual_minus);
  d["residual_plus"] = number(g.residual_plus);
  d["monotone_plus"] = g.monotone_plus;
  d["monotone_minus"] = g.monotone_minus;
  d["labels_swapped"] = g.labels_swapped;
  if (psd_leq(g.g_minus, g.g_plus)) {
    const auto [mm, mp] = modified_green(g.g_minus, g.g_plus);
    d["modified_minus"] = matrix_json(mm);
    d["modified_plus"] = matrix_json(mp);
  }
  if (g.status != GreenStatus::kConjugatePoint) {
    rep.add("limits_converged", in, c.tail_tol - std::max(g.residual_plus, g.residual_minus), g.message);
  }
  rep.add("separation_g_t_above_g_minus_s", in,
          g.separation_orientation == 1 ? g.separation_margin : -std::abs(g.separation_margin) - 1.0);
  rep.add("limit_order", in, (g.g_plus - g.g_minus).min_eigenvalue() + c.tol_order);
  if constexpr (Dim == 1) {
    // Saddle of the unshifted pendulum: G_{+-t} = +-2 pi coth(2 pi t).
    if (c.system == "pendulum" && c.shift == 0.0 && c.amplitude == 1.0 && z.x(0) == 0.0 && z.p(0) == 0.0) {
      const double lam = 2 * std::numbers::pi;
      double worst = 0.0;
      Json rows = Json::array();
      for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double exact = lam / std::tanh(lam * t);
        const double gp = pre_green(sys, z, t, fopt)(0, 0);
        const double gm = pre_green_minus(sys, z, t, fopt)(0, 0);
        const double err = std::max(std::abs(gp - exact), std::abs(gm + exact)) / exact;
        worst = std::max(worst, err);
        rows.push_back(Json{{"t", t}, {"g_t", gp}, {"g_minus_t", gm}, {"exact", exact}, {"relative_error", err}});
      }
      d["closed_form"] = rows;
      rep.add("closed_form_ladder", in, 1e-6 - worst, "2 pi coth(2 pi t) at t = 0.25 .. 4");
      if (g.status != GreenStatus::kConjugatePoint) {
        const double lim = std::max(std::abs(g.g_plus(0, 0) - lam), std::abs(g.g_minus(0, 0) + lam));
        rep.add("closed_form_limits", in, 1e-6 - lim, "limits +-2 pi");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// verify-theorem
// ---------------------------------------------------------------------------

template <int Dim>
void cmd_verify_theorem(const ExperimentConfig& c, Report& rep, const fs::path& out, const std::string& kernel_in) {
  const auto sys = make_system<Dim>(c);
  const auto run = run_weak_kam<Dim>(c, kernel_in);
  write_weak_kam_outputs(run, out, false);
  VerifyOptions vopt;
  vopt.epsilon = c.epsilon;
  vopt.delta_min = c.delta_min;
  vopt.delta_max = c.delta_max;
  vopt.t_max = c.verify_t_max;
  vopt.tail_tol = c.tail_tol;
  vopt.flow.scheme = parse_scheme(c.verify_scheme);

  std::ostringstream extra;
  extra.precision(17);
  extra << ";x=" << to_vector(c.verify_x).transpose() << ";eps=" << c.epsilon << ";window=" << c.delta_min << ","
        << c.delta_max << ";t_max=" << c.verify_t_max << ";adversarial=" << c.adversarial;
  const std::string in = describe("verify_theorem", c, extra.str());

  Json& d = rep.details();
  d["weak_kam"] = weak_kam_details(run);
  if (run.pair.i_set.empty()) {
    d["vacuous"] = true;
    d["note"] = "I_set has no smooth contact node";
    rep.add("paratingent_in_green_cone", in, 0.0, "vacuous: empty I_set");
    rep.add("modified_chain_consistency", in, 0.0, "vacuous: empty I_set");
    return;
  }
  const std::size_t zi = nearest_sample(run.pair, to_vector(c.verify_x));
  const auto& zs = run.pair.i_set.samples[zi];
  TheoremReport r;
  if (c.adversarial) {
    bool finite = false;
    const auto g = green_at(sys, PhasePoint<Dim>(zs.x, zs.p), vopt, finite);
    r = verify_directions(zs.x, zs.p, g.g_minus, g.g_plus,
                          adversarial_samples(zs.x, zs.p, static_cast<std::size_t>(c.adversarial_count), c.delta_max,
                                              c.seed),
                          vopt);
    r.green_status = g.status;
    r.finite_bracket = finite;
    r.note += (r.note.empty() ? "" : "; ") + std::string("adversarial samples replace I_set");
  } else {
    r = verify_theorem(sys, run.pair, zi, vopt);
  }
  {
    auto f = open_csv(out / "directions.csv");
    write_directions_csv(f, r);
  }
  d["z"] = {{"x", vector_json(r.z_x)}, {"p", vector_json(r.z_p)}, {"i_set_index", zi}};
  d["g_minus"] = matrix_json(r.g_minus);
  d["g_plus"] = matrix_json(r.g_plus);
  d["cone_minus"] = matrix_json(r.fat_minus);
  d["cone_plus"] = matrix_json(r.fat_plus);
  d["modified_minus"] = matrix_json(r.modified_minus);
  d["modified_plus"] = matrix_json(r.modified_plus);
  d["finite_bracket"] = r.finite_bracket;
  d["samples_used"] = r.samples_used;
  d["directions"] = r.directions.size();
  d["failures"] = r.failures;
  d["pass_fraction"] = r.pass_fraction();
  d["worst_margin"] = number(r.worst_margin);
  d["worst_modified_margin"] = number(r.worst_modified_margin);
  d["vacuous"] = r.vacuous;
  d["note"] = r.note;

  std::size_t broken = 0;
  for (const auto& dir : r.directions) broken += (dir.pass && !dir.modified_pass) ? 1 : 0;
  rep.add(CheckRecord{"paratingent_in_green_cone", in, r.vacuous ? 0.0 : r.worst_margin, r.failures == 0,
                      std::max<std::size_t>(r.directions.size(), 1), r.failures, 0,
                      r.vacuous ? "vacuous: " + r.note : r.note});
  rep.add(CheckRecord{"modified_chain_consistency", in, broken == 0 ? 0.0 : -static_cast<double>(broken), broken == 0,
                      std::max<std::size_t>(r.directions.size(), 1), broken, 0,
                      "passing directions that fail the modified cone"});
}

// ---------------------------------------------------------------------------
// semiconcavity
// ---------------------------------------------------------------------------

void cmd_semiconcavity(const ExperimentConfig& c, Report& rep, const fs::path& out, const std::string& kernel_in) {
  for (const auto& r : semiconcavity_suites(c.seed, static_cast<std::size_t>(c.trials), static_cast<std::size_t>(c.pairs))) {
    rep.add(r);
  }
  if (!c.local) return;
  if (c.dim() != 1) throw ConfigError("local semi-concavity check is implemented on T^1");
  const auto sys = make_system<1>(c);
  const auto run = run_weak_kam<1>(c, kernel_in);
  write_weak_kam_outputs(run, out, false);
  const std::size_t zi = nearest_sample(run.pair, to_vector(c.verify_x));
  const auto r = local_semiconcavity_check(sys, run.pair, zi, c.local_t, c.epsilon, c.local_radius);
  std::ostringstream extra;
  extra.precision(17);
  extra << ";x=" << c.verify_x[0] << ";t=" << c.local_t << ";eps=" << c.epsilon << ";radius=" << c.local_radius;
  const std::string in = describe("local_semiconcavity", c, extra.str());
  rep.add(CheckRecord{"local_semiconcave_u", in, r.u.worst_margin, r.u.passed(), r.u.pairs_checked,
                      r.u.violations.size(), 0, ""});
  rep.add(CheckRecord{"local_semiconvex_w", in, r.w.worst_margin, r.w.passed(), r.w.pairs_checked,
                      r.w.violations.size(), 0, ""});
  Json& d = rep.details();
  d["bound_u"] = matrix_json(r.bound_u);
  d["bound_w"] = matrix_json(r.bound_w);
  d["samples_u"] = r.samples_u;
  d["samples_w"] = r.samples_w;
}

// ---------------------------------------------------------------------------
// action-hessian
// ---------------------------------------------------------------------------

template <int Dim>
void cmd_action_hessian(const ExperimentConfig& c, Report& rep) {
  const auto sys = make_system<Dim>(c);
  const PhasePoint<Dim> z(to_vec<Dim>(c.hessian_x), to_vec<Dim>(c.hessian_p));
  Json rows = Json::array();
  for (double t : c.hessian_t) {
    const auto r = action_hessian_check(sys, z, t);
    std::ostringstream extra;
    extra.precision(17);
    extra << ";x=" << z.x.transpose() << ";p=" << z.p.transpose() << ";T=" << t;
    const std::string in = describe("action_hessian", c, extra.str());
    std::ostringstream name;
    name << "action_hessian_T" << t;
    rep.add(name.str(), in, 1e-3 - r.max_relative_error(), "relative error against pre-Green matrices");
    rows.push_back(Json{{"t", t},
                        {"d22_fd", matrix_json(r.slot2.fd)},
                        {"g_t", matrix_json(r.slot2.green)},
                        {"minus_d11_fd", matrix_json(r.slot1.fd)},
                        {"g_minus_t", matrix_json(r.slot1.green)},
                        {"max_relative_error", r.max_relative_error()},
                        {"richardson_error", std::max(r.slot1.richardson_error, r.slot2.richardson_error)}});
  }
  rep.details()["rows"] = rows;
}

// ---------------------------------------------------------------------------
// driver
// ---------------------------------------------------------------------------

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> resolution;
  std::optional<double> t_step;
  std::optional<double> epsilon;
  std::optional<unsigned> threads;
  std::optional<int> trials;
  std::optional<double> t_max;
  std::optional<std::string> x, p;
  bool adversarial = false;
  bool local = false;
  bool timing = false;
  std::string kernel;
};

ExperimentConfig resolve(const Overrides& o, const std::string& command) {
  ExperimentConfig c;
  if (command == "verify-theorem") {
    c.system = "pendulum";
    c.shift = 2.0;
    c.resolution = 1024;
    c.solve_tol = 1e-6;
  }
  if (command == "green") c.green_x = {0.0};
  if (!o.config.empty()) c = load_config(o.config, c);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.resolution) c.resolution = *o.resolution;
  if (o.t_step) c.t_step = *o.t_step;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.threads) c.threads = *o.threads;
  if (o.trials) c.trials = *o.trials;
  if (o.adversarial) c.adversarial = true;
  if (o.local) c.local = true;
  if (command == "green") {
    if (o.t_max) c.green_t_max = *o.t_max;
    if (o.x) c.green_x = detail::parse_list("--x", *o.x);
    if (o.p) c.green_p = detail::parse_list("--p", *o.p);
  } else if (command == "verify-theorem" || command == "semiconcavity") {
    if (o.t_max) c.verify_t_max = *o.t_max;
    if (o.x) c.verify_x = detail::parse_list("--x", *o.x);
  } else if (command == "action-hessian") {
    if (o.x) c.hessian_x = detail::parse_list("--x", *o.x);
    if (o.p) c.hessian_p = detail::parse_list("--p", *o.p);
  }
  validate(c);
  return c;
}

int dispatch(const std::string& command, const ExperimentConfig& c, Report& rep, const fs::path& out,
             const std::string& kernel) {
  const bool two = c.dim() == 2;
  if (command == "cone-check") {
    cmd_cone_check(c, rep);
  } else if (command == "semiconcavity") {
    cmd_semiconcavity(c, rep, out, kernel);
  } else if (command == "green") {
    two ? cmd_green<2>(c, rep, out) : cmd_green<1>(c, rep, out);
  } else if (command == "weak-kam") {
    two ? cmd_weak_kam<2>(c, rep, out, kernel) : cmd_weak_kam<1>(c, rep, out, kernel);
  } else if (command == "verify-theorem") {
    two ? cmd_verify_theorem<2>(c, rep, out, kernel) : cmd_verify_theorem<1>(c, rep, out, kernel);
  } else if (command == "action-hessian") {
    two ? cmd_action_hessian<2>(c, rep) : cmd_action_hessian<1>(c, rep);
  }
  return rep.passed() ? kExitPass : kExitMath;
}

void print_summary(const Report& rep, const fs::path& out) {
  const Json j = rep.to_json();
  for (const auto& check : j["checks"]) {
    std::cout << (check["pass"].get<bool>() ? "PASS " : "FAIL ") << check["name"].get<std::string>()
              << "  margin=" << check["margin"].dump() << '\n';
  }
  if (j.contains("error")) std::cout << "ERROR " << j["error"]["message"].get<std::string>() << '\n';
  std::cout << "report: " << (out / "report.json").string() << '\n';
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Green cone verification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "seed for randomized suites");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--resolution", o.resolution, "grid nodes per axis");
  app.add_option("--t-step", o.t_step, "Lax-Oleinik time step");
  app.add_option("--epsilon", o.epsilon, "cone fattening epsilon");
  app.add_option("--threads", o.threads, "worker threads, 0 = hardware concurrency");
  app.add_flag("--timing", o.timing, "add wall-clock timing to report.json");

  auto* cone = app.add_subcommand("cone-check", "randomized cone algebra suites");
  cone->add_option("--trials", o.trials, "trials per suite");
  auto* green = app.add_subcommand("green", "Green bundle ladder at a phase point");
  green->add_option("--x", o.x, "position, comma separated");
  green->add_option("--p", o.p, "momentum, comma separated");
  green->add_option("--t-max", o.t_max, "largest ladder time");
  auto* wk = app.add_subcommand("weak-kam", "weak KAM solution, conjugate pair and I_set");
  wk->add_option("--kernel", o.kernel, "reuse a kernel file")->check(CLI::ExistingFile);
  auto* vt = app.add_subcommand("verify-theorem", "paratingent directions of I_set against the Green cone");
  vt->add_option("--x", o.x, "base point selector: nearest I_set node");
  vt->add_option("--t-max", o.t_max, "largest ladder time for the Green limits");
  vt->add_flag("--adversarial", o.adversarial, "replace I_set samples by random phase points");
  vt->add_option("--kernel", o.kernel, "reuse a kernel file")->check(CLI::ExistingFile);
  auto* sc = app.add_subcommand("semiconcavity", "ball/cone identity, gradient bound and local checks");
  sc->add_option("--trials", o.trials, "trials of the ball/cone suite");
  sc->add_flag("--local", o.local, "also check u and w against pre-Green bounds");
  sc->add_option("--x", o.x, "base point for the local check");
  sc->add_option("--kernel", o.kernel, "reuse a kernel file")->check(CLI::ExistingFile);
  auto* ah = app.add_subcommand("action-hessian", "finite-difference action Hessians against pre-Green matrices");
  ah->add_option("--x", o.x, "position, comma separated");
  ah->add_option("--p", o.p, "momentum, comma separated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    cfg = resolve(o, command);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  worker_count() = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  const fs::path out(cfg.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    std::cerr << "cannot create " << out << ": " << ec.message() << '\n';
    return kExitConfig;
  }

  Report rep(command, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  int code = kExitPass;
  try {
    code = dispatch(command, cfg, rep, out, o.kernel);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    const std::string what = e.what();
    rep.set_error(what.substr(0, what.find(':')), what);
    code = kExitMath;
  }
  if (o.timing) rep.set_timing(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  try {
    rep.write(out);
  } catch (const IoError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
  print_summary(rep, out);
  return code;
}

}  // namespace greencone::cli

int main(int argc, char** argv) { return greencone::cli::run(argc, argv); }
