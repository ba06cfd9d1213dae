#pragma once

// Experiment configuration: one INI file with sections, overridden by flags.

#include "greencone/greencone.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace greencone::cli {

struct ExperimentConfig {
  // [system]
  std::string system = "pendulum";
  double shift = 0.0;
  double shift2 = 0.0;  // second component on T^2
  double amplitude = 1.0;
  double second = 0.3;
  double beta = 0.1;
  double a2 = 0.5;

  // [grid]
  int resolution = 256;
  double t_step = 0.5;
  int segments = 64;
  int max_winding = 2;

  // [tolerances]
  double tol_order = kTolOrder;
  double tail_tol = 1e-8;
  double solve_tol = 1e-9;
  double epsilon = 1e-3;
  double delta_min = 1e-3;
  double delta_max = 1e-2;

  // [green]
  std::vector<double> green_x{0.0};
  std::vector<double> green_p{0.0};
  double green_t_max = 4.0;
  std::string scheme = "adaptive";
  double orbit_time = 4.0;

  // [verify]
  std::vector<double> verify_x{0.25};
  double verify_t_max = 4096.0;
  std::string verify_scheme = "symplectic";
  bool adversarial = false;
  int adversarial_count = 40;

  // [semiconcavity]
  bool local = false;
  double local_t = 2.0;
  double local_radius = 0.05;

  // [hessian]
  std::vector<double> hessian_x{0.25};
  std::vector<double> hessian_p{1.4142135623730951};
  std::vector<double> hessian_t{0.5, 1.0, 2.0};

  // [run]
  std::uint64_t seed = 42;
  int trials = 10000;
  int pairs = 100;
  std::string out = "out";
  unsigned threads = 1;  // execution only, not echoed in reports

  [[nodiscard]] int dim() const { return system == "product2" || system == "free2" ? 2 : 1; }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(key + ": not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError(key + " is empty");
  return out;
}

template <typename T>
void read(const boost::property_tree::ptree& tree, const std::string& key, T& into) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return;
  std::istringstream is(*v);
  T parsed{};
  is >> parsed;
  if (!is || !(is >> std::ws).eof()) throw ConfigError(key + ": cannot parse '" + *v + "'");
  into = parsed;
}

inline void read(const boost::property_tree::ptree& tree, const std::string& key, std::string& into) {
  if (const auto v = tree.get_optional<std::string>(key)) into = *v;
}

inline void read(const boost::property_tree::ptree& tree, const std::string& key, bool& into) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return;
  if (*v == "true" || *v == "1" || *v == "yes") {
    into = true;
  } else if (*v == "false" || *v == "0" || *v == "no") {
    into = false;
  } else {
    throw ConfigError(key + ": not a boolean '" + *v + "'");
  }
}

inline void read(const boost::property_tree::ptree& tree, const std::string& key, std::vector<double>& into) {
  if (const auto v = tree.get_optional<std::string>(key)) into = parse_list(key, *v);
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "system.name", "system.shift", "system.shift2", "system.amplitude", "system.second", "system.beta",
      "system.a2", "grid.resolution", "grid.t_step", "grid.segments", "grid.max_winding",
      "tolerances.tol_order", "tolerances.tail_tol", "tolerances.solve_tol", "tolerances.epsilon",
      "tolerances.delta_min", "tolerances.delta_max", "green.x", "green.p", "green.t_max", "green.scheme",
      "green.orbit_time", "verify.x", "verify.t_max", "verify.scheme", "verify.adversarial",
      "verify.adversarial_count", "semiconcavity.local", "semiconcavity.t", "semiconcavity.radius",
      "hessian.x", "hessian.p", "hessian.t", "run.seed", "run.trials", "run.pairs", "run.out", "run.threads"};
  return keys;
}

}  // namespace detail

/// Reads an INI file; unknown sections or keys are rejected.
inline ExperimentConfig load_config(const std::string& path, ExperimentConfig cfg = {}) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  const auto& keys = detail::known_keys();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key outside a section: " + section);
    for (const auto& [key, value] : body) {
      (void)value;
      if (std::find(keys.begin(), keys.end(), section + "." + key) == keys.end()) {
        throw ConfigError("unknown key " + section + "." + key);
      }
    }
  }
  using detail::read;
  read(tree, "system.name", cfg.system);
  read(tree, "system.shift", cfg.shift);
  read(tree, "system.shift2", cfg.shift2);
  read(tree, "system.amplitude", cfg.amplitude);
  read(tree, "system.second", cfg.second);
  read(tree, "system.beta", cfg.beta);
  read(tree, "system.a2", cfg.a2);
  read(tree, "grid.resolution", cfg.resolution);
  read(tree, "grid.t_step", cfg.t_step);
  read(tree, "grid.segments", cfg.segments);
  read(tree, "grid.max_winding", cfg.max_winding);
  read(tree, "tolerances.tol_order", cfg.tol_order);
  read(tree, "tolerances.tail_tol", cfg.tail_tol);
  read(tree, "tolerances.solve_tol", cfg.solve_tol);
  read(tree, "tolerances.epsilon", cfg.epsilon);
  read(tree, "tolerances.delta_min", cfg.delta_min);
  read(tree, "tolerances.delta_max", cfg.delta_max);
  read(tree, "green.x", cfg.green_x);
  read(tree, "green.p", cfg.green_p);
  read(tree, "green.t_max", cfg.green_t_max);
  read(tree, "green.scheme", cfg.scheme);
  read(tree, "green.orbit_time", cfg.orbit_time);
  read(tree, "verify.x", cfg.verify_x);
  read(tree, "verify.t_max", cfg.verify_t_max);
  read(tree, "verify.scheme", cfg.verify_scheme);
  read(tree, "verify.adversarial", cfg.adversarial);
  read(tree, "verify.adversarial_count", cfg.adversarial_count);
  read(tree, "semiconcavity.local", cfg.local);
  read(tree, "semiconcavity.t", cfg.local_t);
  read(tree, "semiconcavity.radius", cfg.local_radius);
  read(tree, "hessian.x", cfg.hessian_x);
  read(tree, "hessian.p", cfg.hessian_p);
  read(tree, "hessian.t", cfg.hessian_t);
  read(tree, "run.seed", cfg.seed);
  read(tree, "run.trials", cfg.trials);
  read(tree, "run.pairs", cfg.pairs);
  read(tree, "run.out", cfg.out);
  read(tree, "run.threads", cfg.threads);
  return cfg;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

/// All tolerances positive, known system, sizes in range.
inline void validate(const ExperimentConfig& c) {
  static const std::vector<std::string> systems{"free", "pendulum", "two_site", "quartic_pendulum", "product2",
                                                "free2"};
  require(std::find(systems.begin(), systems.end(), c.system) != systems.end(), "unknown system '" + c.system + "'");
  const std::pair<const char*, double> positive[] = {
      {"tol_order", c.tol_order}, {"tail_tol", c.tail_tol},   {"solve_tol", c.solve_tol},
      {"epsilon", c.epsilon},     {"delta_min", c.delta_min}, {"delta_max", c.delta_max},
      {"t_step", c.t_step},       {"green.t_max", c.green_t_max}, {"verify.t_max", c.verify_t_max},
      {"semiconcavity.t", c.local_t}, {"semiconcavity.radius", c.local_radius}};
  for (const auto& [name, v] : positive) require(std::isfinite(v) && v > 0.0, std::string(name) + " must be positive");
  require(c.delta_min <= c.delta_max, "delta_min must not exceed delta_max");
  require(c.resolution >= 16, "resolution must be at least 16");
  require(c.segments >= 16, "segments must be at least 16");
  require(c.max_winding >= 0, "max_winding must be nonnegative");
  require(c.trials >= 1 && c.pairs >= 1, "trials and pairs must be positive");
  require(c.adversarial_count >= 1, "adversarial_count must be positive");
  require(c.scheme == "adaptive" || c.scheme == "symplectic", "green.scheme must be adaptive or symplectic");
  require(c.verify_scheme == "adaptive" || c.verify_scheme == "symplectic",
          "verify.scheme must be adaptive or symplectic");
  require(c.orbit_time >= 0.0, "orbit_time must be nonnegative");
  const auto n = static_cast<std::size_t>(c.dim());
  require(c.green_x.size() == n && c.green_p.size() == n, "green.x and green.p need one entry per dimension");
  require(c.verify_x.size() == n, "verify.x needs one entry per dimension");
  require(c.hessian_x.size() == n && c.hessian_p.size() == n, "hessian.x and hessian.p need one entry per dimension");
  for (double t : c.hessian_t) require(t > 0.0, "hessian.t entries must be positive");
}

template <int Dim>
TonelliSystem<Dim> make_system(const ExperimentConfig& c);

template <>
inline TonelliSystem<1> make_system<1>(const ExperimentConfig& c) {
  if (c.system == "free") return systems::free1(c.shift);
  if (c.system == "pendulum") return systems::pendulum(c.shift, c.amplitude);
  if (c.system == "two_site") return systems::two_site(c.shift, c.second);
  if (c.system == "quartic_pendulum") return systems::quartic_pendulum(c.beta, c.shift);
  throw ConfigError("system '" + c.system + "' is not one-dimensional");
}

template <>
inline TonelliSystem<2> make_system<2>(const ExperimentConfig& c) {
  if (c.system == "product2") return systems::product2(c.a2, TonelliSystem<2>::Vec(c.shift, c.shift2));
  if (c.system == "free2") return systems::free2().with_shift(TonelliSystem<2>::Vec(c.shift, c.shift2));
  throw ConfigError("system '" + c.system + "' is not two-dimensional");
}

inline Scheme parse_scheme(const std::string& s) { return s == "symplectic" ? Scheme::kSymplectic : Scheme::kAdaptive; }

}  // namespace greencone::cli
