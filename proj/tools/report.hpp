#pragma once

// report.json: command, config echo, check records, versions, details.
// Keys keep insertion order. Timing is written only on request so that
// reports of identical runs are byte-identical.

#include "config.hpp"

#include <json.hpp>

#include <boost/version.hpp>

#include <cfloat>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace greencone::cli {

using Json = nlohmann::ordered_json;

/// JSON has no infinities: they are clamped to +-DBL_MAX, NaN becomes null.
inline Json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? DBL_MAX : -DBL_MAX;
  return v;
}

inline Json matrix_json(const SymMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.dim(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.dim(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

inline Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

/// FNV-1a 64-bit, hex.
inline std::string digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Json config_echo(const ExperimentConfig& c) {
  return Json{{"system", {{"name", c.system}, {"shift", c.shift}, {"shift2", c.shift2}, {"amplitude", c.amplitude},
                          {"second", c.second}, {"beta", c.beta}, {"a2", c.a2}}},
              {"grid", {{"resolution", c.resolution}, {"t_step", c.t_step}, {"segments", c.segments},
                        {"max_winding", c.max_winding}}},
              {"tolerances", {{"tol_order", c.tol_order}, {"tail_tol", c.tail_tol}, {"solve_tol", c.solve_tol},
                              {"epsilon", c.epsilon}, {"delta_min", c.delta_min}, {"delta_max", c.delta_max}}},
              {"green", {{"x", c.green_x}, {"p", c.green_p}, {"t_max", c.green_t_max}, {"scheme", c.scheme},
                         {"orbit_time", c.orbit_time}}},
              {"verify", {{"x", c.verify_x}, {"t_max", c.verify_t_max}, {"scheme", c.verify_scheme},
                          {"adversarial", c.adversarial}, {"adversarial_count", c.adversarial_count}}},
              {"semiconcavity", {{"local", c.local}, {"t", c.local_t}, {"radius", c.local_radius}}},
              {"hessian", {{"x", c.hessian_x}, {"p", c.hessian_p}, {"t", c.hessian_t}}},
              {"run", {{"seed", c.seed}, {"trials", c.trials}, {"pairs", c.pairs}}}};
}

inline Json versions() {
  return Json{{"greencone", GREENCONE_VERSION},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"boost", BOOST_LIB_VERSION},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"report_schema", 1}};
}

class Report {
 public:
  Report(std::string command, const ExperimentConfig& cfg) : command_(std::move(command)), cfg_(cfg) {}

  void add(const CheckRecord& r) {
    Json j{{"name", r.name},
           {"inputs_digest", digest(r.inputs)},
           {"margin", number(r.margin)},
           {"pass", r.pass},
           {"trials", r.trials},
           {"failures", r.failures},
           {"skipped", r.skipped},
           {"note", r.note}};
    checks_.push_back(std::move(j));
    all_pass_ = all_pass_ && r.pass;
  }

  /// A check with a margin; passes when margin >= 0.
  void add(const std::string& name, const std::string& inputs, double margin, const std::string& note = "") {
    CheckRecord r;
    r.name = name;
    r.inputs = inputs;
    r.margin = margin;
    r.pass = margin >= 0.0;
    r.trials = 1;
    r.failures = r.pass ? 0 : 1;
    r.note = note;
    add(r);
  }

  Json& details() { return details_; }
  [[nodiscard]] bool passed() const { return all_pass_; }
  void set_timing(double seconds) { timing_ = seconds; }
  void set_error(const std::string& kind, const std::string& message) {
    error_ = Json{{"kind", kind}, {"message", message}};
    all_pass_ = false;
  }

  [[nodiscard]] Json to_json() const {
    Json j{{"command", command_}, {"config", config_echo(cfg_)}, {"checks", checks_}, {"pass", all_pass_}};
    if (!error_.is_null()) j["error"] = error_;
    j["details"] = details_.is_null() ? Json::object() : details_;
    j["versions"] = versions();
    if (timing_) j["timing"] = {{"seconds", *timing_}};
    return j;
  }

  void write(const std::filesystem::path& dir) const {
    std::ofstream f(dir / "report.json", std::ios::binary);
    if (!f) throw IoError("cannot write " + (dir / "report.json").string());
    f << to_json().dump(2) << '\n';
  }

 private:
  std::string command_;
  ExperimentConfig cfg_;
  Json checks_ = Json::array();
  Json details_;
  Json error_;
  bool all_pass_ = true;
  std::optional<double> timing_;
};

}  // namespace greencone::cli
