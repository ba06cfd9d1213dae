// End-to-end tests of the greencone executable: exit codes, report schema,
// CSV and kernel outputs, determinism across thread counts.

#include "greencone/greencone.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const fs::path kScratch = fs::path(GREENCONE_TEST_SCRATCH) / "cli";

int run(const std::string& args) {
  const std::string cmd = std::string(GREENCONE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh(const std::string& name) {
  const fs::path dir = kScratch / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Json load(const fs::path& p) { return Json::parse(slurp(p)); }

fs::path write_ini(const std::string& name, const std::string& body) {
  fs::create_directories(kScratch);
  const fs::path p = kScratch / name;
  std::ofstream(p) << body;
  return p;
}

/// Value types in place of values; arrays keep their length.
Json skeleton(const Json& j) {
  if (j.is_object()) {
    Json out = Json::object();
    for (const auto& [k, v] : j.items()) out[k] = skeleton(v);
    return out;
  }
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& v : j) out.push_back(skeleton(v));
    return out;
  }
  if (j.is_number()) return "number";
  if (j.is_boolean()) return "bool";
  if (j.is_null()) return "null";
  return "string";
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, ConeCheckReportMatchesGoldenStructure) {
  const auto a = fresh("cone_a"), b = fresh("cone_b");
  ASSERT_EQ(run("cone-check --trials 50 --seed 1 --out " + a.string()), 0);
  ASSERT_EQ(run("cone-check --trials 80 --seed 9 --out " + b.string()), 0);
  const Json ra = load(a / "report.json"), rb = load(b / "report.json");
  EXPECT_EQ(skeleton(ra), skeleton(rb));
  const Json golden = Json::parse(slurp(fs::path(GREENCONE_GOLDEN_DIR) / "cone_check.structure.json"));
  EXPECT_EQ(skeleton(ra), golden);

  std::vector<std::string> keys;
  for (const auto& [k, v] : ra.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"command", "config", "checks", "pass", "details", "versions"}));
  EXPECT_EQ(ra["command"], "cone-check");
  EXPECT_EQ(ra["config"]["run"]["seed"], 1);
  for (const auto& c : ra["checks"]) {
    EXPECT_TRUE(c["pass"].get<bool>()) << c["name"];
    EXPECT_EQ(c["inputs_digest"].get<std::string>().size(), 16u);
  }
}

TEST(Cli, TimingOnlyOnRequest) {
  const auto a = fresh("timing");
  ASSERT_EQ(run("cone-check --trials 10 --timing --out " + a.string()), 0);
  EXPECT_TRUE(load(a / "report.json").contains("timing"));
}

TEST(Cli, ConfigErrorsExitWithTwo) {
  const auto out = fresh("config_errors").string();
  EXPECT_EQ(run("cone-check --trials 10 --config " + write_ini("neg.ini", "[tolerances]\ntol_order = -1\n").string() +
                " --out " + out),
            2);
  EXPECT_EQ(run("cone-check --config " + write_ini("unknown.ini", "[grid]\nresolutoin = 64\n").string() + " --out " + out),
            2);
  EXPECT_EQ(run("cone-check --config " + write_ini("nan.ini", "[grid]\nt_step = fast\n").string() + " --out " + out), 2);
  EXPECT_EQ(run("cone-check --config /nonexistent.ini --out " + out), 2);
  EXPECT_EQ(run("weak-kam --t-step 0 --out " + out), 2);
  EXPECT_EQ(run("weak-kam --resolution 8 --out " + out), 2);
  EXPECT_EQ(run("green --t-max 0 --out " + out), 2);
  EXPECT_EQ(run("green --x 0,0 --out " + out), 2);
  EXPECT_EQ(run("action-hessian --config " + write_ini("t20.ini", "[hessian]\nt = 20\n").string() + " --out " + out), 2);
  EXPECT_EQ(run("--seed 3"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
}

TEST(Cli, MathematicalFailuresExitWithThree) {
  // Past T ~ 6 the numerical orbit leaves the separatrix and the ladder stalls.
  const auto sep = fresh("separatrix");
  EXPECT_EQ(run("green --x 0.25 --p 1.4142135623730951 --t-max 64 --out " + sep.string()), 3);
  const Json r = load(sep / "report.json");
  EXPECT_FALSE(r["pass"].get<bool>());
  EXPECT_EQ(r["details"]["status"], "non_convergence");

  const auto adv = fresh("adversarial");
  EXPECT_EQ(run("verify-theorem --resolution 256 --adversarial --out " + adv.string()), 3);
  const Json ra = load(adv / "report.json");
  EXPECT_GT(ra["details"]["failures"].get<int>(), 0);
  EXPECT_TRUE(fs::exists(adv / "directions.csv"));
}

TEST(Cli, GreenSaddleLadder) {
  const auto out = fresh("saddle");
  ASSERT_EQ(run("green --config " GREENCONE_DEMO_CONFIGS "/saddle_green.ini --out " + out.string()), 0);
  const auto rows = read_csv(out / "ladder.csv");
  ASSERT_EQ(rows.size(), 4u);  // header and t = 1, 2, 4
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "g_plus_11", "g_minus_11", "gap_plus", "gap_minus"}));
  EXPECT_NEAR(std::stod(rows[3][1]), 2 * std::numbers::pi, 1e-6);
  EXPECT_NEAR(std::stod(rows[3][2]), -2 * std::numbers::pi, 1e-6);
  const Json r = load(out / "report.json");
  EXPECT_EQ(r["details"]["closed_form"].size(), 5u);
  EXPECT_FALSE(fs::exists(out / "orbit.csv"));
}

TEST(Cli, WeakKamOutputsReadBack) {
  const auto out = fresh("weak_kam");
  ASSERT_EQ(run("weak-kam --resolution 128 --out " + out.string()), 0);
  const auto sol = read_csv(out / "solution.csv");
  ASSERT_EQ(sol.size(), 129u);
  EXPECT_EQ(sol[0], (std::vector<std::string>{"x_1", "u", "w", "gap", "contact", "in_iset", "p_1"}));
  std::size_t in_iset = 0;
  for (std::size_t i = 1; i < sol.size(); ++i) {
    ASSERT_EQ(sol[i].size(), 7u);
    EXPECT_GE(std::stod(sol[i][3]), -1e-12);
    if (sol[i][5] == "1") {
      ++in_iset;
      EXPECT_FALSE(sol[i][6].empty());
    } else {
      EXPECT_TRUE(sol[i][6].empty());
    }
  }
  const Json r = load(out / "report.json");
  EXPECT_EQ(in_iset, r["details"]["i_set_size"].get<std::size_t>());
  const auto u = read_csv(out / "u.csv");
  ASSERT_EQ(u.size(), 129u);
  EXPECT_EQ(u[0], (std::vector<std::string>{"x_1", "u"}));
  EXPECT_EQ(std::stod(u[1][1]), 0.0);

  const auto k = greencone::read_kernel<1>((out / "kernel.bin").string());
  EXPECT_EQ(k.grid.resolution, 128);
  EXPECT_EQ(k.t_step, 0.5);
  EXPECT_EQ(fs::file_size(out / "kernel.bin"), 24u + 128u * 128u * 8u);

  // Reusing the kernel reproduces the solution byte for byte.
  const auto again = fresh("weak_kam_reuse");
  ASSERT_EQ(run("weak-kam --resolution 128 --kernel " + (out / "kernel.bin").string() + " --out " + again.string()), 0);
  EXPECT_EQ(slurp(out / "u.csv"), slurp(again / "u.csv"));
  EXPECT_EQ(run("weak-kam --resolution 64 --kernel " + (out / "kernel.bin").string() + " --out " + again.string()), 2);
}

TEST(Cli, KernelBinaryRoundTrip) {
  const auto sys = greencone::systems::pendulum(0.3);
  const auto k = greencone::build_kernel(sys, greencone::Grid<1>(32), 0.5);
  std::stringstream buf;
  greencone::write_kernel(buf, k);
  EXPECT_EQ(buf.str().substr(0, 8), "WKAMKRN1");
  const auto back = greencone::read_kernel<1>(buf);
  EXPECT_EQ(back.grid.resolution, 32);
  EXPECT_EQ(back.t_step, 0.5);
  EXPECT_EQ(back.entries, k.entries);

  std::stringstream bad("WKAMKRN2xxxxxxxxxxxxxxxx");
  EXPECT_THROW(greencone::read_kernel<1>(bad), greencone::IoError);
  std::stringstream cut(buf.str().substr(0, 100));
  EXPECT_THROW(greencone::read_kernel<1>(cut), greencone::IoError);
  std::stringstream wrong_dim(buf.str());
  EXPECT_THROW(greencone::read_kernel<2>(wrong_dim), greencone::IoError);
}

TEST(Cli, OutputsIndependentOfThreadCount) {
  for (const std::string cmd : {"cone-check --trials 300 --seed 5", "weak-kam --resolution 64"}) {
    const auto one = fresh("threads1"), eight = fresh("threads8");
    ASSERT_EQ(run(cmd + " --threads 1 --out " + one.string()), 0) << cmd;
    ASSERT_EQ(run(cmd + " --threads 8 --out " + eight.string()), 0) << cmd;
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(one)) {
      ++files;
      EXPECT_EQ(slurp(e.path()), slurp(eight / e.path().filename())) << cmd << ": " << e.path().filename();
    }
    EXPECT_GE(files, 1u);
  }
}

TEST(Cli, FlagsOverrideConfig) {
  const auto out = fresh("override");
  const auto ini = write_ini("override.ini", "[grid]\nresolution = 32\n[run]\nseed = 7\ntrials = 20\n");
  ASSERT_EQ(run("cone-check --config " + ini.string() + " --seed 11 --out " + out.string()), 0);
  const Json r = load(out / "report.json");
  EXPECT_EQ(r["config"]["run"]["seed"], 11);
  EXPECT_EQ(r["config"]["run"]["trials"], 20);
  EXPECT_EQ(r["config"]["grid"]["resolution"], 32);
  EXPECT_FALSE(r["config"]["run"].contains("threads"));
}

TEST(Cli, ActionHessianReport) {
  const auto out = fresh("hessian");
  ASSERT_EQ(run("action-hessian --config " GREENCONE_DEMO_CONFIGS "/separatrix_hessian.ini --out " + out.string()), 0);
  const Json r = load(out / "report.json");
  ASSERT_EQ(r["checks"].size(), 3u);
  for (const auto& row : r["details"]["rows"]) EXPECT_LE(row["max_relative_error"].get<double>(), 1e-3);
}
