#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

// Drives the installed binary as a subprocess: every case here is an
// end-to-end run over fork/exec, files, and exit codes.

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

struct RunResult {
  int exit_code = -1;
  std::string out;  // stdout only; stderr passes through
};

RunResult run_shell(const std::string& cmd) {
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  RunResult r;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, got);
  int rc = pclose(p);
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

RunResult run_cli(const std::string& args) {
  return run_shell(std::string(HERGLOTZ_CLI_PATH) + " " + args);
}

fs::path scratch_dir(const std::string& tag) {
  fs::path dir = fs::path("cli_scratch") / tag;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& body) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(body);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// Two-column (quantity, value) tables as a lookup.
std::map<std::string, double> parse_report(const std::string& body) {
  std::map<std::string, double> kv;
  auto rows = parse_csv(body);
  for (size_t i = 1; i < rows.size(); ++i)
    kv[rows[i][0]] = std::stod(rows[i][1]);
  return kv;
}

}  // namespace

TEST_CASE("gamma run with oracle column") {
  fs::path dir = scratch_dir("gamma");
  fs::path out = dir / "g.csv";
  RunResult r = run_cli("gamma --d 3 --symbol power:mu=2 --nmax 8 --out " +
                        out.string());
  REQUIRE(r.exit_code == 0);

  auto rows = parse_csv(slurp(out));
  REQUIRE(rows.size() == 10);  // header + n = 0..8
  CHECK(rows[0] == std::vector<std::string>(
                       {"n", "gamma", "error_bound", "oracle", "rel_error"}));
  CHECK(std::abs(std::stod(rows[1][1]) - kPi) < 1e-8);
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(std::stod(rows[i][4]) < 1e-6);

  Json manifest = Json::parse(slurp(dir / "g.csv.manifest.json"));
  CHECK(manifest["schema"] == "herglotz/manifest/1");
  CHECK(manifest["command"] == "gamma");
  CHECK(manifest["config"]["symbol"] == "power:mu=2");
  CHECK(manifest["config"]["d"] == 3);
  CHECK(manifest["artifact"]["file"] == "g.csv");
  CHECK(manifest["columns"]["gamma"] == "radial::gamma_sequence");
  CHECK(manifest["tolerances"].contains("quadrature_abs_tol"));

  // no staging leftovers
  for (const auto& e : fs::directory_iterator(dir))
    CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("identical config gives identical bytes") {
  fs::path d1 = scratch_dir("rerun_a");
  fs::path d2 = scratch_dir("rerun_b");
  std::string args = "spectrum --d 2 --symbol exp:s=1 --grid 48 --nmax 12 --out ";
  REQUIRE(run_cli(args + (d1 / "s.csv").string()).exit_code == 0);
  // second run under a different worker bound must not change a byte
  RunResult r2 = run_shell("HERGLOTZ_THREADS=1 " HERGLOTZ_CLI_PATH " " + args +
                           (d2 / "s.csv").string());
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(d1 / "s.csv") == slurp(d2 / "s.csv"));
  CHECK(slurp(d1 / "s.csv.manifest.json") == slurp(d2 / "s.csv.manifest.json"));
}

TEST_CASE("config errors leave error JSON and no artifact") {
  fs::path dir = scratch_dir("errors");
  fs::path out = dir / "x.csv";

  RunResult bad_key =
      run_cli("gamma --d 3 --symbol power:nu=2 --out " + out.string());
  CHECK(bad_key.exit_code == 2);
  Json err = Json::parse(bad_key.out);
  CHECK(err["schema"] == "herglotz/error/1");
  CHECK(err["command"] == "gamma");
  CHECK(err["error"].get<std::string>().find("unknown key") !=
        std::string::npos);
  CHECK_FALSE(fs::exists(out));

  CHECK(run_cli("gamma --d 3 --symbol bogus:x=1 --out " + out.string())
            .exit_code == 2);
  CHECK(run_cli("gamma --d 3 --symbol power:mu=2,mu=3 --out " + out.string())
            .exit_code == 2);
  CHECK(run_cli("gamma --d 3 --symbol sphere:cos --out " + out.string())
            .exit_code == 2);
  // out-of-range parameter caught at the module boundary
  CHECK(run_cli("gamma --d 3 --symbol power:mu=5 --out " + out.string())
            .exit_code == 2);
  // missing required option is a usage error
  CHECK(run_cli("gamma --d 3 --symbol power:mu=2 2>/dev/null").exit_code != 0);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("module-level divergence exits with its own code") {
  fs::path dir = scratch_dir("flag");
  RunResult r = run_cli("bounds --d 2 --symbol power:mu=1 --out " +
                        (dir / "b.csv").string());
  CHECK(r.exit_code == 3);
  Json err = Json::parse(r.out);
  CHECK(err["schema"] == "herglotz/error/1");
  CHECK(err["error"].get<std::string>().find("diverges") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "b.csv"));
}

TEST_CASE("json format carries typed rows") {
  fs::path dir = scratch_dir("json");
  fs::path out = dir / "g.json";
  REQUIRE(run_cli("gamma --d 3 --symbol power:mu=2 --nmax 2 --format json --out " +
                  out.string())
              .exit_code == 0);
  Json doc = Json::parse(slurp(out));
  CHECK(doc["schema"] == "herglotz/gamma/1");
  REQUIRE(doc["rows"].size() == 3);
  CHECK(doc["rows"][0]["n"] == 0);
  CHECK(doc["rows"][0]["gamma"].is_number_float());
  CHECK(std::abs(doc["rows"][0]["gamma"].get<double>() - kPi) < 1e-8);
}

TEST_CASE("kernel table error column") {
  fs::path dir = scratch_dir("kernel");
  fs::path out = dir / "k.csv";
  REQUIRE(run_cli("kernel --d 2 --tmax 3 --steps 7 --out " + out.string())
              .exit_code == 0);
  auto rows = parse_csv(slurp(out));
  REQUIRE(rows.size() == 8);
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(std::stod(rows[i][3]) < 1e-8);
}

TEST_CASE("bounds report for the inverse-square symbol") {
  fs::path dir = scratch_dir("bounds");
  fs::path out = dir / "b.csv";
  REQUIRE(run_cli("bounds --d 3 --symbol power:mu=2 --out " + out.string())
              .exit_code == 0);
  auto kv = parse_report(slurp(out));
  // transform is sqrt(pi/2)/rho under the unitary normalization
  CHECK(std::abs(kv.at("boundedness_constant") -
                 std::sqrt(kPi / 2.0) * 4.0 * kPi) < 1e-6);
  CHECK(std::abs(kv.at("operator_bound") - kPi) < 1e-6);
  CHECK(kv.at("hd_bounded") == 1.0);
  CHECK(kv.at("argf_admissible") == 1.0);
  CHECK(std::abs(kv.at("argf_integral") - kv.at("boundedness_constant")) < 1e-4);
}

TEST_CASE("multiplier algebra report") {
  fs::path dir = scratch_dir("hconv");
  fs::path out = dir / "h.csv";
  REQUIRE(run_cli("hconv --d 2 --nmax 8 --grid 32 --R 100 --out " + out.string())
              .exit_code == 0);
  auto kv = parse_report(slurp(out));
  CHECK(kv.at("nodal_commutator") == 0.0);
  CHECK(kv.at("nodal_product_defect") == 0.0);
  CHECK(std::abs(kv.at("norm_N8") - std::cos(kPi / 18.0)) < 1e-9);
  CHECK(kv.at("fact_residual_R100") < 0.05);
  CHECK(kv.at("fact_final_ratio") > 0.2);
  CHECK(kv.at("fact_final_ratio") < 0.8);
}

TEST_CASE("averaging ladders") {
  fs::path dir = scratch_dir("avg");
  fs::path iso = dir / "i.csv";
  REQUIRE(run_cli("isometry --d 2 --R 250 --grid 32 --out " + iso.string())
              .exit_code == 0);
  auto rows = parse_csv(slurp(iso));
  REQUIRE(rows.size() == 3);
  CHECK(std::stod(rows[1][2]) < 0.02);
  CHECK(std::stod(rows[2][2]) < 0.02);

  fs::path far = dir / "f.csv";
  REQUIRE(run_cli("farfield --d 3 --R 100 --nmax 1 --out " + far.string())
              .exit_code == 0);
  auto frows = parse_csv(slurp(far));
  REQUIRE(frows.size() == 5);
  // n = 1 rows: doubling the shell radius cuts the residual
  double r1 = std::stod(frows[3][3]);
  double r2 = std::stod(frows[4][3]);
  CHECK(r2 < 0.8 * r1);
}
