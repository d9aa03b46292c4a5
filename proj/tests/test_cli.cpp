#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = CHOQ_CLI_PATH;
const std::string kConfigs = CHOQ_CONFIG_DIR;

int run(const std::string& args) {
  const int rc = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

json small_config() {
  std::ifstream in(kConfigs + "/shipped.json");
  json j;
  in >> j;
  j["grid"]["n_nodes"] = 128;
  j["grid"]["r_min"] = 1e-4;
  j["grid"]["r_max"] = 20.0;
  j["outputs"]["formats"] = {"json", "csv"};
  return j;
}

std::string write_tmp(const json& j, const std::string& name) {
  const std::string path = "/tmp/choq_cli_" + name;
  std::ofstream out(path);
  out << j.dump(2);
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("check: shipped config passes") {
  CHECK(run("check --config " + kConfigs + "/shipped.json --out /tmp/choq_out_chk") == 0);
  CHECK(fs::exists("/tmp/choq_out_chk/checks.json"));
}

TEST_CASE("check: a0 = -2 violation exits 1 and is named") {
  auto j = small_config();
  j["problem"]["V"] = {{"form", "power"}, {"c", 1.0}, {"e0", -2.0}, {"einf", 0.0}};
  auto p = write_tmp(j, "a0.json");
  CHECK(run("check --config " + p + " --out /tmp/choq_out_a0") == 1);
  auto rep = json::parse(slurp("/tmp/choq_out_a0/checks.json"));
  bool found = false;
  for (const auto& c : rep["admissibility"]["checks"])
    if (c["name"].get<std::string>().find("a0 > -2") != std::string::npos &&
        !c["pass"].get<bool>())
      found = true;
  CHECK(found);
}

TEST_CASE("check: truncated JSON exits 2") {
  const std::string p = "/tmp/choq_cli_trunc.json";
  std::ofstream(p) << "{\"schema\": 1, \"problem\":";
  CHECK(run("check --config " + p) == 2);
  CHECK(run("check --config /tmp/no_such_file_at_all.json") == 2);
}

TEST_CASE("constants: reference values and determinism") {
  const std::string cfg = kConfigs + "/constants_reference.json";
  REQUIRE(run("constants --config " + cfg + " --out /tmp/choq_out_c1") == 0);
  REQUIRE(run("constants --config " + cfg + " --out /tmp/choq_out_c2") == 0);
  const auto a = slurp("/tmp/choq_out_c1/constants.json");
  CHECK(a == slurp("/tmp/choq_out_c2/constants.json"));  // byte-identical
  auto j = json::parse(a);
  CHECK(j["alpha_TM"].get<double>() == Catch::Approx(12.56637).margin(1e-5));
  CHECK(j["c0"].get<double>() == Catch::Approx(0.1875).margin(1e-12));
  CHECK(j["C_mu"].get<double>() == Catch::Approx(3.54491).margin(1e-5));
  CHECK(j["xi1"].get<double>() == Catch::Approx(3.19154).margin(1e-5));
}

TEST_CASE("constants: b0 at the domain boundary exits 1") {
  auto j = small_config();
  j["problem"]["Q"] = {{"form", "power"}, {"c", 1.0}, {"e0", -1.5}, {"einf", 0.0}};
  auto p = write_tmp(j, "b0.json");
  CHECK(run("constants --config " + p + " --out /tmp/choq_out_b0") == 1);
}

TEST_CASE("solve: small run writes the full artifact set") {
  auto j = small_config();
  j["solver"]["tol"] = 1e-6;
  j["outputs"]["formats"] = {"json", "csv", "svg"};
  auto p = write_tmp(j, "solve.json");
  REQUIRE(run("solve --config " + p + " --out /tmp/choq_out_slv") == 0);
  CHECK(fs::exists("/tmp/choq_out_slv/solution.json"));
  CHECK(fs::exists("/tmp/choq_out_slv/profile.csv"));
  CHECK(fs::exists("/tmp/choq_out_slv/run.log"));
  CHECK(fs::exists("/tmp/choq_out_slv/profile.svg"));
  CHECK(fs::exists("/tmp/choq_out_slv/resolved_config.json"));
  auto sol = json::parse(slurp("/tmp/choq_out_slv/solution.json"));
  CHECK(sol["converged"].get<bool>());
  CHECK(sol.contains("level_ok"));
  CHECK(sol.contains("ps_bound_ok"));
  CHECK(sol["residual_norm"].get<double>() < 1e-6);
  // run.log carries per-iteration J and residual lines.
  auto log = slurp("/tmp/choq_out_slv/run.log");
  CHECK(log.find("# iter J residual") != std::string::npos);
}

TEST_CASE("solve: max_iter = 1 exits 1 with a state dump") {
  auto j = small_config();
  j["solver"]["max_iter"] = 1;
  auto p = write_tmp(j, "maxiter.json");
  CHECK(run("solve --config " + p + " --out /tmp/choq_out_mi") == 1);
  auto sol = json::parse(slurp("/tmp/choq_out_mi/solution.json"));
  CHECK_FALSE(sol["converged"].get<bool>());
  CHECK(sol["failure"].get<std::string>().find("not converged") !=
        std::string::npos);
}

TEST_CASE("solve: unwritable output directory exits 2") {
  auto p = write_tmp(small_config(), "unwritable.json");
  CHECK(run("solve --config " + p + " --out /proc/choq_nope") == 2);
}

TEST_CASE("moser: csv columns and the delta_n limit trend") {
  auto j = small_config();
  j["moser"]["n_list"] = {10, 100, 1000};
  auto p = write_tmp(j, "moser.json");
  REQUIRE(run("moser --config " + p + " --out /tmp/choq_out_mo") == 0);
  std::ifstream csv("/tmp/choq_out_mo/moser.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "n,grad_norm_sq,I_n,delta_n,delta_n_log_n");
  double last_dln = 0.0;
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    ++rows;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    double n, gn, In, dn, dln;
    is >> n >> gn >> In >> dn >> dln;
    CHECK(gn == Catch::Approx(1.0).margin(1e-3));
    last_dln = dln;
  }
  CHECK(rows == 3);
  // V has a0 = 0, M1 = 1: delta_n log n column approaches 2/8 = 0.25.
  CHECK(last_dln == Catch::Approx(0.25).margin(0.01));
}

TEST_CASE("moser: empty n_list exits 2") {
  auto j = small_config();
  j["moser"]["n_list"] = json::array();
  auto p = write_tmp(j, "moser_empty.json");
  CHECK(run("moser --config " + p + " --out /tmp/choq_out_me") == 2);
}

TEST_CASE("tm-probe: summary with growth indicators") {
  auto j = small_config();
  j["problem"]["Q"] = {{"form", "constant"}, {"c", 1.0}};
  j["grid"]["n_nodes"] = 1024;
  j["moser"]["n_list"] = {10, 100, 1000};
  j["moser"]["alpha_list"] = {6.283185307179586, 18.84955592153876};
  auto p = write_tmp(j, "tmprobe.json");
  REQUIRE(run("tm-probe --config " + p + " --out /tmp/choq_out_tp") == 0);
  auto sum = json::parse(slurp("/tmp/choq_out_tp/tm_probe_summary.json"));
  REQUIRE(sum["probes"].size() == 2);
  CHECK(sum["probes"][0]["growth_indicator"].get<double>() < 2.0);
  CHECK(sum["probes"][1]["growth_indicator"].get<double>() > 10.0);
  CHECK(fs::exists("/tmp/choq_out_tp/tm_probe_6.28319.csv"));
}

TEST_CASE("fibering: emits the sampled map and maximizer") {
  auto p = write_tmp(small_config(), "fib.json");
  REQUIRE(run("fibering --config " + p + " --out /tmp/choq_out_fib") == 0);
  auto j = json::parse(slurp("/tmp/choq_out_fib/fibering.json"));
  CHECK(j["t_star"].get<double>() > 0.0);
  CHECK(j["J_at_t_star"].get<double>() > 0.0);
  std::ifstream csv("/tmp/choq_out_fib/fibering.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,J");
}

TEST_CASE("seed override is recorded in outputs") {
  auto p = write_tmp(small_config(), "seed.json");
  REQUIRE(run("solve --config " + p + " --out /tmp/choq_out_sd --seed 7") == 0);
  auto sol = json::parse(slurp("/tmp/choq_out_sd/solution.json"));
  CHECK(sol["seed"].get<int>() == 7);
  auto rc = json::parse(slurp("/tmp/choq_out_sd/resolved_config.json"));
  CHECK(rc["seed"].get<int>() == 7);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("nosuchcommand") == 2);
  CHECK(run("check") == 2);  // missing --config
}
