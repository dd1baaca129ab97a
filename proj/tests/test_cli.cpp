#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "support/builders.hpp"

using json = nlohmann::json;
using testing_support::fixture_path;
using testing_support::write_temp;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Shells out to the real binary; stdout/stderr land in per-call temp files.
RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() / "isp_cli_tests";
  std::filesystem::create_directories(dir);
  const auto out_path = dir / ("out" + std::to_string(counter) + ".txt");
  const auto err_path = dir / ("err" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string(ISP_CLI_PATH) + " " + args + " >" +
                          out_path.string() + " 2>" + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

const std::string& small_catalog() {
  static const std::string path = write_temp("cli_catalog", ".csv",
                                             "id,text,genre,lang\n"
                                             "m1,funny space romp,comedy,en\n"
                                             "m2,sad space story,drama,en\n"
                                             "m3,funny scary farm,comedy|horror,fr\n"
                                             "m4,quiet farm life,drama,de\n"
                                             "m5,scary space station,horror,en\n");
  return path;
}

}  // namespace

TEST_CASE("solve emits a schema-stamped report and per-level log lines") {
  RunResult r = run_cli("solve --catalog " + small_catalog() + " --seed 7");
  REQUIRE(r.exit_code == 0);
  json report = json::parse(r.out);
  CHECK(report["schema_version"] == "1");
  CHECK(report["manifest"]["command"] == "solve");
  CHECK(report["manifest"]["seed"] == 7);
  CHECK(report["manifest"]["inputs"]["catalog"]["fnv1a64"].is_string());
  CHECK(report["result"]["coverage"]["fraction"].get<double>() ==
        doctest::Approx(1.0));
  CHECK(r.err.find("[level1]") != std::string::npos);
  CHECK(r.err.find("[level2]") != std::string::npos);
  CHECK(r.err.find("[level3]") != std::string::npos);
  CHECK(r.err.find("[done] command=solve wall_ms=") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical reports") {
  const std::string base = "solve --catalog " + small_catalog() +
                           " --seed 11 --t 2";
  RunResult a = run_cli(base);
  RunResult b = run_cli(base);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("--out writes the report to a file and keeps stdout quiet") {
  const auto out_file = std::filesystem::temp_directory_path() /
                        "isp_cli_tests" / "report_solve.json";
  std::filesystem::create_directories(out_file.parent_path());
  RunResult r = run_cli("solve --catalog " + small_catalog() + " --seed 7 --out " +
                        out_file.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.empty());
  json report = json::parse(slurp(out_file));
  CHECK(report["result"]["k"].get<int>() >= 1);
}

TEST_CASE("missing input file exits 2 with an error: line") {
  RunResult r = run_cli("solve --catalog /nonexistent/nope.csv");
  CHECK(r.exit_code == 2);
  CHECK(r.err.rfind("error:", 0) == 0);
  CHECK(r.out.empty());
}

TEST_CASE("usage problems exit 1") {
  CHECK(run_cli("solve").exit_code == 1);                      // missing --catalog
  CHECK(run_cli("solve --catalog x --frobnicate").exit_code == 1);
  CHECK(run_cli("explode").exit_code == 1);                    // unknown subcommand
  RunResult r = run_cli("coverage --catalog " + small_catalog());
  CHECK(r.exit_code == 1);  // neither --selection nor --ids
  CHECK(r.err.rfind("error:", 0) == 0);
}

TEST_CASE("coverage accepts inline ids") {
  RunResult r = run_cli("coverage --catalog " + small_catalog() +
                        " --ids m1,m4,m5");
  REQUIRE(r.exit_code == 0);
  json report = json::parse(r.out);
  CHECK(report["result"]["coverage"]["covered"].get<int>() == 5);
  CHECK(report["result"]["coverage"]["total"].get<int>() == 6);
}

TEST_CASE("warmstart reports threshold, matches, and unit coverage") {
  RunResult r = run_cli("warmstart --catalog " + small_catalog() +
                        " --warm-ids m1,m2 --q 0.5");
  REQUIRE(r.exit_code == 0);
  json report = json::parse(r.out);
  CHECK(report["result"]["q"].get<double>() == doctest::Approx(0.5));
  CHECK(report["result"]["w"].get<double>() > 0.0);
  CHECK(report["result"]["warm_count"].get<int>() == 2);
  CHECK(report["result"]["unit_coverage"].get<double>() > 0.0);
}

TEST_CASE("config file merges under explicit flags") {
  const std::string cfg = write_temp("cli_cfg", ".json", R"({"seed": 3, "t": 1})");
  // --t on the command line outranks the config file's t.
  RunResult r = run_cli("solve --catalog " + small_catalog() + " --config " + cfg +
                        " --t 2");
  REQUIRE(r.exit_code == 0);
  json report = json::parse(r.out);
  CHECK(report["manifest"]["seed"] == 3);
  CHECK(report["manifest"]["config"]["t"] == 2);
  CHECK(report["result"]["final"]["size"] == 2);
}

TEST_CASE("simulate with the shipped scenario matches the golden result") {
  const std::string catalog = fixture_path("sim_catalog.csv");
  const std::string embedding = fixture_path("sim_embedding.txt");
  const std::string config = fixture_path("sim.json");
  RunResult r = run_cli("simulate --catalog " + catalog + " --embedding file:" +
                        embedding + " --config " + config);
  REQUIRE(r.exit_code == 0);
  json report = json::parse(r.out);
  REQUIRE(report["result"]["policies"].size() == 2);

  const std::string golden_path = fixture_path("golden_simulate.json");
  REQUIRE_MESSAGE(std::filesystem::exists(golden_path),
                  "golden fixture missing: ", golden_path);
  json golden = json::parse(slurp(golden_path));
  CHECK(report["result"] == golden);
}

TEST_CASE("simulate rejects an infeasible scenario with exit 2") {
  RunResult r = run_cli("simulate --catalog " + small_catalog() +
                        " --K 99 --k 1 --batch 1");
  CHECK(r.exit_code == 2);
  // Progress lines may precede the failure; the error line itself is marked.
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("embedding file input is digested into the manifest") {
  const std::string catalog = fixture_path("sim_catalog.csv");
  const std::string embedding = fixture_path("sim_embedding.txt");
  RunResult r = run_cli("warmstart --catalog " + catalog + " --embedding file:" +
                        embedding + " --warm-ids sim0118,sim0367 --q 0.1");
  REQUIRE(r.exit_code == 0);
  json report = json::parse(r.out);
  CHECK(report["manifest"]["inputs"]["embedding"]["path"].get<std::string>() ==
        embedding);
  CHECK(report["manifest"]["inputs"]["embedding"]["fnv1a64"].is_string());
}
