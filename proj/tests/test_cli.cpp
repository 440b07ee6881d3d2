#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

// End-to-end runs of the installed binary against the corpus networks.

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int exit_code = -1;
  json report;
};

std::string data_path(const std::string& name) {
  return std::string(GASFLOW_DATA_DIR) + "/networks/" + name;
}

CliRun run_cli(const std::string& args, bool parse_report = true) {
  static int counter = 0;
  const fs::path out =
      fs::temp_directory_path() /
      ("gasflow_cli_test_" + std::to_string(counter++) + ".json");
  const std::string cmd = std::string(GASFLOW_CLI_PATH) + " " + args + " --out " +
                          out.string() + " 2> /dev/null";
  const int raw = std::system(cmd.c_str());
  CliRun run;
  run.exit_code = WEXITSTATUS(raw);
  if (parse_report && fs::exists(out)) {
    std::ifstream in(out);
    in >> run.report;
    fs::remove(out);
  }
  return run;
}

void strip_timing(json& j) {
  if (j.is_object()) {
    j.erase("wallMs");
    for (auto& [key, value] : j.items()) strip_timing(value);
  } else if (j.is_array()) {
    for (auto& value : j) strip_timing(value);
  }
}

}  // namespace

TEST_CASE("solve on the triangle reports the analytic solution") {
  const auto run = run_cli("solve --network " + data_path("triangle.json") +
                           " --beta 0.5");
  CHECK(run.exit_code == 0);
  CHECK(run.report.at("status") == "Solution");
  const auto phi = run.report.at("state").at("phi");
  CHECK(phi[0].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(phi[1].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(phi[2].get<double>() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(run.report.at("config").at("beta").get<double>() == 0.5);
}

TEST_CASE("gamma on a no-compression network is cap limited") {
  const auto run = run_cli("gamma --network " + data_path("triangle.json"));
  CHECK(run.exit_code == 0);
  CHECK(run.report.at("kind") == "tree_exact");
  CHECK(run.report.at("capLimited").get<bool>());
  CHECK(run.report.at("gamma").is_null());
}

TEST_CASE("gamma on the kite returns a finite certificate with witness") {
  const auto run = run_cli("gamma --network " + data_path("kite.json"));
  CHECK(run.exit_code == 0);
  CHECK(run.report.at("kind") == "gamma_bounded");
  CHECK(run.report.at("gamma").get<double>() > 10.0);
  CHECK(run.report.contains("witness"));
  CHECK(run.report.at("witness").at("margin").get<double>() > 0.0);
  CHECK(!run.report.at("bisectionTrace").empty());
}

TEST_CASE("infeasible instance exits with the no-solution code") {
  const auto run =
      run_cli("solve --network " + data_path("infeasible.json") + " --beta 0.5");
  CHECK(run.exit_code == 2);
  CHECK(run.report.at("status") == "NoSolutionInDomain");
}

TEST_CASE("starved iteration budget exits inconclusive") {
  const auto run = run_cli("solve --network " + data_path("triangle.json") +
                           " --beta 0.5 --max-iters 2 --epsilon 1e-12");
  CHECK(run.exit_code == 3);
  CHECK(run.report.at("status") == "Inconclusive");
}

TEST_CASE("input errors exit with code 1") {
  CHECK(run_cli("solve --network /nonexistent.json", false).exit_code == 1);

  const fs::path bad = fs::temp_directory_path() / "gasflow_bad_net.json";
  std::ofstream(bad) << "{\"nodes\": []}";
  CHECK(run_cli("solve --network " + bad.string(), false).exit_code == 1);
  fs::remove(bad);
}

TEST_CASE("oracle subcommand lists solutions") {
  const auto run = run_cli("oracle --network " + data_path("triangle.json") +
                           " --starts 80 --seed 3");
  CHECK(run.exit_code == 0);
  CHECK(run.report.at("method") == "oracle");
  CHECK(run.report.at("count").get<int>() == 1);
  const auto phi = run.report.at("solutions")[0].at("phi");
  CHECK(phi[2].get<double>() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("check subcommand evaluates a state file") {
  const fs::path state = fs::temp_directory_path() / "gasflow_state.json";
  std::ofstream(state) << R"({"pi": [9.0, 8.0],
                              "phi": [1.0, 1.0, 1.4142135623730951],
                              "psi": [1.0, 1.0, 1.4142135623730951]})";
  const auto run = run_cli("check --network " + data_path("triangle.json") +
                           " --state " + state.string() +
                           " --beta 0.5 --samples 50 --seed 9");
  fs::remove(state);
  CHECK(run.exit_code == 0);
  CHECK(run.report.at("inside").get<bool>());
  CHECK(run.report.at("witnessAtState").at("isPsd").get<bool>());
  CHECK(run.report.at("sampledMinEig").get<double>() >= -1e-8);
}

TEST_CASE("sweep emits a plot-ready non-increasing table") {
  const auto run = run_cli("sweep --network " + data_path("kite.json") +
                           " --alpha-grid 1:2:7");
  CHECK(run.exit_code == 0);
  const auto& table = run.report.at("table");
  REQUIRE(table.size() == 4);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& row : table) {
    REQUIRE(row.size() == 2);
    const double gamma = row[1].get<double>();
    CHECK(gamma <= prev * 1.011);
    prev = gamma;
  }
}

TEST_CASE("reports are deterministic given network, config and seed") {
  const std::string args = "solve --network " + data_path("kite.json") +
                           " --beta 0.4 --seed 11";
  auto a = run_cli(args);
  auto b = run_cli(args);
  REQUIRE(a.exit_code == b.exit_code);
  strip_timing(a.report);
  strip_timing(b.report);
  CHECK(a.report == b.report);
}
