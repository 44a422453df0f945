// End-to-end tests of the `ot` binary. The binary path arrives as
// `--cli <path>`; everything runs in a scratch directory under TMPDIR.

#define DOCTEST_CONFIG_IMPLEMENT
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "otlab/io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string g_cli;
fs::path g_dir;

struct RunResult {
  int exit_code = -1;
  std::string stderr_text;
};

RunResult run_ot(const std::string& args) {
  const fs::path err = g_dir / "stderr.txt";
  const std::string cmd =
      "cd '" + g_dir.string() + "' && '" + g_cli + "' " + args + " 2> '" +
      err.string() + "' > /dev/null";
  const int raw = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  res.stderr_text = otlab::read_text_file(err);
  return res;
}

std::string slurp(const std::string& name) {
  return otlab::read_text_file(g_dir / name);
}

void write(const std::string& name, const std::string& content) {
  otlab::write_text_file(g_dir / name, content);
}

// Error payloads are one JSON object per stderr line; run_meta is last.
ordered_json first_stderr_json(const RunResult& res) {
  const auto pos = res.stderr_text.find('\n');
  return ordered_json::parse(res.stderr_text.substr(0, pos));
}

}  // namespace

TEST_CASE("solve writes a report") {
  write("mu.json", "{\"points\": [[0],[1]], \"weights\": [0.5,0.5]}");
  write("nu.json", "{\"points\": [[1],[2]], \"weights\": [0.5,0.5]}");
  const RunResult res =
      run_ot("solve --mu mu.json --nu nu.json --cost euclidean --pow 2");
  REQUIRE(res.exit_code == 0);
  const auto j = ordered_json::parse(slurp("report.json"));
  CHECK(j["primal_value"].get<double>() == doctest::Approx(1.0));
  CHECK(j["plan"]["entries"].size() == 2);
  CHECK(res.stderr_text.find("run_meta") != std::string::npos);
}

TEST_CASE("missing input file exits 2 with an io error") {
  const RunResult res = run_ot("solve --mu missing.json --nu missing.json");
  CHECK(res.exit_code == 2);
  CHECK(first_stderr_json(res)["error"]["kind"] == "io");
}

TEST_CASE("sub-unit exponent exits 2 with a validation error") {
  const RunResult res =
      run_ot("solve --mu mu.json --nu nu.json --pow 0.5");
  CHECK(res.exit_code == 2);
  CHECK(first_stderr_json(res)["error"]["kind"] == "validation");
}

TEST_CASE("select on the book-shift fixture") {
  const RunResult res = run_ot(
      "select --mu mu.json --nu nu.json --norm euclidean -o selection.json");
  REQUIRE(res.exit_code == 0);
  const auto j = ordered_json::parse(slurp("selection.json"));
  CHECK(j["stabilized"].get<bool>());
  CHECK(j["secondary_value"].get<double>() == doctest::Approx(0.0));
  CHECK(j["is_graph"].get<bool>());

  SUBCASE("short eps schedules are rejected") {
    const RunResult bad = run_ot(
        "select --mu mu.json --nu nu.json --eps 0.5,0.25");
    CHECK(bad.exit_code == 2);
    CHECK(first_stderr_json(bad)["error"]["kind"] == "validation");
  }
  SUBCASE("linf routes to the crystalline selector") {
    write("ca.json", "{\"points\": [[0,0],[1,0]], \"weights\": [0.5,0.5]}");
    write("cb.json", "{\"points\": [[0,2],[1,2]], \"weights\": [0.5,0.5]}");
    const RunResult crys = run_ot(
        "select --mu ca.json --nu cb.json --norm linf -o crys.json");
    REQUIRE(crys.exit_code == 0);
    const auto cj = ordered_json::parse(slurp("crys.json"));
    CHECK(cj.contains("split_mass"));
    CHECK(cj["primary_value"].get<double>() == doctest::Approx(2.0));
  }
}

TEST_CASE("rearrange1d and certify round trip") {
  const RunResult r1 =
      run_ot("rearrange1d --mu mu.json --nu nu.json -o plan.json");
  REQUIRE(r1.exit_code == 0);
  const RunResult r2 = run_ot(
      "certify --mu mu.json --nu nu.json --plan plan.json --cost euclidean "
      "--pow 2 --max-cycle 3 -o certify.json");
  REQUIRE(r2.exit_code == 0);
  const auto j = ordered_json::parse(slurp("certify.json"));
  CHECK(j["ok"].get<bool>());
  CHECK(j["is_graph"].get<bool>());
  CHECK(j["quadratic_monotone"].get<bool>());
}

TEST_CASE("density of a diagonal plan is all zeros") {
  write("m2.json", "{\"points\": [[0.25,0.25],[0.75,0.75]], \"weights\": [0.5,0.5]}");
  write("diag.json", "{\"entries\": [[0,0,0.5],[1,1,0.5]]}");
  const RunResult res = run_ot(
      "density --mu m2.json --nu m2.json --plan diag.json "
      "--origin 0 0 --cell 0.25 --nx 4 --ny 4 -o sigma");
  REQUIRE(res.exit_code == 0);
  const otlab::GridField f = otlab::grid_from_csv(slurp("sigma.csv"));
  for (double v : f.values()) CHECK(v == 0.0);

  SUBCASE("a non-covering grid reports outside mass") {
    write("shift.json", "{\"points\": [[2.0,0.25],[2.5,0.75]], \"weights\": [0.5,0.5]}");
    write("far.json", "{\"entries\": [[0,0,0.5],[1,1,0.5]]}");
    const RunResult out = run_ot(
        "density --mu m2.json --nu shift.json --plan far.json "
        "--origin 0 0 --cell 0.25 --nx 4 --ny 4 -o partial");
    REQUIRE(out.exit_code == 0);
    CHECK(out.stderr_text.find("warning") != std::string::npos);
    const auto env = ordered_json::parse(slurp("partial.json"));
    CHECK(env["outside"].get<double>() > 0.0);
  }
}

TEST_CASE("pde runs a small schedule and writes fields") {
  write("mu2d.json",
        "{\"points\": [[-0.4,0.0],[-0.35,0.05],[-0.35,-0.05]], "
        "\"weights\": [0.4,0.3,0.3]}");
  write("nu2d.json",
        "{\"points\": [[0.4,0.0],[0.35,0.05],[0.35,-0.05]], "
        "\"weights\": [0.4,0.3,0.3]}");
  const RunResult res = run_ot(
      "pde --mu mu2d.json --nu nu2d.json --p 4,8 --cells 24 -o pde_");
  REQUIRE(res.exit_code == 0);
  const auto j = ordered_json::parse(slurp("pde_report.json"));
  CHECK(j["p_final"].get<double>() == 8.0);
  CHECK(j["grad_sup"].get<double>() <= 1.05 + 1e-9);
  const otlab::GridField a = otlab::grid_from_csv(slurp("pde_a.csv"));
  for (double v : a.values()) CHECK(v >= 0.0);
}

TEST_CASE("oracle subcommand") {
  const RunResult res = run_ot(
      "oracle --mu mu.json --nu nu.json --cost euclidean -o oracle.json");
  REQUIRE(res.exit_code == 0);
  const auto j = ordered_json::parse(slurp("oracle.json"));
  CHECK(j["value"].get<double>() == doctest::Approx(1.0));

  const RunResult sec = run_ot(
      "oracle --mu mu.json --nu nu.json --kind secondary --norm euclidean "
      "-o oracle2.json");
  REQUIRE(sec.exit_code == 0);
  const auto j2 = ordered_json::parse(slurp("oracle2.json"));
  CHECK(j2["secondary_value"].get<double>() == doctest::Approx(0.0));
}

TEST_CASE("repeated runs are byte identical") {
  REQUIRE(run_ot("solve --mu mu.json --nu nu.json --pow 2 -o d1.json")
              .exit_code == 0);
  REQUIRE(run_ot("solve --mu mu.json --nu nu.json --pow 2 -o d2.json")
              .exit_code == 0);
  CHECK(slurp("d1.json") == slurp("d2.json"));

  REQUIRE(run_ot("select --mu mu.json --nu nu.json -o s1.json").exit_code == 0);
  REQUIRE(run_ot("select --mu mu.json --nu nu.json -o s2.json").exit_code == 0);
  CHECK(slurp("s1.json") == slurp("s2.json"));
}

int main(int argc, char** argv) {
  for (int a = 1; a + 1 < argc; ++a) {
    if (std::string(argv[a]) == "--cli") g_cli = argv[a + 1];
  }
  if (g_cli.empty()) {
    std::fprintf(stderr, "usage: cli_tests --cli <path-to-ot>\n");
    return 1;
  }
  g_dir = fs::temp_directory_path() /
          ("otlab_cli_" + std::to_string(::getpid()));
  fs::create_directories(g_dir);
  doctest::Context context;
  context.applyCommandLine(argc, argv);
  const int rc = context.run();
  fs::remove_all(g_dir);
  return rc;
}
