#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "satcache/report.hpp"
#include "satcache/synth.hpp"
#include "testutil.hpp"

using namespace satcache;
namespace fs = std::filesystem;

namespace {

#ifndef SATCACHE_CLI
#define SATCACHE_CLI "satcache"
#endif
#ifndef SATCACHE_DATA
#define SATCACHE_DATA "data"
#endif

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) lines += c == '\n';
  return lines;
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
  std::string cmd = std::string(SATCACHE_CLI) + " " + args + " > " +
                    stdout_file.string() + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path data_file(const char* name) {
  return fs::path(SATCACHE_DATA) / name;
}

}  // namespace

TEST_CASE("chr sweep over three schemes yields 27 report rows") {
  fs::path out = fs::temp_directory_path() / "satcache_cli_chr";
  fs::remove_all(out);
  int rc = run_cli("--scenario " + data_file("toy_scenario.json").string() +
                       " --demand " + data_file("toy_demand.csv").string() +
                       " --sweep chr=0.1..0.9 --schemes joint,ref1,ref2 "
                       "--out " + out.string(),
                   out.string() + ".log");
  REQUIRE(rc == 0);
  auto report = slurp(out / "report.csv");
  CHECK(count_lines(report) == 28);  // header + 9 values x 3 schemes
  CHECK(report.rfind("axis_value,scheme,tau_s", 0) == 0);
  CHECK(fs::exists(out / "split.csv"));
  CHECK(fs::exists(out / "summary.json"));
  CHECK(fs::exists(out / "solution_chr_0_1_joint.csv"));
}

TEST_CASE("missing demand file exits 2 with a machine-readable error") {
  fs::path log = fs::temp_directory_path() / "satcache_cli_err.json";
  int rc = run_cli("--scenario " + data_file("toy_scenario.json").string() +
                       " --demand /nonexistent/demand.csv --sweep cache=5",
                   log);
  CHECK(rc == 2);
  auto text = slurp(log);
  CHECK(text.find("\"error\"") != std::string::npos);
  CHECK(text.find("\"code\"") != std::string::npos);
}

TEST_CASE("identical runs produce byte-identical reports") {
  fs::path out_a = fs::temp_directory_path() / "satcache_cli_det_a";
  fs::path out_b = fs::temp_directory_path() / "satcache_cli_det_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  const std::string common =
      "--scenario " + data_file("toy_scenario.json").string() + " --demand " +
      data_file("toy_demand.csv").string() +
      " --sweep cache=3,5 --schemes joint,ref3 --seed 99 --tau 80 --out ";
  REQUIRE(run_cli(common + out_a.string(), out_a.string() + ".log") == 0);
  REQUIRE(run_cli(common + out_b.string(), out_b.string() + ".log") == 0);
  CHECK(slurp(out_a / "report.csv") == slurp(out_b / "report.csv"));
  CHECK(slurp(out_a / "split.csv") == slurp(out_b / "split.csv"));
  CHECK(slurp(out_a / "summary.json") == slurp(out_b / "summary.json"));
}

TEST_CASE("reuse comparison emits two joint series per point") {
  fs::path out = fs::temp_directory_path() / "satcache_cli_reuse";
  fs::remove_all(out);
  int rc = run_cli("--scenario " + data_file("toy_scenario.json").string() +
                       " --demand " + data_file("toy_demand.csv").string() +
                       " --feeding-time 40,80 --schemes joint "
                       "--compare-reuse --out " + out.string(),
                   out.string() + ".log");
  REQUIRE(rc == 0);
  auto report = slurp(out / "report.csv");
  CHECK(count_lines(report) == 5);  // header + 2 points x 2 configurations
  CHECK(report.find("joint-multicarrier") != std::string::npos);
  CHECK(report.find("joint-multispot") != std::string::npos);
}

TEST_CASE("ingestion from the toy ratings reproduces the bundled demand") {
  fs::path out = fs::temp_directory_path() / "satcache_cli_ingest";
  fs::remove_all(out);
  fs::path demand_out = fs::temp_directory_path() / "satcache_rebuilt.csv";
  int rc = run_cli("--scenario " + data_file("toy_scenario.json").string() +
                       " --ratings " + data_file("toy_ratings.csv").string() +
                       " --geo " + data_file("toy_geo.csv").string() +
                       " --min-ratings 5 --top-k 12 --emit-demand " +
                       demand_out.string() +
                       " --sweep cache=5 --schemes ref1 --out " + out.string(),
                   out.string() + ".log");
  REQUIRE(rc == 0);
  CHECK(slurp(demand_out) == slurp(data_file("toy_demand.csv")));
}

TEST_CASE("split report accounting: all-wide and empty placements") {
  auto scenario = testutil::basic_scenario(2);
  auto catalog = testutil::catalog_of({1e9, 2e9});
  DemandMatrix demand(2, 2);
  demand.at(0, 0) = 5;
  demand.at(1, 1) = 3;

  ReportRow wide_row;
  auto sol = JointSolution::zeros(2, 2);
  sol.wide_broadcast = {1.0, 1.0};
  sol.stored(0, 0) = 1.0;
  auto loads = sol.beam_loads_bits(catalog);
  wide_row.wide_bits = loads[0];
  wide_row.spot_bits = loads[1] + loads[2];
  CHECK(wide_row.wide_bits == doctest::Approx(3e9));
  CHECK(wide_row.spot_bits == 0.0);

  auto empty = JointSolution::zeros(2, 2);
  auto empty_loads = empty.beam_loads_bits(catalog);
  CHECK(empty_loads[0] == 0.0);
  CHECK(empty_loads[1] + empty_loads[2] == 0.0);

  std::ostringstream out;
  write_split_csv(out, {wide_row});
  CHECK(out.str().find("axis_value,scheme,wide_bits,spot_bits") !=
        std::string::npos);
}
