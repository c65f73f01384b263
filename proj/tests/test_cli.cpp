#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mpsrg/cli.hpp"
#include "mpsrg/error.hpp"
#include "mpsrg/io.hpp"

using namespace mpsrg;
using io::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(MPSRG_FIXTURES_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "mpsrg_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string body(const std::string& csv) { return csv.substr(csv.find('\n') + 1); }

}  // namespace

TEST_CASE("integer lists") {
  CHECK(cli::parse_int_list("2:5") == std::vector<int>{2, 3, 4, 5});
  CHECK(cli::parse_int_list("8:32:8") == std::vector<int>{8, 16, 24, 32});
  CHECK(cli::parse_int_list("2,3,7") == std::vector<int>{2, 3, 7});
  CHECK_THROWS_AS(cli::parse_int_list("5:2"), Error);
  CHECK_THROWS_AS(cli::parse_int_list("2:x"), Error);
  CHECK_THROWS_AS(cli::parse_int_list(""), Error);
}

TEST_CASE("analyze reports") {
  Run r = invoke({"analyze", fixture("aklt.json")});
  REQUIRE(r.code == cli::kExitOk);
  json j = json::parse(r.out);
  CHECK(j["spectral"]["xi"].get<double>() == doctest::Approx(1.0 / std::log(3.0)).epsilon(1e-9));
  CHECK(j["spectral"]["is_normal"].get<bool>());

  r = invoke({"analyze", fixture("g_0124353.json")});
  REQUIRE(r.code == 0);
  CHECK(std::abs(json::parse(r.out)["spectral"]["xi"].get<double>() - 4.0) < 1e-3);

  r = invoke({"analyze", fixture("ghz_branches.json")});
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK_FALSE(j["spectral"]["is_normal"].get<bool>());
  CHECK(j["spectral"]["degeneracy_b"].get<int>() == 2);
  CHECK(j["branches"].size() == 2);
}

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == cli::kExitValidation);
  CHECK(invoke({"frobnicate"}).code == cli::kExitValidation);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
  CHECK(invoke({"compile", fixture("aklt.json")}).code == cli::kExitValidation);  // --N missing
  CHECK(invoke({"compile", fixture("aklt.json"), "--N", "8", "--scheme", "zigzag"}).code == cli::kExitValidation);

  Run r = invoke({"compile", fixture("aklt.json"), "--N", "8", "--q", "1"});
  CHECK(r.code == cli::kExitValidation);
  CHECK(r.err.find("InjectivityImpossible") != std::string::npos);

  r = invoke({"compile", fixture("aklt.json"), "--N", "10", "--q", "4", "--remainder", "strict"});
  CHECK(r.code == cli::kExitValidation);
  CHECK(r.err.find("NotDivisible") != std::string::npos);

  fs::path bad = scratch("bad.json");
  io::write_text_file(bad.string(), "{\"d\": 2,\n  \"D_l\": }");
  r = invoke({"analyze", bad.string()});
  CHECK(r.code == cli::kExitValidation);
  CHECK(r.err.find("bad.json:2:") != std::string::npos);

  fs::path zero = scratch("zero.json");
  io::write_text_file(zero.string(), R"({"d": 2, "D_l": 2, "D_r": 2, "re": [0, 0, 0, 0, 0, 0, 0, 0]})");
  CHECK(invoke({"analyze", zero.string()}).code == cli::kExitNumerical);
}

TEST_CASE("compile tree-rg q = 8, N = 64") {
  fs::path circ = scratch("tree.json");
  Run r = invoke({"compile", fixture("g_xi4.json"), "--scheme", "tree-rg", "--q", "8", "--N", "64", "--out", circ.string()});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["isometry_layers"].get<int>() == 3);
  CHECK(j["max_isometry_defect"].get<double>() < 1e-10);
  CHECK(j["depth_report"]["scheme"] == "tree-rg");
  CHECK(fs::exists(circ));
}

TEST_CASE("compile then simulate against the target") {
  fs::path circ = scratch("seq.json");
  REQUIRE(invoke({"compile", fixture("g_xi4.json"), "--q", "4", "--N", "12", "--out", circ.string()}).code == 0);
  Run r = invoke({"simulate", circ.string(), "--target", fixture("g_xi4.json")});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["norm"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  const double eps = j["epsilon"].get<double>();
  CHECK(eps > 0.0);
  CHECK(eps < 0.5);

  REQUIRE(invoke({"compile", fixture("ghz_branches.json"), "--scheme", "tree-rg-measured", "--q", "4", "--N", "8", "--out",
               circ.string()})
              .code == 0);
  r = invoke({"simulate", circ.string(), "--target", fixture("ghz_branches.json")});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["epsilon"].get<double>() < 1e-10);
}

TEST_CASE("reruns are byte identical") {
  const std::vector<std::string> scan = {"error-scan", fixture("aklt.json"), "--q", "2:10", "--M", "200"};
  Run a = invoke(scan), b = invoke(scan);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("# config ", 0) == 0);
  CHECK(io::RunConfig::from_report(a.out).command == "error-scan");

  fs::path f1 = scratch("ens1.csv"), f2 = scratch("ens2.csv");
  REQUIRE(invoke({"--jobs", "1", "ensemble", "--count", "3", "--N", "48", "--q", "3:5", "--out", f1.string()}).code == 0);
  REQUIRE(invoke({"--jobs", "2", "ensemble", "--count", "3", "--N", "48", "--q", "3:5", "--out", f2.string()}).code == 0);
  CHECK(body(io::read_text_file(f1.string())) == body(io::read_text_file(f2.string())));

  const std::vector<std::string> fit = {"variational-fit", fixture("aklt_obc.json"), "--q", "4"};
  Run v1 = invoke(fit), v2 = invoke(fit);
  REQUIRE(v1.code == 0);
  CHECK(v1.out == v2.out);
}

TEST_CASE("depth-scan CSV") {
  Run r = invoke({"depth-scan", "--N", "1000,1000000"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 2 + 8);
  CHECK(lines[1] == "scheme,N,q,layer_depth,cnot_depth");
  CHECK(lines[2].rfind("sequential,1000,", 0) == 0);
  CHECK(lines[9].rfind("tree-rg-measured,1000000,24,", 0) == 0);
}
