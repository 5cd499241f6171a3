#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "roadfield/cli.hpp"

using nlohmann::json;
namespace cli = roadfield::cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<const char*> args) {
  args.insert(args.begin(), "roadfield");
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(args.size()), args.data(), out, err);
  return {code, out.str(), err.str()};
}

// Runs the installed binary through the shell; returns exit status and stdout.
std::pair<int, std::string> run_binary(const std::string& env, const std::string& args) {
  const std::string cmd = env + " \"" ROADFIELD_CLI_PATH "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) text += buf.data();
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

}  // namespace

TEST_CASE("speed emits the documented JSON layout") {
  const Outcome r = run_cli({"speed", "--D", "9", "--mu", "1", "--nu", "1", "--kappa", "1"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  for (const char* key : {"command", "params", "results", "tolerances"}) CHECK(j.contains(key));
  CHECK(j["command"] == "speed");
  CHECK(j["params"]["D"].get<double>() == 9.0);
  CHECK(j["results"]["road_speed"].get<double>() == doctest::Approx(3.0662060172578696).epsilon(1e-12));
}

TEST_CASE("wulff at D = 1.5 gives a half-disk of radius 2") {
  const Outcome r = run_cli({"wulff", "--D", "1.5", "--n", "32", "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 33);
  CHECK(rows[0] == "theta_rad,speed,x,y");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    std::istringstream in(rows[k]);
    std::string theta, speed;
    std::getline(in, theta, ',');
    std::getline(in, speed, ',');
    CHECK(std::stod(speed) == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("invalid configurations exit with code 2") {
  Outcome r = run_cli({"speed", "--D", "0.5"});
  CHECK(r.code == cli::kInvalidConfig);
  CHECK(r.err.rfind("error code=invalid_config:", 0) == 0);
  CHECK(run_cli({"nosuchcommand"}).code == cli::kInvalidConfig);
  CHECK(run_cli({"speed", "--format", "xml"}).code == cli::kInvalidConfig);
  CHECK(run_cli({"speed", "--kappa", "0"}).code == cli::kInvalidConfig);
  CHECK(run_cli({"cone", "--angle", "3"}).code == cli::kInvalidConfig);
  CHECK(run_cli({"speed", "--mu", "abc"}).code == cli::kInvalidConfig);
}

TEST_CASE("point queries") {
  Outcome r = run_cli({"hamiltonian", "--D", "9", "--q", "1.2"});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["results"]["p_q"].get<double>() == doctest::Approx(3.1244926092408236).epsilon(1e-10));

  r = run_cli({"value", "--D", "9", "--t", "1", "--x", "3", "--y", "0.5"});
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["results"]["J"].get<double>() == doctest::Approx(0.13810327379659648).epsilon(1e-9));

  r = run_cli({"path", "--D", "9", "--t", "1", "--x", "3", "--y", "0.5", "--n", "11", "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  CHECK(rows.front() == "s,x,y,J");
  CHECK(rows.size() == 12);
}

TEST_CASE("cone tables") {
  Outcome r = run_cli({"cone", "--D", "9", "--angle", "0.5", "--n", "20", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).front() == "theta_rad,speed,x,y,branch");
  r = run_cli({"cone", "--D", "4", "--Dtilde", "16", "--angle", "0.5", "--n", "20", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).front() == "theta_rad,lower,upper");
}

TEST_CASE("emitted JSON round-trips through --config") {
  const Outcome first = run_cli({"value", "--D", "5", "--mu", "2", "--t", "2", "--x", "3", "--y", "1"});
  REQUIRE(first.code == 0);
  const auto path = std::filesystem::temp_directory_path() / "roadfield_cli_roundtrip.json";
  std::ofstream(path) << first.out;
  const std::string p = path.string();
  const Outcome second = run_cli({"value", "--config", p.c_str()});
  std::filesystem::remove(path);
  REQUIRE(second.code == 0);
  CHECK(json::parse(second.out) == json::parse(first.out));
}

TEST_CASE("output file") {
  const auto path = std::filesystem::temp_directory_path() / "roadfield_cli_out.csv";
  const std::string p = path.string();
  const Outcome r = run_cli({"wulff", "--n", "16", "--format", "csv", "--output", p.c_str()});
  REQUIRE(r.code == 0);
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(lines(text.str()).size() == 17);
  std::filesystem::remove(path);
}

TEST_CASE("binary exit codes and thread-count independence") {
  auto [ok, speed] = run_binary("", "speed --D 9");
  CHECK(ok == 0);
  CHECK(json::parse(speed)["results"]["road_speed"].get<double>() ==
        doctest::Approx(3.0662060172578696));
  CHECK(run_binary("", "speed --D 0.5").first == 2);

  const std::string wulff = "wulff --D 9 --n 48 --format csv";
  CHECK(run_binary("RF_THREADS=1", wulff).second == run_binary("RF_THREADS=4", wulff).second);
  const std::string sim = "simulate --D 9 --h 0.4 --Lx 50 --Ly 30 --tmax 12 --format csv";
  const auto one = run_binary("RF_THREADS=1", sim);
  const auto four = run_binary("RF_THREADS=4", sim);
  CHECK(one.first == 0);
  CHECK(one.second == four.second);
  REQUIRE_FALSE(lines(one.second).empty());
  CHECK(lines(one.second).front() == "t,theta,radius");
}

TEST_CASE("verify --quick passes every property check") {
  const Outcome r = run_cli({"verify", "--quick"});
  const json j = json::parse(r.out);
  int checked = 0;
  for (const auto& c : j["results"]["checks"]) {
    const std::string group = c["group"];
    CHECK_MESSAGE(group != "simulator", c["name"]);
    if (group == "acceptance") continue;
    ++checked;
    CHECK_MESSAGE(c["passed"].get<bool>(), c["name"]);
  }
  CHECK(checked > 30);
}

TEST_CASE("an injected Hamiltonian fault is reported by the duality checks") {
  const Outcome r = run_cli({"verify", "--quick", "--inject-fault"});
  CHECK(r.code == cli::kConsistencyFailure);
  const json j = json::parse(r.out);
  bool fenchel_failed = false;
  for (const auto& name : j["results"]["failed"]) fenchel_failed |= name == "legendre.fenchel_identity";
  CHECK(fenchel_failed);
}
