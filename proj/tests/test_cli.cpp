#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>
#include <string>

// End-to-end checks of the command line tool. The binary path and the test
// data directory arrive through the environment (set by ctest).

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
  const char* env = std::getenv("MODSHIFT_CLI");
  REQUIRE_MESSAGE(env != nullptr, "MODSHIFT_CLI must point at the binary");
  return env;
}

std::string data_dir() {
  const char* env = std::getenv("MODSHIFT_DATA");
  REQUIRE_MESSAGE(env != nullptr, "MODSHIFT_DATA must point at tests/data");
  return env;
}

int run_cli(const std::string& args) {
  const std::string command = cli_path() + " " + args + " >cli_stdout.txt 2>cli_stderr.txt";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  REQUIRE_MESSAGE(file.good(), ("missing file: " + path.string()));
  std::ostringstream out;
  out << file.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("modshift_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("run produces a deterministic trace and summary") {
  TempDir tmp;
  const std::string config = data_dir() + "/tiny.json";
  const std::string first = (tmp.path / "a.csv").string();
  const std::string second = (tmp.path / "b.csv").string();

  CHECK(run_cli("run --config " + config + " --out " + first + " --summary " +
                (tmp.path / "a.json").string()) == 0);
  CHECK(run_cli("run --config " + config + " --out " + second + " --summary " +
                (tmp.path / "b.json").string()) == 0);
  const std::string trace = slurp(first);
  CHECK(trace == slurp(second));
  CHECK(trace.rfind("round,loss_bob,", 0) == 0);
  // Header plus one row per configured round.
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 16);

  const auto summary = nlohmann::json::parse(slurp(tmp.path / "a.json"));
  CHECK(summary["config"]["scheme"] == "max");
  CHECK(summary["rounds_run"] == 15);
  CHECK(summary["ledger"]["total_scalars"] == 15 * 4);
}

TEST_CASE("run rejects conflicting privacy mechanisms with exit code 2") {
  TempDir tmp;
  const fs::path bad = tmp.path / "bad.json";
  std::ofstream(bad) << R"({"scheme": "max", "baseline.kind": "gaussian",
                            "baseline.beta_sq": 1.0})";
  CHECK(run_cli("run --config " + bad.string()) == 2);
}

TEST_CASE("run rejects malformed json with exit code 2") {
  TempDir tmp;
  const fs::path bad = tmp.path / "bad.json";
  std::ofstream(bad) << "{nope";
  CHECK(run_cli("run --config " + bad.string()) == 2);
  CHECK(run_cli("run --config " + (tmp.path / "missing.json").string()) == 2);
}

TEST_CASE("fim-report emits the expected spectrum") {
  TempDir tmp;
  const std::string out = (tmp.path / "fim.json").string();
  CHECK(run_cli("fim-report --scheme mean --d 3 --h 1 --sigma 1 --out " + out) == 0);
  const auto report = nlohmann::json::parse(slurp(out));
  CHECK(report["singular"] == true);
  CHECK(report["rank_deficiency"] == 1);
  const auto closed = report["closed_form_eigenvalues"];
  REQUIRE(closed.size() == 3);
  CHECK(closed[0].get<double>() == doctest::Approx(0.0));
  CHECK(closed[1].get<double>() == doctest::Approx(2.0));
  CHECK(closed[2].get<double>() == doctest::Approx(2.0));

  CHECK(run_cli("fim-report --scheme none --d 3") == 2);
  CHECK(run_cli("fim-report --scheme custom --gamma -0.5,-0.5,0.5") == 2);
}

TEST_CASE("validate accepts the sample config") {
  CHECK(run_cli("validate --config " + data_dir() + "/tiny.json") == 0);
}

TEST_CASE("sweep writes per-run traces and a grid summary") {
  TempDir tmp;
  const std::string out_dir = (tmp.path / "sweep").string();
  CHECK(run_cli("sweep --config " + data_dir() + "/tiny.json --out-dir " + out_dir +
                " --grid schemes --seeds 1") == 0);
  const auto summary = nlohmann::json::parse(slurp(fs::path(out_dir) / "schemes_summary.json"));
  CHECK(summary["mechanisms"].contains("max"));
  CHECK(summary["mechanisms"].contains("none"));
  CHECK(summary["bob_final_loss_identical_across_mechanisms"] == true);
  CHECK(fs::exists(fs::path(out_dir) / "schemes_max_seed7.csv"));
}
