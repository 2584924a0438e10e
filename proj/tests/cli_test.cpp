#include <cstdio>
#include <cstdlib>
#include <doctest.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code;
  std::string stdout_text;
};

CommandResult run_cli(const std::string& args) {
  const std::string out_file =
      (fs::temp_directory_path() / "trackstand_cli_out.txt").string();
  const std::string cmd = std::string(TRACKSTAND_CLI_PATH) + " " + args +
                          " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream f(out_file);
  std::stringstream buf;
  buf << f.rdbuf();
  int code = -1;
  if (WIFEXITED(status)) {
    code = WEXITSTATUS(status);
  }
  return {code, buf.str()};
}

}  // namespace

TEST_CASE("equilibrium subcommand prints JSON") {
  const CommandResult r = run_cli("equilibrium --delta-ref 0.3 --d-phi 0");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("\"phi_e\"") != std::string::npos);
  CHECK(r.stdout_text.find("0.0111958") != std::string::npos);
  CHECK(r.stdout_text.find("\"feasible\": true") != std::string::npos);
}

TEST_CASE("equilibrium subcommand: zero case") {
  const CommandResult r = run_cli("equilibrium --delta-ref 0 --d-phi 0");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("\"phi_e\": 0.0") != std::string::npos);
}

TEST_CASE("equilibrium subcommand: infeasible disturbance") {
  const CommandResult r = run_cli("equilibrium --delta-ref 0.3 --d-phi 20");
  CHECK(r.exit_code == 1);
  CHECK(r.stdout_text.find("infeasible") != std::string::npos);
  CHECK(r.stdout_text.find("asin") != std::string::npos);
}

TEST_CASE("simulate rejects an unknown scenario") {
  const CommandResult r = run_cli("simulate --scenario does-not-exist");
  CHECK(r.exit_code == 2);
  CHECK(r.stdout_text.find("does-not-exist") != std::string::npos);
}

TEST_CASE("simulate smoke run writes its outputs") {
  const std::string out =
      (fs::temp_directory_path() / "trackstand_cli_sim").string();
  fs::remove_all(out);
  const CommandResult r = run_cli(
      "simulate --scenario constant-disturbance --controller eabc "
      "--duration 3 --plot --out " + out);
  CHECK(r.exit_code == 0);
  const std::string dir = out + "/constant-disturbance_eabc_seed0";
  CHECK(fs::exists(dir + "/runlog.csv"));
  CHECK(fs::exists(dir + "/metrics.json"));
  CHECK(fs::exists(dir + "/config.json"));
  CHECK(fs::exists(dir + "/position.svg"));
  // The emitted config snapshot reproduces the run configuration.
  const CommandResult r2 = run_cli(
      "simulate --config " + dir + "/config.json --controller eabc --out " +
      out + "_replay");
  CHECK(r2.exit_code == 0);
}

TEST_CASE("compare smoke run aggregates and ranks") {
  const std::string out =
      (fs::temp_directory_path() / "trackstand_cli_cmp").string();
  fs::remove_all(out);
  const CommandResult r = run_cli(
      "compare --scenario constant-disturbance --controller eabc "
      "--controller mpc --seeds 2 --duration 4 --out " + out);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out + "/aggregate.json"));
  CHECK(r.stdout_text.find("rank") != std::string::npos);
  CHECK(r.stdout_text.find("eabc") != std::string::npos);
  CHECK(r.stdout_text.find("mpc") != std::string::npos);

  std::ifstream f(out + "/aggregate.json");
  std::stringstream buf;
  buf << f.rdbuf();
  CHECK(buf.str().find("\"ranking\"") != std::string::npos);
}

TEST_CASE("config parse errors carry line positions") {
  const std::string cfg_path =
      (fs::temp_directory_path() / "trackstand_bad.json").string();
  {
    std::ofstream f(cfg_path);
    f << "{\n  \"robot\": {\n    \"a\": oops\n  }\n}\n";
  }
  const CommandResult r =
      run_cli("simulate --scenario constant-disturbance --config " + cfg_path);
  CHECK(r.exit_code == 2);
  CHECK(r.stdout_text.find("line 3") != std::string::npos);
}

TEST_CASE("unknown config keys are named") {
  const std::string cfg_path =
      (fs::temp_directory_path() / "trackstand_unknown_key.json").string();
  {
    std::ofstream f(cfg_path);
    f << "{\"robot\": {\"wheelbase\": 0.4}}\n";
  }
  const CommandResult r =
      run_cli("simulate --scenario constant-disturbance --config " + cfg_path);
  CHECK(r.exit_code == 2);
  CHECK(r.stdout_text.find("wheelbase") != std::string::npos);
}
