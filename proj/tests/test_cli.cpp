#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string cli_binary() {
  const char* bin = std::getenv("MSDE_CLI_BIN");
  REQUIRE_MESSAGE(bin != nullptr,
                  "MSDE_CLI_BIN must point at the command-line binary");
  return bin;
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

/// Runs the binary through the shell, captures interleaved stdout/stderr,
/// and decodes the exit status. `prefix` lets a test prepend environment
/// assignments.
CliResult run_cli(const std::string& args, const std::string& prefix = "") {
  static int counter = 0;
  const fs::path capture =
      fs::temp_directory_path() /
      ("msde_cli_out_" + std::to_string(::getpid()) + "_" +
       std::to_string(counter++) + ".txt");
  std::string cmd = prefix;
  if (!cmd.empty()) cmd += " ";
  cmd += cli_binary() + " " + args + " >" + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::ostringstream buf;
  buf << in.rdbuf();
  res.output = buf.str();
  fs::remove(capture);
  return res;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() /
                       ("msde_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path file = dir / "config.json";
  std::ofstream out(file);
  out << text;
  return file;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string first_line(const fs::path& file) {
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("list names every bundled preset") {
    const auto res = run_cli("list");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("ou_smoke") != std::string::npos);
    CHECK(res.output.find("cubic_full") != std::string::npos);
    CHECK(res.output.find("cutoff_cert") != std::string::npos);
  }

  TEST_CASE("describe prints a model summary and suggests near misses") {
    const auto ok = run_cli("describe ou");
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("ou") != std::string::npos);

    const auto bad = run_cli("describe uo");
    CHECK(bad.exit_code == 2);
    CHECK(bad.output.find("did you mean") != std::string::npos);
  }

  TEST_CASE("malformed configs are rejected with the offending key") {
    const auto dir = fresh_dir("badcfg");

    const auto typo = write_config(
        dir, R"({"schema_version": 1, "model": {"name": "ou"}, "gird": {}})");
    const auto r1 = run_cli("run " + typo.string());
    CHECK(r1.exit_code == 2);
    CHECK(r1.output.find("gird") != std::string::npos);

    const auto zero_steps = write_config(
        dir,
        R"({"schema_version": 1, "model": {"name": "ou"},
            "grid": {"horizon": 1.0, "steps": 0}})");
    const auto r2 = run_cli("run " + zero_steps.string());
    CHECK(r2.exit_code == 2);
    CHECK(r2.output.find("grid.steps") != std::string::npos);

    const auto bad_k = write_config(
        dir,
        R"({"schema_version": 1,
            "model": {"name": "ou", "params": {"K": -1.0}}})");
    const auto r3 = run_cli("run " + bad_k.string());
    CHECK(r3.exit_code == 2);
    CHECK(r3.output.find("K must be > 0") != std::string::npos);

    const auto r4 = run_cli("run nonexistent_preset");
    CHECK(r4.exit_code == 2);
    CHECK(r4.output.find("presets") != std::string::npos);

    fs::remove_all(dir);
  }

  TEST_CASE("smoke preset produces the full artifact set") {
    const auto dir = fresh_dir("smoke");
    const auto res = run_cli("run ou_smoke --out " + dir.string());
    CHECK(res.exit_code == 0);

    for (const char* name :
         {"manifest.json", "hypothesis.csv", "paths.csv", "noise.csv",
          "first_field.csv", "second_field.csv", "oracles.csv",
          "moments_abs.csv", "moments_centered.csv", "hnorm_moments.csv",
          "convergence.csv"}) {
      INFO("expected artifact ", name);
      CHECK(fs::exists(dir / name));
    }

    CHECK(first_line(dir / "moments_abs.csv") ==
          "level,t,p,estimate,stderr,bound");
    const std::string manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find("\"exit_code\": 0") != std::string::npos);
    CHECK(manifest.find("\"model\": \"ou\"") != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("certification artifacts depend only on the seed") {
    const auto d7a = fresh_dir("cert7a");
    const auto d7b = fresh_dir("cert7b");
    const auto d8 = fresh_dir("cert8");
    CHECK(run_cli("run cutoff_cert --seed 7 --out " + d7a.string()).exit_code ==
          0);
    CHECK(run_cli("run cutoff_cert --seed 7 --out " + d7b.string()).exit_code ==
          0);
    CHECK(run_cli("run cutoff_cert --seed 8 --out " + d8.string()).exit_code ==
          0);
    const std::string a = slurp(d7a / "cutoff_cert.csv");
    CHECK(a == slurp(d7b / "cutoff_cert.csv"));
    CHECK(a != slurp(d8 / "cutoff_cert.csv"));
    fs::remove_all(d7a);
    fs::remove_all(d7b);
    fs::remove_all(d8);
  }

  TEST_CASE("output directory falls back to the environment") {
    const auto dir = fresh_dir("envout");
    const auto res =
        run_cli("run cutoff_cert", "MSDE_OUT=" + dir.string());
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "cutoff_cert.csv"));
    CHECK(fs::exists(dir / "phi_profile.csv"));
    fs::remove_all(dir);
  }
}
