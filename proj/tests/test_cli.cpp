#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "helpers.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run_cli(const std::string& args) {
  testing::TempDir dir("cli");
  const auto out = dir.path() / "stdout", err = dir.path() / "stderr";
  const std::string cmd = std::string("\"") + ENTROCF_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace

TEST_CASE("cli: verify succeeds") {
  const auto r = run_cli("verify --trials 50");
  CHECK(r.code == 0);
}

TEST_CASE("cli: bad config is reported as JSON") {
  testing::TempDir dir("cli");
  std::ofstream(dir.path() / "c.json") << R"({"tau_grid": [0.0, 0.5]})";
  const auto r = run_cli("--config \"" + (dir.path() / "c.json").string() + "\" sweep");
  CHECK(r.code != 0);
  CHECK(r.err.find("\"config_error\"") != std::string::npos);

  const auto missing = run_cli("--config /nonexistent/c.json sweep");
  CHECK(missing.code != 0);
  CHECK(missing.err.find("config_error") != std::string::npos);
}

TEST_CASE("cli: usage errors") {
  CHECK(run_cli("--no-such-flag verify").code == 2);
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("generate --theta 0.1").code == 2);
}

TEST_CASE("cli: generate on the synthetic scenario") {
  const auto r = run_cli("--dataset synthetic --paper-config synthetic generate --theta 0.1 --tau 0.4");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"Valid\"") != std::string::npos);
}
