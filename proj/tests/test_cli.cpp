#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef CQBANDIT_EXE
#error "CQBANDIT_EXE must name the cqbandit binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CQBANDIT_EXE + "\" " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) o.out += buf;
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

}  // namespace

TEST_CASE("baseline on the mab preset") {
  const Outcome o = cli("baseline mab");
  CHECK(o.status == 0);
  CHECK(o.out == "objective 0.7\ncontext,x_0,x_1,x_2,x_3\n0,0,0,0,1\nmargin 0.3\ndelta_star 0.5\n");
}

TEST_CASE("over-tightened baseline is infeasible") {
  const Outcome o = cli("baseline mab --eps 0.6");
  CHECK(o.status == 2);
  CHECK(o.out == "infeasible\n");
}

TEST_CASE("exit codes") {
  CHECK(cli("baseline /nonexistent/instance.txt").status == 1);
  CHECK(cli("verify sometimes").status == 64);
  CHECK(cli("frobnicate").status == 64);
  CHECK(cli("").status == 64);
  CHECK(cli("run --set colour=blue").status == 2);
  CHECK(cli("run --set T=0").status == 2);
}

TEST_CASE("instance validate") {
  const fs::path dir = fs::temp_directory_path() / "cqbandit_test_cli";
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "good.txt");
    f << "[meta]\nname = pair\nK = 1\nJ = 2\nd = 2\nT = 10\ndelta = auto\n"
         "[contexts]\np = 1\n[onehot]\n"
         "[reward]\ntheta = 0.9 0.1\nm = 1\nnoise = bernoulli\nsigma = 1\n"
         "[cost.1]\nkind = deterministic\nmean.0 = 0.5 -0.5\n";
  }
  {
    std::ofstream f(dir / "bad.txt");
    f << "[meta]\nname = pair\n";
  }
  const Outcome good = cli("instance validate " + (dir / "good.txt").string());
  CHECK(good.status == 0);
  CHECK(good.out.rfind("ok pair", 0) == 0);
  CHECK(cli("instance validate " + (dir / "bad.txt").string()).status == 2);
  fs::remove_all(dir);
}

TEST_CASE("run writes the summary") {
  const fs::path dir = fs::temp_directory_path() / "cqbandit_test_cli_run";
  fs::remove_all(dir);
  const Outcome o = cli("run --set T=200 --set replications=3 -w 2 -o " + dir.string());
  CHECK(o.status == 0);
  CHECK(o.out.find("\"n_runs\": 3") != std::string::npos);
  CHECK(fs::exists(dir / "aggregate.csv"));
  CHECK(fs::exists(dir / "runs" / "run_0002.csv"));
  fs::remove_all(dir);
}
