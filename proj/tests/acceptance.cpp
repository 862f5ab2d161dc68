// Acceptance battery: one [PASS]/[FAIL] line per criterion.
//
// Exit status is 0 when every failing criterion is listed in
// --known-unattainable, so a documented, analysed failure does not mask a
// regression elsewhere. A listed criterion that starts passing is reported
// so the list can be trimmed.
#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <set>
#include <vector>

#include "cqbandit/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cqbandit acceptance criteria"};
  std::string suite_name = "full";
  std::vector<int> known;
  int workers = 0;
  app.add_option("--suite", suite_name, "quick or full");
  app.add_option("--known-unattainable", known, "Criteria whose failure is documented")->delimiter(',');
  app.add_option("-w,--workers", workers, "Worker threads (0: all cores)");
  CLI11_PARSE(app, argc, argv);

  const auto suite = cqb::parse_suite(suite_name);
  if (!suite) {
    std::cerr << "unknown suite '" << suite_name << "'\n";
    return 64;
  }
  cqb::VerifyOptions opt;
  opt.suite = *suite;
  opt.workers = workers;
  const auto results = cqb::run_acceptance(opt, std::cout);

  const std::set<int> expected(known.begin(), known.end());
  int unexpected = 0, passed = 0;
  for (const auto& r : results) {
    passed += r.passed ? 1 : 0;
    if (!r.passed && !expected.count(r.id)) {
      std::cout << "criterion " << r.id << " failed unexpectedly\n";
      ++unexpected;
    }
    if (r.passed && expected.count(r.id)) std::cout << "criterion " << r.id << " is listed as unattainable but passed\n";
  }
  std::cout << passed << "/" << results.size() << " criteria passed";
  if (!expected.empty()) {
    std::cout << " (known unattainable:";
    for (int id : expected) std::cout << ' ' << id;
    std::cout << ')';
  }
  std::cout << '\n';
  return unexpected == 0 ? 0 : 1;
}
