// Runs the acceptance criteria and prints one line per criterion.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "pjn/acceptance.hpp"

int main(int argc, char** argv) {
  pjn::acceptance::Config cfg;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  bool all = true;
  for (const auto& r : pjn::acceptance::run_all(cfg, only)) {
    std::printf("[%s] criterion %d %-24s %7.2fs / %4.0fs  %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.seconds, r.budget, r.detail.c_str());
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
