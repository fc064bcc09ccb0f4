#include <cstdio>
#include <iostream>

#include "pmsim/runner.hpp"

// Drives every bundled acceptance scenario on one thread and prints one
// verdict line per criterion; exits nonzero when any criterion fails.
int main() {
  std::cout << "acceptance suite: 7 criteria, single-threaded reference run\n";
  const pmsim::AcceptanceReport report = pmsim::run_all_acceptance(1, &std::cout);
  int passed = 0;
  for (const auto& c : report.criteria)
    if (c.pass) ++passed;
  std::printf("%d/%d criteria passed; suite max norm drift %.3g\n", passed,
              static_cast<int>(report.criteria.size()), report.max_norm_drift);
  return report.all_pass ? 0 : 1;
}
