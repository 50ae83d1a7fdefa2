#pragma once

// Self-test suite: thirteen numbered criteria covering the renewal solver,
// the fluid trajectories, the metrics and the queue simulator.  Every detail
// string is built from fmt12 numbers only, so a rerun with identical inputs
// renders a byte-identical report.

#include <string>
#include <vector>

namespace fluidps {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CriterionResult> run_acceptance();
std::string render_report(const std::vector<CriterionResult>& results);
bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace fluidps
