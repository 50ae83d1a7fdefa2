// Runs the full acceptance suite and prints one line per criterion.

#include <cstdio>

#include "fluidps/acceptance.hpp"

int main() {
  const auto results = fluidps::run_acceptance();
  const std::string report = fluidps::render_report(results);
  std::fwrite(report.data(), 1, report.size(), stdout);
  return fluidps::all_passed(results) ? 0 : 1;
}
