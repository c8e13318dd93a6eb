#pragma once

#include <string>
#include <vector>

#include "flowlab/config.hpp"

namespace flowlab {

// worst observed value for one named check inside a suite
struct CheckResult {
  std::string label;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct SuiteResult {
  std::string suite;
  std::string csv_path;
  bool passed = true;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;  // aborts and other anomalies
  double wall_seconds = 0.0;       // console only, never written to CSV
};

struct RunSummary {
  bool passed = true;
  std::vector<SuiteResult> suites;
  std::string summary_path;
  double wall_seconds = 0.0;
};

// Executes the configured suites in declared order, writing one CSV per
// suite plus summary.csv into the output directory.  Trajectory escapes and
// other suite-level exceptions are recorded as failures; the remaining
// suites still run.  Throws only for I/O problems (message names the path).
RunSummary run(const ScenarioConfig& config);

// built-in scenario gallery with per-field oracle facts
std::string list_scenarios();

std::string format_run_summary(const RunSummary& summary);

}  // namespace flowlab
