#pragma once
#include <iosfwd>
#include <string>
#include <vector>

#include "pmsim/config.hpp"

namespace pmsim {

// Finished run: a JSON document with the echoed config, per-case records, a
// summary block, and a flat table (the CSV projection). Everything except
// wall_time_seconds is deterministic for a given config and build.
struct ResultEnvelope {
  nlohmann::json data;

  std::string json_text() const;
  std::string csv_text() const;  // header + rows of the table block
  bool diagnostic_failure() const { return data.at("diagnostic_failure").get<bool>(); }
};

// Runs a validated config end to end. `jobs` caps worker threads; results do
// not depend on it. Throws ConfigError / NumericsError on hard failures;
// soft diagnostics (weak protection, failed model checks) set
// diagnostic_failure instead.
ResultEnvelope run_command(const ExperimentConfig& cfg, int jobs = 1);

// Composite scenarios that have no config form: "numerical_hygiene" and
// "all-acceptance". `progress` (optional) receives one line per stage.
ResultEnvelope run_builtin(const std::string& name, int jobs = 1, std::ostream* progress = nullptr);

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string details;
  double seconds = 0.0;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  double max_norm_drift = 0.0;  // worst norm drift seen anywhere in the suite
  bool all_pass = false;
};

// Runs the bundled scenarios and evaluates the release gates; one
// [PASS]/[FAIL] line per criterion goes to `progress` when given.
AcceptanceReport run_all_acceptance(int jobs = 1, std::ostream* progress = nullptr);

}  // namespace pmsim
